#include "secbench/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <set>
#include <thread>
#include <tuple>

namespace secbench {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string cell_status_name(CellStatus s) {
    switch (s) {
        case CellStatus::Pending: return "pending";
        case CellStatus::Done: return "done";
        case CellStatus::Failed: return "failed";
        case CellStatus::Skipped: return "skipped";
    }
    throw Error("unreachable cell status");
}

CellStatus parse_cell_status(std::string_view text) {
    const std::string t = to_lower(trim(text));
    if (t == "pending") return CellStatus::Pending;
    if (t == "done") return CellStatus::Done;
    if (t == "failed") return CellStatus::Failed;
    if (t == "skipped") return CellStatus::Skipped;
    throw ValidationError("unknown cell status: \"" + std::string(trim(text)) +
                          "\"");
}

// ---------------------------------------------------------------------------
// Cell keys and manifest entries
// ---------------------------------------------------------------------------

namespace {

std::tuple<int, const std::string&, int, int, int> key_tuple(
    const CellKey& key) {
    return {key.task_id, key.model, static_cast<int>(key.language),
            static_cast<int>(key.method), key.sample};
}

}  // namespace

bool CellKey::operator<(const CellKey& other) const {
    return key_tuple(*this) < key_tuple(other);
}

bool CellKey::operator==(const CellKey& other) const {
    return key_tuple(*this) == key_tuple(other);
}

std::string CellKey::to_string() const {
    std::string out = "task " + std::to_string(task_id) + " / " + model + " / " +
                      std::string(language_name(language)) + " / " +
                      std::string(method_label(method));
    if (sample != 1) out += " / sample " + std::to_string(sample);
    return out;
}

std::string ManifestEntry::to_json_line() const {
    ordered_json record;
    record["task_id"] = key.task_id;
    record["model"] = key.model;
    record["language"] = std::string(language_token(key.language));
    record["method"] = std::string(method_label(key.method));
    record["sample"] = key.sample;
    record["status"] = cell_status_name(status);
    record["artifact_path"] = artifact_path;
    record["prompt_hash"] = prompt_hash;
    record["classification_ref"] = classification_ref;
    record["error"] = error;
    record["created_at"] = created_at;
    record["updated_at"] = updated_at;
    return record.dump();
}

ManifestEntry ManifestEntry::from_json_line(const std::string& line,
                                            long line_no) {
    json record = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (record.is_discarded() || !record.is_object())
        throw ParseError("malformed manifest record", line_no);
    ManifestEntry entry;
    try {
        entry.key.task_id = record.at("task_id").get<int>();
        entry.key.model = record.at("model").get<std::string>();
        entry.key.language =
            parse_language(record.at("language").get<std::string>());
        entry.key.method = parse_method(record.at("method").get<std::string>());
        entry.key.sample = record.value("sample", 1);
        entry.status = parse_cell_status(record.at("status").get<std::string>());
        entry.artifact_path = record.value("artifact_path", std::string());
        entry.prompt_hash = record.value("prompt_hash", std::string());
        entry.classification_ref =
            record.value("classification_ref", std::string());
        entry.error = record.value("error", std::string());
        entry.created_at = record.value("created_at", std::string());
        entry.updated_at = record.value("updated_at", std::string());
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed manifest record: ") + e.what(),
                         line_no);
    } catch (const Error& e) {
        // Vocabulary parsers throw ConfigError/ValidationError; surface them
        // as parse errors carrying the offending line number.
        throw ParseError(std::string("malformed manifest record: ") + e.what(),
                         line_no);
    }
    return entry;
}

void RunManifest::upsert(ManifestEntry entry) {
    const auto it = index_.find(entry.key);
    if (it == index_.end()) {
        index_[entry.key] = entries.size();
        entries.push_back(std::move(entry));
    } else {
        entries[it->second] = std::move(entry);
    }
}

RunManifest RunManifest::load(const std::string& path) {
    RunManifest manifest;
    long line_no = 0;
    for (const auto& line : split_lines(read_file(path))) {
        ++line_no;
        if (trim(line).empty()) continue;
        manifest.upsert(ManifestEntry::from_json_line(line, line_no));
    }
    manifest.by_artifact.clear();
    for (const auto& entry : manifest.entries)
        if (!entry.artifact_path.empty())
            manifest.by_artifact[entry.artifact_path] = entry.key;
    return manifest;
}

const ManifestEntry* RunManifest::find(const CellKey& key) const {
    const auto it = index_.find(key);
    return it == index_.end() ? nullptr : &entries[it->second];
}

std::string artifact_relative_path(PromptMethod method, const std::string& model,
                                   int task_id, Language language, int sample) {
    std::string path = std::string(method_label(method)) + "/" + model +
                       "/task_" + std::to_string(task_id) + "_" +
                       std::string(language_token(language));
    if (sample >= 2) path += "_s" + std::to_string(sample);
    path += ".";
    path += language_extension(language);
    return path;
}

// ---------------------------------------------------------------------------
// Run matrix
// ---------------------------------------------------------------------------

void RunMatrix::validate(const TaskSet& tasks) const {
    if (task_ids.empty()) throw ValidationError("run matrix has no tasks");
    if (models.empty()) throw ValidationError("run matrix has no models");
    if (languages.empty()) throw ValidationError("run matrix has no languages");
    if (methods.empty()) throw ValidationError("run matrix has no methods");
    std::set<int> seen_tasks;
    for (const int id : task_ids) {
        if (!seen_tasks.insert(id).second)
            throw ValidationError("run matrix lists task " + std::to_string(id) +
                                  " twice");
        if (!tasks.find(id))
            throw ValidationError("run matrix references unknown task " +
                                  std::to_string(id));
    }
    std::set<std::string> seen_models;
    for (const auto& model : models) {
        if (trim(model).empty())
            throw ValidationError("run matrix has an empty model name");
        if (!seen_models.insert(model).second)
            throw ValidationError("run matrix lists model \"" + model +
                                  "\" twice");
    }
    std::set<Language> seen_languages(languages.begin(), languages.end());
    if (seen_languages.size() != languages.size())
        throw ValidationError("run matrix lists a language twice");
    std::set<PromptMethod> seen_methods(methods.begin(), methods.end());
    if (seen_methods.size() != methods.size())
        throw ValidationError("run matrix lists a method twice");
}

std::size_t RunMatrix::cell_count(int samples) const {
    return task_ids.size() * models.size() * languages.size() * methods.size() *
           static_cast<std::size_t>(samples);
}

// ---------------------------------------------------------------------------
// Orchestrator
// ---------------------------------------------------------------------------

Orchestrator::Orchestrator(const TaskSet& tasks, const CweCatalog& catalog,
                           const PromptEngine& engine, Gateway& gateway)
    : tasks_(tasks), catalog_(catalog), engine_(engine), gateway_(gateway) {}

namespace {

struct ClassificationSlot {
    bool ok = false;
    ClassificationOutcome outcome;
    std::string ref;    // audit file, relative to the run directory
    std::string error;  // set when !ok
};

}  // namespace

RunResult Orchestrator::run(const RunMatrix& matrix, const std::string& out_dir,
                            const RunOptions& options) {
    matrix.validate(tasks_);
    if (options.workers < 1) throw ConfigError("workers must be >= 1");
    if (options.samples_per_cell < 1)
        throw ConfigError("samples_per_cell must be >= 1");
    for (const auto& model : matrix.models)
        if (!gateway_.has_provider(model))
            throw ConfigError("no provider registered for model \"" + model +
                              "\"");
    if (!options.classifier_provider.empty() &&
        !gateway_.has_provider(options.classifier_provider))
        throw ConfigError("no provider registered for classifier \"" +
                          options.classifier_provider + "\"");

    fs::create_directories(out_dir);
    const std::string manifest_path =
        (fs::path(out_dir) / "manifest.jsonl").string();

    RunManifest manifest;
    if (fs::exists(manifest_path)) {
        if (!options.resume)
            throw ConfigError(
                "run directory already contains a manifest (" + manifest_path +
                "); pass resume to continue it or use a fresh directory");
        manifest = RunManifest::load(manifest_path);
    }

    // Deterministic cell order: task, method, model, language, sample.
    std::vector<CellKey> cells;
    for (const int task_id : matrix.task_ids)
        for (const PromptMethod method : matrix.methods)
            for (const auto& model : matrix.models)
                for (const Language language : matrix.languages)
                    for (int sample = 1; sample <= options.samples_per_cell;
                         ++sample)
                        cells.push_back(
                            {task_id, model, language, method, sample});

    std::ofstream manifest_out(manifest_path,
                               std::ios::binary | std::ios::app);
    if (!manifest_out)
        throw Error("cannot open manifest for append: " + manifest_path);
    std::mutex io_mutex;
    auto append_entry = [&](const ManifestEntry& entry) {
        std::lock_guard<std::mutex> lock(io_mutex);
        manifest.upsert(entry);
        if (!entry.artifact_path.empty())
            manifest.by_artifact[entry.artifact_path] = entry.key;
        manifest_out << entry.to_json_line() << '\n';
        manifest_out.flush();
    };

    // Every planned cell gets a pending line up front so an interrupted run
    // leaves a complete record of what was intended.
    for (const CellKey& key : cells) {
        if (manifest.find(key)) continue;
        ManifestEntry entry;
        entry.key = key;
        entry.status = CellStatus::Pending;
        entry.artifact_path = artifact_relative_path(
            key.method, key.model, key.task_id, key.language, key.sample);
        entry.created_at = iso8601_utc_now();
        entry.updated_at = entry.created_at;
        append_entry(entry);
    }

    RunResult result;
    std::vector<CellKey> to_attempt;
    for (const CellKey& key : cells) {
        const ManifestEntry* entry = manifest.find(key);
        if (entry->status == CellStatus::Done &&
            fs::exists(fs::path(out_dir) / entry->artifact_path)) {
            ++result.resumed;
            continue;
        }
        if (options.max_cells > 0 && to_attempt.size() >= options.max_cells)
            continue;
        to_attempt.push_back(key);
    }

    std::mutex classification_mutex;
    std::map<std::pair<int, std::string>, ClassificationSlot> classifications;

    auto classification_for = [&](const Task& task,
                                  const std::string& provider)
        -> ClassificationSlot {
        const std::pair<int, std::string> cache_key{task.task_id, provider};
        {
            std::lock_guard<std::mutex> lock(classification_mutex);
            const auto it = classifications.find(cache_key);
            if (it != classifications.end()) return it->second;
        }
        ClassificationSlot slot;
        try {
            slot.outcome = classify_and_retrieve(engine_, task, catalog_,
                                                 gateway_, provider);
            slot.ok = true;
            slot.ref = "classifications/task_" + std::to_string(task.task_id) +
                       "_" + provider + ".json";
            ordered_json audit;
            audit["task_id"] = task.task_id;
            audit["provider"] = provider;
            audit["tags"] = slot.outcome.classification.tags;
            audit["warnings"] = slot.outcome.classification.warnings;
            std::vector<int> cwe_ids;
            for (const auto& entry : slot.outcome.cwes)
                cwe_ids.push_back(entry.cwe_id);
            audit["cwe_ids"] = cwe_ids;
            audit["prompt_hash"] = slot.outcome.prompt_hash;
            audit["raw_response"] = slot.outcome.classification.raw_response;
            write_file_atomic((fs::path(out_dir) / slot.ref).string(),
                              audit.dump(2) + "\n");
        } catch (const Error& e) {
            slot.ok = false;
            slot.error = std::string("classification failed: ") + e.what();
        }
        std::lock_guard<std::mutex> lock(classification_mutex);
        return classifications.emplace(cache_key, std::move(slot))
            .first->second;
    };

    std::atomic<std::size_t> completed{0}, failed{0}, skipped{0};

    auto process_cell = [&](const CellKey& key) {
        const Task& task = *tasks_.find(key.task_id);
        ManifestEntry entry = *manifest.find(key);
        entry.updated_at = iso8601_utc_now();
        entry.error.clear();

        RenderedPrompt prompt;
        if (key.method == PromptMethod::WaZeroCoT) {
            const std::string classifier = options.classifier_provider.empty()
                                               ? key.model
                                               : options.classifier_provider;
            const ClassificationSlot slot = classification_for(task, classifier);
            if (!slot.ok) {
                entry.status = CellStatus::Skipped;
                entry.error = slot.error;
                append_entry(entry);
                ++skipped;
                return;
            }
            entry.classification_ref = slot.ref;
            prompt = engine_.render_prompt(task, key.method, slot.outcome.cwes);
        } else {
            prompt = engine_.render_prompt(task, key.method);
        }

        try {
            const GenerationResult generated =
                gateway_.generate(key.model, prompt.text);
            const std::string source =
                extract_code(generated.raw_response, key.language);
            write_file_atomic(
                (fs::path(out_dir) / entry.artifact_path).string(), source);
            entry.status = CellStatus::Done;
            entry.prompt_hash = generated.prompt_hash;
            append_entry(entry);
            ++completed;
        } catch (const Error& e) {
            entry.status = CellStatus::Failed;
            entry.error = e.what();
            append_entry(entry);
            ++failed;
        }
    };

    if (options.workers == 1) {
        for (const CellKey& key : to_attempt) process_cell(key);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        const int n = std::min<int>(options.workers,
                                    static_cast<int>(to_attempt.size()));
        for (int i = 0; i < std::max(n, 1); ++i)
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t idx = next.fetch_add(1);
                    if (idx >= to_attempt.size()) return;
                    process_cell(to_attempt[idx]);
                }
            });
        for (auto& t : pool) t.join();
    }

    result.completed = completed;
    result.failed = failed;
    result.skipped = skipped;
    result.attempted = to_attempt.size();
    return result;
}

}  // namespace secbench
