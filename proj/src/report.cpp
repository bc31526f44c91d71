#include "secbench/report.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <tuple>

#include "secbench/csv.hpp"

namespace secbench {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

std::string fmt_fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    return buf;
}

std::string fmt_signed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%+.*f", decimals, value);
    return buf;
}

std::string fmt_g(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", value);
    return buf;
}

void require_exists(const std::string& path, const std::string& what) {
    if (path.empty()) return;
    if (!fs::exists(path))
        throw ConfigError(what + " does not exist: " + path);
}

void check_known_keys(const json& object, const std::string& where,
                      const std::set<std::string>& known) {
    for (const auto& [key, value] : object.items())
        if (!known.count(key))
            throw ConfigError("unknown key \"" + key + "\" in " + where);
}

}  // namespace

// ---------------------------------------------------------------------------
// Config loading
// ---------------------------------------------------------------------------

RunConfig load_run_config(const std::string& path) {
    const std::string content = read_file(path);
    json doc = json::parse(content, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded() || !doc.is_object())
        throw ConfigError("config is not a JSON object: " + path);

    RunConfig config;
    config.config_path = fs::absolute(path).lexically_normal().string();
    config.config_hash = sha256_hex(content);
    const fs::path base = fs::path(config.config_path).parent_path();
    auto resolve = [&](const std::string& p) -> std::string {
        if (p.empty()) return p;
        const fs::path fp(p);
        if (fp.is_absolute()) return fp.lexically_normal().string();
        return (base / fp).lexically_normal().string();
    };

    check_known_keys(doc, "config",
                     {"tasks", "catalog", "taxonomy", "templates", "out_dir",
                      "providers", "matrix", "prompts", "analysis", "analytics",
                      "run"});

    try {
        config.tasks_path = resolve(doc.at("tasks").get<std::string>());
        config.catalog_path = resolve(doc.at("catalog").get<std::string>());
        if (doc.contains("taxonomy"))
            config.taxonomy_path = resolve(doc["taxonomy"].get<std::string>());
        if (doc.contains("templates"))
            config.template_dir = resolve(doc["templates"].get<std::string>());
        config.out_dir = resolve(doc.at("out_dir").get<std::string>());

        if (!doc.contains("providers") || !doc["providers"].is_array() ||
            doc["providers"].empty())
            throw ConfigError("config needs a non-empty \"providers\" array");
        for (const auto& p : doc["providers"]) {
            check_known_keys(p, "provider",
                             {"name", "type", "model_name", "temperature",
                              "max_tokens", "top_p", "fixture_dir", "endpoint",
                              "path", "api_key_env", "connect_timeout_s",
                              "read_timeout_s"});
            ProviderConfig provider;
            provider.name = p.at("name").get<std::string>();
            provider.type = p.at("type").get<std::string>();
            if (provider.type != "mock" && provider.type != "http")
                throw ConfigError("provider \"" + provider.name +
                                  "\" has unknown type \"" + provider.type +
                                  "\" (expected mock or http)");
            provider.model_name = p.value("model_name", provider.name);
            provider.generation.model_name = provider.model_name;
            provider.generation.temperature = p.value("temperature", 0.9);
            provider.generation.max_tokens = p.value("max_tokens", 4096);
            provider.generation.top_p = p.value("top_p", 0.9);
            provider.generation.validate();
            if (p.contains("fixture_dir"))
                provider.fixture_dir =
                    resolve(p["fixture_dir"].get<std::string>());
            if (provider.type == "http") {
                provider.http.endpoint = p.at("endpoint").get<std::string>();
                provider.http.path =
                    p.value("path", std::string("/v1/chat/completions"));
                provider.http.api_key_env = p.value("api_key_env", std::string());
                provider.http.connect_timeout_s = p.value("connect_timeout_s", 10);
                provider.http.read_timeout_s = p.value("read_timeout_s", 120);
            }
            for (const auto& existing : config.providers)
                if (existing.name == provider.name)
                    throw ConfigError("duplicate provider name \"" +
                                      provider.name + "\"");
            config.providers.push_back(std::move(provider));
        }

        const json& matrix = doc.at("matrix");
        check_known_keys(matrix, "matrix",
                         {"tasks", "models", "languages", "methods"});
        for (const auto& m : matrix.at("models"))
            config.matrix_spec.models.push_back(m.get<std::string>());
        for (const auto& model : config.matrix_spec.models) {
            const bool known = std::any_of(
                config.providers.begin(), config.providers.end(),
                [&](const ProviderConfig& p) { return p.name == model; });
            if (!known)
                throw ConfigError("matrix model \"" + model +
                                  "\" has no matching provider");
        }
        if (matrix.contains("languages"))
            for (const auto& l : matrix["languages"])
                config.matrix_spec.languages.push_back(
                    parse_language(l.get<std::string>()));
        else
            config.matrix_spec.languages.assign(std::begin(kAllLanguages),
                                                std::end(kAllLanguages));
        if (matrix.contains("methods"))
            for (const auto& m : matrix["methods"])
                config.matrix_spec.methods.push_back(
                    parse_method(m.get<std::string>()));
        else
            config.matrix_spec.methods.assign(std::begin(kAllMethods),
                                              std::end(kAllMethods));
        if (matrix.contains("tasks"))
            for (const auto& t : matrix["tasks"])
                config.matrix_spec.task_ids.push_back(t.get<int>());

        if (doc.contains("prompts")) {
            check_known_keys(doc["prompts"], "prompts", {"max_cwes"});
            config.max_cwes = doc["prompts"].value("max_cwes", 0);
            if (config.max_cwes < 0)
                throw ConfigError("prompts.max_cwes must be >= 0");
        }

        if (doc.contains("analysis")) {
            const json& analysis = doc["analysis"];
            check_known_keys(analysis, "analysis",
                             {"mode", "rules", "report", "severity_map",
                              "default_severity_bucket"});
            const std::string mode = analysis.value("mode", "builtin");
            if (mode == "builtin") config.analysis_mode = AnalysisMode::Builtin;
            else if (mode == "ingest") config.analysis_mode = AnalysisMode::Ingest;
            else
                throw ConfigError("analysis.mode must be builtin or ingest, got \"" +
                                  mode + "\"");
            if (analysis.contains("rules"))
                config.rules_path = resolve(analysis["rules"].get<std::string>());
            if (analysis.contains("report"))
                config.report_path =
                    resolve(analysis["report"].get<std::string>());
            if (analysis.contains("severity_map"))
                config.severity_map_path =
                    resolve(analysis["severity_map"].get<std::string>());
            if (analysis.contains("default_severity_bucket"))
                config.default_severity_bucket = parse_severity(
                    analysis["default_severity_bucket"].get<std::string>());
        }
        if (config.analysis_mode == AnalysisMode::Builtin &&
            config.rules_path.empty())
            throw ConfigError("builtin analysis needs analysis.rules");
        if (config.analysis_mode == AnalysisMode::Ingest) {
            if (config.report_path.empty())
                throw ConfigError("ingest analysis needs analysis.report");
            if (config.severity_map_path.empty())
                throw ConfigError("ingest analysis needs analysis.severity_map");
        }

        if (doc.contains("analytics")) {
            const json& analytics = doc["analytics"];
            check_known_keys(analytics, "analytics",
                             {"epsilon", "top_n", "min_count"});
            config.epsilon = analytics.value("epsilon", kDefaultEpsilon);
            config.top_n = analytics.value("top_n", 5);
            config.min_count = analytics.value("min_count", std::int64_t{0});
            if (!(config.epsilon > 0.0))
                throw ConfigError("analytics.epsilon must be positive");
            if (config.top_n < 1)
                throw ConfigError("analytics.top_n must be >= 1");
            if (config.min_count < 0)
                throw ConfigError("analytics.min_count must be >= 0");
        }

        if (doc.contains("run")) {
            const json& run = doc["run"];
            check_known_keys(run, "run",
                             {"workers", "samples_per_cell",
                              "classifier_provider", "max_attempts",
                              "backoff_ms", "max_backoff_ms",
                              "backoff_multiplier", "max_in_flight",
                              "requests_per_minute"});
            config.run_options.workers = run.value("workers", 1);
            config.run_options.samples_per_cell =
                run.value("samples_per_cell", 1);
            config.run_options.classifier_provider =
                run.value("classifier_provider", std::string());
            config.retry.max_attempts = run.value("max_attempts", 3);
            config.retry.initial_backoff_ms = run.value("backoff_ms", 250);
            config.retry.max_backoff_ms = run.value("max_backoff_ms", 5000);
            config.retry.multiplier = run.value("backoff_multiplier", 2.0);
            config.rate_limit.max_in_flight = run.value("max_in_flight", 1);
            config.rate_limit.requests_per_minute =
                run.value("requests_per_minute", 0);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }

    require_exists(config.tasks_path, "tasks file");
    require_exists(config.catalog_path, "catalog file");
    require_exists(config.taxonomy_path, "taxonomy file");
    require_exists(config.template_dir, "template directory");
    require_exists(config.rules_path, "rules file");
    require_exists(config.severity_map_path, "severity map");
    if (config.analysis_mode == AnalysisMode::Ingest)
        require_exists(config.report_path, "findings report");
    return config;
}

Gateway build_gateway(const RunConfig& config) {
    Gateway gateway;
    for (const auto& provider : config.providers) {
        std::unique_ptr<Provider> impl;
        if (provider.type == "mock")
            impl = std::make_unique<MockProvider>(provider.name,
                                                  provider.fixture_dir);
        else
            impl = std::make_unique<HttpProvider>(provider.name, provider.http);
        gateway.register_provider(std::move(impl), provider.generation,
                                  config.retry, config.rate_limit);
    }
    return gateway;
}

std::string findings_path(const std::string& out_dir) {
    return (fs::path(out_dir) / "analysis" / "findings.jsonl").string();
}
std::string loc_path(const std::string& out_dir) {
    return (fs::path(out_dir) / "analysis" / "loc.csv").string();
}
std::string manifest_path(const std::string& out_dir) {
    return (fs::path(out_dir) / "manifest.jsonl").string();
}
std::string report_dir(const std::string& out_dir) {
    return (fs::path(out_dir) / "report").string();
}

// ---------------------------------------------------------------------------
// Shared loading helpers
// ---------------------------------------------------------------------------

namespace {

struct LoadedInputs {
    TagTaxonomy taxonomy = TagTaxonomy::bundled_default();
    TemplateSet templates;
    TaskSet tasks;
    CweCatalog catalog;
};

LoadedInputs load_inputs(const RunConfig& config) {
    LoadedInputs inputs;
    inputs.taxonomy = config.taxonomy_path.empty()
                          ? TagTaxonomy::bundled_default()
                          : TagTaxonomy::load(config.taxonomy_path);
    inputs.templates = TemplateSet::bundled_default();
    if (!config.template_dir.empty())
        inputs.templates.load_overrides(config.template_dir);
    inputs.tasks = load_tasks(config.tasks_path, inputs.taxonomy);
    inputs.catalog = load_cwe_catalog(config.catalog_path, inputs.taxonomy);
    return inputs;
}

RunMatrix resolve_matrix(const RunConfig& config, const TaskSet& tasks) {
    RunMatrix matrix = config.matrix_spec;
    if (matrix.task_ids.empty())
        for (const auto& task : tasks.tasks) matrix.task_ids.push_back(task.task_id);
    return matrix;
}

}  // namespace

// ---------------------------------------------------------------------------
// Report bundle
// ---------------------------------------------------------------------------

namespace {

std::vector<MetricsCell> sorted_cells(const RunManifest& manifest,
                                      const FindingSet& findings) {
    std::vector<MetricsCell> cells = build_all_cells(manifest, findings);
    std::sort(cells.begin(), cells.end(),
              [](const MetricsCell& a, const MetricsCell& b) {
                  return std::tuple(static_cast<int>(a.language), a.model,
                                    static_cast<int>(a.method)) <
                         std::tuple(static_cast<int>(b.language), b.model,
                                    static_cast<int>(b.method));
              });
    return cells;
}

void write_cells_csv(const std::string& path,
                     const std::vector<MetricsCell>& cells) {
    std::string out =
        "language,model,method,tasks_total,vulnerable_tasks,f_percent,"
        "loc_vulnerable,vulnerabilities,vulns_per_loc\n";
    for (const auto& cell : cells) {
        out += csv_row({std::string(language_name(cell.language)), cell.model,
                        std::string(method_label(cell.method)),
                        std::to_string(cell.tasks_total),
                        std::to_string(cell.vulnerable_tasks),
                        fmt_fixed(cell.frequency() * 100.0, 1),
                        std::to_string(cell.loc_vulnerable),
                        std::to_string(cell.vulnerabilities),
                        fmt_fixed(cell.severity_rate(), 3)});
    }
    write_file_atomic(path, out);
}

void write_chi_square_csv(const std::string& path,
                          const std::vector<MetricsCell>& cells,
                          std::vector<std::string>& notes,
                          std::vector<ordered_json>& tests_summary) {
    std::map<std::pair<std::string, Language>, std::vector<MetricsCell>>
        grouped;
    for (const auto& cell : cells)
        grouped[{cell.model, cell.language}].push_back(cell);

    std::string out =
        "model,language,kind,statistic,df,p_value,low_expected_warning,"
        "degenerate,excluded_methods\n";
    for (const auto& [key, group] : grouped) {
        const auto& [model, language] = key;
        if (group.size() < 2) {
            notes.push_back("chi-squared skipped for " + model + "/" +
                            std::string(language_name(language)) +
                            ": fewer than two method cells");
            continue;
        }
        for (const ChiSquareKind kind :
             {ChiSquareKind::Frequency, ChiSquareKind::Severity}) {
            const ChiSquareResult r = kind == ChiSquareKind::Frequency
                                          ? chi_square_frequency(group)
                                          : chi_square_severity(group);
            std::vector<std::string> excluded;
            for (const PromptMethod m : r.excluded_methods)
                excluded.push_back(std::string(method_label(m)));
            out += csv_row(
                {model, std::string(language_name(language)),
                 kind == ChiSquareKind::Frequency ? "frequency" : "severity",
                 fmt_g(r.statistic), std::to_string(r.df), fmt_g(r.p_value),
                 r.low_expected_warning ? "1" : "0", r.degenerate ? "1" : "0",
                 join(excluded, ";")});
            ordered_json t;
            t["model"] = model;
            t["language"] = std::string(language_name(language));
            t["kind"] =
                kind == ChiSquareKind::Frequency ? "frequency" : "severity";
            t["statistic"] = r.statistic;
            t["df"] = r.df;
            t["p_value"] = r.p_value;
            t["significant_at_0.05"] = !r.degenerate && r.p_value < 0.05;
            t["low_expected_warning"] = r.low_expected_warning;
            tests_summary.push_back(std::move(t));
        }
    }
    write_file_atomic(path, out);
}

void write_summary_rows(std::string& out, const DivergenceSummary& s) {
    out += "," + std::to_string(s.n) + "," + fmt_g(s.mean) + "," +
           fmt_g(s.median) + "," + fmt_g(s.p90) + "," + fmt_g(s.max) + "\n";
}

}  // namespace

void write_report_bundle(const ReportPaths& paths, const RunConfig& config,
                         const RunManifest& manifest,
                         const FindingSet& findings) {
    fs::create_directories(paths.dir);
    std::vector<std::string> notes;
    std::vector<ordered_json> tests_summary;

    const std::vector<MetricsCell> cells = sorted_cells(manifest, findings);
    write_cells_csv(paths.cells_csv(), cells);
    write_chi_square_csv(paths.chi_square_csv(), cells, notes, tests_summary);

    // CWE profiles and divergences.
    std::vector<CweProfile> profiles = build_profiles(manifest, findings);
    std::sort(profiles.begin(), profiles.end(),
              [](const CweProfile& a, const CweProfile& b) {
                  return std::tuple(static_cast<int>(a.language),
                                    static_cast<int>(a.method), a.model) <
                         std::tuple(static_cast<int>(b.language),
                                    static_cast<int>(b.method), b.model);
              });

    {
        std::string out;
        for (const auto& profile : profiles) {
            ordered_json record;
            record["language"] = std::string(language_name(profile.language));
            record["method"] = std::string(method_label(profile.method));
            record["model"] = profile.model;
            record["total"] = profile.total();
            ordered_json counts = ordered_json::object();
            for (const auto& [cwe, count] : profile.counts)
                counts[std::to_string(cwe)] = count;
            record["counts"] = counts;
            record["entropy_nats"] = entropy(profile);
            record["hhi"] = hhi(profile);
            out += record.dump();
            out += '\n';
        }
        write_file_atomic(paths.profiles_jsonl(), out);
    }

    const std::vector<DivergenceResult> comparisons =
        compare_wa0cot(profiles, config.epsilon, &notes);
    {
        std::string out = "language,model,comparator,jsd_nats,epsilon\n";
        for (const auto& c : comparisons)
            out += csv_row({std::string(language_name(c.language)), c.model,
                            std::string(method_label(c.comparator)),
                            fmt_g(c.jsd_nats), fmt_g(c.epsilon)});
        write_file_atomic(paths.jsd_comparisons_csv(), out);
    }
    {
        std::string out = "language,n,mean,median,p90,max";
        out += "\n";
        std::string body;
        for (const auto& row : summarize_by_language(comparisons)) {
            body += std::string(language_name(row.language));
            write_summary_rows(body, row.summary);
        }
        write_file_atomic(paths.jsd_summary_csv(), out + body);
    }
    {
        std::string out = "comparator,language,n,mean,median,p90,max\n";
        std::string body;
        for (const auto& row : summarize_by_comparator(comparisons)) {
            body += std::string(method_label(row.comparator)) + "," +
                    std::string(language_name(row.language));
            write_summary_rows(body, row.summary);
        }
        write_file_atomic(paths.jsd_by_comparator_csv(), out + body);
    }
    if (comparisons.empty())
        notes.push_back("no WA-0CoT divergences: no comparable profiles");

    const std::vector<EntropyHhiRow> entropy_rows =
        entropy_hhi_table(profiles, config.min_count);
    {
        std::string out =
            "language,method,mean_entropy_nats,mean_hhi,models_included\n";
        for (const auto& row : entropy_rows)
            out += csv_row({std::string(language_name(row.language)),
                            std::string(method_label(row.method)),
                            fmt_g(row.mean_entropy), fmt_g(row.mean_hhi),
                            std::to_string(row.models_included)});
        write_file_atomic(paths.entropy_hhi_csv(), out);
    }
    {
        std::string out = "language,delta_entropy_nats,delta_hhi\n";
        for (const auto& row : wa_vanilla_deltas(entropy_rows, &notes))
            out += csv_row({std::string(language_name(row.language)),
                            fmt_signed(row.delta_entropy, 3),
                            fmt_signed(row.delta_hhi, 3)});
        write_file_atomic(paths.deltas_csv(), out);
    }

    // One top-CWE table per language with any profile, columns in the fixed
    // presentation order filtered to methods actually present.
    static const PromptMethod kColumnOrder[] = {
        PromptMethod::WaZeroCoT, PromptMethod::ZeroShot, PromptMethod::Vanilla,
        PromptMethod::ZeroShotCoT};
    for (const Language language : kAllLanguages) {
        std::set<PromptMethod> present;
        for (const auto& profile : profiles)
            if (profile.language == language) present.insert(profile.method);
        if (present.empty()) continue;
        std::vector<PromptMethod> methods;
        for (const PromptMethod m : kColumnOrder)
            if (present.count(m)) methods.push_back(m);
        const TopCweTable table =
            top_cwe_table(profiles, language, methods, config.top_n);
        std::string out = "cwe_id";
        for (const PromptMethod m : methods)
            out += "," + std::string(method_label(m));
        out += "\n";
        for (std::size_t row = 0; row < table.cwe_ids.size(); ++row) {
            out += std::to_string(table.cwe_ids[row]);
            for (const std::int64_t count : table.counts[row])
                out += "," + std::to_string(count);
            out += "\n";
        }
        write_file_atomic(paths.top_cwes_csv(language), out);
    }

    // Severity summary per (method, model, language); the total is always
    // derived from the buckets.
    {
        std::map<std::tuple<int, std::string, int>,
                 std::map<Severity, std::int64_t>>
            grouped;
        for (const auto& f : findings.findings) {
            if (!f.cwe) continue;
            const auto it = manifest.by_artifact.find(f.artifact_path);
            if (it == manifest.by_artifact.end())
                throw ValidationError("finding references unknown artifact: " +
                                      f.artifact_path);
            const CellKey& key = it->second;
            ++grouped[{static_cast<int>(key.method), key.model,
                       static_cast<int>(key.language)}][f.severity];
        }
        std::string out = "method,model,language,total,blocker,high,other\n";
        for (const auto& [key, buckets] : grouped) {
            const auto& [method, model, language] = key;
            auto bucket = [&](Severity s) -> std::int64_t {
                const auto it = buckets.find(s);
                return it == buckets.end() ? 0 : it->second;
            };
            const std::int64_t blocker = bucket(Severity::Blocker);
            const std::int64_t high = bucket(Severity::High);
            const std::int64_t other = bucket(Severity::Other);
            out += csv_row(
                {std::string(method_label(static_cast<PromptMethod>(method))),
                 model,
                 std::string(language_name(static_cast<Language>(language))),
                 std::to_string(blocker + high + other),
                 std::to_string(blocker), std::to_string(high),
                 std::to_string(other)});
        }
        write_file_atomic(paths.severity_summary_csv(), out);
    }

    // summary.json is the only artifact carrying a timestamp.
    {
        ordered_json summary;
        summary["tool_version"] = kToolVersion;
        summary["config_hash"] = config.config_hash;
        summary["generated_at"] = iso8601_utc_now();
        summary["analysis_mode"] =
            config.analysis_mode == AnalysisMode::Builtin ? "builtin" : "ingest";
        summary["epsilon"] = config.epsilon;
        summary["top_n"] = config.top_n;
        summary["min_count"] = config.min_count;
        std::map<std::string, std::int64_t> status_counts;
        for (const auto& entry : manifest.entries)
            ++status_counts[cell_status_name(entry.status)];
        summary["cells"] = status_counts;
        summary["findings"] = findings.findings.size();
        summary["profiles"] = profiles.size();
        summary["chi_square_tests"] = tests_summary;
        summary["notes"] = notes;
        write_file_atomic(paths.summary_json(), summary.dump(2) + "\n");
    }
}

// ---------------------------------------------------------------------------
// CLI subcommands
// ---------------------------------------------------------------------------

int cmd_generate(const RunConfig& config, bool resume, std::size_t limit) {
    const LoadedInputs inputs = load_inputs(config);
    const RunMatrix matrix = resolve_matrix(config, inputs.tasks);
    matrix.validate(inputs.tasks);
    Gateway gateway = build_gateway(config);
    PromptEngine engine(inputs.taxonomy, inputs.templates, config.max_cwes);
    Orchestrator orchestrator(inputs.tasks, inputs.catalog, engine, gateway);
    RunOptions options = config.run_options;
    options.resume = resume;
    options.max_cells = limit;
    const RunResult result = orchestrator.run(matrix, config.out_dir, options);
    std::cout << "generation: " << result.completed << " completed, "
              << result.failed << " failed, " << result.skipped << " skipped, "
              << result.resumed << " resumed ("
              << manifest_path(config.out_dir) << ")\n";
    if (result.completed == 0 && result.resumed == 0 && result.attempted > 0) {
        std::cerr << "error: no cell completed\n";
        return 1;
    }
    return 0;
}

int cmd_analyze(const RunConfig& config) {
    const RunManifest manifest =
        RunManifest::load(manifest_path(config.out_dir));
    FindingSet findings;
    if (config.analysis_mode == AnalysisMode::Builtin) {
        const RuleSet rules = RuleSet::load(config.rules_path);
        findings = scan_artifacts(manifest, config.out_dir, rules);
    } else {
        SeverityMap severity_map = SeverityMap::load(config.severity_map_path);
        severity_map.set_default_bucket(config.default_severity_bucket);
        std::string report_file = config.report_path;
        // A SARIF report is converted to the findings JSONL shape first.
        const std::string content = read_file(report_file);
        json probe = json::parse(content, nullptr, /*allow_exceptions=*/false);
        if (!probe.is_discarded() && probe.is_object() &&
            probe.contains("runs")) {
            const std::string converted = convert_sarif_to_jsonl(content);
            report_file = (fs::path(config.out_dir) / "analysis" /
                           "ingested_from_sarif.jsonl")
                              .string();
            write_file_atomic(report_file, converted);
        }
        findings =
            ingest_findings(report_file, severity_map, manifest, config.out_dir);
    }
    findings.save(findings_path(config.out_dir), loc_path(config.out_dir));
    std::int64_t with_cwe = 0;
    for (const auto& f : findings.findings)
        if (f.cwe) ++with_cwe;
    std::cout << "analysis: " << findings.findings.size() << " findings ("
              << with_cwe << " with a CWE) across "
              << findings.loc_by_artifact.size() << " artifacts\n";
    return 0;
}

int cmd_report(const RunConfig& config) {
    const RunManifest manifest =
        RunManifest::load(manifest_path(config.out_dir));
    const FindingSet findings = FindingSet::load(findings_path(config.out_dir),
                                                 loc_path(config.out_dir));
    ReportPaths paths{report_dir(config.out_dir)};
    write_report_bundle(paths, config, manifest, findings);
    std::cout << "report: written to " << paths.dir << "\n";
    return 0;
}

int cmd_validate(const RunConfig& config) {
    const LoadedInputs inputs = load_inputs(config);
    const RunMatrix matrix = resolve_matrix(config, inputs.tasks);
    matrix.validate(inputs.tasks);
    if (config.analysis_mode == AnalysisMode::Builtin)
        RuleSet::load(config.rules_path);
    if (!config.severity_map_path.empty())
        SeverityMap::load(config.severity_map_path);
    // Exercise every prompt template once so template errors surface here.
    PromptEngine engine(inputs.taxonomy, inputs.templates, config.max_cwes);
    const Task& probe = inputs.tasks.tasks.front();
    engine.render_classification_prompt(probe);
    for (const PromptMethod method :
         {PromptMethod::Vanilla, PromptMethod::ZeroShot,
          PromptMethod::ZeroShotCoT})
        engine.render_prompt(probe, method);
    engine.render_prompt(probe, PromptMethod::WaZeroCoT,
                         cwes_for_tags(inputs.catalog, probe.tags,
                                       inputs.taxonomy));

    std::cout << "config: " << config.config_path << "\n"
              << "tasks: " << inputs.tasks.tasks.size() << " ("
              << config.tasks_path << ")\n"
              << "catalog: " << inputs.catalog.entries.size()
              << " CWEs (MITRE version "
              << (inputs.catalog.mitre_version.empty()
                      ? "unknown"
                      : inputs.catalog.mitre_version)
              << ")\n"
              << "taxonomy: " << inputs.taxonomy.entries().size() << " tags\n"
              << "providers: " << config.providers.size() << "\n"
              << "matrix: " << matrix.task_ids.size() << " tasks x "
              << matrix.models.size() << " models x "
              << matrix.languages.size() << " languages x "
              << matrix.methods.size() << " methods = "
              << matrix.cell_count(config.run_options.samples_per_cell)
              << " cells\n"
              << "ok\n";
    return 0;
}

}  // namespace secbench
