#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "secbench/corpus.hpp"
#include "secbench/gateway.hpp"
#include "secbench/prompt.hpp"

namespace secbench {

enum class CellStatus { Pending, Done, Failed, Skipped };
std::string cell_status_name(CellStatus s);
CellStatus parse_cell_status(std::string_view text);

// One generation unit: task x model x language x method (x sample).
struct CellKey {
    int task_id = 0;
    std::string model;
    Language language = Language::C;
    PromptMethod method = PromptMethod::Vanilla;
    int sample = 1;

    bool operator<(const CellKey& other) const;
    bool operator==(const CellKey& other) const;
    std::string to_string() const;
};

struct ManifestEntry {
    CellKey key;
    CellStatus status = CellStatus::Pending;
    std::string artifact_path;        // relative to the run directory
    std::string prompt_hash;
    std::string classification_ref;   // classification audit file, WA-0CoT only
    std::string error;                // failure/skip reason
    std::string created_at;
    std::string updated_at;

    std::string to_json_line() const;
    static ManifestEntry from_json_line(const std::string& line, long line_no);
};

// Append-only JSONL manifest; the last line for a given cell key wins, so a
// resumed run only appends completions.
struct RunManifest {
    std::vector<ManifestEntry> entries;           // last-write-wins, key order = first seen
    std::map<std::string, CellKey> by_artifact;   // artifact_path -> cell

    static RunManifest load(const std::string& path);
    const ManifestEntry* find(const CellKey& key) const;

private:
    std::map<CellKey, std::size_t> index_;
    void upsert(ManifestEntry entry);
    friend class Orchestrator;
};

// "<method label>/<model>/task_<id>_<language token>.<ext>"; samples beyond
// the first get an "_sN" suffix before the extension.
std::string artifact_relative_path(PromptMethod method, const std::string& model,
                                   int task_id, Language language,
                                   int sample = 1);

struct RunMatrix {
    std::vector<int> task_ids;                  // resolved against the TaskSet
    std::vector<std::string> models;            // gateway provider names
    std::vector<Language> languages;
    std::vector<PromptMethod> methods;

    void validate(const TaskSet& tasks) const;  // non-empty axes, known tasks
    std::size_t cell_count(int samples = 1) const;
};

struct RunOptions {
    bool resume = false;
    int workers = 1;
    // Stop after this many cells have been attempted (0 = no limit).  Used to
    // exercise interrupt/resume and by the CLI --limit flag.
    std::size_t max_cells = 0;
    int samples_per_cell = 1;
    // Provider answering classification prompts; empty means each cell's own
    // generation provider classifies for itself.
    std::string classifier_provider;
};

struct RunResult {
    std::size_t completed = 0;
    std::size_t failed = 0;
    std::size_t skipped = 0;
    std::size_t resumed = 0;   // cells already done and left untouched
    std::size_t attempted = 0;
};

class Orchestrator {
public:
    Orchestrator(const TaskSet& tasks, const CweCatalog& catalog,
                 const PromptEngine& engine, Gateway& gateway);

    // Walks the matrix in deterministic order (task, method, model, language,
    // sample), writing artifacts and manifest lines under out_dir.  Provider
    // and extraction failures mark the cell Failed and the run continues;
    // classification failures mark all WA-0CoT cells of that task Skipped.
    RunResult run(const RunMatrix& matrix, const std::string& out_dir,
                  const RunOptions& options);

private:
    const TaskSet& tasks_;
    const CweCatalog& catalog_;
    const PromptEngine& engine_;
    Gateway& gateway_;
};

}  // namespace secbench
