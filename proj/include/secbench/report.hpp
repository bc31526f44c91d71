#pragma once

#include <optional>
#include <string>
#include <vector>

#include "secbench/analyzer.hpp"
#include "secbench/gateway.hpp"
#include "secbench/orchestrator.hpp"
#include "secbench/profiles.hpp"
#include "secbench/stats.hpp"

namespace secbench {

struct ProviderConfig {
    std::string name;            // model label; also the artifact directory name
    std::string type;            // "mock" or "http"
    std::string model_name;      // payload model id (defaults to name)
    GenerationConfig generation; // temperature / max_tokens / top_p
    std::string fixture_dir;     // mock only
    HttpProviderOptions http;    // http only
};

enum class AnalysisMode { Builtin, Ingest };

struct RunConfig {
    std::string config_path;     // absolute path of the loaded file
    std::string config_hash;     // SHA-256 of the file bytes
    std::string tasks_path;
    std::string catalog_path;
    std::string taxonomy_path;   // empty = bundled default
    std::string template_dir;    // empty = bundled templates
    std::string out_dir;
    std::vector<ProviderConfig> providers;
    RunMatrix matrix_spec;       // task_ids empty = all tasks
    int max_cwes = 0;            // cap on injected CWE lines (0 = no cap)
    AnalysisMode analysis_mode = AnalysisMode::Builtin;
    std::string rules_path;
    std::string report_path;     // ingest mode input
    std::string severity_map_path;
    std::optional<Severity> default_severity_bucket;
    double epsilon = kDefaultEpsilon;
    int top_n = 5;
    std::int64_t min_count = 0;
    RunOptions run_options;
    RetryPolicy retry;
    RateLimit rate_limit;
};

// Parses the JSON config; relative paths are resolved against the config
// file's directory.  Referenced input files must exist.
RunConfig load_run_config(const std::string& path);

// Report bundle written by cmd_report: cells.csv, chi_square.csv,
// jsd_comparisons.csv, jsd_summary.csv, jsd_by_comparator.csv,
// entropy_hhi.csv, entropy_hhi_deltas.csv, top_cwes_<lang>.csv,
// severity_summary.csv, profiles.jsonl, summary.json.  Every table is
// deterministic; the only timestamp lives in summary.json.
struct ReportPaths {
    std::string dir;
    std::string cells_csv() const { return dir + "/cells.csv"; }
    std::string chi_square_csv() const { return dir + "/chi_square.csv"; }
    std::string jsd_comparisons_csv() const { return dir + "/jsd_comparisons.csv"; }
    std::string jsd_summary_csv() const { return dir + "/jsd_summary.csv"; }
    std::string jsd_by_comparator_csv() const { return dir + "/jsd_by_comparator.csv"; }
    std::string entropy_hhi_csv() const { return dir + "/entropy_hhi.csv"; }
    std::string deltas_csv() const { return dir + "/entropy_hhi_deltas.csv"; }
    std::string top_cwes_csv(Language lang) const {
        return dir + "/top_cwes_" + language_token(lang) + ".csv";
    }
    std::string severity_summary_csv() const { return dir + "/severity_summary.csv"; }
    std::string profiles_jsonl() const { return dir + "/profiles.jsonl"; }
    std::string summary_json() const { return dir + "/summary.json"; }
};

void write_report_bundle(const ReportPaths& paths, const RunConfig& config,
                         const RunManifest& manifest,
                         const FindingSet& findings);

// CLI subcommand entry points; return a process exit code (0 = success).
int cmd_generate(const RunConfig& config, bool resume, std::size_t limit);
int cmd_analyze(const RunConfig& config);
int cmd_report(const RunConfig& config);
int cmd_validate(const RunConfig& config);

// Paths of the analysis outputs for a run directory.
std::string findings_path(const std::string& out_dir);
std::string loc_path(const std::string& out_dir);
std::string manifest_path(const std::string& out_dir);
std::string report_dir(const std::string& out_dir);

// Builds the gateway described by the config (used by cmd_generate and tests).
Gateway build_gateway(const RunConfig& config);

}  // namespace secbench
