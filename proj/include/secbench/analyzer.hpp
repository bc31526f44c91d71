#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "secbench/common.hpp"

namespace secbench {

struct RunManifest;  // orchestrator.hpp

enum class Severity { Blocker, High, Other };
std::string severity_name(Severity s);
Severity parse_severity(std::string_view text);

enum class FindingOrigin { Builtin, Ingested };

struct Finding {
    std::string artifact_path;  // relative path as recorded in the manifest
    std::string rule_id;
    std::optional<int> cwe;     // findings without a CWE are excluded from profiles
    Severity severity = Severity::Other;
    int line = 0;               // 1-based; 0 = unknown
    std::string message;
    FindingOrigin origin = FindingOrigin::Builtin;
};

struct Rule {
    std::string rule_id;
    std::optional<Language> language;  // nullopt = any language
    std::string pattern;
    bool case_insensitive = false;
    std::optional<int> cwe;
    Severity severity = Severity::Other;
    std::string message;
};

class RuleSet {
public:
    static RuleSet load(const std::string& path);
    explicit RuleSet(std::vector<Rule> rules);

    const std::vector<Rule>& rules() const { return rules_; }

    // One finding per (rule, matching line), 1-based lines, ordered by
    // (line, rule_id).  artifact_path is left empty for the caller to fill.
    std::vector<Finding> scan(const std::string& source, Language language) const;

private:
    std::vector<Rule> rules_;
    std::vector<std::regex> compiled_;
};

// Non-blank lines that are not single-line comments (// for C/C++/Java,
// # for Python).  Block comments are counted; this mirrors a plain
// line-classifier rather than a full lexer.
std::int64_t count_loc(const std::string& source, Language language);

class SeverityMap {
public:
    static SeverityMap load(const std::string& path);
    SeverityMap() = default;
    explicit SeverityMap(std::map<std::string, Severity> mapping,
                         std::optional<Severity> default_bucket = {});

    void set_default_bucket(std::optional<Severity> bucket);
    // Case-insensitive label lookup; unmapped labels throw ValidationError
    // unless a default bucket is configured.
    Severity map_label(const std::string& label) const;

private:
    std::map<std::string, Severity> mapping_;  // lower-cased label -> bucket
    std::optional<Severity> default_bucket_;
};

struct FindingSet {
    std::vector<Finding> findings;
    // LoC for every analyzed artifact, including clean ones.
    std::map<std::string, std::int64_t> loc_by_artifact;

    void save(const std::string& findings_path,
              const std::string& loc_path) const;
    static FindingSet load(const std::string& findings_path,
                           const std::string& loc_path);
};

// Scans every done artifact in the manifest with the built-in rule engine.
FindingSet scan_artifacts(const RunManifest& manifest,
                          const std::string& artifact_root,
                          const RuleSet& rules);

// Reads an external findings report (JSONL rows: file, rule_id, cwe,
// severity, line, message).  Every referenced file must resolve to a manifest
// artifact; external severities pass through the severity map.  The LoC table
// is populated from the artifacts regardless of how many findings there are.
FindingSet ingest_findings(const std::string& report_path,
                           const SeverityMap& severity_map,
                           const RunManifest& manifest,
                           const std::string& artifact_root);

// Converts a SARIF 2.1.0 document (the subset produced by common SAST tools)
// into the generic JSONL rows accepted by ingest_findings.  CWE ids are
// pulled from rule metadata tags like "external/cwe/cwe-327" or "CWE-327".
std::string convert_sarif_to_jsonl(const std::string& sarif_json);

}  // namespace secbench
