#include "secbench/analyzer.hpp"

#include <algorithm>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <set>

#include "secbench/csv.hpp"
#include "secbench/orchestrator.hpp"

namespace secbench {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string severity_name(Severity s) {
    switch (s) {
        case Severity::Blocker: return "Blocker";
        case Severity::High: return "High";
        case Severity::Other: return "Other";
    }
    throw Error("unreachable severity");
}

Severity parse_severity(std::string_view text) {
    const std::string t = to_lower(trim(text));
    if (t == "blocker") return Severity::Blocker;
    if (t == "high") return Severity::High;
    if (t == "other") return Severity::Other;
    throw ValidationError("unknown severity bucket: \"" + std::string(trim(text)) +
                          "\" (expected Blocker, High, or Other)");
}

// ---------------------------------------------------------------------------
// Rules
// ---------------------------------------------------------------------------

RuleSet::RuleSet(std::vector<Rule> rules) : rules_(std::move(rules)) {
    std::set<std::string> ids;
    for (const auto& rule : rules_) {
        if (rule.rule_id.empty())
            throw ValidationError("rule with empty rule_id");
        if (!ids.insert(rule.rule_id).second)
            throw ValidationError("duplicate rule_id \"" + rule.rule_id + "\"");
        auto flags = std::regex::ECMAScript | std::regex::optimize;
        if (rule.case_insensitive) flags |= std::regex::icase;
        try {
            compiled_.emplace_back(rule.pattern, flags);
        } catch (const std::regex_error& e) {
            throw ValidationError("rule \"" + rule.rule_id +
                                  "\" has an invalid pattern: " + e.what());
        }
    }
}

RuleSet RuleSet::load(const std::string& path) {
    const std::string content = read_file(path);
    std::vector<Rule> rules;
    long line_no = 0;
    for (const auto& line : split_lines(content)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json record = json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (record.is_discarded() || !record.is_object())
            throw ParseError("malformed rule record", line_no);
        Rule rule;
        try {
            rule.rule_id = record.at("rule_id").get<std::string>();
            rule.pattern = record.at("pattern").get<std::string>();
            if (record.contains("language") && !record["language"].is_null())
                rule.language = parse_language(record["language"].get<std::string>());
            if (record.contains("case_insensitive"))
                rule.case_insensitive = record["case_insensitive"].get<bool>();
            if (record.contains("cwe") && !record["cwe"].is_null())
                rule.cwe = record["cwe"].get<int>();
            rule.severity = parse_severity(record.at("severity").get<std::string>());
            rule.message = record.value("message", std::string());
        } catch (const json::exception& e) {
            throw ParseError(std::string("malformed rule record: ") + e.what(),
                             line_no);
        }
        rules.push_back(std::move(rule));
    }
    if (rules.empty()) throw ValidationError("rule file has no rules: " + path);
    return RuleSet(std::move(rules));
}

std::vector<Finding> RuleSet::scan(const std::string& source,
                                   Language language) const {
    // Rules fire at most once per (rule, line); results are ordered by
    // (line, rule_id) for deterministic reports.
    std::vector<std::size_t> applicable;
    for (std::size_t i = 0; i < rules_.size(); ++i)
        if (!rules_[i].language || *rules_[i].language == language)
            applicable.push_back(i);
    std::sort(applicable.begin(), applicable.end(), [&](auto a, auto b) {
        return rules_[a].rule_id < rules_[b].rule_id;
    });
    std::vector<Finding> findings;
    const auto lines = split_lines(source);
    for (std::size_t li = 0; li < lines.size(); ++li) {
        for (const std::size_t ri : applicable) {
            if (!std::regex_search(lines[li], compiled_[ri])) continue;
            Finding f;
            f.rule_id = rules_[ri].rule_id;
            f.cwe = rules_[ri].cwe;
            f.severity = rules_[ri].severity;
            f.line = static_cast<int>(li + 1);
            f.message = rules_[ri].message;
            f.origin = FindingOrigin::Builtin;
            findings.push_back(std::move(f));
        }
    }
    return findings;
}

std::int64_t count_loc(const std::string& source, Language language) {
    const std::string comment_prefix =
        language == Language::Python ? "#" : "//";
    std::int64_t loc = 0;
    for (const auto& line : split_lines(source)) {
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t.rfind(comment_prefix, 0) == 0) continue;
        ++loc;
    }
    return loc;
}

// ---------------------------------------------------------------------------
// Severity map
// ---------------------------------------------------------------------------

SeverityMap::SeverityMap(std::map<std::string, Severity> mapping,
                         std::optional<Severity> default_bucket)
    : default_bucket_(default_bucket) {
    for (auto& [label, bucket] : mapping) mapping_[to_lower(label)] = bucket;
}

SeverityMap SeverityMap::load(const std::string& path) {
    const CsvDocument doc = [&] {
        return parse_csv(read_file(path));
    }();
    if (doc.header.size() < 2 || !iequals(trim(doc.header[0]), "from_label") ||
        !iequals(trim(doc.header[1]), "to_bucket"))
        throw ParseError("severity map must have columns from_label,to_bucket: " +
                         path);
    std::map<std::string, Severity> mapping;
    for (const auto& row : doc.rows) {
        const std::string label = to_lower(trim(row[0]));
        if (label.empty()) continue;
        const Severity bucket = parse_severity(row[1]);
        const auto [it, inserted] = mapping.emplace(label, bucket);
        if (!inserted && it->second != bucket)
            throw ValidationError("severity map lists \"" + trim(row[0]) +
                                  "\" twice with different buckets");
    }
    if (mapping.empty())
        throw ValidationError("severity map has no rows: " + path);
    return SeverityMap(std::move(mapping));
}

void SeverityMap::set_default_bucket(std::optional<Severity> bucket) {
    default_bucket_ = bucket;
}

Severity SeverityMap::map_label(const std::string& label) const {
    const auto it = mapping_.find(to_lower(trim(label)));
    if (it != mapping_.end()) return it->second;
    if (default_bucket_) return *default_bucket_;
    throw ValidationError("severity label \"" + trim(label) +
                          "\" is not in the severity map and no default bucket "
                          "is configured");
}

// ---------------------------------------------------------------------------
// Finding sets
// ---------------------------------------------------------------------------

namespace {

void sort_findings(std::vector<Finding>& findings) {
    std::sort(findings.begin(), findings.end(),
              [](const Finding& a, const Finding& b) {
                  return std::tie(a.artifact_path, a.line, a.rule_id) <
                         std::tie(b.artifact_path, b.line, b.rule_id);
              });
}

}  // namespace

void FindingSet::save(const std::string& findings_path,
                      const std::string& loc_path) const {
    std::string out;
    for (const auto& f : findings) {
        ordered_json record;
        record["file"] = f.artifact_path;
        record["rule_id"] = f.rule_id;
        if (f.cwe) record["cwe"] = *f.cwe;
        else record["cwe"] = nullptr;
        record["severity"] = severity_name(f.severity);
        record["line"] = f.line;
        record["message"] = f.message;
        record["origin"] =
            f.origin == FindingOrigin::Builtin ? "builtin" : "ingested";
        out += record.dump();
        out += '\n';
    }
    write_file_atomic(findings_path, out);
    std::string loc_csv = "artifact,loc\n";
    for (const auto& [artifact, loc] : loc_by_artifact)
        loc_csv += csv_row({artifact, std::to_string(loc)});
    write_file_atomic(loc_path, loc_csv);
}

FindingSet FindingSet::load(const std::string& findings_path,
                            const std::string& loc_path) {
    FindingSet set;
    long line_no = 0;
    for (const auto& line : split_lines(read_file(findings_path))) {
        ++line_no;
        if (trim(line).empty()) continue;
        json record = json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (record.is_discarded() || !record.is_object())
            throw ParseError("malformed finding record", line_no);
        Finding f;
        f.artifact_path = record.at("file").get<std::string>();
        f.rule_id = record.value("rule_id", std::string());
        if (record.contains("cwe") && !record["cwe"].is_null())
            f.cwe = record["cwe"].get<int>();
        f.severity = parse_severity(record.at("severity").get<std::string>());
        f.line = record.value("line", 0);
        f.message = record.value("message", std::string());
        f.origin = record.value("origin", std::string("builtin")) == "ingested"
                       ? FindingOrigin::Ingested
                       : FindingOrigin::Builtin;
        set.findings.push_back(std::move(f));
    }
    const CsvDocument loc = parse_csv(read_file(loc_path));
    for (const auto& row : loc.rows)
        set.loc_by_artifact[row[0]] = std::stoll(row[1]);
    return set;
}

FindingSet scan_artifacts(const RunManifest& manifest,
                          const std::string& artifact_root,
                          const RuleSet& rules) {
    FindingSet set;
    for (const auto& entry : manifest.entries) {
        if (entry.status != CellStatus::Done) continue;
        const fs::path path = fs::path(artifact_root) / entry.artifact_path;
        if (!fs::exists(path))
            throw ValidationError("manifest artifact missing on disk: " +
                                  entry.artifact_path);
        const std::string source = read_file(path.string());
        const Language language = entry.key.language;
        set.loc_by_artifact[entry.artifact_path] = count_loc(source, language);
        auto found = rules.scan(source, language);
        for (auto& f : found) {
            f.artifact_path = entry.artifact_path;
            set.findings.push_back(std::move(f));
        }
    }
    sort_findings(set.findings);
    return set;
}

FindingSet ingest_findings(const std::string& report_path,
                           const SeverityMap& severity_map,
                           const RunManifest& manifest,
                           const std::string& artifact_root) {
    FindingSet set;
    // The LoC table covers every done artifact even when the report is empty.
    for (const auto& entry : manifest.entries) {
        if (entry.status != CellStatus::Done) continue;
        const fs::path path = fs::path(artifact_root) / entry.artifact_path;
        if (!fs::exists(path))
            throw ValidationError("manifest artifact missing on disk: " +
                                  entry.artifact_path);
        set.loc_by_artifact[entry.artifact_path] =
            count_loc(read_file(path.string()), entry.key.language);
    }

    auto normalize = [](std::string p) {
        while (p.rfind("./", 0) == 0) p = p.substr(2);
        return p;
    };
    std::vector<std::string> unresolved;
    long line_no = 0;
    for (const auto& line : split_lines(read_file(report_path))) {
        ++line_no;
        if (trim(line).empty()) continue;
        json record = json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (record.is_discarded() || !record.is_object())
            throw ParseError("malformed findings report record", line_no);
        Finding f;
        try {
            f.artifact_path = normalize(record.at("file").get<std::string>());
            f.rule_id = record.value("rule_id", std::string());
            if (record.contains("cwe") && !record["cwe"].is_null())
                f.cwe = record["cwe"].get<int>();
            f.severity =
                severity_map.map_label(record.at("severity").get<std::string>());
            f.line = record.value("line", 0);
            f.message = record.value("message", std::string());
        } catch (const json::exception& e) {
            throw ParseError(std::string("malformed findings report record: ") +
                                 e.what(),
                             line_no);
        }
        f.origin = FindingOrigin::Ingested;
        if (!manifest.by_artifact.count(f.artifact_path)) {
            unresolved.push_back(f.artifact_path);
            continue;
        }
        set.findings.push_back(std::move(f));
    }
    if (!unresolved.empty()) {
        std::sort(unresolved.begin(), unresolved.end());
        unresolved.erase(std::unique(unresolved.begin(), unresolved.end()),
                         unresolved.end());
        throw ValidationError(
            "findings report references files absent from the manifest: " +
            join(unresolved, ", "));
    }
    sort_findings(set.findings);
    return set;
}

// ---------------------------------------------------------------------------
// SARIF adapter
// ---------------------------------------------------------------------------

namespace {

std::optional<int> cwe_from_tags(const json& rule) {
    if (!rule.contains("properties")) return std::nullopt;
    const auto& props = rule["properties"];
    std::vector<std::string> candidates;
    if (props.contains("tags") && props["tags"].is_array())
        for (const auto& tag : props["tags"])
            if (tag.is_string()) candidates.push_back(tag.get<std::string>());
    if (props.contains("cwe") && props["cwe"].is_string())
        candidates.push_back(props["cwe"].get<std::string>());
    if (props.contains("cwe") && props["cwe"].is_number_integer())
        return props["cwe"].get<int>();
    static const std::regex cwe_re("cwe[-/]?([0-9]+)", std::regex::icase);
    for (const auto& candidate : candidates) {
        std::smatch m;
        if (std::regex_search(candidate, m, cwe_re)) return std::stoi(m[1]);
    }
    return std::nullopt;
}

}  // namespace

std::string convert_sarif_to_jsonl(const std::string& sarif_json) {
    json doc = json::parse(sarif_json, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("runs"))
        throw ParseError("not a SARIF document (missing \"runs\")");
    std::string out;
    for (const auto& run : doc["runs"]) {
        std::map<std::string, json> rules_by_id;
        if (run.contains("tool") && run["tool"].contains("driver") &&
            run["tool"]["driver"].contains("rules"))
            for (const auto& rule : run["tool"]["driver"]["rules"])
                if (rule.contains("id"))
                    rules_by_id[rule["id"].get<std::string>()] = rule;
        if (!run.contains("results")) continue;
        for (const auto& result : run["results"]) {
            ordered_json row;
            std::string rule_id = result.value("ruleId", std::string());
            row["file"] = "";
            if (result.contains("locations") && !result["locations"].empty()) {
                const auto& loc = result["locations"][0];
                if (loc.contains("physicalLocation")) {
                    const auto& phys = loc["physicalLocation"];
                    if (phys.contains("artifactLocation") &&
                        phys["artifactLocation"].contains("uri"))
                        row["file"] =
                            phys["artifactLocation"]["uri"].get<std::string>();
                    if (phys.contains("region") &&
                        phys["region"].contains("startLine"))
                        row["line"] = phys["region"]["startLine"].get<int>();
                }
            }
            row["rule_id"] = rule_id;
            std::optional<int> cwe;
            if (const auto it = rules_by_id.find(rule_id); it != rules_by_id.end())
                cwe = cwe_from_tags(it->second);
            if (cwe) row["cwe"] = *cwe;
            else row["cwe"] = nullptr;
            row["severity"] = result.value("level", std::string("warning"));
            std::string message;
            if (result.contains("message") && result["message"].contains("text"))
                message = result["message"]["text"].get<std::string>();
            row["message"] = message;
            out += row.dump();
            out += '\n';
        }
    }
    return out;
}

}  // namespace secbench
