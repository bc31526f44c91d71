#include "secbench/corpus.hpp"

#include <algorithm>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "secbench/csv.hpp"

namespace secbench {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string task_source_name(TaskSource s) {
    switch (s) {
        case TaskSource::Manual: return "Manual";
        case TaskSource::CodeChallenge: return "CodeChallenge";
        case TaskSource::SecurityDataset: return "SecurityDataset";
    }
    throw Error("unreachable task source");
}

TaskSource parse_task_source(std::string_view text) {
    const std::string t = to_lower(trim(text));
    if (t == "manual") return TaskSource::Manual;
    if (t == "codechallenge" || t == "code-challenge") return TaskSource::CodeChallenge;
    if (t == "securitydataset" || t == "security-dataset")
        return TaskSource::SecurityDataset;
    throw ValidationError("unknown task source: \"" + std::string(trim(text)) + "\"");
}

std::string difficulty_name(Difficulty d) {
    switch (d) {
        case Difficulty::Easy: return "Easy";
        case Difficulty::Medium: return "Medium";
        case Difficulty::Hard: return "Hard";
    }
    throw Error("unreachable difficulty");
}

Difficulty parse_difficulty(std::string_view text) {
    const std::string t = to_lower(trim(text));
    if (t == "easy") return Difficulty::Easy;
    if (t == "medium") return Difficulty::Medium;
    if (t == "hard") return Difficulty::Hard;
    throw ValidationError("unknown difficulty: \"" + std::string(trim(text)) + "\"");
}

// ---------------------------------------------------------------------------
// Taxonomy
// ---------------------------------------------------------------------------

namespace {

const std::pair<const char*, const char*> kDefaultTaxonomy[] = {
    {"Language Basics",
     "Correct syntax, variables, data types, control flow, and adherence to "
     "coding standards."},
    {"Memory & Resource Management",
     "Proper use of dynamic allocation, stack vs. heap usage, pointer "
     "arithmetic, and prevention of resource leaks."},
    {"Concurrency & Parallelism",
     "Multithreading, synchronization, lock management, and race condition "
     "handling."},
    {"Networking & Communication",
     "Socket programming, client-server interactions, protocol handling "
     "(TCP/UDP), and web sockets."},
    {"Data Safety & Security",
     "Encryption of sensitive data at rest and in transit, secure storage, "
     "database protection, and file security."},
    {"Web Development & APIs",
     "RESTful APIs, session management, microservices, GraphQL, and front-end "
     "integration."},
    {"Database Management",
     "SQL/NoSQL queries, ORM frameworks, and transaction handling."},
    {"Input Validation & Sanitization",
     "Preventing injections through user input sanitization, type checks, and "
     "length constraints."},
    {"File & I/O Handling",
     "Secure file reading/writing, directory traversal, file permissions, and "
     "path handling."},
    {"Cryptography",
     "Secure encryption, hashing, key management, and SSL/TLS best practices."},
    {"Authentication & Authorization",
     "Secure password handling, login flows, session tokens, and RBAC "
     "enforcement."},
    {"Error Handling",
     "Structured exception handling and graceful failure recovery."},
    {"Logging",
     "Secure, structured logging without exposing sensitive information."},
    {"Code Injection",
     "Protection against OS command injection and script injection."},
    {"Serialization & Deserialization",
     "Safe handling of JSON, XML, and binary data deserialization."},
    {"Hardcoding",
     "Avoidance of hardcoded credentials, API keys, and secret data."},
};

}  // namespace

TagTaxonomy::TagTaxonomy(std::vector<std::pair<std::string, std::string>> entries)
    : entries_(std::move(entries)) {
    std::set<std::string> seen;
    for (const auto& [name, desc] : entries_) {
        if (trim(name).empty()) throw ValidationError("taxonomy tag name is empty");
        if (!seen.insert(name).second)
            throw ValidationError("duplicate taxonomy tag: \"" + name + "\"");
    }
}

TagTaxonomy TagTaxonomy::bundled_default() {
    std::vector<std::pair<std::string, std::string>> entries;
    for (const auto& [name, desc] : kDefaultTaxonomy) entries.emplace_back(name, desc);
    return TagTaxonomy(std::move(entries));
}

TagTaxonomy TagTaxonomy::load(const std::string& path) {
    const CsvDocument doc = parse_csv(read_file(path));
    if (doc.header.size() < 2 || !iequals(trim(doc.header[0]), "tag"))
        throw ParseError("taxonomy file must have columns tag,description: " + path);
    std::vector<std::pair<std::string, std::string>> entries;
    for (const auto& row : doc.rows) entries.emplace_back(trim(row[0]), trim(row[1]));
    if (entries.empty()) throw ValidationError("taxonomy file has no rows: " + path);
    return TagTaxonomy(std::move(entries));
}

bool TagTaxonomy::contains(std::string_view tag) const {
    return std::any_of(entries_.begin(), entries_.end(),
                       [&](const auto& e) { return e.first == tag; });
}

std::optional<std::string> TagTaxonomy::canonical(std::string_view tag) const {
    const std::string needle = trim(tag);
    for (const auto& [name, desc] : entries_)
        if (iequals(name, needle)) return name;
    return std::nullopt;
}

int TagTaxonomy::index_of(std::string_view tag) const {
    for (std::size_t i = 0; i < entries_.size(); ++i)
        if (entries_[i].first == tag) return static_cast<int>(i);
    return -1;
}

// ---------------------------------------------------------------------------
// Tasks
// ---------------------------------------------------------------------------

const Task* TaskSet::find(int task_id) const {
    for (const auto& t : tasks)
        if (t.task_id == task_id) return &t;
    return nullptr;
}

TaskSet load_tasks(const std::string& path, const TagTaxonomy& taxonomy,
                   bool strict) {
    const std::string content = read_file(path);
    TaskSet set;
    std::map<int, long> seen_lines;  // task_id -> first line number
    long line_no = 0;
    for (const auto& line : split_lines(content)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json record;
        try {
            record = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(std::string("malformed task record: ") + e.what(),
                             line_no);
        }
        if (!record.is_object())
            throw ParseError("task record is not an object", line_no);
        Task task;
        try {
            task.task_id = record.at("task_id").get<int>();
            task.title = record.value("title", std::string());
            task.description = record.at("description").get<std::string>();
            if (record.contains("hints") && !record["hints"].is_null())
                task.hints = record["hints"].get<std::string>();
            task.source = parse_task_source(record.at("source").get<std::string>());
            task.difficulty =
                parse_difficulty(record.at("difficulty").get<std::string>());
            if (record.contains("tags"))
                for (const auto& t : record.at("tags"))
                    task.tags.push_back(t.get<std::string>());
        } catch (const json::exception& e) {
            throw ParseError(std::string("malformed task record: ") + e.what(),
                             line_no);
        }
        if (task.task_id <= 0)
            throw ValidationError("task_id must be a positive integer (line " +
                                  std::to_string(line_no) + ")");
        if (trim(task.description).empty())
            throw ValidationError("task " + std::to_string(task.task_id) +
                                  " has an empty description");
        auto [it, inserted] = seen_lines.emplace(task.task_id, line_no);
        if (!inserted)
            throw ValidationError(
                "duplicate task_id " + std::to_string(task.task_id) +
                " (lines " + std::to_string(it->second) + " and " +
                std::to_string(line_no) + ")");
        // Canonicalize tags to the taxonomy's casing, deduplicate keeping
        // first-seen order, and validate membership.
        std::vector<std::string> tags;
        for (const auto& tag : task.tags) {
            const auto canon = taxonomy.canonical(tag);
            if (!canon) {
                if (strict)
                    throw ValidationError("task " + std::to_string(task.task_id) +
                                          " uses unknown tag \"" + tag + "\"");
                continue;  // relaxed: drop unknown tags
            }
            if (std::find(tags.begin(), tags.end(), *canon) != tags.end())
                continue;
            tags.push_back(*canon);
        }
        task.tags = std::move(tags);
        if (strict && task.tags.empty())
            throw ValidationError("task " + std::to_string(task.task_id) +
                                  " has no valid tags (strict mode)");
        set.tasks.push_back(std::move(task));
    }
    return set;
}

std::string serialize_tasks(const TaskSet& tasks) {
    std::string out;
    for (const auto& t : tasks.tasks) {
        ordered_json record;
        record["task_id"] = t.task_id;
        record["title"] = t.title;
        record["description"] = t.description;
        if (t.hints) record["hints"] = *t.hints;
        record["source"] = task_source_name(t.source);
        record["difficulty"] = difficulty_name(t.difficulty);
        record["tags"] = t.tags;
        out += record.dump();
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// CWE catalog
// ---------------------------------------------------------------------------

bool CweEntry::has_tag(std::string_view tag) const {
    if (primary_tag == tag) return true;
    return std::find(additional_tags.begin(), additional_tags.end(), tag) !=
           additional_tags.end();
}

const CweEntry* CweCatalog::find(int cwe_id) const {
    for (const auto& e : entries)
        if (e.cwe_id == cwe_id) return &e;
    return nullptr;
}

std::map<std::string, std::set<int>> CweCatalog::build_index() const {
    std::map<std::string, std::set<int>> idx;
    for (const auto& e : entries) {
        idx[e.primary_tag].insert(e.cwe_id);
        for (const auto& tag : e.additional_tags) idx[tag].insert(e.cwe_id);
    }
    return idx;
}

CweCatalog load_cwe_catalog(const std::string& path, const TagTaxonomy& taxonomy) {
    const CsvDocument doc = parse_csv(read_file(path));
    const std::vector<std::string> expected = {
        "cwe_id", "name", "description", "primary_tag", "tag_description",
        "reason_tag", "mitigation", "applicable_languages", "additional_tags"};
    if (doc.header.size() < expected.size())
        throw ParseError("catalog header must contain the columns " +
                         join(expected, ", "));
    for (std::size_t i = 0; i < expected.size(); ++i)
        if (!iequals(trim(doc.header[i]), expected[i]))
            throw ParseError("catalog column " + std::to_string(i + 1) +
                             " must be \"" + expected[i] + "\", found \"" +
                             trim(doc.header[i]) + "\"");
    CweCatalog catalog;
    for (const auto& comment : doc.comments) {
        const auto colon = comment.find(':');
        if (colon != std::string::npos &&
            iequals(trim(comment.substr(0, colon)), "mitre_version"))
            catalog.mitre_version = trim(comment.substr(colon + 1));
    }
    std::set<int> seen;
    for (const auto& row : doc.rows) {
        CweEntry entry;
        try {
            entry.cwe_id = std::stoi(trim(row[0]));
        } catch (const std::exception&) {
            throw ParseError("catalog cwe_id is not an integer: \"" + row[0] + "\"");
        }
        if (entry.cwe_id <= 0)
            throw ValidationError("catalog cwe_id must be positive: " + row[0]);
        entry.name = trim(row[1]);
        entry.description = trim(row[2]);
        entry.primary_tag = trim(row[3]);
        entry.tag_description = trim(row[4]);
        entry.reason_tag = trim(row[5]);
        entry.mitigation = trim(row[6]);
        entry.applicable_languages = trim(row[7]);
        for (const auto& tag : split(row[8], ';')) {
            const std::string t = trim(tag);
            if (!t.empty()) entry.additional_tags.push_back(t);
        }
        if (!seen.insert(entry.cwe_id).second)
            throw ValidationError("duplicate catalog entry CWE-" +
                                  std::to_string(entry.cwe_id));
        if (!taxonomy.contains(entry.primary_tag))
            throw ValidationError("CWE-" + std::to_string(entry.cwe_id) +
                                  " uses unknown primary tag \"" +
                                  entry.primary_tag + "\"");
        for (const auto& tag : entry.additional_tags)
            if (!taxonomy.contains(tag))
                throw ValidationError("CWE-" + std::to_string(entry.cwe_id) +
                                      " uses unknown additional tag \"" + tag + "\"");
        if (entry.description.empty() || entry.mitigation.empty())
            throw ValidationError("CWE-" + std::to_string(entry.cwe_id) +
                                  " must have a description and a mitigation");
        catalog.entries.push_back(std::move(entry));
    }
    if (catalog.entries.empty()) throw ValidationError("empty catalog: " + path);
    catalog.index = catalog.build_index();
    return catalog;
}

std::vector<CweEntry> cwes_for_tags(const CweCatalog& catalog,
                                    const std::vector<std::string>& tags,
                                    const TagTaxonomy& taxonomy) {
    // Queries arrive from task files and model responses in arbitrary casing;
    // the catalog stores taxonomy-cased tags, so canonicalize before matching.
    std::vector<std::string> canonical;
    for (const auto& tag : tags) {
        auto canon = taxonomy.canonical(tag);
        if (!canon) throw ValidationError("unknown tag \"" + tag + "\"");
        canonical.push_back(std::move(*canon));
    }
    std::vector<CweEntry> out;
    std::set<int> picked;
    for (const auto& entry : catalog.entries) {
        for (const auto& tag : canonical) {
            if (entry.has_tag(tag) && picked.insert(entry.cwe_id).second) {
                out.push_back(entry);
                break;
            }
        }
    }
    std::sort(out.begin(), out.end(),
              [](const CweEntry& a, const CweEntry& b) { return a.cwe_id < b.cwe_id; });
    return out;
}

}  // namespace secbench
