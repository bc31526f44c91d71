#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "secbench/common.hpp"

namespace secbench {

enum class TaskSource { Manual, CodeChallenge, SecurityDataset };
enum class Difficulty { Easy, Medium, Hard };

std::string task_source_name(TaskSource s);
TaskSource parse_task_source(std::string_view text);
std::string difficulty_name(Difficulty d);
Difficulty parse_difficulty(std::string_view text);

struct Task {
    int task_id = 0;
    std::string title;
    std::string description;
    std::optional<std::string> hints;
    TaskSource source = TaskSource::Manual;
    Difficulty difficulty = Difficulty::Easy;
    std::vector<std::string> tags;  // kept in file order, deduplicated
};

class TagTaxonomy {
public:
    static TagTaxonomy bundled_default();
    static TagTaxonomy load(const std::string& path);

    const std::vector<std::pair<std::string, std::string>>& entries() const {
        return entries_;
    }
    bool contains(std::string_view tag) const;
    // Case-insensitive, whitespace-trimmed lookup returning the canonical name.
    std::optional<std::string> canonical(std::string_view tag) const;
    // Position in the taxonomy order; used for deterministic tag ordering.
    int index_of(std::string_view tag) const;

    explicit TagTaxonomy(std::vector<std::pair<std::string, std::string>> entries);

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

struct TaskSet {
    std::vector<Task> tasks;
    const Task* find(int task_id) const;
};

struct CweEntry {
    int cwe_id = 0;
    std::string name;
    std::string description;
    std::string primary_tag;
    std::string tag_description;
    std::string reason_tag;
    std::string mitigation;
    std::string applicable_languages;
    std::vector<std::string> additional_tags;

    bool has_tag(std::string_view tag) const;
};

struct CweCatalog {
    std::vector<CweEntry> entries;
    std::map<std::string, std::set<int>> index;  // tag -> cwe ids
    std::string mitre_version;                   // informational metadata

    const CweEntry* find(int cwe_id) const;
    // Rebuilds the index from entries; load() stores the same thing, so the
    // two must always agree (checked by tests).
    std::map<std::string, std::set<int>> build_index() const;
};

TaskSet load_tasks(const std::string& path, const TagTaxonomy& taxonomy,
                   bool strict = true);
// Round-trip serialization used by tests and corpus tooling.
std::string serialize_tasks(const TaskSet& tasks);

CweCatalog load_cwe_catalog(const std::string& path, const TagTaxonomy& taxonomy);

// Union of entries carrying any of the given tags (primary or additional),
// deduplicated, ascending by cwe_id so prompt rendering is deterministic.
std::vector<CweEntry> cwes_for_tags(const CweCatalog& catalog,
                                    const std::vector<std::string>& tags,
                                    const TagTaxonomy& taxonomy);

}  // namespace secbench
