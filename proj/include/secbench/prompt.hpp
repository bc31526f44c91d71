#pragma once

#include <string>
#include <vector>

#include "secbench/corpus.hpp"

namespace secbench {

struct RenderedPrompt {
    PromptMethod method = PromptMethod::Vanilla;
    int task_id = 0;
    std::string text;
    std::vector<int> injected_cwe_ids;  // empty unless method is WaZeroCoT
};

struct TagClassification {
    int task_id = 0;
    std::vector<std::string> tags;      // canonical names, taxonomy order
    std::string raw_response;
    std::vector<std::string> warnings;  // e.g. dropped unknown tags
};

// Prompt templates keyed by method label plus "classification".  Placeholders:
//   {{description}}  the task description
//   {{cwe_list}}     the weaknesses block (WA-0CoT) or empty (CoT)
//   {{tags}}         the taxonomy enumeration (classification only)
struct TemplateSet {
    static TemplateSet bundled_default();
    // Replaces any template for which <dir>/<key>.txt exists
    // (keys: classification, Vanilla, ZeroShot, CoT, WA-0CoT).
    void load_overrides(const std::string& dir);

    std::string classification;
    std::string vanilla;
    std::string zero_shot;
    std::string cot;       // shared by ZeroShotCoT and WA-0CoT
    std::string wa_cot;
};

// One catalog entry formatted for injection into the WA-0CoT prompt.
std::string format_cwe_line(const CweEntry& entry);

// Shown in place of the CWE list when classification returned no tags or the
// tags map to no catalog entries.
extern const char* const kEmptyRetrievalPlaceholder;

class PromptEngine {
public:
    // max_cwes caps the number of injected CWE lines (0 = no cap); the cap
    // exists to relieve context-window pressure on small models.
    PromptEngine(TagTaxonomy taxonomy, TemplateSet templates, int max_cwes = 0);

    const TagTaxonomy& taxonomy() const { return taxonomy_; }

    RenderedPrompt render_classification_prompt(const Task& task) const;

    // For WaZeroCoT `cwes` must be the retrieval result; for every other
    // method it must be empty (contract violation otherwise).
    RenderedPrompt render_prompt(const Task& task, PromptMethod method,
                                 const std::vector<CweEntry>& cwes = {}) const;

    TagClassification parse_tag_response(int task_id,
                                         const std::string& raw) const;

private:
    TagTaxonomy taxonomy_;
    TemplateSet templates_;
    int max_cwes_;
};

class Gateway;  // gateway.hpp

struct ClassificationOutcome {
    TagClassification classification;
    std::vector<CweEntry> cwes;
    std::string prompt_hash;  // hash of the classification prompt
};

// The WA-0CoT first stage: classification prompt -> provider (through the
// gateway's retry loop) -> tag parsing -> catalog retrieval.  Both the
// intermediate classification and the final CWE list are returned so the
// orchestrator can record them for audit.
ClassificationOutcome classify_and_retrieve(const PromptEngine& engine,
                                            const Task& task,
                                            const CweCatalog& catalog,
                                            Gateway& gateway,
                                            const std::string& provider_name);

}  // namespace secbench
