#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "secbench/analyzer.hpp"
#include "secbench/orchestrator.hpp"

namespace secbench {

// Normalized CWE distribution for one (language, method, model) group.
struct CweProfile {
    Language language = Language::C;
    PromptMethod method = PromptMethod::Vanilla;
    std::string model;
    std::map<int, std::int64_t> counts;  // cwe_id -> finding count (> 0)

    std::int64_t total() const;
    std::map<int, double> distribution() const;  // counts / total
};

// Groups CWE-bearing findings through the manifest; groups with no findings
// produce no profile.
std::vector<CweProfile> build_profiles(const RunManifest& manifest,
                                       const FindingSet& findings);

// Shannon entropy in nats over the normalized distribution (0 log 0 = 0).
double entropy(const CweProfile& profile);
// Herfindahl-Hirschman index: sum of squared shares.
double hhi(const CweProfile& profile);

inline constexpr double kDefaultEpsilon = 1e-12;

struct DivergenceResult {
    Language language = Language::C;
    std::string model;
    PromptMethod comparator = PromptMethod::Vanilla;  // the non-WA-0CoT side
    double jsd_nats = 0.0;
    double epsilon = kDefaultEpsilon;
};

// Jensen-Shannon divergence in nats between two profiles over the union
// support: add epsilon to every mass, renormalize, then average the two KL
// halves against the midpoint.  Result lies in [0, ln 2].
double jsd(const CweProfile& a, const CweProfile& b,
           double epsilon = kDefaultEpsilon);

// WA-0CoT vs each of CoT, ZeroShot, Vanilla for every (language, model) that
// has a WA-0CoT profile; absent comparator profiles are skipped with a note.
std::vector<DivergenceResult> compare_wa0cot(
    const std::vector<CweProfile>& profiles, double epsilon,
    std::vector<std::string>* notes = nullptr);

struct DivergenceSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double median = 0.0;   // midpoint average for even n
    double p90 = 0.0;      // linear interpolation at rank (n-1) * 0.9
    double max = 0.0;
};

DivergenceSummary summarize_divergences(std::vector<double> values);

struct LanguageDivergenceRow {
    Language language;
    DivergenceSummary summary;
};
std::vector<LanguageDivergenceRow> summarize_by_language(
    const std::vector<DivergenceResult>& comparisons);

struct ComparatorDivergenceRow {
    PromptMethod comparator;
    Language language;
    DivergenceSummary summary;
};
std::vector<ComparatorDivergenceRow> summarize_by_comparator(
    const std::vector<DivergenceResult>& comparisons);

// Mean entropy / HHI across models per (language, method).  Groups whose
// pooled finding count is below min_count are dropped.
struct EntropyHhiRow {
    Language language;
    PromptMethod method;
    double mean_entropy = 0.0;
    double mean_hhi = 0.0;
    int models_included = 0;
};
std::vector<EntropyHhiRow> entropy_hhi_table(
    const std::vector<CweProfile>& profiles, std::int64_t min_count = 0);

struct DeltaRow {
    Language language;
    double delta_entropy = 0.0;  // WA-0CoT minus Vanilla
    double delta_hhi = 0.0;
};
// Languages missing either method's average are skipped with a note.
std::vector<DeltaRow> wa_vanilla_deltas(const std::vector<EntropyHhiRow>& rows,
                                        std::vector<std::string>* notes = nullptr);

struct TopCweTable {
    std::vector<PromptMethod> methods;   // column order as requested
    std::vector<int> cwe_ids;            // row order (see below)
    // counts[row][col]: aggregated count of cwe_ids[row] under methods[col].
    std::vector<std::vector<std::int64_t>> counts;
};

// Rows: union of each listed method's top-N CWEs by count aggregated across
// models (cutoff ties resolved toward the lower cwe_id).  Row order: count
// under the first listed method descending, ties by ascending cwe_id.
TopCweTable top_cwe_table(const std::vector<CweProfile>& profiles,
                          Language language,
                          const std::vector<PromptMethod>& methods,
                          int top_n);

}  // namespace secbench
