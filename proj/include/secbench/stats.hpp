#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "secbench/analyzer.hpp"
#include "secbench/orchestrator.hpp"

namespace secbench {

// Per (model, method, language) aggregate.  Only findings that carry a CWE
// count as vulnerabilities; LoC is summed over vulnerable tasks only.
struct MetricsCell {
    std::string model;
    PromptMethod method = PromptMethod::Vanilla;
    Language language = Language::C;
    std::int64_t tasks_total = 0;       // T
    std::int64_t vulnerable_tasks = 0;  // V
    std::int64_t loc_vulnerable = 0;    // L
    std::int64_t vulnerabilities = 0;   // S

    double frequency() const;           // F = V / T  (0 if T == 0)
    double severity_rate() const;       // R = S / L  (0 if L == 0)
};

MetricsCell build_cell(const RunManifest& manifest, const FindingSet& findings,
                       const std::string& model, PromptMethod method,
                       Language language);
std::vector<MetricsCell> build_all_cells(const RunManifest& manifest,
                                         const FindingSet& findings);

enum class ChiSquareKind { Frequency, Severity };

struct ChiSquareResult {
    ChiSquareKind kind = ChiSquareKind::Frequency;
    double statistic = 0.0;
    int df = 0;
    double p_value = 1.0;
    bool low_expected_warning = false;  // some expected count < 5
    bool degenerate = false;            // all observed are zero
    std::vector<PromptMethod> excluded_methods;  // severity: L == 0 methods
    std::vector<double> expected;       // per included method, call order
};

// Goodness-of-fit of per-method vulnerable-task counts V against the pooled
// expectation E_j = T_j * (sum V / sum T).  df = included methods - 1.
ChiSquareResult chi_square_frequency(const std::vector<MetricsCell>& cells);

// Same shape over vulnerability counts S with E_j = L_j * (sum S / sum L);
// methods with L == 0 are excluded (flagged) and df shrinks accordingly.
ChiSquareResult chi_square_severity(const std::vector<MetricsCell>& cells);

// Upper-tail chi-square probability Q(df/2, statistic/2) via the regularized
// incomplete gamma function (series for x < a+1, Lentz continued fraction
// otherwise).  Absolute error <= 1e-8 over the tested domain.
double chi_square_pvalue(double statistic, int df);

// Exposed for direct numeric testing.
double regularized_gamma_q(double a, double x);

}  // namespace secbench
