#include "secbench/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <tuple>

namespace secbench {

double MetricsCell::frequency() const {
    if (tasks_total == 0) return 0.0;
    return static_cast<double>(vulnerable_tasks) /
           static_cast<double>(tasks_total);
}

double MetricsCell::severity_rate() const {
    if (loc_vulnerable == 0) return 0.0;
    return static_cast<double>(vulnerabilities) /
           static_cast<double>(loc_vulnerable);
}

// ---------------------------------------------------------------------------
// Cell construction
// ---------------------------------------------------------------------------

namespace {

bool counts_as_vulnerability(const Finding& f) { return f.cwe.has_value(); }

}  // namespace

MetricsCell build_cell(const RunManifest& manifest, const FindingSet& findings,
                       const std::string& model, PromptMethod method,
                       Language language) {
    MetricsCell cell;
    cell.model = model;
    cell.method = method;
    cell.language = language;

    std::map<std::string, std::int64_t> vuln_count_by_artifact;
    for (const auto& f : findings.findings) {
        if (!counts_as_vulnerability(f)) continue;
        ++vuln_count_by_artifact[f.artifact_path];
    }

    for (const auto& entry : manifest.entries) {
        if (entry.status != CellStatus::Done) continue;
        if (entry.key.model != model || entry.key.method != method ||
            entry.key.language != language)
            continue;
        ++cell.tasks_total;
        const auto it = vuln_count_by_artifact.find(entry.artifact_path);
        if (it == vuln_count_by_artifact.end()) continue;
        ++cell.vulnerable_tasks;
        cell.vulnerabilities += it->second;
        const auto loc_it = findings.loc_by_artifact.find(entry.artifact_path);
        if (loc_it == findings.loc_by_artifact.end())
            throw ValidationError("no LoC recorded for vulnerable artifact " +
                                  entry.artifact_path);
        cell.loc_vulnerable += loc_it->second;
    }
    return cell;
}

std::vector<MetricsCell> build_all_cells(const RunManifest& manifest,
                                         const FindingSet& findings) {
    std::set<std::tuple<std::string, PromptMethod, Language>> keys;
    for (const auto& entry : manifest.entries) {
        if (entry.status != CellStatus::Done) continue;
        keys.insert({entry.key.model, entry.key.method, entry.key.language});
    }
    std::vector<MetricsCell> cells;
    for (const auto& [model, method, language] : keys)
        cells.push_back(build_cell(manifest, findings, model, method, language));
    return cells;
}

// ---------------------------------------------------------------------------
// Chi-squared goodness of fit
// ---------------------------------------------------------------------------

namespace {

void validate_comparable(const std::vector<MetricsCell>& cells) {
    if (cells.size() < 2)
        throw ValidationError(
            "chi-squared test needs at least two method cells");
    std::set<PromptMethod> methods;
    std::set<std::string> models;
    std::set<Language> languages;
    for (const auto& cell : cells) {
        if (!methods.insert(cell.method).second)
            throw ValidationError("duplicate method cell in chi-squared input: " +
                                  std::string(method_label(cell.method)));
        models.insert(cell.model);
        languages.insert(cell.language);
        if (cell.tasks_total <= 0)
            throw ValidationError("chi-squared input cell for " +
                                  std::string(method_label(cell.method)) +
                                  " has no completed tasks");
    }
    if (models.size() != 1 || languages.size() != 1)
        throw ValidationError(
            "chi-squared cells must share one model and one language");
}

ChiSquareResult goodness_of_fit(ChiSquareKind kind,
                                const std::vector<double>& observed,
                                const std::vector<double>& baseline) {
    ChiSquareResult result;
    result.kind = kind;
    const double obs_sum =
        std::accumulate(observed.begin(), observed.end(), 0.0);
    const double base_sum =
        std::accumulate(baseline.begin(), baseline.end(), 0.0);
    if (obs_sum <= 0.0) {
        result.degenerate = true;
        result.statistic = 0.0;
        result.df = static_cast<int>(observed.size()) - 1;
        result.p_value = 1.0;
        result.expected.assign(observed.size(), 0.0);
        result.low_expected_warning = true;
        return result;
    }
    double stat = 0.0;
    for (std::size_t j = 0; j < observed.size(); ++j) {
        // Multiply before dividing: for integer-valued inputs the product is
        // exact, so proportional observations yield an exact zero statistic.
        const double expected = baseline[j] * obs_sum / base_sum;
        result.expected.push_back(expected);
        if (expected < 5.0) result.low_expected_warning = true;
        const double diff = observed[j] - expected;
        stat += diff * diff / expected;
    }
    result.statistic = stat;
    result.df = static_cast<int>(observed.size()) - 1;
    result.p_value = chi_square_pvalue(stat, result.df);
    return result;
}

}  // namespace

ChiSquareResult chi_square_frequency(const std::vector<MetricsCell>& cells) {
    validate_comparable(cells);
    std::vector<double> observed, baseline;
    for (const auto& cell : cells) {
        observed.push_back(static_cast<double>(cell.vulnerable_tasks));
        baseline.push_back(static_cast<double>(cell.tasks_total));
    }
    return goodness_of_fit(ChiSquareKind::Frequency, observed, baseline);
}

ChiSquareResult chi_square_severity(const std::vector<MetricsCell>& cells) {
    validate_comparable(cells);
    ChiSquareResult result;
    std::vector<double> observed, baseline;
    std::vector<PromptMethod> excluded;
    for (const auto& cell : cells) {
        if (cell.loc_vulnerable == 0) {
            excluded.push_back(cell.method);
            continue;
        }
        observed.push_back(static_cast<double>(cell.vulnerabilities));
        baseline.push_back(static_cast<double>(cell.loc_vulnerable));
    }
    if (observed.size() < 2) {
        result.kind = ChiSquareKind::Severity;
        result.degenerate = true;
        result.statistic = 0.0;
        result.df = 0;
        result.p_value = 1.0;
        result.excluded_methods = std::move(excluded);
        result.low_expected_warning = true;
        return result;
    }
    result = goodness_of_fit(ChiSquareKind::Severity, observed, baseline);
    result.excluded_methods = std::move(excluded);
    return result;
}

// ---------------------------------------------------------------------------
// Regularized incomplete gamma (upper tail)
// ---------------------------------------------------------------------------

namespace {

constexpr int kMaxIterations = 500;
constexpr double kEpsilon = 1e-15;
constexpr double kTiny = 1e-300;

// Lower regularized incomplete gamma P(a, x) by power series; converges
// quickly for x < a + 1.
double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int n = 0; n < kMaxIterations; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * kEpsilon)
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    throw std::runtime_error("gamma series failed to converge");
}

// Upper regularized incomplete gamma Q(a, x) by modified Lentz continued
// fraction; converges quickly for x >= a + 1.
double gamma_q_continued_fraction(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxIterations; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kEpsilon)
            return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    throw std::runtime_error("gamma continued fraction failed to converge");
}

}  // namespace

double regularized_gamma_q(double a, double x) {
    if (!(a > 0.0)) throw std::invalid_argument("gamma shape must be positive");
    if (std::isnan(x)) throw std::invalid_argument("gamma argument is NaN");
    if (x < 0.0) throw std::invalid_argument("gamma argument must be >= 0");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_continued_fraction(a, x);
}

double chi_square_pvalue(double statistic, int df) {
    if (df < 1) throw std::invalid_argument("degrees of freedom must be >= 1");
    if (std::isnan(statistic))
        throw std::invalid_argument("chi-square statistic is NaN");
    if (statistic < 0.0) {
        // Tolerate tiny negative round-off from upstream accumulation.
        if (statistic > -1e-12) statistic = 0.0;
        else throw std::invalid_argument("chi-square statistic must be >= 0");
    }
    return regularized_gamma_q(static_cast<double>(df) / 2.0, statistic / 2.0);
}

}  // namespace secbench
