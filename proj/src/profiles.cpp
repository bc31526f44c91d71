#include "secbench/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <tuple>

namespace secbench {

std::int64_t CweProfile::total() const {
    std::int64_t sum = 0;
    for (const auto& [cwe, count] : counts) {
        if (count <= 0)
            throw std::invalid_argument("profile count for CWE-" +
                                        std::to_string(cwe) +
                                        " must be positive");
        sum += count;
    }
    return sum;
}

std::map<int, double> CweProfile::distribution() const {
    const double t = static_cast<double>(total());
    if (t == 0.0)
        throw std::invalid_argument("cannot normalize an empty profile");
    std::map<int, double> dist;
    for (const auto& [cwe, count] : counts)
        dist[cwe] = static_cast<double>(count) / t;
    return dist;
}

std::vector<CweProfile> build_profiles(const RunManifest& manifest,
                                       const FindingSet& findings) {
    std::map<std::tuple<Language, PromptMethod, std::string>,
             std::map<int, std::int64_t>>
        grouped;
    for (const auto& f : findings.findings) {
        if (!f.cwe) continue;
        const auto it = manifest.by_artifact.find(f.artifact_path);
        if (it == manifest.by_artifact.end())
            throw ValidationError("finding references unknown artifact: " +
                                  f.artifact_path);
        const CellKey& key = it->second;
        ++grouped[{key.language, key.method, key.model}][*f.cwe];
    }
    std::vector<CweProfile> profiles;
    for (const auto& [key, counts] : grouped) {
        CweProfile profile;
        profile.language = std::get<0>(key);
        profile.method = std::get<1>(key);
        profile.model = std::get<2>(key);
        profile.counts = counts;
        profiles.push_back(std::move(profile));
    }
    return profiles;
}

double entropy(const CweProfile& profile) {
    double h = 0.0;
    for (const auto& [cwe, share] : profile.distribution())
        if (share > 0.0) h -= share * std::log(share);
    return h;
}

double hhi(const CweProfile& profile) {
    double sum = 0.0;
    for (const auto& [cwe, share] : profile.distribution())
        sum += share * share;
    return sum;
}

// ---------------------------------------------------------------------------
// Jensen-Shannon divergence
// ---------------------------------------------------------------------------

double jsd(const CweProfile& a, const CweProfile& b, double epsilon) {
    if (!(epsilon > 0.0))
        throw std::invalid_argument("epsilon must be positive");
    const auto pa = a.distribution();
    const auto pb = b.distribution();
    std::set<int> support;
    for (const auto& [cwe, share] : pa) support.insert(cwe);
    for (const auto& [cwe, share] : pb) support.insert(cwe);
    if (support.empty())
        throw std::invalid_argument("JSD of empty distributions");

    // Smooth both distributions over the union support, then renormalize so
    // every point carries strictly positive mass.
    std::vector<double> p, q;
    double p_sum = 0.0, q_sum = 0.0;
    for (const int cwe : support) {
        const double pv = (pa.count(cwe) ? pa.at(cwe) : 0.0) + epsilon;
        const double qv = (pb.count(cwe) ? pb.at(cwe) : 0.0) + epsilon;
        p.push_back(pv);
        q.push_back(qv);
        p_sum += pv;
        q_sum += qv;
    }
    double kl_pm = 0.0, kl_qm = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double pi = p[i] / p_sum;
        const double qi = q[i] / q_sum;
        const double mi = 0.5 * (pi + qi);
        kl_pm += pi * std::log(pi / mi);
        kl_qm += qi * std::log(qi / mi);
    }
    double result = 0.5 * kl_pm + 0.5 * kl_qm;
    if (result < 0.0) result = 0.0;  // guard round-off just below zero
    return result;
}

std::vector<DivergenceResult> compare_wa0cot(
    const std::vector<CweProfile>& profiles, double epsilon,
    std::vector<std::string>* notes) {
    std::map<std::tuple<Language, std::string, PromptMethod>,
             const CweProfile*>
        by_key;
    for (const auto& profile : profiles)
        by_key[{profile.language, profile.model, profile.method}] = &profile;

    static const PromptMethod kComparators[] = {
        PromptMethod::ZeroShotCoT, PromptMethod::ZeroShot,
        PromptMethod::Vanilla};

    std::vector<DivergenceResult> results;
    std::set<std::pair<Language, std::string>> wa_groups;
    for (const auto& profile : profiles)
        if (profile.method == PromptMethod::WaZeroCoT)
            wa_groups.insert({profile.language, profile.model});

    for (const auto& [language, model] : wa_groups) {
        const CweProfile* wa =
            by_key.at({language, model, PromptMethod::WaZeroCoT});
        for (const PromptMethod comparator : kComparators) {
            const auto it = by_key.find({language, model, comparator});
            if (it == by_key.end()) {
                if (notes)
                    notes->push_back(
                        "no " + std::string(method_label(comparator)) +
                        " profile for " + std::string(language_name(language)) +
                        "/" + model + "; comparison skipped");
                continue;
            }
            DivergenceResult result;
            result.language = language;
            result.model = model;
            result.comparator = comparator;
            result.epsilon = epsilon;
            result.jsd_nats = jsd(*wa, *it->second, epsilon);
            results.push_back(std::move(result));
        }
    }
    return results;
}

// ---------------------------------------------------------------------------
// Summaries
// ---------------------------------------------------------------------------

namespace {

double interpolated_quantile(const std::vector<double>& sorted, double q) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double rank = static_cast<double>(n - 1) * q;
    const std::size_t lo = static_cast<std::size_t>(std::floor(rank));
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double frac = rank - static_cast<double>(lo);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

}  // namespace

DivergenceSummary summarize_divergences(std::vector<double> values) {
    if (values.empty())
        throw std::invalid_argument("cannot summarize zero divergences");
    std::sort(values.begin(), values.end());
    DivergenceSummary summary;
    summary.n = values.size();
    double sum = 0.0;
    for (const double v : values) sum += v;
    summary.mean = sum / static_cast<double>(values.size());
    summary.median = interpolated_quantile(values, 0.5);
    summary.p90 = interpolated_quantile(values, 0.9);
    summary.max = values.back();
    return summary;
}

std::vector<LanguageDivergenceRow> summarize_by_language(
    const std::vector<DivergenceResult>& comparisons) {
    std::map<Language, std::vector<double>> grouped;
    for (const auto& c : comparisons) grouped[c.language].push_back(c.jsd_nats);
    std::vector<LanguageDivergenceRow> rows;
    for (const Language language : kAllLanguages) {
        const auto it = grouped.find(language);
        if (it == grouped.end()) continue;
        rows.push_back({language, summarize_divergences(it->second)});
    }
    return rows;
}

std::vector<ComparatorDivergenceRow> summarize_by_comparator(
    const std::vector<DivergenceResult>& comparisons) {
    std::map<std::pair<PromptMethod, Language>, std::vector<double>> grouped;
    for (const auto& c : comparisons)
        grouped[{c.comparator, c.language}].push_back(c.jsd_nats);
    static const PromptMethod kComparators[] = {
        PromptMethod::ZeroShotCoT, PromptMethod::ZeroShot,
        PromptMethod::Vanilla};
    std::vector<ComparatorDivergenceRow> rows;
    for (const PromptMethod comparator : kComparators) {
        for (const Language language : kAllLanguages) {
            const auto it = grouped.find({comparator, language});
            if (it == grouped.end()) continue;
            rows.push_back(
                {comparator, language, summarize_divergences(it->second)});
        }
    }
    return rows;
}

std::vector<EntropyHhiRow> entropy_hhi_table(
    const std::vector<CweProfile>& profiles, std::int64_t min_count) {
    struct Acc {
        double entropy_sum = 0.0;
        double hhi_sum = 0.0;
        int models = 0;
    };
    std::map<std::pair<Language, PromptMethod>, Acc> grouped;
    for (const auto& profile : profiles) {
        if (profile.total() < min_count) continue;
        Acc& acc = grouped[{profile.language, profile.method}];
        acc.entropy_sum += entropy(profile);
        acc.hhi_sum += hhi(profile);
        ++acc.models;
    }
    std::vector<EntropyHhiRow> rows;
    for (const Language language : kAllLanguages) {
        for (const PromptMethod method : kAllMethods) {
            const auto it = grouped.find({language, method});
            if (it == grouped.end()) continue;
            const Acc& acc = it->second;
            rows.push_back({language, method,
                            acc.entropy_sum / acc.models,
                            acc.hhi_sum / acc.models, acc.models});
        }
    }
    return rows;
}

std::vector<DeltaRow> wa_vanilla_deltas(const std::vector<EntropyHhiRow>& rows,
                                        std::vector<std::string>* notes) {
    std::map<std::pair<Language, PromptMethod>, const EntropyHhiRow*> by_key;
    for (const auto& row : rows) by_key[{row.language, row.method}] = &row;
    std::vector<DeltaRow> deltas;
    for (const Language language : kAllLanguages) {
        const auto wa = by_key.find({language, PromptMethod::WaZeroCoT});
        const auto vanilla = by_key.find({language, PromptMethod::Vanilla});
        if (wa == by_key.end() || vanilla == by_key.end()) {
            if (by_key.count({language, PromptMethod::WaZeroCoT}) ||
                by_key.count({language, PromptMethod::Vanilla})) {
                if (notes)
                    notes->push_back(
                        std::string(language_name(language)) +
                        ": missing WA-0CoT or Vanilla average; delta skipped");
            }
            continue;
        }
        deltas.push_back(
            {language,
             wa->second->mean_entropy - vanilla->second->mean_entropy,
             wa->second->mean_hhi - vanilla->second->mean_hhi});
    }
    return deltas;
}

// ---------------------------------------------------------------------------
// Top-CWE table
// ---------------------------------------------------------------------------

TopCweTable top_cwe_table(const std::vector<CweProfile>& profiles,
                          Language language,
                          const std::vector<PromptMethod>& methods,
                          int top_n) {
    if (methods.empty())
        throw std::invalid_argument("top CWE table needs at least one method");
    if (top_n < 1) throw std::invalid_argument("top_n must be >= 1");

    // Aggregate counts across models per method for the requested language.
    std::map<PromptMethod, std::map<int, std::int64_t>> aggregated;
    for (const auto& profile : profiles) {
        if (profile.language != language) continue;
        for (const auto& [cwe, count] : profile.counts)
            aggregated[profile.method][cwe] += count;
    }

    std::set<int> selected;
    for (const PromptMethod method : methods) {
        const auto it = aggregated.find(method);
        if (it == aggregated.end()) continue;
        // Rank by count descending; ties toward the lower cwe_id so the
        // cutoff pick is deterministic.
        std::vector<std::pair<int, std::int64_t>> ranked(it->second.begin(),
                                                         it->second.end());
        std::sort(ranked.begin(), ranked.end(),
                  [](const auto& a, const auto& b) {
                      if (a.second != b.second) return a.second > b.second;
                      return a.first < b.first;
                  });
        const std::size_t keep =
            std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(top_n));
        for (std::size_t i = 0; i < keep; ++i) selected.insert(ranked[i].first);
    }

    auto count_for = [&](PromptMethod method, int cwe) -> std::int64_t {
        const auto mit = aggregated.find(method);
        if (mit == aggregated.end()) return 0;
        const auto cit = mit->second.find(cwe);
        return cit == mit->second.end() ? 0 : cit->second;
    };

    std::vector<int> rows(selected.begin(), selected.end());
    const PromptMethod primary = methods.front();
    std::sort(rows.begin(), rows.end(), [&](int a, int b) {
        const std::int64_t ca = count_for(primary, a);
        const std::int64_t cb = count_for(primary, b);
        if (ca != cb) return ca > cb;
        return a < b;
    });

    TopCweTable table;
    table.methods = methods;
    table.cwe_ids = rows;
    for (const int cwe : rows) {
        std::vector<std::int64_t> row;
        for (const PromptMethod method : methods)
            row.push_back(count_for(method, cwe));
        table.counts.push_back(std::move(row));
    }
    return table;
}

}  // namespace secbench
