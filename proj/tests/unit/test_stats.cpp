#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "secbench/analyzer.hpp"
#include "secbench/csv.hpp"
#include "secbench/orchestrator.hpp"
#include "secbench/stats.hpp"

using namespace secbench;

namespace {

RunManifest manifest_from_entries(const testutil::TempDir& dir,
                                  const std::vector<ManifestEntry>& entries) {
    std::string text;
    for (const auto& e : entries) text += e.to_json_line() + "\n";
    const std::string path = dir.sub("manifest.jsonl");
    write_file_atomic(path, text);
    return RunManifest::load(path);
}

ManifestEntry done_entry(int task_id, Language language, PromptMethod method,
                         const std::string& model = "mock-1") {
    ManifestEntry e;
    e.key.task_id = task_id;
    e.key.model = model;
    e.key.language = language;
    e.key.method = method;
    e.status = CellStatus::Done;
    e.artifact_path = artifact_relative_path(method, model, task_id, language);
    e.created_at = e.updated_at = "2026-01-01T00:00:00Z";
    return e;
}

// Four comparable method cells carrying the oracle's observed/baseline
// vectors: frequency reads (V, T), severity reads (S, L).
std::vector<MetricsCell> oracle_cells(ChiSquareKind kind,
                                      const std::array<std::int64_t, 4>& obs,
                                      const std::array<std::int64_t, 4>& base) {
    std::vector<MetricsCell> cells;
    for (std::size_t j = 0; j < 4; ++j) {
        MetricsCell cell;
        cell.model = "m";
        cell.language = Language::C;
        cell.method = kAllMethods[j];
        if (kind == ChiSquareKind::Frequency) {
            cell.vulnerable_tasks = obs[j];
            cell.tasks_total = base[j];
        } else {
            cell.vulnerabilities = obs[j];
            cell.loc_vulnerable = base[j];
            cell.tasks_total = 1;
            cell.vulnerable_tasks = 1;
        }
        cells.push_back(cell);
    }
    return cells;
}

}  // namespace

TEST_CASE("cell ratios guard their zero denominators") {
    MetricsCell cell;
    CHECK(cell.frequency() == 0.0);
    CHECK(cell.severity_rate() == 0.0);
    cell.tasks_total = 20;
    cell.vulnerable_tasks = 13;
    cell.loc_vulnerable = 400;
    cell.vulnerabilities = 26;
    CHECK(cell.frequency() == doctest::Approx(0.65));
    CHECK(cell.severity_rate() == doctest::Approx(0.065));
}

TEST_CASE("build_cell aggregates vulnerable tasks, findings, and LoC") {
    testutil::TempDir dir;
    // Five Python tasks under one (model, method, language) cell: the four
    // vulnerable snippet fixtures plus one clean artifact.
    const std::vector<std::string> sources = {
        "python_vanilla.py", "python_wa0cot.py", "python_zeroshot.py",
        "python_zeroshotcot.py", "clean_add.py"};
    std::vector<ManifestEntry> entries;
    for (int t = 1; t <= 5; ++t) {
        auto e = done_entry(t, Language::Python, PromptMethod::Vanilla);
        std::filesystem::path dest = dir.path() / e.artifact_path;
        std::filesystem::create_directories(dest.parent_path());
        std::filesystem::copy_file(
            testutil::fixture("snippets/" + sources[t - 1]), dest);
        entries.push_back(e);
    }
    // Pending and failed cells must not count toward T.
    ManifestEntry pending;
    pending.key = {6, "mock-1", Language::Python, PromptMethod::Vanilla, 1};
    ManifestEntry failed = pending;
    failed.key.task_id = 7;
    failed.status = CellStatus::Failed;
    entries.push_back(pending);
    entries.push_back(failed);
    const RunManifest manifest = manifest_from_entries(dir, entries);
    const RuleSet rules =
        RuleSet::load(testutil::data_file("rules/builtin.jsonl"));
    FindingSet findings = scan_artifacts(manifest, dir.str(), rules);

    SUBCASE("hand-computed totals") {
        const MetricsCell cell = build_cell(manifest, findings, "mock-1",
                                            PromptMethod::Vanilla,
                                            Language::Python);
        CHECK(cell.tasks_total == 5);
        CHECK(cell.vulnerable_tasks == 4);
        CHECK(cell.vulnerabilities == 4);
        CHECK(cell.loc_vulnerable == 21);  // clean artifact's LoC excluded
        CHECK(cell.frequency() == doctest::Approx(0.8));
        CHECK(cell.severity_rate() == doctest::Approx(4.0 / 21.0));
    }

    SUBCASE("findings without a CWE do not make a task vulnerable") {
        Finding no_cwe;
        no_cwe.artifact_path = entries[4].artifact_path;  // the clean one
        no_cwe.rule_id = "style-nit";
        no_cwe.severity = Severity::Other;
        no_cwe.origin = FindingOrigin::Ingested;
        findings.findings.push_back(no_cwe);
        const MetricsCell cell = build_cell(manifest, findings, "mock-1",
                                            PromptMethod::Vanilla,
                                            Language::Python);
        CHECK(cell.vulnerable_tasks == 4);
        CHECK(cell.vulnerabilities == 4);
    }

    SUBCASE("vulnerable artifact without a LoC row is an error") {
        findings.loc_by_artifact.erase(entries[0].artifact_path);
        CHECK_THROWS_AS(build_cell(manifest, findings, "mock-1",
                                   PromptMethod::Vanilla, Language::Python),
                        ValidationError);
    }

    SUBCASE("unmatched key yields an empty cell") {
        const MetricsCell cell = build_cell(manifest, findings, "other-model",
                                            PromptMethod::Vanilla,
                                            Language::Python);
        CHECK(cell.tasks_total == 0);
        CHECK(cell.frequency() == 0.0);
    }

    SUBCASE("build_all_cells covers each distinct done key once") {
        const auto cells = build_all_cells(manifest, findings);
        REQUIRE(cells.size() == 1);
        CHECK(cells[0].model == "mock-1");
        CHECK(cells[0].tasks_total == 5);
    }
}

TEST_CASE("frequency anchor: observed [6,7,9,10] over 200-task methods") {
    const auto cells =
        oracle_cells(ChiSquareKind::Frequency, {6, 7, 9, 10},
                     {200, 200, 200, 200});
    const ChiSquareResult res = chi_square_frequency(cells);
    // Pooled rate 32/800 makes every expected count exactly 8, so the
    // statistic (4+1+1+4)/8 = 1.25 is binary-exact.
    CHECK(res.statistic == 1.25);
    CHECK(res.df == 3);
    REQUIRE(res.expected.size() == 4);
    for (const double e : res.expected) CHECK(e == 8.0);
    CHECK(std::fabs(res.p_value - 0.7410388888165293) <= 1e-8);
    CHECK_FALSE(res.degenerate);
    CHECK_FALSE(res.low_expected_warning);  // all expected counts are 8 >= 5
    CHECK(res.excluded_methods.empty());
}

TEST_CASE("severity anchor: S=[7,10,11,16] against L=[271,435,423,513]") {
    const auto cells = oracle_cells(ChiSquareKind::Severity, {7, 10, 11, 16},
                                    {271, 435, 423, 513});
    const ChiSquareResult res = chi_square_severity(cells);
    CHECK(res.statistic ==
          doctest::Approx(0.624119612757827).epsilon(1e-12));
    CHECK(res.df == 3);
    CHECK(std::fabs(res.p_value - 0.89088921564042084) <= 1e-8);
    CHECK(res.excluded_methods.empty());
    CHECK_FALSE(res.degenerate);
}

TEST_CASE("proportional observations give a zero statistic and p = 1") {
    // Rate 50/400 = 0.125 is a power of two, so expectations are exact.
    const auto cells = oracle_cells(ChiSquareKind::Frequency, {5, 10, 15, 20},
                                    {40, 80, 120, 160});
    const ChiSquareResult res = chi_square_frequency(cells);
    CHECK(res.statistic == 0.0);
    CHECK(res.p_value == 1.0);
}

TEST_CASE("all-zero observations degenerate to statistic 0, p 1") {
    const auto cells = oracle_cells(ChiSquareKind::Frequency, {0, 0, 0, 0},
                                    {200, 150, 100, 50});
    const ChiSquareResult res = chi_square_frequency(cells);
    CHECK(res.degenerate);
    CHECK(res.statistic == 0.0);
    CHECK(res.df == 3);
    CHECK(res.p_value == 1.0);
    CHECK(res.low_expected_warning);
}

TEST_CASE("low expected counts raise the warning flag") {
    // Pooled rate 8/800 = 0.01 puts every expected count at 2 < 5.
    const auto cells = oracle_cells(ChiSquareKind::Frequency, {1, 2, 2, 3},
                                    {200, 200, 200, 200});
    const ChiSquareResult res = chi_square_frequency(cells);
    CHECK(res.low_expected_warning);
    CHECK_FALSE(res.degenerate);
    CHECK(res.p_value > 0.0);
}

TEST_CASE("statistic is invariant under cell permutation and scales with counts") {
    const std::array<std::int64_t, 4> o{57, 42, 30, 11};
    const std::array<std::int64_t, 4> b{360, 389, 196, 159};
    auto cells = oracle_cells(ChiSquareKind::Frequency, o, b);
    const double stat = chi_square_frequency(cells).statistic;

    std::reverse(cells.begin(), cells.end());
    CHECK(chi_square_frequency(cells).statistic == doctest::Approx(stat).epsilon(1e-14));

    // Doubling every count doubles each (O-E)^2/E term exactly.
    const auto doubled = oracle_cells(
        ChiSquareKind::Frequency, {114, 84, 60, 22}, {720, 778, 392, 318});
    CHECK(chi_square_frequency(doubled).statistic ==
          doctest::Approx(2.0 * stat).epsilon(1e-14));
}

TEST_CASE("severity test excludes methods with zero vulnerable LoC") {
    auto cells = oracle_cells(ChiSquareKind::Severity, {7, 10, 11, 16},
                              {271, 435, 423, 513});
    cells[1].loc_vulnerable = 0;
    cells[1].vulnerabilities = 0;
    const ChiSquareResult res = chi_square_severity(cells);
    REQUIRE(res.excluded_methods.size() == 1);
    CHECK(res.excluded_methods[0] == kAllMethods[1]);
    CHECK(res.df == 2);  // three included methods minus one

    // The statistic must equal the three-cell computation.
    std::vector<MetricsCell> three = {cells[0], cells[2], cells[3]};
    const ChiSquareResult direct = chi_square_severity(three);
    CHECK(res.statistic == doctest::Approx(direct.statistic).epsilon(1e-14));
    CHECK(res.p_value == doctest::Approx(direct.p_value).epsilon(1e-12));
}

TEST_CASE("severity test with fewer than two nonzero-LoC methods degenerates") {
    auto cells = oracle_cells(ChiSquareKind::Severity, {7, 0, 0, 0},
                              {271, 0, 0, 0});
    for (std::size_t j = 1; j < 4; ++j) {
        cells[j].loc_vulnerable = 0;
        cells[j].vulnerabilities = 0;
    }
    const ChiSquareResult res = chi_square_severity(cells);
    CHECK(res.degenerate);
    CHECK(res.df == 0);
    CHECK(res.statistic == 0.0);
    CHECK(res.p_value == 1.0);
    CHECK(res.excluded_methods.size() == 3);
}

TEST_CASE("chi-squared input validation") {
    auto cells = oracle_cells(ChiSquareKind::Frequency, {6, 7, 9, 10},
                              {200, 200, 200, 200});
    SUBCASE("needs at least two cells") {
        CHECK_THROWS_AS(chi_square_frequency({cells[0]}), ValidationError);
        CHECK_THROWS_AS(chi_square_frequency({}), ValidationError);
    }
    SUBCASE("duplicate methods") {
        cells[1].method = cells[0].method;
        CHECK_THROWS_AS(chi_square_frequency(cells), ValidationError);
    }
    SUBCASE("mixed models") {
        cells[2].model = "other";
        CHECK_THROWS_AS(chi_square_frequency(cells), ValidationError);
    }
    SUBCASE("mixed languages") {
        cells[3].language = Language::Java;
        CHECK_THROWS_AS(chi_square_frequency(cells), ValidationError);
    }
    SUBCASE("cell without completed tasks") {
        cells[0].tasks_total = 0;
        CHECK_THROWS_AS(chi_square_frequency(cells), ValidationError);
    }
}

TEST_CASE("p-value oracle table holds to 1e-8 absolute") {
    const CsvDocument doc =
        parse_csv(read_file(testutil::fixture("pvalue_oracle.csv")));
    REQUIRE(doc.header ==
            std::vector<std::string>{"statistic", "df", "p_value"});
    REQUIRE(doc.rows.size() == 65);
    for (const auto& row : doc.rows) {
        const double stat = std::stod(row[0]);
        const int df = std::stoi(row[1]);
        const double expected = std::stod(row[2]);
        CAPTURE(stat);
        CAPTURE(df);
        CHECK(std::fabs(chi_square_pvalue(stat, df) - expected) <= 1e-8);
    }
}

TEST_CASE("randomized chi-squared oracle: statistics and p-values") {
    const CsvDocument doc =
        parse_csv(read_file(testutil::fixture("chi_square_oracle.csv")));
    REQUIRE(doc.rows.size() == 120);
    int freq_rows = 0, sev_rows = 0;
    for (const auto& row : doc.rows) {
        CAPTURE(row[0]);  // case_id
        const bool is_freq = row[1] == "frequency";
        (is_freq ? freq_rows : sev_rows)++;
        std::array<std::int64_t, 4> obs{}, base{};
        for (int j = 0; j < 4; ++j) {
            obs[j] = std::stoll(row[2 + j]);
            base[j] = std::stoll(row[6 + j]);
        }
        const double want_stat = std::stod(row[10]);
        const double want_p = std::stod(row[11]);
        const auto cells = oracle_cells(
            is_freq ? ChiSquareKind::Frequency : ChiSquareKind::Severity, obs,
            base);
        const ChiSquareResult res =
            is_freq ? chi_square_frequency(cells) : chi_square_severity(cells);
        CHECK(std::fabs(res.statistic - want_stat) <=
              1e-6 * std::max(1.0, std::fabs(want_stat)));
        CHECK(std::fabs(res.p_value - want_p) <= 1e-8);
        CHECK(res.df == 3);
    }
    CHECK(freq_rows == 100);
    CHECK(sev_rows == 20);
}

TEST_CASE("regularized gamma edge cases and argument validation") {
    CHECK(regularized_gamma_q(1.5, 0.0) == 1.0);
    CHECK(regularized_gamma_q(0.5, 1e6) == doctest::Approx(0.0).epsilon(1e-12));
    // Continuity across the series/continued-fraction switch at x = a + 1.
    const double below = regularized_gamma_q(1.5, 2.4999999);
    const double above = regularized_gamma_q(1.5, 2.5000001);
    CHECK(std::fabs(below - above) < 1e-6);

    CHECK_THROWS_AS(regularized_gamma_q(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(regularized_gamma_q(-1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(regularized_gamma_q(1.0, -0.5), std::invalid_argument);
    CHECK_THROWS_AS(regularized_gamma_q(1.0, std::nan("")),
                    std::invalid_argument);
}

TEST_CASE("chi_square_pvalue argument validation") {
    CHECK_THROWS_AS(chi_square_pvalue(1.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(chi_square_pvalue(1.0, -2), std::invalid_argument);
    CHECK_THROWS_AS(chi_square_pvalue(-0.5, 3), std::invalid_argument);
    CHECK_THROWS_AS(chi_square_pvalue(std::nan(""), 3), std::invalid_argument);
    // Tiny negative round-off is treated as zero.
    CHECK(chi_square_pvalue(-1e-13, 3) == 1.0);
    CHECK(chi_square_pvalue(0.0, 1) == 1.0);
}
