#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "secbench/analyzer.hpp"
#include "secbench/corpus.hpp"
#include "secbench/gateway.hpp"
#include "secbench/orchestrator.hpp"
#include "secbench/profiles.hpp"
#include "secbench/prompt.hpp"
#include "secbench/stats.hpp"

namespace py = pybind11;
using namespace secbench;

namespace {

Task make_task(int task_id, const std::string& description,
               const std::vector<std::string>& tags) {
    Task task;
    task.task_id = task_id;
    task.title = "task " + std::to_string(task_id);
    task.description = description;
    task.source = TaskSource::Manual;
    task.difficulty = Difficulty::Medium;
    task.tags = tags;
    return task;
}

CweProfile profile_from_counts(const std::map<int, std::int64_t>& counts) {
    CweProfile profile;
    profile.counts = counts;
    return profile;
}

py::dict chi_result_to_dict(const ChiSquareResult& r) {
    py::dict out;
    out["kind"] =
        r.kind == ChiSquareKind::Frequency ? "frequency" : "severity";
    out["statistic"] = r.statistic;
    out["df"] = r.df;
    out["p_value"] = r.p_value;
    out["low_expected_warning"] = r.low_expected_warning;
    out["degenerate"] = r.degenerate;
    std::vector<std::string> excluded;
    for (const PromptMethod m : r.excluded_methods)
        excluded.push_back(std::string(method_label(m)));
    out["excluded_methods"] = excluded;
    out["expected"] = r.expected;
    return out;
}

std::vector<MetricsCell> cells_from_vectors(
    const std::vector<std::int64_t>& observed,
    const std::vector<std::int64_t>& baseline, bool frequency) {
    if (observed.size() != baseline.size())
        throw std::invalid_argument("observed and baseline lengths differ");
    if (observed.size() > std::size(kAllMethods))
        throw std::invalid_argument("at most " +
                                    std::to_string(std::size(kAllMethods)) +
                                    " method cells are supported");
    std::vector<MetricsCell> cells;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        MetricsCell cell;
        cell.model = "py";
        cell.method = kAllMethods[i];
        cell.language = Language::C;
        if (frequency) {
            cell.vulnerable_tasks = observed[i];
            cell.tasks_total = baseline[i];
        } else {
            cell.vulnerabilities = observed[i];
            cell.loc_vulnerable = baseline[i];
            cell.tasks_total = 1;
        }
        cells.push_back(std::move(cell));
    }
    return cells;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() =
        "Core operations of the prompting-strategy security benchmark: "
        "prompt rendering, code extraction, rule scanning, and the "
        "statistical toolkit (chi-squared, entropy, HHI, JSD).";
    m.attr("__version__") = kToolVersion;

    py::register_exception<Error>(m, "SecbenchError", PyExc_RuntimeError);

    // ----------------------------------------------------------------- prompts
    py::class_<PromptEngine>(m, "Engine",
                             "Prompt renderer over the bundled (or overridden) "
                             "tag taxonomy and templates.")
        .def(py::init([](const std::string& taxonomy_path,
                         const std::string& template_dir, int max_cwes) {
                 TagTaxonomy taxonomy = taxonomy_path.empty()
                                            ? TagTaxonomy::bundled_default()
                                            : TagTaxonomy::load(taxonomy_path);
                 TemplateSet templates = TemplateSet::bundled_default();
                 if (!template_dir.empty())
                     templates.load_overrides(template_dir);
                 return PromptEngine(std::move(taxonomy), std::move(templates),
                                     max_cwes);
             }),
             py::arg("taxonomy_path") = "", py::arg("template_dir") = "",
             py::arg("max_cwes") = 0)
        .def(
            "render_classification_prompt",
            [](const PromptEngine& engine, const std::string& description) {
                return engine.render_classification_prompt(
                    make_task(0, description, {})).text;
            },
            py::arg("description"))
        .def(
            "render_prompt",
            [](const PromptEngine& engine, const std::string& description,
               const std::string& method) {
                const PromptMethod m = parse_method(method);
                if (m == PromptMethod::WaZeroCoT)
                    throw std::invalid_argument(
                        "use render_wa_prompt for WA-0CoT");
                return engine.render_prompt(make_task(0, description, {}), m)
                    .text;
            },
            py::arg("description"), py::arg("method"))
        .def(
            "render_wa_prompt",
            [](const PromptEngine& engine, const std::string& description,
               const std::string& catalog_path,
               const std::vector<std::string>& tags) {
                const CweCatalog catalog =
                    load_cwe_catalog(catalog_path, engine.taxonomy());
                const auto cwes = cwes_for_tags(catalog, tags, engine.taxonomy());
                const RenderedPrompt rendered = engine.render_prompt(
                    make_task(0, description, tags), PromptMethod::WaZeroCoT,
                    cwes);
                return py::make_tuple(rendered.text, rendered.injected_cwe_ids);
            },
            py::arg("description"), py::arg("catalog_path"), py::arg("tags"),
            "Retrieval + rendering for WA-0CoT; returns (text, cwe_ids).")
        .def(
            "parse_tags",
            [](const PromptEngine& engine, const std::string& raw) {
                const TagClassification c = engine.parse_tag_response(0, raw);
                return py::make_tuple(c.tags, c.warnings);
            },
            py::arg("raw"),
            "Parses a classification response; returns (tags, warnings).");

    // ------------------------------------------------------------- extraction
    m.def(
        "extract_code",
        [](const std::string& raw, const std::string& language) {
            return extract_code(raw, parse_language(language));
        },
        py::arg("raw_response"), py::arg("language"));
    m.def(
        "count_loc",
        [](const std::string& source, const std::string& language) {
            return count_loc(source, parse_language(language));
        },
        py::arg("source"), py::arg("language"));
    m.def(
        "scan_source",
        [](const std::string& source, const std::string& language,
           const std::string& rules_path) {
            const RuleSet rules = RuleSet::load(rules_path);
            py::list out;
            for (const Finding& f :
                 rules.scan(source, parse_language(language))) {
                py::dict d;
                d["rule_id"] = f.rule_id;
                if (f.cwe) d["cwe"] = *f.cwe;
                else d["cwe"] = py::none();
                d["severity"] = severity_name(f.severity);
                d["line"] = f.line;
                d["message"] = f.message;
                out.append(d);
            }
            return out;
        },
        py::arg("source"), py::arg("language"), py::arg("rules_path"));
    m.def("sarif_to_findings_jsonl", &convert_sarif_to_jsonl,
          py::arg("sarif_json"));
    m.def(
        "artifact_relative_path",
        [](const std::string& method, const std::string& model, int task_id,
           const std::string& language, int sample) {
            return artifact_relative_path(parse_method(method), model, task_id,
                                          parse_language(language), sample);
        },
        py::arg("method"), py::arg("model"), py::arg("task_id"),
        py::arg("language"), py::arg("sample") = 1);

    // -------------------------------------------------------------- statistics
    m.def("chi_square_pvalue", &chi_square_pvalue, py::arg("statistic"),
          py::arg("df"));
    m.def("regularized_gamma_q", &regularized_gamma_q, py::arg("a"),
          py::arg("x"));
    m.def(
        "chi_square_frequency",
        [](const std::vector<std::int64_t>& vulnerable,
           const std::vector<std::int64_t>& totals) {
            return chi_result_to_dict(chi_square_frequency(
                cells_from_vectors(vulnerable, totals, /*frequency=*/true)));
        },
        py::arg("vulnerable_tasks"), py::arg("tasks_total"));
    m.def(
        "chi_square_severity",
        [](const std::vector<std::int64_t>& vulnerabilities,
           const std::vector<std::int64_t>& loc) {
            return chi_result_to_dict(chi_square_severity(
                cells_from_vectors(vulnerabilities, loc, /*frequency=*/false)));
        },
        py::arg("vulnerabilities"), py::arg("loc_vulnerable"));
    m.def(
        "entropy",
        [](const std::map<int, std::int64_t>& counts) {
            return entropy(profile_from_counts(counts));
        },
        py::arg("counts"));
    m.def(
        "hhi",
        [](const std::map<int, std::int64_t>& counts) {
            return hhi(profile_from_counts(counts));
        },
        py::arg("counts"));
    m.def(
        "jsd",
        [](const std::map<int, std::int64_t>& a,
           const std::map<int, std::int64_t>& b, double epsilon) {
            return jsd(profile_from_counts(a), profile_from_counts(b), epsilon);
        },
        py::arg("a"), py::arg("b"), py::arg("epsilon") = kDefaultEpsilon);

    // ------------------------------------------------------------------ corpus
    m.def(
        "load_tasks",
        [](const std::string& path, const std::string& taxonomy_path,
           bool strict) {
            const TagTaxonomy taxonomy =
                taxonomy_path.empty() ? TagTaxonomy::bundled_default()
                                      : TagTaxonomy::load(taxonomy_path);
            py::list out;
            for (const Task& task : load_tasks(path, taxonomy, strict).tasks) {
                py::dict d;
                d["task_id"] = task.task_id;
                d["title"] = task.title;
                d["description"] = task.description;
                if (task.hints) d["hints"] = *task.hints;
                else d["hints"] = py::none();
                d["source"] = task_source_name(task.source);
                d["difficulty"] = difficulty_name(task.difficulty);
                d["tags"] = task.tags;
                out.append(d);
            }
            return out;
        },
        py::arg("path"), py::arg("taxonomy_path") = "",
        py::arg("strict") = true);
    m.def("bundled_taxonomy", [] {
        // Keep the taxonomy alive for the loop: entries() returns a reference
        // into it, and a temporary would not outlive the range-for in C++20.
        const TagTaxonomy taxonomy = TagTaxonomy::bundled_default();
        py::list out;
        for (const auto& entry : taxonomy.entries())
            out.append(py::make_tuple(entry.first, entry.second));
        return out;
    });
}
