#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "helpers.hpp"
#include "secbench/gateway.hpp"
#include "secbench/prompt.hpp"

using namespace secbench;

namespace {

const TagTaxonomy& taxonomy() {
    static const TagTaxonomy t = TagTaxonomy::bundled_default();
    return t;
}

const TaskSet& demo_tasks() {
    static const TaskSet tasks =
        load_tasks(testutil::data_file("tasks_demo.jsonl"), taxonomy());
    return tasks;
}

const CweCatalog& catalog() {
    static const CweCatalog c = load_cwe_catalog(
        testutil::data_file("cwe_catalog.csv"), taxonomy());
    return c;
}

const PromptEngine& engine() {
    static const PromptEngine e(taxonomy(), TemplateSet::bundled_default());
    return e;
}

// Golden comparison: set SECBENCH_UPDATE_GOLDEN=1 to refresh the committed
// prompt snapshots instead of comparing against them.
void check_golden(const std::string& name, const std::string& actual) {
    const std::string path = testutil::fixture("golden/" + name);
    if (std::getenv("SECBENCH_UPDATE_GOLDEN")) {
        write_file_atomic(path, actual);
        return;
    }
    REQUIRE_MESSAGE(std::filesystem::exists(path),
                    "missing golden file " << path
                                           << " (run with "
                                              "SECBENCH_UPDATE_GOLDEN=1)");
    CHECK_MESSAGE(read_file(path) == actual, "golden mismatch for " << name);
}

std::size_t common_prefix(const std::string& a, const std::string& b) {
    std::size_t i = 0;
    while (i < a.size() && i < b.size() && a[i] == b[i]) ++i;
    return i;
}

}  // namespace

TEST_CASE("vanilla prompt is the task description, byte for byte") {
    for (const Task& task : demo_tasks().tasks) {
        const RenderedPrompt p =
            engine().render_prompt(task, PromptMethod::Vanilla);
        CHECK(p.text == task.description);
        CHECK(p.injected_cwe_ids.empty());
        CHECK(p.task_id == task.task_id);
    }
}

TEST_CASE("zero-shot prompt is the fixed security prefix plus description") {
    for (const Task& task : demo_tasks().tasks) {
        const RenderedPrompt p =
            engine().render_prompt(task, PromptMethod::ZeroShot);
        CHECK(p.text ==
              "Write a secure code for the following prompt description:\n" +
                  task.description);
    }
}

TEST_CASE("zero-shot-CoT prompt carries the five reasoning steps and no CWE "
          "list") {
    const Task& task = *demo_tasks().find(79);
    const RenderedPrompt p =
        engine().render_prompt(task, PromptMethod::ZeroShotCoT);
    CHECK(p.text.find(task.description) != std::string::npos);
    for (const char* step :
         {"1. Problem understanding:", "2. Security requirements:",
          "3. Secure coding generation:", "4. Code review:",
          "5. Secure code output:"})
        CHECK(p.text.find(step) != std::string::npos);
    CHECK(p.text.find("List of possible weaknesses") == std::string::npos);
    CHECK(p.text.find("CWE-") == std::string::npos);
    CHECK(p.text.find("{{") == std::string::npos);
}

TEST_CASE("WA-0CoT prompt injects one line per retrieved CWE") {
    const Task& task = *demo_tasks().find(79);
    const auto cwes = cwes_for_tags(catalog(), task.tags, taxonomy());
    REQUIRE_FALSE(cwes.empty());
    const RenderedPrompt p =
        engine().render_prompt(task, PromptMethod::WaZeroCoT, cwes);

    CHECK(p.text.find("List of possible weaknesses as follows:") !=
          std::string::npos);
    std::vector<int> ids;
    for (const auto& entry : cwes) {
        ids.push_back(entry.cwe_id);
        const std::string line = format_cwe_line(entry);
        CHECK(p.text.find(line) != std::string::npos);
        CHECK(line.rfind("CWE-" + std::to_string(entry.cwe_id) + " (", 0) ==
              0);
        CHECK(line.find("Mitigation:") != std::string::npos);
        CHECK(line.find('\n') == std::string::npos);  // single line each
    }
    CHECK(p.injected_cwe_ids == ids);
}

TEST_CASE("CoT and WA-0CoT differ only in the weaknesses block") {
    const Task& task = *demo_tasks().find(79);
    const auto cwes = cwes_for_tags(catalog(), task.tags, taxonomy());
    const std::string cot =
        engine().render_prompt(task, PromptMethod::ZeroShotCoT).text;
    const std::string wa =
        engine().render_prompt(task, PromptMethod::WaZeroCoT, cwes).text;

    std::vector<std::string> lines;
    for (const auto& entry : cwes) lines.push_back(format_cwe_line(entry));
    const std::string block =
        "\nList of possible weaknesses as follows:\n" + join(lines, "\n");

    REQUIRE(wa.size() == cot.size() + block.size());
    // Removing the block from where it appears must reproduce CoT exactly,
    // i.e. WA-0CoT is CoT plus one inserted passage and nothing else.
    const std::size_t pos = wa.find(block);
    REQUIRE(pos != std::string::npos);
    CHECK(wa.substr(0, pos) + wa.substr(pos + block.size()) == cot);
}

TEST_CASE("WA-0CoT with empty retrieval renders the placeholder") {
    const Task& task = *demo_tasks().find(79);
    const RenderedPrompt p =
        engine().render_prompt(task, PromptMethod::WaZeroCoT, {});
    CHECK(p.text.find(kEmptyRetrievalPlaceholder) != std::string::npos);
    CHECK(p.injected_cwe_ids.empty());
}

TEST_CASE("max_cwes caps the injected list") {
    const Task& task = *demo_tasks().find(79);
    const auto cwes = cwes_for_tags(catalog(), task.tags, taxonomy());
    REQUIRE(cwes.size() > 2);
    const PromptEngine capped(taxonomy(), TemplateSet::bundled_default(),
                              /*max_cwes=*/2);
    const RenderedPrompt p =
        capped.render_prompt(task, PromptMethod::WaZeroCoT, cwes);
    REQUIRE(p.injected_cwe_ids.size() == 2);
    CHECK(p.injected_cwe_ids[0] == cwes[0].cwe_id);
    CHECK(p.injected_cwe_ids[1] == cwes[1].cwe_id);
    CHECK(p.text.find("CWE-" + std::to_string(cwes[2].cwe_id)) ==
          std::string::npos);
}

TEST_CASE("non-WA methods reject a CWE list") {
    const Task& task = *demo_tasks().find(79);
    const auto cwes = cwes_for_tags(catalog(), task.tags, taxonomy());
    CHECK_THROWS_AS(
        (void)engine().render_prompt(task, PromptMethod::Vanilla, cwes),
        std::invalid_argument);
}

TEST_CASE("classification prompt lists the whole taxonomy and the task") {
    const Task& task = *demo_tasks().find(79);
    const RenderedPrompt p = engine().render_classification_prompt(task);
    CHECK(p.text.find(task.description) != std::string::npos);
    for (const auto& [tag, description] : taxonomy().entries())
        CHECK(p.text.find(tag) != std::string::npos);
    CHECK(p.text.find("JSON array of strings") != std::string::npos);
}

TEST_CASE("golden prompt snapshots for task 79") {
    const Task& task = *demo_tasks().find(79);
    const auto cwes = cwes_for_tags(catalog(), task.tags, taxonomy());
    check_golden("task79_classification.txt",
                 engine().render_classification_prompt(task).text);
    check_golden("task79_vanilla.txt",
                 engine().render_prompt(task, PromptMethod::Vanilla).text);
    check_golden("task79_zeroshot.txt",
                 engine().render_prompt(task, PromptMethod::ZeroShot).text);
    check_golden("task79_cot.txt",
                 engine().render_prompt(task, PromptMethod::ZeroShotCoT).text);
    check_golden(
        "task79_wa0cot.txt",
        engine().render_prompt(task, PromptMethod::WaZeroCoT, cwes).text);
}

TEST_CASE("template overrides replace only the provided files") {
    testutil::TempDir tmp;
    write_file_atomic(tmp.sub("Vanilla.txt"), "OVERRIDE: {{description}}");
    TemplateSet templates = TemplateSet::bundled_default();
    const std::string original_zero_shot = templates.zero_shot;
    templates.load_overrides(tmp.str());
    CHECK(templates.vanilla == "OVERRIDE: {{description}}");
    CHECK(templates.zero_shot == original_zero_shot);

    const PromptEngine custom(taxonomy(), templates);
    const Task& task = *demo_tasks().find(79);
    CHECK(custom.render_prompt(task, PromptMethod::Vanilla).text ==
          "OVERRIDE: " + task.description);
}

TEST_CASE("substitution is single-pass: emitted values are never re-scanned") {
    Task task;
    task.task_id = 1;
    task.title = "t";
    task.description = "literal {{cwe_list}} stays";
    task.source = TaskSource::Manual;
    task.difficulty = Difficulty::Easy;
    task.tags = {"Cryptography"};
    const RenderedPrompt p =
        engine().render_prompt(task, PromptMethod::ZeroShotCoT);
    CHECK(p.text.find("literal {{cwe_list}} stays") != std::string::npos);
}

TEST_CASE("tag parsing accepts the documented response shapes") {
    const PromptEngine& e = engine();

    SUBCASE("bare array") {
        const TagClassification c = e.parse_tag_response(5, R"(["Cryptography"])");
        CHECK(c.task_id == 5);
        CHECK(c.tags == std::vector<std::string>{"Cryptography"});
        CHECK(c.warnings.empty());
        CHECK(c.raw_response == R"(["Cryptography"])");
    }
    SUBCASE("array embedded in prose") {
        const TagClassification c = e.parse_tag_response(
            1,
            "Sure! The relevant tags are [\"Cryptography\", "
            "\"File & I/O Handling\"]. Let me know if you need more.");
        // Returned in taxonomy order, not response order.
        CHECK(c.tags == std::vector<std::string>{"File & I/O Handling",
                                                 "Cryptography"});
    }
    SUBCASE("tags are canonicalized case-insensitively and deduplicated") {
        const TagClassification c = e.parse_tag_response(
            1, R"(["cryptography", "CRYPTOGRAPHY", " Cryptography "])");
        CHECK(c.tags == std::vector<std::string>{"Cryptography"});
    }
    SUBCASE("unknown tags are dropped with a warning") {
        const TagClassification c =
            e.parse_tag_response(1, R"(["Cryptography", "Quantum"])");
        CHECK(c.tags == std::vector<std::string>{"Cryptography"});
        REQUIRE(c.warnings.size() == 1);
        CHECK(c.warnings[0].find("Quantum") != std::string::npos);
    }
    SUBCASE("first well-formed string array wins") {
        const TagClassification c = e.parse_tag_response(
            1, R"(scores: [1, 2, 3]; tags: ["Cryptography"])");
        CHECK(c.tags == std::vector<std::string>{"Cryptography"});
    }
    SUBCASE("bracket characters inside strings do not confuse the scanner") {
        const TagClassification c = e.parse_tag_response(
            1, R"(["Data Safety & Security", "x]y["])");
        CHECK(c.tags == std::vector<std::string>{"Data Safety & Security"});
        CHECK(c.warnings.size() == 1);
    }
    SUBCASE("empty array means no tags, not an error") {
        const TagClassification c = e.parse_tag_response(1, "[]");
        CHECK(c.tags.empty());
        CHECK(c.warnings.empty());
    }
    SUBCASE("no array raises a parse error that keeps the raw output") {
        const std::string raw = "I cannot classify this task.";
        try {
            (void)e.parse_tag_response(1, raw);
            FAIL("expected TagParseError");
        } catch (const TagParseError& err) {
            CHECK(err.raw() == raw);
        }
    }
    SUBCASE("array of non-strings alone is not well-formed") {
        CHECK_THROWS_AS((void)e.parse_tag_response(1, "[1, 2, 3]"),
                        TagParseError);
    }
}

TEST_CASE("classify_and_retrieve: classification through the gateway plus "
          "catalog retrieval") {
    const Task& task = *demo_tasks().find(79);
    Gateway gateway;
    std::string seen_prompt;
    gateway.register_provider(
        std::make_unique<CallableProvider>(
            "clf",
            [&](const std::string& prompt, const GenerationConfig&) {
                seen_prompt = prompt;
                return std::string("Here you go: [\"Cryptography\"] done.");
            }),
        GenerationConfig{.model_name = "clf"});

    const ClassificationOutcome outcome =
        classify_and_retrieve(engine(), task, catalog(), gateway, "clf");
    CHECK(seen_prompt ==
          engine().render_classification_prompt(task).text);
    CHECK(outcome.prompt_hash == sha256_hex(seen_prompt));
    CHECK(outcome.classification.tags ==
          std::vector<std::string>{"Cryptography"});
    REQUIRE_FALSE(outcome.cwes.empty());
    std::vector<int> ids;
    for (const auto& entry : outcome.cwes) ids.push_back(entry.cwe_id);
    CHECK(std::is_sorted(ids.begin(), ids.end()));
    CHECK(ids == [&] {
        std::vector<int> expected;
        for (const auto& entry :
             cwes_for_tags(catalog(), {"Cryptography"}, taxonomy()))
            expected.push_back(entry.cwe_id);
        return expected;
    }());
}

TEST_CASE("classify_and_retrieve propagates unparseable classifications") {
    const Task& task = *demo_tasks().find(79);
    Gateway gateway;
    gateway.register_provider(
        std::make_unique<CallableProvider>(
            "bad",
            [](const std::string&, const GenerationConfig&) {
                return std::string("no tags today");
            }),
        GenerationConfig{.model_name = "bad"});
    CHECK_THROWS_AS((void)classify_and_retrieve(engine(), task, catalog(),
                                                gateway, "bad"),
                    TagParseError);
}
