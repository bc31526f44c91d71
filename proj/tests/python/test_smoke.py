"""Smoke tests for the compiled secbench._core module.

The heavy verification lives in the C++ suites; these tests confirm the
Python surface is importable and that each exported operation round-trips
a representative input.
"""

import json
import math
import os

import pytest

import secbench

REPO = os.environ["SECBENCH_REPO_DIR"]


def data(rel):
    return os.path.join(REPO, "data", rel)


def test_version():
    assert secbench.__version__ == "0.1.0"


# ---------------------------------------------------------------------------
# statistics
# ---------------------------------------------------------------------------


def test_chi_square_pvalue_anchor():
    assert secbench.chi_square_pvalue(1.25, 3) == pytest.approx(
        0.7410388888165293, abs=1e-9
    )
    assert secbench.chi_square_pvalue(0.0, 3) == 1.0


def test_regularized_gamma_q_matches_pvalue():
    assert secbench.regularized_gamma_q(1.5, 0.625) == pytest.approx(
        secbench.chi_square_pvalue(1.25, 3), abs=1e-15
    )


def test_chi_square_frequency_anchor():
    result = secbench.chi_square_frequency([6, 7, 9, 10], [200, 200, 200, 200])
    assert result["kind"] == "frequency"
    assert result["statistic"] == 1.25
    assert result["df"] == 3
    assert result["p_value"] == pytest.approx(0.7410388888165293, abs=1e-9)
    assert result["expected"] == [8.0, 8.0, 8.0, 8.0]
    assert not result["low_expected_warning"]
    assert not result["degenerate"]
    assert result["excluded_methods"] == []


def test_chi_square_severity_anchor():
    result = secbench.chi_square_severity([7, 10, 11, 16], [271, 435, 423, 513])
    assert result["kind"] == "severity"
    assert result["statistic"] == pytest.approx(0.624119612757827, abs=1e-9)
    assert result["p_value"] == pytest.approx(0.89088921564042084, abs=1e-9)


def test_chi_square_severity_excludes_empty_loc():
    result = secbench.chi_square_severity([5, 7, 0], [100, 120, 0])
    assert result["df"] == 1
    assert result["excluded_methods"] == ["CoT"]


def test_entropy_hhi_uniform():
    uniform = {1: 5, 2: 5, 3: 5, 4: 5}
    assert secbench.entropy(uniform) == pytest.approx(math.log(4), abs=1e-12)
    assert secbench.hhi(uniform) == pytest.approx(0.25, abs=1e-12)


def test_jsd_properties():
    a = {780: 25, 327: 17, 259: 6, 798: 6, 521: 3}
    b = {780: 18, 327: 18, 259: 2, 798: 2, 521: 1, 759: 5, 760: 5}
    assert secbench.jsd(a, a) == 0.0
    assert secbench.jsd(a, b) == pytest.approx(secbench.jsd(b, a), abs=1e-12)
    disjoint = secbench.jsd({1: 3, 2: 5}, {7: 4, 9: 1})
    assert disjoint == pytest.approx(math.log(2), abs=1e-9)


# ---------------------------------------------------------------------------
# prompts
# ---------------------------------------------------------------------------


def test_engine_renders_methods():
    engine = secbench.Engine()
    description = "Write a program that encrypts a message."
    assert engine.render_prompt(description, "Vanilla") == description
    zero_shot = engine.render_prompt(description, "ZeroShot")
    assert zero_shot.startswith(
        "Write a secure code for the following prompt description:"
    )
    assert description in zero_shot
    cot = engine.render_prompt(description, "CoT")
    assert "Chain-of-Thought process in code generation" in cot


def test_engine_wa_prompt_injects_cwes():
    engine = secbench.Engine()
    text, cwe_ids = engine.render_wa_prompt(
        "Encrypt a message with a secret key.",
        data("cwe_catalog.csv"),
        ["Cryptography"],
    )
    assert cwe_ids
    assert 327 in cwe_ids
    assert "List of possible weaknesses as follows:" in text
    assert text.count("CWE-") >= len(cwe_ids)


def test_engine_parses_classification_response():
    engine = secbench.Engine()
    tags, warnings = engine.parse_tags('Sure! ["Cryptography", "Bogus Tag"]')
    assert tags == ["Cryptography"]
    assert warnings


def test_classification_prompt_lists_taxonomy():
    engine = secbench.Engine()
    prompt = engine.render_classification_prompt("Sort a list of numbers.")
    for tag, _description in secbench.bundled_taxonomy():
        assert tag in prompt


# ---------------------------------------------------------------------------
# extraction and scanning
# ---------------------------------------------------------------------------


def test_extract_code_prefers_language_fence():
    raw = "Here you go:\n```python\nprint('hi')\n```\nEnjoy!"
    assert secbench.extract_code(raw, "Python") == "print('hi')\n"


def test_extract_code_empty_raises():
    with pytest.raises(secbench.SecbenchError):
        secbench.extract_code("   \n  ", "C")


def test_count_loc_skips_blanks_and_comments():
    assert secbench.count_loc("a = 1\n\n# comment\nb = 2\n", "Python") == 2


def test_scan_source_builtin_rules():
    findings = secbench.scan_source(
        "cipher = AES.new(key, AES.MODE_ECB)\n", "Python", data("rules/builtin.jsonl")
    )
    assert any(f["cwe"] == 327 for f in findings)
    assert all(f["line"] >= 1 for f in findings)


def test_sarif_conversion():
    sarif = {
        "version": "2.1.0",
        "runs": [
            {
                "tool": {
                    "driver": {
                        "name": "demo",
                        "rules": [
                            {
                                "id": "r1",
                                "properties": {"tags": ["external/cwe/cwe-327"]},
                            }
                        ],
                    }
                },
                "results": [
                    {
                        "ruleId": "r1",
                        "level": "error",
                        "message": {"text": "weak cipher"},
                        "locations": [
                            {
                                "physicalLocation": {
                                    "artifactLocation": {"uri": "a.py"},
                                    "region": {"startLine": 4},
                                }
                            }
                        ],
                    }
                ],
            }
        ],
    }
    rows = [
        json.loads(line)
        for line in secbench.sarif_to_findings_jsonl(json.dumps(sarif)).splitlines()
    ]
    assert rows == [
        {
            "file": "a.py",
            "line": 4,
            "rule_id": "r1",
            "cwe": 327,
            "severity": "error",
            "message": "weak cipher",
        }
    ]


# ---------------------------------------------------------------------------
# corpus and layout
# ---------------------------------------------------------------------------


def test_load_tasks_demo_corpus():
    tasks = secbench.load_tasks(data("tasks_demo.jsonl"))
    assert len(tasks) == 20
    by_id = {task["task_id"]: task for task in tasks}
    assert "Cryptography" in by_id[79]["tags"]


def test_load_tasks_missing_file_raises():
    with pytest.raises(secbench.SecbenchError):
        secbench.load_tasks(data("no_such_corpus.jsonl"))


def test_artifact_relative_path():
    assert (
        secbench.artifact_relative_path("WA-0CoT", "mock-1", 79, "Python")
        == "WA-0CoT/mock-1/task_79_python.py"
    )
    assert (
        secbench.artifact_relative_path("CoT", "m", 3, "C++", sample=2)
        == "CoT/m/task_3_cpp_s2.cpp"
    )
