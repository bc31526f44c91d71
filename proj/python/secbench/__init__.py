"""Python surface of the secbench core.

Everything here is implemented in C++ and re-exported from the compiled
``secbench._core`` module: prompt rendering, code-fence extraction, the
rule scanner, and the statistical toolkit (chi-squared goodness of fit,
entropy, HHI, Jensen-Shannon divergence).
"""

from ._core import (
    Engine,
    SecbenchError,
    __version__,
    artifact_relative_path,
    bundled_taxonomy,
    chi_square_frequency,
    chi_square_pvalue,
    chi_square_severity,
    count_loc,
    entropy,
    extract_code,
    hhi,
    jsd,
    load_tasks,
    regularized_gamma_q,
    sarif_to_findings_jsonl,
    scan_source,
)

__all__ = [
    "Engine",
    "SecbenchError",
    "__version__",
    "artifact_relative_path",
    "bundled_taxonomy",
    "chi_square_frequency",
    "chi_square_pvalue",
    "chi_square_severity",
    "count_loc",
    "entropy",
    "extract_code",
    "hhi",
    "jsd",
    "load_tasks",
    "regularized_gamma_q",
    "sarif_to_findings_jsonl",
    "scan_source",
]
