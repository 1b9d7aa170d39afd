"""Budgeted oracle-query selection over probabilistic schema matchings."""

import json as _json

from ._core import (
    CandidateResultSet,
    ViewSet,
    apply_answer,
    build_view_set,
    dump_crs,
    entropy,
    expected_reduction,
    load_crs,
    parse_crs,
    render_prompt,
    run_json,
    save_crs,
    score,
    select,
    token_cost,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "CandidateResultSet",
    "ViewSet",
    "apply_answer",
    "build_view_set",
    "dump_crs",
    "entropy",
    "expected_reduction",
    "load_crs",
    "parse_crs",
    "render_prompt",
    "run",
    "run_json",
    "save_crs",
    "score",
    "select",
    "token_cost",
    "validate",
]


def run(crs, budget, **kwargs):
    """Full verify-update loop; returns the run report as a dict."""
    return _json.loads(run_json(crs, budget, **kwargs))
