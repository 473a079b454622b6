"""Evaluation, truncation, and circuit compilation of the multivariate
interlace polynomial on graphs of bounded treewidth."""

from .evaluator import (
    Assignment,
    EngineStats,
    TruncPoly,
    evaluate,
    evaluate_v0,
    evaluate_v_poly,
    specialize,
    truncate,
)
from .graph import Graph
from .scenario import (
    FullRankScenario,
    Scenario,
    enumerate_scenarios,
    forget,
    ignore,
    introduce,
    join,
    join_full_rank,
    scenario_of,
)
from .tdecomp import (
    NiceTreeDecomposition,
    TreeDecomposition,
    VertexOrder,
    heuristic_td,
    make_nice,
    parse_gr,
    parse_td,
    validate,
    vertex_order,
    write_gr,
    write_td,
)

__all__ = [
    "Assignment",
    "EngineStats",
    "FullRankScenario",
    "Graph",
    "NiceTreeDecomposition",
    "Scenario",
    "TreeDecomposition",
    "TruncPoly",
    "VertexOrder",
    "enumerate_scenarios",
    "evaluate",
    "evaluate_v0",
    "evaluate_v_poly",
    "forget",
    "heuristic_td",
    "ignore",
    "introduce",
    "join",
    "join_full_rank",
    "make_nice",
    "parse_gr",
    "parse_td",
    "scenario_of",
    "specialize",
    "truncate",
    "validate",
    "vertex_order",
    "write_gr",
    "write_td",
]
