"""Proper decision-tree learning by pruning and a memoised DP over restrictions.

Modules: ``tree`` (representation), ``funcspace`` (oracles, influence,
Fourier, smoothing), ``prune`` (pruning and its certificates), ``learner``
(the DP and the realizable / agnostic / monotone pipelines), ``dense``
(bottom-up DP for exact tables), ``oracle`` (brute-force ground truth) and
``cli``.
"""
from .funcspace import Access, FunctionOracle, Metric, Restriction, SmoothedFunction, TruthTable
from .learner import LearnerParams, LearnReport, MemoMap, build_dt, learn_agnostic, learn_monotone, learn_realizable
from .prune import is_everywhere_influential, osss_check, prune_certificate
from .tree import Leaf, Node, parse, serialize

__version__ = "0.1.0"

__all__ = [
    "Access", "FunctionOracle", "Metric", "Restriction", "SmoothedFunction", "TruthTable",
    "LearnerParams", "LearnReport", "MemoMap", "build_dt", "learn_agnostic", "learn_monotone",
    "learn_realizable", "is_everywhere_influential", "osss_check", "prune_certificate",
    "Leaf", "Node", "parse", "serialize",
]
