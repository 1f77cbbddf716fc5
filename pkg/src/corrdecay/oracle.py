"""Brute-force partition function and marginals for small instances.

Accepts either a :class:`SpinSystem` or an :class:`IsingView` as the weight
model, so both sides of the Ising translation can be checked against each
other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import kernels
from .errors import InvalidInputError, TooLargeError
from .model import Graph, IsingView, SpinSystem

DEFAULT_CAP = 26

Weights = Union[SpinSystem, IsingView]


@dataclass(frozen=True)
class ExactResult:
    log_Z: float
    marginals: Optional[dict] = None


def _safe_log(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


def _activity_classes(model: Weights, graph: Graph):
    if isinstance(model, SpinSystem):
        lam = np.full(graph.n, model.lam)
        log_b, log_g = _safe_log(model.beta), _safe_log(model.gamma)
    elif isinstance(model, IsingView):
        lam = np.asarray(model.lambda_v, dtype=np.float64)
        log_b = log_g = _safe_log(model.beta_prime)
    else:
        raise InvalidInputError(f"unsupported weight model {type(model).__name__}")
    values, cls = np.unique(lam, return_inverse=True)
    cls_zero = values == 0
    with np.errstate(divide="ignore"):
        cls_log = np.where(cls_zero, 0.0, np.log(np.where(cls_zero, 1.0, values)))
    return cls.astype(np.int64), cls_log, cls_zero, log_b, log_g


def _enumerate(model: Weights, graph: Graph, track, cap: int):
    free = graph.free_vertices
    if len(free) > cap:
        raise TooLargeError(f"{len(free)} free vertices exceeds oracle cap of {cap}")
    cls, cls_log, cls_zero, log_b, log_g = _activity_classes(model, graph)
    spins0 = np.where(graph.pin_array != 0, graph.pin_array, 1).astype(np.int64)
    free_arr = np.asarray(free, dtype=np.int64)
    track_arr = np.asarray(track, dtype=np.int64)
    if kernels.NUMBA_ENABLED:
        indptr, indices = graph.csr
        mx, s, s_plus = kernels.enumerate_gray_loop(
            indptr, indices, spins0, free_arr, cls, cls_log, cls_zero, log_b, log_g, track_arr
        )
        if mx == -math.inf:
            return -math.inf, np.full(len(track_arr), -math.inf)
        with np.errstate(divide="ignore"):
            return mx + math.log(s), mx + np.log(s_plus)
    return kernels.enumerate_numpy(
        graph.edges, spins0, free_arr, cls, cls_log, cls_zero, log_b, log_g, track_arr
    )


def exact_partition(model: Weights, graph: Graph, cap: int = DEFAULT_CAP) -> float:
    """``log Z`` over all configurations consistent with the graph's pins."""
    log_z, _ = _enumerate(model, graph, (), cap)
    return float(log_z)


def exact_marginals(model: Weights, graph: Graph, vertices=None, cap: int = DEFAULT_CAP) -> ExactResult:
    """Partition function together with occupation probabilities of ``vertices``
    (all free vertices by default) from a single enumeration."""
    if vertices is None:
        vertices = graph.free_vertices
    for v in vertices:
        if not 0 <= v < graph.n:
            raise InvalidInputError(f"vertex {v} outside [0, {graph.n})")
    log_z, log_plus = _enumerate(model, graph, list(vertices), cap)
    if log_z == -math.inf:
        raise InvalidInputError("every configuration has zero weight")
    probs = {int(v): float(np.exp(lp - log_z)) for v, lp in zip(vertices, log_plus)}
    return ExactResult(float(log_z), probs)


def exact_marginal(model: Weights, graph: Graph, v: int, cap: int = DEFAULT_CAP) -> float:
    """Probability that ``v`` carries spin +."""
    if not 0 <= v < graph.n:
        raise InvalidInputError(f"vertex {v} outside [0, {graph.n})")
    if v in graph.pin_map:
        raise InvalidInputError(f"vertex {v} is pinned")
    return exact_marginals(model, graph, [v], cap).marginals[v]
