"""Certified approximation of marginals and of the partition function.

The system is translated to an Ising model with per-vertex activities, every
vertex is checked against the d-ary-tree uniqueness region with
``d = max_degree - 1``, and marginals are enclosed by truncated SAW-tree
evaluation.  ``log Z`` is telescoped against the configuration with every
free vertex at +.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import InvalidInputError, UncertifiedError, UnsupportedRegimeError
from .model import PLUS, Configuration, Graph, Regime, SpinSystem, classify, to_ising, weight
from .recursion import (
    TreeParams,
    critical_log_lambda,
    fixed_point,
    message_constants,
)
from .sawtree import DEFAULT_NODE_CAP, MarginalInterval, full_depth, required_depth, saw_interval

NEAR_BOUNDARY = 1e-6


@dataclass(frozen=True)
class DegreeRecord:
    degree: int
    lambda_v: float
    log_lambda_c: Optional[float]
    in_region: bool
    margin: float  # |log lambda_v| - log lambda_c, or f'(x*) + 1 when no threshold exists
    contraction: float


@dataclass(frozen=True)
class Certificate:
    beta_prime: float
    d: int
    records: tuple
    c: float
    L1: float
    L2: float
    ok: bool
    near_boundary: bool
    failing_vertices: tuple = ()

    def failures(self) -> list:
        bad = {r.degree: r for r in self.records if not r.in_region}
        return [(v, bad[deg]) for v, deg in self.failing_vertices]


def certify(system: SpinSystem, graph: Graph, arity: Optional[int] = None) -> Certificate:
    """Check every vertex against the uniqueness region of the ``d``-ary tree.

    ``d`` defaults to ``max(max_degree - 1, 1)``.  A larger ``arity`` is
    accepted (non-root SAW nodes can always be padded with dummy children) and
    gives a more conservative certificate; a smaller one is rejected.
    """
    regime = classify(system)
    if regime is not Regime.ANTIFERRO_SOFT:
        raise UnsupportedRegimeError(f"only soft anti-ferromagnetic systems are supported, got {regime.value}")
    view = to_ising(system, graph)
    bp = view.beta_prime
    # arity of non-root SAW-tree nodes; a max-degree-1 graph still gets a 1-ary recursion
    d = max(graph.max_degree - 1, 1)
    if arity is not None:
        if arity < d:
            raise InvalidInputError(f"arity {arity} is below max_degree - 1 = {d}")
        d = int(arity)
    mc = message_constants(d, bp)
    log_lc = critical_log_lambda(d, bp)
    records = {}
    for v in range(graph.n):
        deg = int(graph.degrees[v])
        if deg in records:
            continue
        lam_v = view.lambda_v[v]
        fp = fixed_point(TreeParams(d, bp, lam_v), mc)
        if log_lc is None:
            in_region = fp.contraction_c < 1
            margin = fp.margin
        else:
            margin = abs(math.log(lam_v)) - log_lc
            in_region = margin > 0 and fp.contraction_c < 1
        records[deg] = DegreeRecord(deg, lam_v, log_lc, in_region, margin, fp.contraction_c)
    recs = tuple(records[k] for k in sorted(records))
    c = max((r.contraction for r in recs), default=0.0)
    ok = all(r.in_region for r in recs)
    failing = tuple((v, int(graph.degrees[v])) for v in range(graph.n)
                    if not records[int(graph.degrees[v])].in_region)
    near = any(abs(fixed_point(TreeParams(d, bp, r.lambda_v), mc).margin) < NEAR_BOUNDARY for r in recs)
    return Certificate(bp, d, recs, c, mc.L1, mc.L2, ok, near, failing)


def root_factor(cert: Certificate, root_degree: int) -> float:
    """Upper bound on ``sum_i |dp_root / dx_i|`` for a root with ``root_degree``
    children sending messages ``x_i``.

    Each term is ``eta (1 - eta) (1 - b^2) (1 + d (1 - b^2) J(a_i)) / (A (1 + 2D))``
    with ``eta (1 - eta) <= 1/4`` and ``J <= 1 / (1 + b)^2``.
    """
    b, d = cert.beta_prime, cert.d
    mc = message_constants(d, b)
    return root_degree * (1 - b * b) * (1 + d * (1 - b) / (1 + b)) / (4 * mc.A * (1 + 2 * mc.D))


def width_bound(cert: Certificate, depth: int, root_degree: int) -> float:
    """A-priori bound on the enclosure width with free leaves at ``depth``.

    A root with at most ``d`` children is a d-ary recursion step and gets
    ``L1 * L2 * c**depth``.  A root of degree ``d + 1`` falls outside the
    d-ary analysis; its single step is bounded by :func:`root_factor` and the
    subtrees below it by ``L1 * c**(depth - 1)``.
    """
    if depth <= 0:
        return 1.0
    if root_degree <= cert.d:
        return min(1.0, cert.L1 * cert.L2 * cert.c ** depth)
    return min(1.0, cert.L1 * root_factor(cert, root_degree) * cert.c ** (depth - 1))


def depth_for(epsilon: float, cert: Certificate, root_degree: int) -> int:
    """Smallest depth whose :func:`width_bound` is at most ``epsilon``."""
    if root_degree <= cert.d:
        return required_depth(epsilon, cert.c, cert.L1, cert.L2)
    return 1 + required_depth(epsilon, cert.c, cert.L1, root_factor(cert, root_degree))


def _require_ok(cert: Certificate):
    if not cert.ok:
        fails = cert.failures()
        detail = ", ".join(
            f"v{v} (deg {r.degree}: |log lambda_v|={abs(math.log(r.lambda_v)):.6g}, "
            f"log lambda_c={r.log_lambda_c if r.log_lambda_c is not None else 'none'})"
            for v, r in fails[:10]
        )
        raise UncertifiedError(f"outside the uniqueness region at {len(fails)} vertices: {detail}", fails)


@dataclass(frozen=True)
class MarginalEstimate:
    vertex: int
    interval: MarginalInterval
    depth_used: int
    required_depth: int
    nodes: int
    exact: bool

    @property
    def midpoint(self) -> float:
        return self.interval.midpoint


def approx_marginal(system: SpinSystem, graph: Graph, v: int, epsilon: float,
                    certificate: Optional[Certificate] = None,
                    node_cap: int = DEFAULT_NODE_CAP, arity: Optional[int] = None) -> MarginalEstimate:
    """Enclosure of width at most ``epsilon`` around the occupation probability of ``v``.

    Depth grows one level at a time up to the contraction-derived depth
    (:func:`depth_for`) and stops as soon as the interval is narrow enough.  Should the interval
    still be too wide there, deepening continues to the untruncated tree, so
    the width guarantee never rests on the a-priori bound alone.
    """
    if not epsilon > 0:
        raise InvalidInputError("epsilon must be positive")
    if v in graph.pin_map:
        raise InvalidInputError(f"vertex {v} is pinned")
    cert = certify(system, graph, arity) if certificate is None else certificate
    _require_ok(cert)
    view = to_ising(system, graph)
    l_req = depth_for(epsilon, cert, graph.degree(v))
    full = full_depth(graph, v)
    budget = node_cap
    nodes = 0
    depth = 0
    while True:
        depth += 1
        res = saw_interval(view, graph, v, depth, node_cap=budget)
        nodes += res.nodes
        budget -= res.nodes
        if res.exact or res.interval.width <= epsilon or depth >= full:
            break
    return MarginalEstimate(v, res.interval, res.depth_limit, l_req, nodes, res.exact)


@dataclass(frozen=True)
class ZEstimate:
    log_Z_hat: float
    relative_error_bound: float
    depth_used: int
    marginals: tuple
    certificate: Certificate
    epsilon: float
    nodes: int = 0
    log_anchor: float = field(default=0.0)


def anchor_configuration(graph: Graph) -> Configuration:
    """Pinned vertices at their pins, every free vertex at +."""
    pm = graph.pin_map
    return Configuration(tuple(pm.get(v, PLUS) for v in range(graph.n)))


def per_vertex_tolerance(epsilon: float, n: int, lambda_v: float, beta_prime: float, degree: int) -> float:
    """``epsilon * p_lb / (4 n)`` with ``p_lb = F(1, ..., 1)`` the smallest possible marginal."""
    p_lb = 1 / (1 + lambda_v * beta_prime ** (-degree))
    return epsilon * p_lb / (4 * n)


def approx_partition(system: SpinSystem, graph: Graph, epsilon: float,
                     node_cap: int = DEFAULT_NODE_CAP, arity: Optional[int] = None) -> ZEstimate:
    """``log Z`` to relative accuracy ``epsilon`` via telescoped marginals.

    ``relative_error_bound`` is computed a posteriori from the marginal
    enclosures: the true ``Z_hat / Z`` lies within ``[1 - bound, 1 + bound]``.
    """
    if not 0 < epsilon < 1:
        raise InvalidInputError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    cert = certify(system, graph, arity)
    _require_ok(cert)
    view = to_ising(system, graph)
    order = graph.free_vertices
    n = max(len(order), 1)
    log_anchor = weight(system, graph, anchor_configuration(graph))
    current = graph
    log_sum_hat = 0.0
    log_hi = 0.0  # sum log(hi_i / p_hat_i)
    log_lo = 0.0
    depth_used = 0
    nodes = 0
    ests = []
    for v in order:
        tol = per_vertex_tolerance(epsilon, n, view.lambda_v[v], view.beta_prime, int(graph.degrees[v]))
        est = approx_marginal(system, current, v, tol, certificate=cert, node_cap=node_cap)
        p_hat = est.midpoint
        log_sum_hat += math.log(p_hat)
        log_hi += math.log(est.interval.hi / p_hat)
        log_lo += math.log(est.interval.lo / p_hat)
        depth_used = max(depth_used, est.depth_used)
        nodes += est.nodes
        ests.append(est)
        current = current.with_pins({v: PLUS})
    bound = max(math.expm1(log_hi), -math.expm1(log_lo))
    return ZEstimate(log_anchor - log_sum_hat, bound, depth_used, tuple(ests), cert, epsilon, nodes, log_anchor)


def telescoped_log_partition(system: SpinSystem, graph: Graph, marginal_fn) -> float:
    """``log w(anchor) - sum_i log p_i`` with ``p_i = marginal_fn(graph_i, v_i)``.

    With exact marginals this reproduces ``log Z`` exactly; it is the identity
    :func:`approx_partition` relies on.
    """
    current = graph
    total = weight(system, graph, anchor_configuration(graph))
    for v in graph.free_vertices:
        total -= math.log(marginal_fn(current, v))
        current = current.with_pins({v: PLUS})
    return total
