"""Self-avoiding-walk trees and interval evaluation of root marginals.

:func:`build_saw_tree` gives an explicit, lazily expanded tree for
inspection and as a reference evaluator.  :func:`saw_interval` runs the same
construction through the compiled depth-first kernel and is what the
approximation scheme uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from . import kernels
from .errors import InvalidInputError, NonContractiveError, NumericError
from .model import MINUS, PLUS, Graph, IsingView
from .recursion import h_fn

DEFAULT_NODE_CAP = 1_000_000


@dataclass(frozen=True)
class MarginalInterval:
    lo: float
    hi: float

    def __post_init__(self):
        if not 0.0 <= self.lo <= self.hi <= 1.0:
            raise NumericError(f"invalid enclosure [{self.lo!r}, {self.hi!r}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, p: float, slack: float = 0.0) -> bool:
        return self.lo - slack <= p <= self.hi + slack

    def within(self, other: "MarginalInterval", slack: float = 0.0) -> bool:
        return other.lo - slack <= self.lo and self.hi <= other.hi + slack


def _priority(graph: Graph, priority) -> np.ndarray:
    if priority is None:
        return np.arange(graph.n, dtype=np.int64)
    pr = np.asarray(priority, dtype=np.int64)
    if pr.shape != (graph.n,) or len(set(pr.tolist())) != graph.n:
        raise InvalidInputError("priority must assign distinct ranks to all vertices")
    return pr


class _Context:
    __slots__ = ("graph", "lam", "priority", "depth_limit")

    def __init__(self, graph, lam, priority, depth_limit):
        self.graph = graph
        self.lam = lam
        self.priority = priority
        self.depth_limit = depth_limit


class SawNode:
    """A node of the SAW tree: a self-avoiding walk from the root.

    ``pin`` is ``+1``/``-1`` for leaves fixed by a source pin or by closing a
    cycle, ``None`` otherwise.  ``frontier`` marks free leaves created by the
    depth limit.  Children are generated on demand.
    """

    __slots__ = ("origin", "depth", "pin", "lambda_v", "frontier", "_walk", "_ctx")

    def __init__(self, walk, pin, frontier, ctx):
        self._walk = walk
        self._ctx = ctx
        self.origin = walk[-1]
        self.depth = len(walk) - 1
        self.pin = pin
        self.frontier = frontier
        self.lambda_v = float(ctx.lam[self.origin])

    @property
    def is_leaf(self) -> bool:
        return self.pin is not None or self.frontier

    def iter_children(self) -> Iterator["SawNode"]:
        if self.is_leaf:
            return
        ctx = self._ctx
        walk = self._walk
        u = walk[-1]
        parent = walk[-2] if len(walk) > 1 else None
        position = {v: i for i, v in enumerate(walk)}
        pins = ctx.graph.pin_map
        for x in ctx.graph.neighbors(u):
            if x == parent:
                continue
            child_walk = walk + (x,)
            if x in pins:
                yield SawNode(child_walk, pins[x], False, ctx)
            elif x in position:
                y = walk[position[x] + 1]
                pin = PLUS if ctx.priority[u] > ctx.priority[y] else MINUS
                yield SawNode(child_walk, pin, False, ctx)
            else:
                yield SawNode(child_walk, None, len(walk) >= ctx.depth_limit, ctx)

    @property
    def children(self) -> tuple:
        return tuple(self.iter_children())

    def __repr__(self):
        tag = {PLUS: "+", MINUS: "-", None: "free" if self.frontier else ""}[self.pin]
        return f"SawNode(origin={self.origin}, depth={self.depth}{', ' + tag if tag else ''})"


def build_saw_tree(view: IsingView, graph: Graph, root: int, depth_limit: Optional[int] = None,
                   priority=None) -> SawNode:
    """Lazy SAW tree rooted at ``root``; ``depth_limit=None`` means untruncated."""
    if not 0 <= root < graph.n:
        raise InvalidInputError(f"root {root} outside [0, {graph.n})")
    if root in graph.pin_map:
        raise InvalidInputError(f"root {root} is pinned")
    limit = graph.n + 1 if depth_limit is None else int(depth_limit)
    ctx = _Context(graph, view.lambda_v, _priority(graph, priority), limit)
    return SawNode((root,), None, limit <= 0, ctx)


def eval_marginal_interval(node: SawNode, beta_prime: float, pad_to: Optional[int] = None) -> MarginalInterval:
    """Leaf-to-root interval evaluation.

    Pinned leaves give point intervals, frontier leaves ``[0, 1]``; an
    internal node maps its children's ``[lo_i, hi_i]`` to
    ``[F(hi_1..hi_k), F(lo_1..lo_k)]``.  ``pad_to`` appends dummy children of
    value 1/2 to every non-root internal node with fewer children, which
    leaves the result unchanged.
    """
    if node.pin is not None:
        v = 1.0 if node.pin == PLUS else 0.0
        return MarginalInterval(v, v)
    if node.frontier:
        return MarginalInterval(0.0, 1.0)
    prod_lo = 1.0
    prod_hi = 1.0
    k = 0
    for child in node.iter_children():
        iv = eval_marginal_interval(child, beta_prime, pad_to)
        prod_lo *= h_fn(iv.hi, beta_prime)
        prod_hi *= h_fn(iv.lo, beta_prime)
        k += 1
    if pad_to is not None and node.depth > 0:
        for _ in range(pad_to - k):
            half = h_fn(0.5, beta_prime)
            prod_lo *= half
            prod_hi *= half
    lam = node.lambda_v
    return MarginalInterval(1 / (1 + lam * prod_lo), 1 / (1 + lam * prod_hi))


def count_nodes(node: SawNode) -> int:
    return 1 + sum(count_nodes(c) for c in node.iter_children())


@dataclass(frozen=True)
class SawResult:
    interval: MarginalInterval
    nodes: int
    depth_limit: int
    exact: bool  # the truncation removed nothing


def full_depth(graph: Graph, root: int) -> int:
    """Smallest depth limit at which the SAW tree from ``root`` is untruncated."""
    indptr, indices = graph.csr
    return int(kernels.saw_tree_height(indptr, indices, graph.pin_array, root)) + 1


def saw_interval(view: IsingView, graph: Graph, root: int, depth_limit: Optional[int] = None,
                 priority=None, node_cap: int = DEFAULT_NODE_CAP) -> SawResult:
    """Root-marginal enclosure from the compiled SAW kernel."""
    if not 0 <= root < graph.n:
        raise InvalidInputError(f"root {root} outside [0, {graph.n})")
    if root in graph.pin_map:
        raise InvalidInputError(f"root {root} is pinned")
    full = full_depth(graph, root)
    limit = full if depth_limit is None else min(int(depth_limit), full)
    indptr, indices = graph.csr
    lam = np.asarray(view.lambda_v, dtype=np.float64)
    lo, hi, nodes, complete = kernels.saw_interval_loop(
        indptr, indices, graph.pin_array, lam, float(view.beta_prime), int(root), int(limit),
        _priority(graph, priority), int(node_cap),
    )
    if not complete:
        raise NumericError(
            f"SAW tree at vertex {root} exceeded {node_cap} nodes at depth limit {limit}"
        )
    lo, hi = min(lo, hi), max(lo, hi)
    return SawResult(MarginalInterval(max(lo, 0.0), min(hi, 1.0)), int(nodes), limit, limit >= full)


def required_depth(epsilon: float, c: float, L1: float, L2: float, max_depth: int = 10_000) -> int:
    """Smallest ``l >= 0`` with ``L1 * L2 * c**l <= epsilon``."""
    if not epsilon > 0:
        raise InvalidInputError("epsilon must be positive")
    if not c < 1:
        raise NonContractiveError(f"contraction constant {c!r} >= 1")
    scale = L1 * L2
    if scale <= epsilon:
        return 0
    if c <= 0:
        return 1
    l = max(0, math.ceil(math.log(scale / epsilon) / -math.log(c)))
    while l > 0 and scale * c ** (l - 1) <= epsilon:
        l -= 1
    while scale * c ** l > epsilon:
        l += 1
    if l > max_depth:
        raise NonContractiveError(
            f"contraction constant {c!r} is too close to 1: depth {l} exceeds cap {max_depth}"
        )
    return l
