"""Spin systems, graphs, configurations and the two parameter translations.

Spins are encoded as ``+1`` / ``-1``.  The vertex activity ``lam`` weights
vertices carrying spin ``-``, so a lone vertex has occupation probability
``1 / (1 + lam)``.  All weights are returned as natural logarithms; ``-inf``
encodes a zero weight under hard constraints.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

from .errors import HardConstraintError, InvalidInputError

PLUS = 1
MINUS = -1


def parse_spin(s) -> int:
    if s in (PLUS, "+", "+1", "1"):
        return PLUS
    if s in (MINUS, "-", "-1"):
        return MINUS
    raise InvalidInputError(f"not a spin: {s!r}")


def spin_char(s: int) -> str:
    return "+" if s == PLUS else "-"


class Regime(str, enum.Enum):
    ANTIFERRO_SOFT = "antiferro-soft"
    FERRO = "ferro"
    HARD = "hard"
    TRIVIAL = "trivial"


@dataclass(frozen=True)
class SpinSystem:
    """Two-state spin system with edge activities ``beta`` (+,+), ``gamma`` (-,-)
    and vertex activity ``lam``."""

    beta: float
    gamma: float
    lam: float

    def __post_init__(self):
        for name in ("beta", "gamma", "lam"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float, np.floating, np.integer)) and math.isfinite(v) and v >= 0):
                raise InvalidInputError(f"{name} must be finite and >= 0, got {v!r}")
            object.__setattr__(self, name, float(v))

    @property
    def is_soft(self) -> bool:
        return self.beta > 0 and self.gamma > 0 and self.lam > 0

    @property
    def is_antiferro(self) -> bool:
        return self.beta * self.gamma < 1

    @property
    def is_ferro(self) -> bool:
        return self.beta * self.gamma > 1

    @property
    def is_ising(self) -> bool:
        return self.beta == self.gamma

    def flipped(self) -> "SpinSystem":
        """The same system with the roles of + and - exchanged."""
        return SpinSystem(self.gamma, self.beta, 1.0 / self.lam)


def classify(system: SpinSystem) -> Regime:
    if not system.is_soft:
        return Regime.HARD
    bg = system.beta * system.gamma
    if bg < 1:
        return Regime.ANTIFERRO_SOFT
    if bg > 1:
        return Regime.FERRO
    return Regime.TRIVIAL


@dataclass(frozen=True)
class Graph:
    """Finite simple graph on vertices ``0..n-1`` with optional pinned spins.

    ``edges`` is normalised to a sorted tuple of ``(u, v)`` pairs with
    ``u < v``; ``pins`` to a sorted tuple of ``(vertex, spin)`` pairs.
    """

    n: int
    edges: tuple = ()
    pins: tuple = field(default=())

    def __post_init__(self):
        n = int(self.n)
        if n < 0:
            raise InvalidInputError("vertex count must be nonnegative")
        norm = set()
        for e in self.edges:
            u, v = (int(x) for x in e)
            if u == v:
                raise InvalidInputError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise InvalidInputError(f"edge ({u}, {v}) has an endpoint outside [0, {n})")
            key = (min(u, v), max(u, v))
            if key in norm:
                raise InvalidInputError(f"duplicate edge {key}")
            norm.add(key)
        pins = self.pins.items() if isinstance(self.pins, Mapping) else self.pins
        pin_map = {}
        for v, s in pins:
            v = int(v)
            if not 0 <= v < n:
                raise InvalidInputError(f"pinned vertex {v} outside [0, {n})")
            pin_map[v] = parse_spin(s)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "edges", tuple(sorted(norm)))
        object.__setattr__(self, "pins", tuple(sorted(pin_map.items())))

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def pin_map(self) -> dict:
        return dict(self.pins)

    @cached_property
    def _adj(self) -> tuple:
        adj = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return tuple(tuple(sorted(a)) for a in adj)

    def neighbors(self, v: int) -> tuple:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self._adj], dtype=np.int64)

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max()) if self.n else 0

    @cached_property
    def csr(self) -> tuple:
        """``(indptr, indices)`` with each neighbour list in ascending order."""
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        indptr[1:] = np.cumsum(self.degrees)
        indices = np.array([u for a in self._adj for u in a], dtype=np.int64)
        return indptr, indices

    @cached_property
    def pin_array(self) -> np.ndarray:
        """Per-vertex pin: 0 free, +1 or -1."""
        arr = np.zeros(self.n, dtype=np.int64)
        for v, s in self.pins:
            arr[v] = s
        return arr

    @property
    def free_vertices(self) -> list:
        pm = self.pin_map
        return [v for v in range(self.n) if v not in pm]

    def with_pins(self, pins) -> "Graph":
        """Copy of this graph with ``pins`` added to (or overriding) the existing pins."""
        merged = dict(self.pins)
        merged.update({int(v): parse_spin(s) for v, s in dict(pins).items()})
        return Graph(self.n, self.edges, tuple(merged.items()))

    def without_pins(self) -> "Graph":
        return Graph(self.n, self.edges)

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for w in self._adj[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.n


@dataclass(frozen=True)
class Configuration:
    spins: tuple

    def __post_init__(self):
        object.__setattr__(self, "spins", tuple(parse_spin(s) for s in self.spins))

    @classmethod
    def from_bits(cls, n: int, bits: int) -> "Configuration":
        """Bit ``i`` set means vertex ``i`` carries spin ``-``."""
        return cls(tuple(MINUS if (bits >> i) & 1 else PLUS for i in range(n)))

    def m(self) -> int:
        """Number of vertices with spin -."""
        return sum(1 for s in self.spins if s == MINUS)

    def n_plus(self, graph: Graph) -> int:
        return sum(1 for u, v in graph.edges if self.spins[u] == PLUS and self.spins[v] == PLUS)

    def n_minus(self, graph: Graph) -> int:
        return sum(1 for u, v in graph.edges if self.spins[u] == MINUS and self.spins[v] == MINUS)

    def consistent_with(self, graph: Graph) -> bool:
        return len(self.spins) == graph.n and all(self.spins[v] == s for v, s in graph.pins)


def _xlog(count: float, activity: float) -> float:
    if count == 0:
        return 0.0
    if activity == 0:
        return -math.inf
    return count * math.log(activity)


def _check_config(graph: Graph, config: Configuration):
    if len(config.spins) != graph.n:
        raise InvalidInputError(f"configuration has {len(config.spins)} spins for {graph.n} vertices")
    if not config.consistent_with(graph):
        raise InvalidInputError("configuration disagrees with the graph's pins")


def weight(system: SpinSystem, graph: Graph, config: Configuration) -> float:
    """Log-weight ``m log(lam) + n_plus log(beta) + n_minus log(gamma)``."""
    _check_config(graph, config)
    return (
        _xlog(config.m(), system.lam)
        + _xlog(config.n_plus(graph), system.beta)
        + _xlog(config.n_minus(graph), system.gamma)
    )


@dataclass(frozen=True)
class IsingView:
    """Equivalent Ising model: edge activity ``beta_prime`` on both
    monochromatic edge types and per-vertex activity ``lambda_v``.

    ``log w(sigma) = log w_ising(sigma) + scale_log`` for every configuration.
    """

    beta_prime: float
    lambda_v: tuple
    scale_log: float

    @property
    def log_lambda(self) -> np.ndarray:
        return np.log(np.asarray(self.lambda_v, dtype=np.float64))


def to_ising(system: SpinSystem, graph: Graph) -> IsingView:
    if system.beta <= 0 or system.gamma <= 0:
        raise HardConstraintError("translation requires soft constraints (beta > 0 and gamma > 0)")
    if system.lam <= 0:
        raise HardConstraintError("translation requires soft constraints (lambda > 0)")
    b, g = system.beta, system.gamma
    if b == g:
        return IsingView(b, (system.lam,) * graph.n, 0.0)
    half_log_ratio = 0.5 * (math.log(g) - math.log(b))
    lam_v = tuple(system.lam * math.exp(int(dv) * half_log_ratio) for dv in graph.degrees)
    scale = 0.5 * graph.m * (math.log(b) - math.log(g))
    return IsingView(math.sqrt(b * g), lam_v, scale)


def weight_ising(view: IsingView, graph: Graph, config: Configuration) -> float:
    _check_config(graph, config)
    lw = sum(math.log(view.lambda_v[v]) for v, s in enumerate(config.spins) if s == MINUS)
    mono = config.n_plus(graph) + config.n_minus(graph)
    return lw + _xlog(mono, view.beta_prime)


@dataclass(frozen=True)
class EnergyTranslation:
    """Activities equivalent to an energy-form system plus the constant that
    converts between the two partition functions."""

    system: SpinSystem
    q_pm: float
    field: float

    def log_offset(self, graph: Graph) -> float:
        """``log Z - log Z_energy`` on ``graph``."""
        return self.q_pm * graph.m + self.field * graph.n


def energy_to_activities(q_pp: float, q_pm: float, q_mm: float, h: float) -> EnergyTranslation:
    vals = (q_pp, q_pm, q_mm, h)
    if not all(isinstance(x, (int, float, np.floating, np.integer)) and math.isfinite(x) for x in vals):
        raise InvalidInputError(f"energies and field must be finite, got {vals}")
    system = SpinSystem(math.exp(-q_pp + q_pm), math.exp(-q_mm + q_pm), math.exp(2 * h))
    return EnergyTranslation(system, float(q_pm), float(h))


def energy_log_weight(q_pp, q_pm, q_mm, h, graph: Graph, config: Configuration) -> float:
    """Log of ``exp(-sum_E Q(s_u, s_v) - sum_V h(s_v))`` with ``h(+) = h = -h(-)``."""
    _check_config(graph, config)
    s = config.spins
    total = 0.0
    for u, v in graph.edges:
        if s[u] == PLUS and s[v] == PLUS:
            total -= q_pp
        elif s[u] == MINUS and s[v] == MINUS:
            total -= q_mm
        else:
            total -= q_pm
    total -= sum(h if x == PLUS else -h for x in s)
    return total


def iter_configurations(graph: Graph) -> Iterable[Configuration]:
    """All configurations consistent with the pins, free vertices in binary order."""
    free = graph.free_vertices
    base = [graph.pin_map.get(v, PLUS) for v in range(graph.n)]
    for bits in range(1 << len(free)):
        spins = list(base)
        for i, v in enumerate(free):
            if (bits >> i) & 1:
                spins[v] = MINUS
        yield Configuration(tuple(spins))
