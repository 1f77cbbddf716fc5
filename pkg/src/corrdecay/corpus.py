"""Seeded random instances for tests, acceptance runs and the CLI."""

from __future__ import annotations

import math

import numpy as np

from .model import MINUS, PLUS, Graph, SpinSystem


def random_connected_graph(rng: np.random.Generator, n: int, max_degree: int = 4,
                           extra_edges: int | None = None) -> Graph:
    """Random spanning tree plus extra edges, all degrees at most ``max_degree``."""
    if n <= 1:
        return Graph(max(n, 0))
    if max_degree < 2 and n > 2:
        raise ValueError("a connected graph on more than 2 vertices needs max_degree >= 2")
    deg = np.zeros(n, dtype=int)
    edges = set()
    order = rng.permutation(n)
    for i in range(1, n):
        v = int(order[i])
        cands = [int(u) for u in order[:i] if deg[u] < max_degree]
        u = cands[int(rng.integers(len(cands)))]
        edges.add((min(u, v), max(u, v)))
        deg[u] += 1
        deg[v] += 1
    if extra_edges is None:
        extra_edges = int(rng.integers(0, n + 1))
    for _ in range(extra_edges):
        u, v = (int(x) for x in rng.choice(n, size=2, replace=False))
        key = (min(u, v), max(u, v))
        if key in edges or deg[u] >= max_degree or deg[v] >= max_degree:
            continue
        edges.add(key)
        deg[u] += 1
        deg[v] += 1
    return Graph(n, tuple(edges))


def random_pins(rng: np.random.Generator, graph: Graph, max_fraction: float = 0.5) -> Graph:
    k = int(rng.integers(0, int(max_fraction * graph.n) + 1))
    chosen = rng.choice(graph.n, size=k, replace=False) if k else []
    return graph.with_pins({int(v): (PLUS if rng.random() < 0.5 else MINUS) for v in chosen})


def random_antiferro_system(rng: np.random.Generator) -> SpinSystem:
    """Soft system with ``beta * gamma < 1``, log-uniform activities."""
    beta = math.exp(rng.uniform(-3.0, 1.0))
    gamma = math.exp(rng.uniform(-3.0, 0.0)) / beta * rng.uniform(0.2, 1.0)
    lam = math.exp(rng.uniform(-3.0, 3.0))
    return SpinSystem(beta, gamma, lam)
