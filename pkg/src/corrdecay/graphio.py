"""Plain-text graph files.

::

    # comment
    n m
    u v          (m edge lines, 0-based ids)
    pin v +      (optional, any number)
"""

from __future__ import annotations

from pathlib import Path

from .errors import InvalidInputError
from .model import Graph, parse_spin, spin_char


def parse_graph(text: str, source: str = "<string>") -> Graph:
    header = None
    edges = []
    seen = set()
    pins = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()

        def fail(msg):
            raise InvalidInputError(f"{source}:{lineno}: {msg}")

        if header is None:
            if len(parts) != 2:
                fail(f"expected header 'n m', got {line!r}")
            try:
                header = (int(parts[0]), int(parts[1]))
            except ValueError:
                fail(f"non-integer header {line!r}")
            if header[0] < 0 or header[1] < 0:
                fail("negative count in header")
            continue
        n, _ = header
        if parts[0] == "pin":
            if len(parts) != 3:
                fail(f"expected 'pin v +|-', got {line!r}")
            try:
                v = int(parts[1])
                s = parse_spin(parts[2])
            except (ValueError, InvalidInputError):
                fail(f"bad pin line {line!r}")
            if not 0 <= v < n:
                fail(f"pinned vertex {v} outside [0, {n})")
            pins[v] = s
            continue
        if len(parts) != 2:
            fail(f"expected edge 'u v', got {line!r}")
        if pins:
            fail("edge line after pin lines")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            fail(f"non-integer edge {line!r}")
        if u == v:
            fail(f"self-loop at vertex {u}")
        if not (0 <= u < n and 0 <= v < n):
            fail(f"edge ({u}, {v}) has an endpoint outside [0, {n})")
        key = (min(u, v), max(u, v))
        if key in seen:
            fail(f"duplicate edge {key}")
        seen.add(key)
        edges.append(key)
    if header is None:
        raise InvalidInputError(f"{source}: missing header line 'n m'")
    if len(edges) != header[1]:
        raise InvalidInputError(f"{source}: header declares {header[1]} edges, found {len(edges)}")
    return Graph(header[0], tuple(edges), tuple(pins.items()))


def load_graph(path) -> Graph:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from exc
    return parse_graph(text, source=str(path))


def format_graph(graph: Graph) -> str:
    lines = [f"{graph.n} {graph.m}"]
    lines += [f"{u} {v}" for u, v in graph.edges]
    lines += [f"pin {v} {spin_char(s)}" for v, s in graph.pins]
    return "\n".join(lines) + "\n"


def save_graph(graph: Graph, path) -> None:
    Path(path).write_text(format_graph(graph))
