"""Critical-activity curves and measured decay on d-ary trees."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import CorrDecayError, InvalidInputError
from .recursion import (
    MessageConstants,
    TreeParams,
    critical_log_lambda,
    f_fn,
    h_fn,
    fixed_point,
    message_constants,
    phi,
    zero_field_threshold,
)

BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class PhasePoint:
    d: int
    beta: float
    log_lambda_c: Optional[float]
    boundary: bool = False
    failed: Optional[str] = None


def lambda_c_curve(d: int, beta_grid: Sequence[float]) -> list:
    """``log lambda_c(beta, d)`` at each grid point; failures are recorded, not raised."""
    if d < 2:
        raise InvalidInputError(f"need d >= 2, got {d}")
    thr = zero_field_threshold(d)
    out = []
    for b in beta_grid:
        b = float(b)
        if not 0 < b < 1:
            raise InvalidInputError(f"grid value {b} outside (0, 1)")
        boundary = abs(b - thr) <= BOUNDARY_TOL
        try:
            out.append(PhasePoint(d, b, critical_log_lambda(d, b), boundary))
        except CorrDecayError as exc:
            out.append(PhasePoint(d, b, None, boundary, str(exc)))
    return out


def parse_grid(text: str) -> np.ndarray:
    """``"start:stop:step"`` (inclusive of ``stop`` up to rounding) or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise InvalidInputError(f"grid must be start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise InvalidInputError("grid step must be positive")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return np.round(start + step * np.arange(count), 12)
    return np.array([float(p) for p in text.split(",") if p.strip()])


def zero_crossing(d: int, points: Sequence[PhasePoint], tol: float = 1e-12) -> Optional[float]:
    """Refined ``beta`` where the curve reaches ``log lambda_c = 0``.

    The grid supplies the bracket (last point with ``log lambda_c > 0``, next
    point without); within it the crossing is located by bisection on the sign
    of ``f'(x*) + 1`` at zero field, computed from the numerical fixed point.
    """
    pts = sorted((p for p in points if p.failed is None), key=lambda p: p.beta)
    lo = hi = None
    for a, b in zip(pts, pts[1:]):
        if a.log_lambda_c is not None and a.log_lambda_c > 0 and not b.log_lambda_c:
            lo, hi = a.beta, b.beta
            break
    if lo is None:
        return None

    def unique_at_zero_field(beta):
        return fixed_point(TreeParams(d, beta, 1.0)).margin >= 0

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if unique_at_zero_field(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class DecayTrace:
    """Message-space gaps between all-+ and all-- boundaries, per level."""

    gaps: tuple
    ratios: tuple
    p_plus: tuple
    p_minus: tuple


def _h_diff_from(a, b, diff, beta):
    """``h(a) - h(b)`` for ``diff = a - b``, without cancellation."""
    t = 1 - beta
    return diff * (1 - beta * beta) / ((1 - t * a) * (1 - t * b))


def _pow_diff(u, v, du, d):
    """``u**d - v**d`` given ``du = u - v``."""
    return du * sum(u ** k * v ** (d - 1 - k) for k in range(d))


def _f_step(a, b, diff, params):
    """``(f(a), f(b), f(a) - f(b))`` given ``diff = h(a) - h(b)``."""
    ha, hb = h_fn(a, params.beta), h_fn(b, params.beta)
    dH = _pow_diff(ha, hb, diff, params.d)
    Ha, Hb = ha ** params.d, hb ** params.d
    lam = params.lam
    fa, fb = 1 / (1 + lam * Ha), 1 / (1 + lam * Hb)
    return fa, fb, -lam * dH * fa * fb


def _phi_diff(a, b, diff, mc):
    """``phi(a) - phi(b)`` for ``diff = a - b``."""
    D = mc.D
    return math.log1p(diff / (b + D)) + math.log1p(diff / (1 - a + D))


def decay_rate_estimate(params: TreeParams, mc: Optional[MessageConstants] = None, levels: int = 40) -> DecayTrace:
    """Iterate ``f`` from the two extreme boundaries (leaves at 1 and at 0).

    ``gaps[i] = |phi(p_i^+) - phi(p_i^-)|`` where level ``i`` is the value at
    distance ``i`` above the boundary; ``ratios[i] = gaps[i+1] / gaps[i]``.
    The difference ``p^+ - p^-`` is propagated alongside the two sequences so
    gaps stay accurate long after they drop below rounding of the values.
    """
    if levels < 2:
        raise InvalidInputError("need at least 2 levels")
    if mc is None:
        mc = message_constants(params.d, params.beta)
    plus, minus = [1.0], [0.0]
    diff = 1.0
    gaps = [abs(_phi_diff(1.0, 0.0, 1.0, mc))]
    for _ in range(levels):
        hd = _h_diff_from(plus[-1], minus[-1], diff, params.beta)
        a, b, diff = _f_step(plus[-1], minus[-1], hd, params)
        plus.append(a)
        minus.append(b)
        gaps.append(abs(_phi_diff(a, b, diff, mc)))
    ratios = [g1 / g0 if g0 > 0 else 0.0 for g0, g1 in zip(gaps, gaps[1:])]
    return DecayTrace(tuple(gaps), tuple(ratios), tuple(plus), tuple(minus))


def two_step_fixed_points(params: TreeParams, grid_points: int = 10_000) -> list:
    """Fixed points of ``f o f`` on ``[0, 1]`` by sign scan plus bisection."""
    xs = np.linspace(0.0, 1.0, grid_points + 1)

    def q(x):
        return f_fn(f_fn(x, params), params) - x

    vals = q(xs)
    roots = [float(x) for x, v in zip(xs, vals) if v == 0.0]
    for i in np.nonzero(vals[:-1] * vals[1:] < 0)[0]:
        a, b = float(xs[i]), float(xs[i + 1])
        qa = vals[i]
        while b - a > 1e-15:
            m = 0.5 * (a + b)
            if m in (a, b):
                break
            qm = q(m)
            if (qm > 0) == (qa > 0):
                a, qa = m, qm
            else:
                b = m
        roots.append(0.5 * (a + b))
    return sorted(roots)


def write_curve_csv(points: Sequence[PhasePoint], fh) -> None:
    fh.write("d,beta,log_lambda_c\n")
    for p in points:
        val = "" if p.log_lambda_c is None else repr(float(p.log_lambda_c))
        fh.write(f"{p.d},{p.beta!r},{val}\n")


def write_decay_csv(trace: DecayTrace, fh) -> None:
    fh.write("level,q_plus_minus_gap,ratio\n")
    for i, g in enumerate(trace.gaps):
        r = "" if i == 0 else repr(trace.ratios[i - 1])
        fh.write(f"{i},{g!r},{r}\n")
