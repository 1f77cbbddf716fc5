"""Tree recursions for the anti-ferromagnetic Ising model on the d-ary tree.

Probabilities live in ``[0, 1]``; messages are their images under
``phi(x) = log((x + D) / (1 - x + D))``, whose shift ``D`` depends only on
the arity ``d`` and the edge activity ``beta``.  Functions are written with
numpy operations and accept arrays wherever that is natural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import DomainError, InvalidInputError, NumericError


@dataclass(frozen=True)
class TreeParams:
    d: int
    beta: float
    lam: float

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise InvalidInputError(f"arity must be a positive integer, got {self.d!r}")
        if not 0 < self.beta < 1:
            raise InvalidInputError(f"anti-ferromagnetic edge activity must lie in (0, 1), got {self.beta!r}")
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise InvalidInputError(f"vertex activity must be positive and finite, got {self.lam!r}")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "lam", float(self.lam))


@dataclass(frozen=True)
class MessageConstants:
    d: int
    beta: float
    A: float
    D: float
    L1: float  # Lipschitz constant of phi on [0, 1]
    L2: float  # Lipschitz constant of psi on [phi(0), phi(1)]


def message_constants(d: int, beta: float) -> MessageConstants:
    if d < 1 or not 0 < beta < 1:
        raise InvalidInputError(f"need d >= 1 and beta in (0, 1), got d={d}, beta={beta}")
    A = d * (1 - beta * beta) + (1 - beta) ** 2
    rA = math.sqrt(A)
    # (sqrt(A + 4b) - sqrt(A)) / (2 sqrt(A)) with the difference rationalised
    D = 2 * beta / (rA * (math.sqrt(A + 4 * beta) + rA))
    return MessageConstants(int(d), float(beta), A, D, 1 / D + 1 / (1 + D), (1 + 2 * D) / 4)


# -- scalar recursion --------------------------------------------------------

def h_fn(x, beta):
    return (beta + (1 - beta) * x) / (1 - (1 - beta) * x)


def h_inverse(t, beta):
    return (t - beta) / ((1 - beta) * (1 + t))


def f_fn(x, params: TreeParams):
    return 1 / (1 + params.lam * h_fn(x, params.beta) ** params.d)


def _f_pair(x, params: TreeParams):
    """``(f(x), 1 - f(x))``, the complement formed without cancellation."""
    t = params.lam * h_fn(x, params.beta) ** params.d
    return 1 / (1 + t), t / (1 + t)


def F_fn(children, beta, lambda_v):
    """Occupation probability of a vertex from its children's probabilities.

    ``children`` may be an empty sequence (a leaf of the graph).
    """
    prod = 1.0
    for x in children:
        prod *= h_fn(x, beta)
    return 1 / (1 + lambda_v * prod)


def r_from_p(p):
    """Odds ratio ``(1 - p) / p``; ``inf`` at ``p = 0``."""
    if p == 0:
        return math.inf
    return (1 - p) / p


def ratio_recurrence(ratios, beta, lambda_v):
    """The same recursion written for odds ratios ``R = (1 - p) / p``."""
    out = lambda_v
    for r in ratios:
        out *= (beta * r + 1) / (beta + r)
    return out


# -- messages ------------------------------------------------------------------

def phi(x, mc: MessageConstants):
    D = mc.D
    return np.log((x + D) / (1 - x + D))


def phi_prime(x, mc: MessageConstants):
    D = mc.D
    return 1 / (x + D) + 1 / (1 - x + D)


def message_range(mc: MessageConstants):
    """``(phi(0), phi(1))``."""
    top = math.log((1 + mc.D) / mc.D)
    return -top, top


def psi(y, mc: MessageConstants):
    """Inverse of :func:`phi`; raises :class:`DomainError` outside its range."""
    lo, hi = message_range(mc)
    y_arr = np.asarray(y, dtype=np.float64)
    slack = 1e-12 * max(1.0, hi)
    if np.any(y_arr < lo - slack) or np.any(y_arr > hi + slack) or np.any(np.isnan(y_arr)):
        raise DomainError(f"message outside [{lo!r}, {hi!r}]")
    # (e^y (1 + D) - D) / (1 + e^y), rewritten to be exact at y = 0 and odd about it
    x = 0.5 + (0.5 + mc.D) * np.tanh(0.5 * np.clip(y_arr, lo, hi))
    x = np.clip(x, 0.0, 1.0)
    return float(x) if np.ndim(x) == 0 else x


def psi_prime(y, mc: MessageConstants):
    return 1 / phi_prime(psi(y, mc), mc)


# -- derivative identities ----------------------------------------------------

class D1Identities(NamedTuple):
    phi2_over_phi1: float
    h1_over_h: float
    h2_over_h1: float
    f1: float
    f2_over_f1: float


def log_h_prime(x, beta):
    """``h'(x) / h(x)``."""
    return (1 - beta * beta) / (beta + (1 - beta) ** 2 * x * (1 - x))


def f_prime(x, params: TreeParams):
    fx, cx = _f_pair(x, params)
    return -params.d * fx * cx * log_h_prime(x, params.beta)


def d1_identities(x, params: TreeParams, mc: MessageConstants) -> D1Identities:
    b, A = params.beta, mc.A
    phi_ratio = A * (2 * x - 1) / (b + A * x * (1 - x))
    hh = log_h_prime(x, b)
    h2 = 2 * (1 - b) / (1 - (1 - b) * x)
    fx, cx = _f_pair(x, params)
    f1 = -params.d * fx * cx * hh
    f2 = f1 * (cx - fx) / (fx * cx) + h2 - hh
    return D1Identities(phi_ratio, hh, h2, f1, f2)


# -- message recursion g = phi o f o psi --------------------------------------

def g_fn(y, params: TreeParams, mc: MessageConstants):
    return phi(f_fn(psi(y, mc), params), mc)


def g_prime(y, params: TreeParams, mc: MessageConstants):
    a = psi(y, mc)
    eta = f_fn(a, params)
    return phi_prime(eta, mc) / phi_prime(a, mc) * f_prime(a, params)


def g_double_prime(y, params: TreeParams, mc: MessageConstants):
    """Closed form of ``g''``; vanishes exactly where ``f(psi(y)) = psi(y)``.

    The first denominator factor is ``beta + (1 - beta)**2 a (1 - a)``, i.e.
    the denominator of ``h'/h`` at ``a``.
    """
    b, A, d = params.beta, mc.A, params.d
    a = psi(y, mc)
    eta = f_fn(a, params)
    gp = phi_prime(eta, mc) / phi_prime(a, mc) * f_prime(a, params)
    psip = 1 / phi_prime(a, mc)
    num = d * b * (1 - b * b) * (2 * b + A * a * eta + A * (1 - a) * (1 - eta))
    den = (b + a * (1 - a) * (1 - b) ** 2) * (b + A * eta * (1 - eta)) * (b + A * a * (1 - a))
    return (eta - a) * gp * psip * num / den


# -- vectorised recursion ----------------------------------------------------------

def G_fn(y, params: TreeParams, mc: MessageConstants):
    """Message of a vertex whose ``d`` children send messages ``y`` (last axis)."""
    y = np.asarray(y, dtype=np.float64)
    a = psi(y, mc)
    prod = np.prod(h_fn(a, params.beta), axis=-1)
    return phi(1 / (1 + params.lam * prod), mc)


def J_fn(x, beta):
    return x * (1 - x) / (beta + (1 - beta) ** 2 * x * (1 - x))


def K_fn(t, beta):
    """``J(h^{-1}(e^t))`` for ``t`` in ``(log beta, -log beta)``."""
    return J_fn(h_inverse(np.exp(t), beta), beta)


def K_second(t, beta):
    return -np.exp(-t) * (1 + np.exp(2 * t)) * beta / (1 - beta * beta) ** 2


def grad_G_l1(y, params: TreeParams, mc: MessageConstants):
    """``||grad G(y)||_1`` in closed form."""
    y = np.asarray(y, dtype=np.float64)
    if y.shape[-1] != params.d:
        raise InvalidInputError(f"expected {params.d} coordinates, got {y.shape[-1]}")
    b, A, d = params.beta, mc.A, params.d
    a = psi(y, mc)
    eta = psi(G_fn(y, params, mc), mc)
    pre = d * eta * (1 - eta) * (1 - b * b) / (b + A * eta * (1 - eta))
    return pre * (1 + (1 - b * b) * np.sum(J_fn(a, b), axis=-1))


def uniform_equivalent(y, params: TreeParams, mc: MessageConstants, tol: float = 1e-14) -> float:
    """Message ``m`` with ``G(m, ..., m) = G(y)``, i.e. ``psi(g(m)) = psi(G(y))``.

    ``g`` is strictly decreasing, so bisection on the message range suffices.
    """
    target = float(G_fn(y, params, mc))
    lo, hi = message_range(mc)
    if g_fn(lo, params, mc) <= target:
        return lo
    if g_fn(hi, params, mc) >= target:
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if g_fn(mid, params, mc) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# -- fixed point and uniqueness -----------------------------------------------

@dataclass(frozen=True)
class FixedPointReport:
    x_star: float
    p_star: float
    f_prime_at_star: float
    contraction_c: float
    in_uniqueness_interior: bool

    @property
    def margin(self) -> float:
        """``f'(x*) + 1``; positive inside the uniqueness region."""
        return self.f_prime_at_star + 1


def _bisect_decreasing(fn, lo, hi, tol):
    """Root of a function positive at ``lo`` and negative at ``hi``."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if fn(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def fixed_point(params: TreeParams, mc: Optional[MessageConstants] = None) -> FixedPointReport:
    """Unique fixed point of ``f`` by bisection on ``[f(1), f(0)]``.

    Bisection runs to floating-point resolution (well below ``1e-13``).
    """
    if mc is None:
        mc = message_constants(params.d, params.beta)
    if params.lam == 1:
        x = 0.5
    else:
        x = _bisect_decreasing(lambda t: f_fn(t, params) - t, f_fn(1.0, params), f_fn(0.0, params), 0.0)
    fp = float(f_prime(x, params))
    return FixedPointReport(x, float(phi(x, mc)), fp, abs(fp), fp > -1)


class UniquenessVerdict(NamedTuple):
    unique: bool
    margin: float


def uniqueness_check(params: TreeParams, mc: Optional[MessageConstants] = None,
                     margin_floor: float = 1e-9) -> UniquenessVerdict:
    rep = fixed_point(params, mc)
    return UniquenessVerdict(rep.margin > margin_floor, rep.margin)


def zero_field_threshold(d: int) -> float:
    """Edge activity ``(d - 1) / (d + 1)`` above which every field is unique."""
    return (d - 1) / (d + 1)


def critical_log_lambda(d: int, beta: float, tol: float = 1e-10, scan_points: int = 10_000,
                        log_lambda_max: float = 700.0) -> Optional[float]:
    """``log lambda_c(beta, d) >= 0``, or ``None`` when every field is unique.

    Bisects ``f'(x*) + 1`` in ``log lambda`` after bracketing from ``[0, 1]``
    by doubling (to 50 and beyond if needed).  Monotonicity in ``log lambda``
    is not assumed: when the bracket is not a clean sign change a uniform scan
    locates the first crossing instead.
    """
    if d < 1 or not 0 < beta < 1:
        raise InvalidInputError(f"need d >= 1 and beta in (0, 1), got d={d}, beta={beta}")
    thr = zero_field_threshold(d)
    if abs(beta - thr) <= 1e-12 * max(thr, 1e-300):
        # at the threshold lambda_c = 1: zero field is the (excluded) boundary point
        return 0.0
    if beta > thr:
        return None
    mc = message_constants(d, beta)

    def s(t):
        return fixed_point(TreeParams(d, beta, math.exp(t)), mc).margin

    s0 = s(0.0)
    hi = 1.0
    while s(hi) <= 0 and hi < log_lambda_max:
        hi = min(2 * hi, log_lambda_max)
    if s0 < 0 < s(hi):
        return _bisect_increasing(s, 0.0, hi, tol)
    grid = np.linspace(0.0, hi, scan_points)
    vals = np.array([s(t) for t in grid])
    idx = np.nonzero((vals[:-1] <= 0) & (vals[1:] > 0))[0]
    if len(idx) == 0:
        if s0 >= 0:
            # beta within rounding of the zero-field threshold
            return 0.0
        raise NumericError(f"no sign change of f'(x*)+1 for log lambda in [0, {hi}] (d={d}, beta={beta})")
    i = int(idx[0])
    return _bisect_increasing(s, grid[i], grid[i + 1], tol)


def _bisect_increasing(fn, lo, hi, tol):
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if fn(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def critical_lambda(d: int, beta: float) -> Optional[float]:
    t = critical_log_lambda(d, beta)
    return None if t is None else math.exp(t)
