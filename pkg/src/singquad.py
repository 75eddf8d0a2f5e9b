"""Quadrature for endpoint-singular integrands and bracketed root finding."""
import sys
import os
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate, optimize

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from config import QUAD_TOL, QUAD_LIMIT, ROOT_TOL, BISECTION_STEPS

from src.errors import PreconditionError, QuadratureError

# error estimates below this many ulps of the result are accepted even when quad flags roundoff
_ROUNDING_ULPS = 100.0


@dataclass(frozen=True)
class SingularIntegrand:
    """Integrand on (lower, upper) with power-law blow-up at the endpoints.

    ``left_exponent`` / ``right_exponent`` give alpha, beta in
    f ~ |x - lower|^-alpha and f ~ |upper - x|^-beta. ``reflected`` is an
    optional evaluator w -> f(upper - w) that avoids the cancellation in
    ``upper - w`` when w is tiny.
    """

    evaluator: Callable[[float], float]
    left_exponent: float = 0.0
    right_exponent: float = 0.0
    lower: float = 0.0
    upper: float = 1.0
    reflected: Optional[Callable[[float], float]] = None

    def __post_init__(self):
        for name in ("left_exponent", "right_exponent"):
            value = getattr(self, name)
            if not 0.0 <= value < 1.0:
                raise PreconditionError(f"{name} must lie in [0, 1), got {value}")
        if not self.lower < self.upper:
            raise PreconditionError(f"empty interval ({self.lower}, {self.upper})")


def _half_integral(g: Callable[[float], float], span: float, exponent: float, tol: float, limit: int):
    """Integrate w -> g(w) over (0, span) after w = u^q, q = 1/(1 - exponent)"""
    q = 1.0 / (1.0 - exponent)

    def smoothed(u):
        return g(u ** q) * q * u ** (q - 1.0)

    out = integrate.quad(smoothed, 0.0, span ** (1.0 / q), epsabs=tol, epsrel=0.0,
                         limit=limit, full_output=1)
    value, error = out[0], out[1]
    if len(out) > 3 and error > max(tol, _ROUNDING_ULPS * np.finfo(float).eps * abs(value)):
        raise QuadratureError(f"quad did not converge: {out[3]}", value, error)
    return value, error


def integrate_singular(f: SingularIntegrand, tol: float = QUAD_TOL, limit: int = QUAD_LIMIT) -> float:
    """Integrate an integrand with integrable endpoint singularities.

    The interval is split at its midpoint; each half is mapped so that the
    singular endpoint sits at the origin and the power-law blow-up is
    removed by z = endpoint + u^(1/(1-alpha)). Both halves then go to
    adaptive Gauss-Kronrod (scipy ``quad``).

    Args:
        f: The integrand and its endpoint exponents.
        tol: Absolute error target for the whole integral.
        limit: Subinterval budget per half.

    Returns:
        The integral estimate.

    Raises:
        QuadratureError: If either half fails to reach ``tol``.
    """
    if tol <= 0:
        raise PreconditionError(f"tol must be positive, got {tol}")
    a, b = f.lower, f.upper
    half = 0.5 * (b - a)
    right = f.reflected if f.reflected is not None else (lambda w: f.evaluator(b - w))

    left_value, left_error = _half_integral(lambda w: f.evaluator(a + w), half, f.left_exponent, 0.5 * tol, limit)
    right_value, right_error = _half_integral(right, half, f.right_exponent, 0.5 * tol, limit)
    total = left_value + right_value
    if left_error + right_error > max(tol, 2 * _ROUNDING_ULPS * np.finfo(float).eps * abs(total)):
        raise QuadratureError("error estimate above tolerance", total, left_error + right_error)
    return total


def bracket_root(g: Callable[[float], float], lo: float, hi: float, tol: float = ROOT_TOL) -> float:
    """Root of a monotone map on [lo, hi] (Brent's method, never leaves the bracket)"""
    if lo > hi:
        lo, hi = hi, lo
    g_lo, g_hi = g(lo), g(hi)
    if g_lo == 0.0:
        return float(lo)
    if g_hi == 0.0:
        return float(hi)
    if np.sign(g_lo) == np.sign(g_hi):
        raise PreconditionError(f"no sign change on [{lo}, {hi}]: g(lo)={g_lo}, g(hi)={g_hi}")
    return float(optimize.brentq(g, lo, hi, xtol=tol, maxiter=500))


def bracket_roots(g: Callable[[np.ndarray], np.ndarray], lo, hi, iterations: int = BISECTION_STEPS) -> np.ndarray:
    """Vectorized bisection: one monotone root problem per array element.

    ``g`` is evaluated elementwise on arrays shaped like ``lo``/``hi``; each
    bracket is halved ``iterations`` times, so 64 steps reach the spacing of
    doubles on any bracket.
    """
    lo, hi = np.broadcast_arrays(np.asarray(lo, dtype=float), np.asarray(hi, dtype=float))
    lo, hi = lo.copy(), hi.copy()
    g_lo, g_hi = np.asarray(g(lo)), np.asarray(g(hi))
    if np.any(np.sign(g_lo) * np.sign(g_hi) > 0):
        raise PreconditionError("no sign change in at least one bracket")
    lo_sign = np.sign(g_lo)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        same = np.sign(g(mid)) == lo_sign
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    return 0.5 * (lo + hi)
