import sys
import os
# Add the root directory to Python path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
from scipy.linalg import solveh_banded

from config import VARIATIONAL_POINTS, VARIATIONAL_MAX_ITER, VARIATIONAL_TOL, VARIATIONAL_MAX_STEP
from src.errors import ConvergenceError, DomainError, PreconditionError
from src.profile import c_coefficient, support_closed_form, WaveParams
from utils.console import status, warn

MIN_POINTS = 101


def symmetric_decreasing_rearrange(v) -> np.ndarray:
    """Values sorted in decreasing order and laid out from the center, alternating right then left"""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise PreconditionError("rearrangement expects a one-dimensional grid vector")
    if np.any(v < 0.0):
        raise PreconditionError("rearrangement is defined for nonnegative vectors only")
    n = v.size
    k = np.arange(n)
    offsets = (k + 1) // 2 * np.where(k % 2 == 1, 1, -1)
    out = np.empty_like(v)
    out[(n - 1) // 2 + offsets] = np.sort(v, kind="stable")[::-1]
    return out


def dirichlet_energy(v: np.ndarray, h: float) -> float:
    """sum((v')^2) h with zero values beyond both ends"""
    slopes = np.diff(np.concatenate(([0.0], v, [0.0]))) / h
    return float(np.sum(slopes ** 2) * h)


def objective(v: np.ndarray, omega: float, h: float) -> float:
    """N0[v] = 1/4 sum((v')^2) h + omega sum(v) h"""
    return 0.25 * dirichlet_energy(v, h) + omega * float(np.sum(v) * h)


def coefficient(v: np.ndarray, omega: float, h: float) -> float:
    """c(v) = 1/2 sum((v')^2) h + omega sum(v) h, the multiplier of the constraint"""
    return 0.5 * dirichlet_energy(v, h) + omega * float(np.sum(v) * h)


def weinstein_functional(u, omega: float, p: float, h: float) -> float:
    """J[u] = (sum((u u')^2) h + omega sum(u^2) h) / ||u||_p^2 on the grid"""
    u = np.asarray(u, dtype=float)
    v = u * u
    numerator = 0.25 * dirichlet_energy(v, h) + omega * float(np.sum(v) * h)
    return numerator / float(np.sum(np.abs(u) ** p) * h) ** (2.0 / p)


def objective_change(old: np.ndarray, new: np.ndarray, omega: float, h: float) -> float:
    """N0[new] - N0[old] summed term by term, so rounding scales with the step and not with N0"""
    before = np.diff(np.concatenate(([0.0], old, [0.0]))) / h
    after = np.diff(np.concatenate(([0.0], new, [0.0]))) / h
    return 0.25 * float(np.sum((after - before) * (after + before)) * h) + omega * float(np.sum(new - old) * h)


def _normalize(v: np.ndarray, p: float, h: float) -> np.ndarray:
    return v / float(np.sum(v ** (0.5 * p)) * h) ** (2.0 / p)


@dataclass
class MinimizationResult:
    p: float
    omega: float
    x: np.ndarray
    h: float
    v: np.ndarray
    m_est: float
    c_est: float
    converged: bool
    iterations: int
    history: List[float] = field(default_factory=list)
    steps: List[float] = field(default_factory=list)
    residual: float = float("nan")

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"x": self.x, "v": self.v})

    def log(self) -> Dict[str, Any]:
        return {"iteration": list(range(len(self.history))), "objective": list(self.history), "step": list(self.steps)}

    def to_dict(self) -> Dict[str, Any]:
        return {"p": self.p, "omega": self.omega, "N": int(self.x.size), "X": float(self.x[-1]), "h": self.h,
                "m_est": self.m_est, "c_est": self.c_est, "converged": self.converged,
                "iterations": self.iterations, "kkt_residual": self.residual, "log": self.log()}


def normalized_support(p: float, omega: float) -> float:
    """Half-support of the normalized wave Phi (gamma = c(omega, p))"""
    return support_closed_form(p, omega, c_coefficient(p, omega))


def lagrangian_gradient(v: np.ndarray, omega: float, p: float, c: float, h: float) -> np.ndarray:
    """-v''/2 + omega - c v^(p/2-1) on the grid, zero values beyond both ends"""
    padded = np.concatenate(([0.0], v, [0.0]))
    second = (padded[2:] - 2.0 * padded[1:-1] + padded[:-2]) / h ** 2
    return -0.5 * second + omega - c * v ** (0.5 * p - 1.0)


def kkt_residual(v: np.ndarray, omega: float, p: float, c: float, h: float) -> float:
    """Largest violation of the optimality conditions: the equation where v > 0, g >= 0 where v = 0"""
    g = lagrangian_gradient(v, omega, p, c, h)
    return float(np.max(np.where(v > 0.0, np.abs(g), np.maximum(-g, 0.0))))


def _free_slice(v: np.ndarray, g: np.ndarray) -> slice:
    # support plus the zero points whose gradient pushes them up
    free = np.flatnonzero((v > 0.0) | (g < 0.0))
    return slice(int(free[0]), int(free[-1]) + 1)


def _implicit_step(v: np.ndarray, omega: float, p: float, c: float, h: float, tau: float,
                   free: slice) -> np.ndarray:
    """(1 + tau A) w = v + tau (c v^(p/2-1) - omega) on the free set, w = 0 elsewhere"""
    block = v[free]
    ab = np.empty((2, block.size))
    ab[0, 0] = 0.0
    ab[0, 1:] = -0.5 * tau / h ** 2
    ab[1] = 1.0 + tau / h ** 2
    out = np.zeros_like(v)
    out[free] = solveh_banded(ab, block + tau * (c * block ** (0.5 * p - 1.0) - omega))
    return out


def minimize(p: float, omega: float, X: Optional[float] = None, N: int = VARIATIONAL_POINTS,
             max_iter: int = VARIATIONAL_MAX_ITER, tol: float = VARIATIONAL_TOL,
             max_step: float = VARIATIONAL_MAX_STEP) -> MinimizationResult:
    """Minimize N0[v] over bell-shaped v >= 0 with sum(v^(p/2)) h = 1.

    Each step is backward Euler in the -v''/2 term on the free set (the
    support plus the zero points that want to rise) with Dirichlet zeros
    outside it, explicit in the rest, followed by clamping at zero,
    rearrangement and renormalization. Steps that raise the objective are
    retried with half the step size; accepted steps grow it by 1.5 up to
    ``max_step``. The run converges once ``kkt_residual / omega <= tol``.
    """
    WaveParams(p, omega)
    support = normalized_support(p, omega)
    X = 1.5 * support if X is None else float(X)
    if X <= support:
        raise PreconditionError(f"domain half-width X={X} does not contain the support {support}")
    if N < MIN_POINTS:
        raise DomainError(f"N must be at least {MIN_POINTS}, got {N}")

    x = np.linspace(-X, X, N)
    h = float(x[1] - x[0])
    # start wider than the support; clamping trims it in a few steps
    v = _normalize(np.maximum(np.cos(0.5 * np.pi * x / X), 0.0), p, h)
    current = objective(v, omega, h)
    c = coefficient(v, omega, h)
    residual = kkt_residual(v, omega, p, c, h) / omega
    history, steps = [current], []
    tau = 0.25 * h * h
    converged = False
    iterations = 0

    for iterations in range(1, max_iter + 1):
        g = lagrangian_gradient(v, omega, p, c, h)
        trial = np.maximum(_implicit_step(v, omega, p, c, h, tau, _free_slice(v, g)), 0.0)
        if not np.any(trial > 0.0):
            tau *= 0.5
            continue
        trial = _normalize(symmetric_decreasing_rearrange(trial), p, h)
        delta = objective_change(v, trial, omega, h)
        if delta > 0.0:
            tau *= 0.5
            if tau < np.finfo(float).eps * h * h:
                break
            continue
        v, current = trial, current + delta
        c = coefficient(v, omega, h)
        residual = kkt_residual(v, omega, p, c, h) / omega
        history.append(current)
        steps.append(tau)
        if residual <= tol:
            converged = True
            break
        tau = min(1.5 * tau, max_step)

    if not converged:
        warn(f"variational minimization stopped after {iterations} iterations without converging "
             f"(optimality residual {residual:.3g})")
    m_est = objective(v, omega, h)
    status(f"variational p={p} omega={omega}: m={m_est:.12g} after {iterations} iterations")
    return MinimizationResult(p=float(p), omega=float(omega), x=x, h=h, v=v, m_est=m_est,
                              c_est=c, converged=converged, iterations=iterations,
                              history=history, steps=steps, residual=residual)


def oracle_c(p: float, omega: float, result: Optional[MinimizationResult] = None, **kwargs) -> float:
    """c = 1/2 int (v')^2 + omega int v at the minimizer; raises if the minimization did not converge"""
    result = minimize(p, omega, **kwargs) if result is None else result
    if not result.converged:
        raise ConvergenceError("variational minimization did not converge",
                               {"p": p, "omega": omega, "iterations": result.iterations, "m_est": result.m_est})
    return result.c_est


def euler_lagrange_residual(result: MinimizationResult, c: Optional[float] = None) -> float:
    """max |-v''/2 + omega - c v^(p/2-1)| over the grid points where v > 0"""
    c = result.c_est if c is None else c
    g = lagrangian_gradient(result.v, result.omega, result.p, c, result.h)
    return float(np.max(np.abs(g[result.v > 0.0])))
