import sys
import os
# Add the root directory to Python path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.linalg import eigh_tridiagonal, solve_banded

from config import (
    GRID_MAX_DOUBLINGS,
    LOWEST_EIGENPAIRS,
    REFINE_TOL,
    ZERO_BAND_FACTOR,
)
from src.errors import ConvergenceError, DomainError, PreconditionError
from src.frame import SchrodingerOperator
from utils.console import status, warn

# normalized |<rhs, kernel>| accepted by the projected solve
ORTHOGONALITY_TOL = 1e-8


@dataclass(frozen=True)
class TridiagonalSystem:
    """Second-order central differences with Dirichlet ghost nodes"""

    diagonal: np.ndarray
    offdiagonal: np.ndarray
    h: float

    @classmethod
    def from_operator(cls, op: SchrodingerOperator) -> "TridiagonalSystem":
        h = op.h
        diagonal = 2.0 / h ** 2 + op.shift - op.potential_samples
        offdiagonal = np.full(op.points - 1, -1.0 / h ** 2)
        return cls(diagonal=diagonal, offdiagonal=offdiagonal, h=h)

    @property
    def size(self) -> int:
        return self.diagonal.size

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = self.diagonal * v
        out[:-1] += self.offdiagonal * v[1:]
        out[1:] += self.offdiagonal * v[:-1]
        return out

    def banded(self) -> np.ndarray:
        """(upper, diagonal, lower) rows for solve_banded"""
        ab = np.zeros((3, self.size))
        ab[0, 1:] = self.offdiagonal
        ab[1] = self.diagonal
        ab[2, :-1] = self.offdiagonal
        return ab


def sturm_count(system: TridiagonalSystem, sigma: float) -> int:
    """Number of eigenvalues below sigma, from the pivot signs of LDL^T of A - sigma"""
    tiny = np.finfo(float).tiny
    count = 0
    pivot = 1.0
    for i in range(system.size):
        coupling = system.offdiagonal[i - 1] ** 2 / pivot if i else 0.0
        pivot = system.diagonal[i] - sigma - coupling
        if pivot == 0.0:
            pivot = -tiny
        if pivot < 0.0:
            count += 1
    return count


def grid_norm(v: np.ndarray, h: float) -> float:
    return float(np.sqrt(np.sum(v * v) * h))


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """|<a, b>| / (|a| |b|); eigenvector signs are arbitrary"""
    return float(abs(np.dot(a, b)) / (np.linalg.norm(a) * np.linalg.norm(b)))


def kernel_residual(system: TridiagonalSystem, v: np.ndarray, interior: bool = False) -> float:
    """|A v| / |v|; interior=True drops the two rows that touch the Dirichlet ghosts"""
    r = system.matvec(v)
    if interior:
        r = r[1:-1]
    return float(np.linalg.norm(r) / np.linalg.norm(v))


def kernel_candidate(op: SchrodingerOperator) -> np.ndarray:
    """Analytic kernel on the grid: sqrt(phi) phi' (plus) or phi^(3/2) (minus), composed with x(t)"""
    frame = op.frame
    phi = frame.phi_of_t(op.grid)
    if op.which == "plus":
        # phi'(x(t)) = -sign(t) sqrt(omega) tanh(rate |t|)
        return -np.sqrt(frame.omega) * np.sqrt(phi) * np.tanh(frame.rate * op.grid)
    return phi ** 1.5


def profile_power_samples(op: SchrodingerOperator) -> np.ndarray:
    """phi^(3/2)(x(t)) on the grid"""
    return op.frame.phi_of_t(op.grid) ** 1.5


@dataclass
class SpectralReport:
    operator: str
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    negative_count: int
    tol_zero: float
    zero_index: int
    kernel_residuals: Dict[str, float]
    grid: Dict[str, float]
    notes: List[str] = field(default_factory=list)

    @property
    def lambda0(self) -> float:
        return float(self.eigenvalues[self.zero_index])

    @property
    def zero_vector(self) -> np.ndarray:
        return self.eigenvectors[:, self.zero_index]

    @property
    def gap(self) -> Optional[float]:
        """Smallest computed eigenvalue above the zero band; None when none was computed"""
        above = self.eigenvalues[self.eigenvalues > self.tol_zero]
        return float(above[0]) if above.size else None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "operator": self.operator,
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "negative_count": int(self.negative_count),
            "tol_zero": self.tol_zero,
            "lambda0": self.lambda0,
            "zero_index": int(self.zero_index),
            "gap": self.gap,
            "kernel_residuals": dict(self.kernel_residuals),
            "grid": dict(self.grid),
            "notes": list(self.notes),
        }


def lowest_eigenpairs(op: SchrodingerOperator, m: int = LOWEST_EIGENPAIRS, tol: Optional[float] = None) -> SpectralReport:
    """The m algebraically smallest eigenpairs of the discretized operator.

    Eigenvalues come from bisection on Sturm counts and eigenvectors from
    inverse iteration (LAPACK stebz/stein through ``eigh_tridiagonal``).
    Vectors are scaled to sum(v^2) h = 1 with their largest entry positive.
    ``tol`` overrides the zero band; by default it is ZERO_BAND_FACTOR times
    the residual of the analytic kernel candidate.
    """
    if m < 1:
        raise DomainError(f"m must be at least 1, got {m}")
    system = TridiagonalSystem.from_operator(op)
    m = min(int(m), system.size)
    try:
        values, vectors = eigh_tridiagonal(system.diagonal, system.offdiagonal, select="i",
                                           select_range=(0, m - 1), lapack_driver="stebz")
    except np.linalg.LinAlgError as e:
        raise ConvergenceError(f"tridiagonal eigensolver failed: {e}", op.describe())

    vectors = vectors / np.sqrt(system.h)
    for j in range(vectors.shape[1]):
        if vectors[np.argmax(np.abs(vectors[:, j])), j] < 0:
            vectors[:, j] = -vectors[:, j]

    candidate = kernel_candidate(op)
    name = "sqrt_phi_dphi" if op.which == "plus" else "phi_three_halves"
    residual = kernel_residual(system, candidate)
    tol_zero = float(tol) if tol is not None else ZERO_BAND_FACTOR * residual
    negative = sturm_count(system, -tol_zero)
    zero_index = int(np.argmin(np.abs(values)))

    status(f"{op.which}: lowest eigenvalues {np.array2string(values, precision=6)}, n={negative}")
    return SpectralReport(
        operator=op.which,
        eigenvalues=values,
        eigenvectors=vectors,
        negative_count=int(negative),
        tol_zero=tol_zero,
        zero_index=zero_index,
        kernel_residuals={name: residual},
        grid=op.describe(),
    )


def form_value(op: SchrodingerOperator, v) -> float:
    """Discrete quadratic form v^T A v h"""
    v = np.asarray(v, dtype=float)
    if v.shape != (op.points,):
        raise DomainError(f"vector of shape {v.shape} is not on the {op.points}-point grid")
    system = TridiagonalSystem.from_operator(op)
    return float(np.dot(v, system.matvec(v)) * system.h)


def kernel_projected_solve(op: SchrodingerOperator, rhs, kernel, report: Optional[SpectralReport] = None,
                           orthogonality_tol: float = ORTHOGONALITY_TOL) -> np.ndarray:
    """Solve A g = rhs on the complement of the (near-)kernel.

    The analytic ``kernel`` only gates the Fredholm condition. The solve
    deflates the discrete eigenvector closest to zero, whose eigenvalue is
    O(h^2) rather than exactly 0.
    """
    rhs = np.asarray(rhs, dtype=float)
    kernel = np.asarray(kernel, dtype=float)
    system = TridiagonalSystem.from_operator(op)
    h = system.h
    overlap = abs(np.dot(rhs, kernel)) / (np.linalg.norm(rhs) * np.linalg.norm(kernel))
    if not overlap <= orthogonality_tol:
        raise PreconditionError(f"right-hand side is not orthogonal to the kernel (overlap {overlap:.3e})")
    if report is None:
        report = lowest_eigenpairs(op, m=LOWEST_EIGENPAIRS)
    z = report.zero_vector
    projected = rhs - np.dot(rhs, z) * h * z
    g = solve_banded((1, 1), system.banded(), projected)
    return g - np.dot(g, z) * h * z


def poschl_teller_levels(p: float, omega: float, which: str) -> List[float]:
    """Exact bound-state energies of the sech^2 potentials, ascending.

    plus:  omega/4 - (omega/4)(p - 1 - n(p - 2))^2,  n < (p - 1)/(p - 2)
    minus: 9 omega/4 - (omega/4)(3 - n(p - 2))^2,     n < 3/(p - 2)
    """
    if which == "plus":
        shift, top = omega / 4.0, p - 1.0
    elif which == "minus":
        shift, top = 9.0 * omega / 4.0, 3.0
    else:
        raise DomainError(f"unknown operator {which!r}")
    levels = []
    n = 0
    while top - n * (p - 2.0) > 0.0:
        levels.append(shift - omega / 4.0 * (top - n * (p - 2.0)) ** 2)
        n += 1
    return levels


def refine_until_stable(factory: Callable[[int], SchrodingerOperator], N: int, m: int = LOWEST_EIGENPAIRS,
                        tol: float = REFINE_TOL, max_doublings: int = GRID_MAX_DOUBLINGS) -> Tuple[SpectralReport, Dict[str, Any]]:
    """Halve h until the two smallest eigenvalues move by less than tol"""
    report = lowest_eigenpairs(factory(N), m)
    history = [{"N": N, "eigenvalues": [float(x) for x in report.eigenvalues[:2]], "gap": report.gap}]
    change = float("inf")
    for _ in range(max_doublings):
        N = 2 * N - 1
        refined = lowest_eigenpairs(factory(N), m)
        change = float(np.max(np.abs(refined.eigenvalues[:2] - report.eigenvalues[:2])))
        report = refined
        history.append({"N": N, "eigenvalues": [float(x) for x in report.eigenvalues[:2]], "gap": report.gap,
                        "change": change})
        if change < tol:
            break
    converged = change < tol
    if not converged:
        warn(f"grid refinement stopped at N={N} with eigenvalue change {change:.3e} > {tol:.1e}")
    report.notes.append(f"refinement {'met' if converged else 'did not meet'} tolerance {tol:g}")
    return report, {"converged": converged, "N": N, "last_change": change, "history": history}
