import sys
import os
# Add the root directory to Python path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, asdict, field
from itertools import product
from typing import Any, Dict, Iterable, List, Optional

import numpy as np
import pandas as pd

from config import GRID_POINTS, MARGINAL_TOL, FD_DELTA, QUAD_TOL, WORKERS, LOWEST_EIGENPAIRS
from src.errors import CompactonError, DomainError, InconsistencyError
from src.frame import build_frame, assemble_plus, assemble_minus, SchrodingerOperator
from src.profile import WaveParams, build_profile, functionals, mass_closed_form, moment_integral
from src.singquad import bracket_root
from src.spectrum import (
    SpectralReport,
    cosine_similarity,
    kernel_candidate,
    kernel_projected_solve,
    lowest_eigenpairs,
    profile_power_samples,
)
from utils.console import progress, status, warn

MODELS = {"kdv": "degenerate-KdV", "nls": "degenerate-NLS"}

SWEEP_COLUMNS = ["p", "omega", "L", "phi0", "mass", "D", "D_numeric", "n_Hplus", "k_Ham", "verdict", "model", "error"]

THRESHOLD_NOTE = ("D = 0 at p = 8: the index count degenerates there and p = 8 is the stability threshold (classified stable); "
                  "k_Ham = 1 here is the formal count with n(D) = 0 and does not mean a real unstable pair")
EXTENSION_NOTE = "verdict computed for one Dirichlet discretization of the transformed operator; it does not range over self-adjoint extensions"


def mass(p: float, omega: float, tol: float = QUAD_TOL) -> float:
    """M(omega) = int phi^2 of the gamma = 1 wave"""
    return mass_closed_form(p, omega, tol)


def slope_D(p: float, omega: float, tol: float = QUAD_TOL) -> float:
    """D = -1/2 dM/domega = -(p/2)^(3/(p-2)) (8-p)/(2(p-2)) omega^((8-p)/(2(p-2)) - 1) J(p)"""
    WaveParams(p, omega)
    exponent = (8.0 - p) / (2.0 * (p - 2.0))
    value = -(0.5 * p) ** (3.0 / (p - 2.0)) * exponent * omega ** (exponent - 1.0) * moment_integral(p, 2.0, tol)
    return float(value) + 0.0  # normalizes -0.0 at p = 8


def slope_D_fd(p: float, omega: float, delta: Optional[float] = None, tol: float = QUAD_TOL) -> float:
    """-1/2 (M(omega + delta) - M(omega - delta)) / (2 delta) with masses from profile quadrature"""
    delta = FD_DELTA * omega if delta is None else delta
    if not 0.0 < delta < omega:
        raise DomainError(f"delta must lie in (0, omega), got {delta}")
    upper = functionals(build_profile(WaveParams(p, omega + delta), tol), tol).I2
    lower = functionals(build_profile(WaveParams(p, omega - delta), tol), tol).I2
    return float(-0.5 * (upper - lower) / (2.0 * delta))


def _operator_slope(op: SchrodingerOperator, report: SpectralReport) -> float:
    rhs = profile_power_samples(op)
    g = kernel_projected_solve(op, rhs, kernel_candidate(op), report=report)
    return float(np.dot(g, rhs) * op.h)


def slope_D_operator(p: float, omega: float, T: Optional[float] = None, N: int = GRID_POINTS) -> float:
    """<L+^{-1} phi^(3/2), phi^(3/2)> on the transformed grid; equals D up to discretization"""
    op = assemble_plus(build_frame(build_profile(WaveParams(p, omega))), T, N)
    return _operator_slope(op, lowest_eigenpairs(op, LOWEST_EIGENPAIRS))


@dataclass
class StabilityReport:
    p: float
    omega: float
    gamma: float
    model: str
    L: float
    phi0: float
    mass: float
    D: float
    D_numeric: Optional[float]
    n_Hplus: int
    n_Hminus: int
    n_D: int
    k_Ham: int
    k_r: int
    k_c: int
    k_i: int
    verdict: str
    theorem_class: str
    tol: float
    plus_eigenvalues: List[float]
    grid: Dict[str, Any]
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def to_row(self) -> Dict[str, Any]:
        return {"p": self.p, "omega": self.omega, "L": self.L, "phi0": self.phi0, "mass": self.mass,
                "D": self.D, "D_numeric": self.D_numeric, "n_Hplus": self.n_Hplus, "k_Ham": self.k_Ham,
                "verdict": self.verdict, "model": self.model, "error": None}


def verdict(p: float, omega: float, model: str = "kdv", T: Optional[float] = None, N: int = GRID_POINTS,
            operator_route: bool = True) -> StabilityReport:
    """Hamiltonian-Krein count k_Ham = n(H+) + n(H-) - n(D) and the resulting verdict.

    Both models reduce to the sign of <H+^{-1} phi, phi> = D, so the logic is shared.
    """
    if model not in MODELS:
        raise DomainError(f"model must be one of {sorted(MODELS)}, got {model!r}")
    params = WaveParams(p, omega)
    profile = build_profile(params)
    M = functionals(profile).I2
    D = slope_D(p, omega)
    tol = MARGINAL_TOL * (1.0 + abs(M))

    op = assemble_plus(build_frame(profile), T, N)
    report = lowest_eigenpairs(op, LOWEST_EIGENPAIRS)
    n_plus = report.negative_count
    if n_plus != 1:
        raise InconsistencyError(
            f"expected exactly one negative eigenvalue of the plus operator, found {n_plus}",
            {"p": p, "omega": omega, "eigenvalues": [float(x) for x in report.eigenvalues],
             "tol_zero": report.tol_zero, "grid": op.describe()},
        )
    n_minus = 0
    D_numeric = _operator_slope(op, report) if operator_route else None

    notes = [EXTENSION_NOTE]
    if D < -tol:
        n_D, label = 1, "stable"
    elif D > tol:
        n_D, label = 0, "unstable"
    else:
        n_D, label = 0, "marginal"
        notes.insert(0, THRESHOLD_NOTE)
    k_ham = n_plus + n_minus - n_D
    if D_numeric is not None and label != "marginal" and np.sign(D_numeric) != np.sign(D):
        warn(f"operator route slope {D_numeric:.6g} disagrees in sign with D = {D:.6g} at p={p}")

    status(f"p={p} omega={omega} {MODELS[model]}: D={D:.6g}, k_Ham={k_ham} -> {label}")
    return StabilityReport(
        p=float(p), omega=float(omega), gamma=1.0, model=MODELS[model],
        L=profile.half_support, phi0=profile.phi0, mass=float(M),
        D=D, D_numeric=D_numeric,
        n_Hplus=int(n_plus), n_Hminus=n_minus, n_D=n_D, k_Ham=int(k_ham),
        # one negative direction of H fixes the split: a single real pair when k_Ham = 1
        k_r=1 if label == "unstable" else 0, k_c=0, k_i=0,
        verdict=label,
        theorem_class="stable" if p <= 8.0 else "unstable",
        tol=float(tol),
        plus_eigenvalues=[float(x) for x in report.eigenvalues],
        grid=op.describe(),
        notes=notes,
    )


def minus_positivity(p: float, omega: float, T: Optional[float] = None, N: int = GRID_POINTS) -> Dict[str, Any]:
    """Spectral check that n(H-) = 0 and the minus kernel is spanned by phi^(3/2)"""
    op = assemble_minus(build_frame(build_profile(WaveParams(p, omega))), T, N)
    report = lowest_eigenpairs(op, LOWEST_EIGENPAIRS)
    similarity = cosine_similarity(report.zero_vector, kernel_candidate(op))
    ok = report.negative_count == 0 and abs(report.lambda0) <= report.tol_zero
    return {"n_Hminus": report.negative_count, "lambda0": report.lambda0, "tol_zero": report.tol_zero,
            "similarity": similarity, "eigenvalues": [float(x) for x in report.eigenvalues], "ok": bool(ok)}


def threshold_p(omega: float, lo: float, hi: float, tol: float = 1e-12) -> float:
    """p at which D changes sign inside [lo, hi]"""
    return bracket_root(lambda p: slope_D(p, omega), lo, hi, tol)


def _sweep_row(task) -> Dict[str, Any]:
    p, omega, model, T, N, operator_route = task
    try:
        return verdict(p, omega, model, T, N, operator_route).to_row()
    except CompactonError as e:
        row = {column: None for column in SWEEP_COLUMNS}
        row.update({"p": float(p), "omega": float(omega), "model": MODELS.get(model, model),
                    "error": f"{type(e).__name__}: {e}"})
        return row


@dataclass
class SweepResult:
    table: pd.DataFrame
    thresholds: List[Dict[str, Any]]

    def to_dict(self) -> Dict[str, Any]:
        rows = self.table.astype(object).where(self.table.notna(), None).to_dict(orient="records")
        return {"rows": rows, "thresholds": self.thresholds}


def _locate_thresholds(table: pd.DataFrame) -> List[Dict[str, Any]]:
    found = []
    ok = table[table["error"].isna()]
    for omega, rows in ok.groupby("omega", sort=True):
        rows = rows.sort_values("p")
        ps = rows["p"].to_numpy(dtype=float)
        Ds = rows["D"].to_numpy(dtype=float)
        verdicts = rows["verdict"].to_list()
        for i, label in enumerate(verdicts):
            if label == "marginal":
                found.append({"omega": float(omega), "p_threshold": float(ps[i]), "bracket": [float(ps[i]), float(ps[i])]})
        for i in range(len(ps) - 1):
            if verdicts[i] == "marginal" or verdicts[i + 1] == "marginal":
                continue
            if np.sign(Ds[i]) != np.sign(Ds[i + 1]):
                root = threshold_p(float(omega), ps[i], ps[i + 1])
                found.append({"omega": float(omega), "p_threshold": root, "bracket": [float(ps[i]), float(ps[i + 1])]})
    return sorted(found, key=lambda item: (item["omega"], item["p_threshold"]))


def sweep(p_grid: Iterable[float], omega_grid: Iterable[float], model: str = "kdv", T: Optional[float] = None,
          N: int = GRID_POINTS, workers: int = WORKERS, operator_route: bool = True) -> SweepResult:
    """One verdict per (p, omega) pair, rows in grid order, plus the located D sign changes"""
    tasks = [(float(p), float(omega), model, T, N, operator_route) for p, omega in product(p_grid, omega_grid)]
    if not tasks:
        return SweepResult(table=pd.DataFrame(columns=SWEEP_COLUMNS), thresholds=[])
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            rows = list(progress(executor.map(_sweep_row, tasks), total=len(tasks), desc="sweep"))
    else:
        rows = [_sweep_row(task) for task in progress(tasks, total=len(tasks), desc="sweep")]
    table = pd.DataFrame(rows, columns=SWEEP_COLUMNS)
    failed = int(table["error"].notna().sum())
    if failed:
        warn(f"{failed} of {len(rows)} sweep rows failed; see the error column")
    return SweepResult(table=table, thresholds=_locate_thresholds(table))
