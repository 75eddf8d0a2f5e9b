"""Desk-scale acceptance checks behind the ``selftest`` subcommand."""
import sys
import os
# Add the root directory to Python path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from src.errors import CompactonError, DomainError
from src.frame import (
    assemble_minus,
    assemble_plus,
    build_frame,
    default_half_width,
    fit_decay_rate,
    quadratic_form_t,
    quadratic_form_x,
)
from src.profile import (
    WaveParams,
    build_profile,
    c_coefficient,
    functionals,
    scale_normalized,
    support_closed_form,
    support_integral,
)
from src.spectrum import cosine_similarity, form_value, kernel_candidate, lowest_eigenpairs, profile_power_samples
from src.stability import slope_D, slope_D_fd, slope_D_operator, sweep, verdict
from src.variational import minimize
from utils.console import progress

Check = Callable[[], Tuple[bool, Dict[str, Any]]]

# grid sizes at which the eigenvector similarity reaches 1 - 1e-6
SPECTRAL_POINTS = {3.0: 4001, 4.0: 4001, 6.0: 4001, 10.0: 16001}


def bump(support: float, coefficients):
    """Smooth test function compactly supported in [-support, support] and its derivative"""
    a0, a1, a2 = coefficients

    def base(x):
        y = np.asarray(x, dtype=float) / support
        inside = np.abs(y) < 1.0
        out = np.zeros_like(y)
        out[inside] = np.exp(-1.0 / (1.0 - y[inside] ** 2))
        return out, y, inside

    def u(x):
        b, _, _ = base(x)
        x = np.asarray(x, dtype=float)
        return b * (a0 + a1 * x + a2 * x * x)

    def du(x):
        b, y, inside = base(x)
        x = np.asarray(x, dtype=float)
        db = np.zeros_like(b)
        db[inside] = b[inside] * (-2.0 * y[inside] / (1.0 - y[inside] ** 2) ** 2) / support
        return db * (a0 + a1 * x + a2 * x * x) + b * (a1 + 2.0 * a2 * x)

    return u, du


def isometry_ratio(p: float, omega: float, which: str, coefficients, points=(2001, 4001)) -> Dict[str, float]:
    """x-form value and the t-form errors on a grid and its refinement"""
    frame = build_frame(build_profile(WaveParams(p, omega)))
    support = 0.8 * frame.profile.half_support
    u, du = bump(support, coefficients)
    exact = quadratic_form_x(frame, u, du, which, support)
    T = default_half_width(frame)
    errors = []
    for N in points:
        op = assemble_plus(frame, T, N) if which == "plus" else assemble_minus(frame, T, N)
        errors.append(quadratic_form_t(op, frame.transport(u, op.grid)) - exact)
    return {"x_form": exact, "coarse_error": errors[0], "fine_error": errors[1], "ratio": errors[0] / errors[1]}


def check_cosine_compacton():
    profile = build_profile(WaveParams(4.0, 1.0))
    x = np.linspace(-profile.half_support, profile.half_support, 1001)
    sup = float(np.max(np.abs(profile.phi(x) - np.sqrt(np.maximum(1.0 + np.cos(np.sqrt(2.0) * x), 0.0)))))
    L_err = abs(profile.half_support - np.pi / np.sqrt(2.0))
    mass_err = abs(functionals(profile).I2 - np.sqrt(2.0) * np.pi)
    return L_err < 1e-10 and sup < 1e-8 and mass_err < 1e-8, {"L_error": L_err, "sup_error": sup, "mass_error": mass_err}


def check_pohozaev():
    rng = np.random.default_rng(7)
    worst = 0.0
    for p, omega in zip(rng.uniform(2.5, 12.0, 20), rng.uniform(0.25, 4.0, 20)):
        values = functionals(build_profile(WaveParams(float(p), float(omega))))
        worst = max(worst, max(abs(r) for r in values.pohozaev_residuals()) / values.I3)
    return worst < 1e-8, {"worst_relative_residual": worst}


def check_amplitude_support():
    rng = np.random.default_rng(11)
    worst = 0.0
    for p, omega in zip(rng.uniform(2.5, 12.0, 20), rng.uniform(0.25, 4.0, 20)):
        profile = build_profile(WaveParams(float(p), float(omega)))
        amplitude = (p * omega / 2.0) ** (1.0 / (p - 2.0))
        # prefactor p^(1/(p-2)) / 2^((p-1)/(p-2)) omega^((4-p)/(2(p-2))) written out
        prefactor = p ** (1.0 / (p - 2.0)) / 2.0 ** ((p - 1.0) / (p - 2.0)) * omega ** ((4.0 - p) / (2.0 * (p - 2.0)))
        L = profile.half_support
        worst = max(worst,
                    abs(L - prefactor * support_integral(float(p))) / L,
                    abs(L - support_closed_form(float(p), float(omega))) / L,
                    abs(profile.phi(0.0) - amplitude) / amplitude)
    return worst < 1e-10, {"worst_relative_error": worst}


def check_spectral_facts():
    details = {}
    passed = True
    for p, N in SPECTRAL_POINTS.items():
        frame = build_frame(build_profile(WaveParams(p, 1.0)))
        plus = assemble_plus(frame, N=N)
        minus = assemble_minus(frame, N=N)
        rp, rm = lowest_eigenpairs(plus), lowest_eigenpairs(minus)
        sim_plus = cosine_similarity(rp.eigenvectors[:, 1], kernel_candidate(plus))
        sim_minus = cosine_similarity(rm.eigenvectors[:, 0], kernel_candidate(minus))
        ok = (rp.negative_count == 1 and abs(rp.eigenvalues[1]) < rp.tol_zero and sim_plus > 1 - 1e-6
              and abs(rm.eigenvalues[0]) < rm.tol_zero and sim_minus > 1 - 1e-6
              and rm.negative_count == 0 and bool(np.all(rm.eigenvalues[1:] > 0.0)))
        passed = passed and ok
        details[str(p)] = {"plus": [float(v) for v in rp.eigenvalues], "minus": [float(v) for v in rm.eigenvalues],
                           "similarity_plus": sim_plus, "similarity_minus": sim_minus}
    return passed, details


def check_rayleigh():
    details = {}
    passed = True
    for p in (3.0, 4.0, 6.0, 10.0):
        profile = build_profile(WaveParams(p, 1.0))
        op = assemble_plus(build_frame(profile))
        value = form_value(op, profile_power_samples(op))
        expected = -(3 * p * p - 10 * p + 8) / (p + 4) * functionals(profile).I2
        rel = abs(value - expected) / abs(expected)
        passed = passed and rel < 0.01
        details[str(p)] = {"form_value": value, "expected": expected, "relative_error": rel}
    return passed, details


def check_slopes():
    details = {}
    passed = True
    for p in (3.0, 6.0, 10.0):
        for omega in (0.5, 1.0, 2.0):
            closed = slope_D(p, omega)
            fd = slope_D_fd(p, omega, 1e-4)
            operator = slope_D_operator(p, omega)
            ok = abs(fd - closed) < 1e-6 and abs(operator - closed) < 0.02 * abs(closed)
            passed = passed and ok
            details[f"{p},{omega}"] = {"closed": closed, "fd": fd, "operator": operator}
    return passed, details


def check_threshold():
    result = sweep(np.linspace(3.0, 12.0, 10), [1.0], "kdv")
    near = [t["p_threshold"] for t in result.thresholds]
    ok = len(near) == 1 and abs(near[0] - 8.0) < 1e-6
    labels = {}
    for model in ("kdv", "nls"):
        for p in (3.0, 4.0, 6.0, 7.9, 8.0, 8.1, 10.0, 12.0):
            labels[f"{model},{p}"] = verdict(p, 1.0, model, operator_route=False).verdict
    expected = {3.0: "stable", 4.0: "stable", 6.0: "stable", 7.9: "stable", 8.0: "marginal",
                8.1: "unstable", 10.0: "unstable", 12.0: "unstable"}
    ok = ok and all(labels[f"{m},{p}"] == v for m in ("kdv", "nls") for p, v in expected.items())
    return ok, {"thresholds": near, "verdicts": labels}


def check_frame_asymptotics():
    details = {}
    passed = True
    for p in (3.0, 4.0, 6.0, 10.0):
        frame = build_frame(build_profile(WaveParams(p, 1.0)))
        t = np.linspace(5.0, 10.0, 51)
        gap_rate = fit_decay_rate(t, frame.edge_gap(t))
        potential_rate = fit_decay_rate(t, frame.potential_shape(t))
        ok = abs(gap_rate + 1.0) < 0.05 and abs(potential_rate + (p - 2.0)) < 0.05 * (p - 2.0)
        passed = passed and ok
        details[str(p)] = {"gap_rate": gap_rate, "potential_rate": potential_rate}
    return passed, details


def check_isometry():
    rng = np.random.default_rng(3)
    details = {}
    passed = True
    for i in range(5):
        coefficients = (1.0, *rng.uniform(-0.5, 0.5, 2))
        for which in ("plus", "minus"):
            out = isometry_ratio(4.0, 1.0, which, coefficients)
            passed = passed and 3.0 <= out["ratio"] <= 5.0
            details[f"{i},{which}"] = out
    return passed, details


def check_variational():
    result = minimize(4.0, 1.0)
    closed = scale_normalized(4.0, 1.0)
    target = np.asarray(closed.phi(result.x)) ** 2
    sup = float(np.max(np.abs(result.v - target)))
    c = c_coefficient(4.0, 1.0)
    rel_c = abs(result.c_est - c) / c
    monotone = bool(np.all(np.diff(result.history) <= 0.0))
    return result.converged and sup < 1e-3 and rel_c < 0.01 and monotone, {
        "sup_error": sup, "c_est": result.c_est, "c": c, "iterations": result.iterations}


def check_scaling():
    direct = scale_normalized(4.0, 16.0, "direct")
    scaled = scale_normalized(4.0, 16.0, "scaling")
    x = np.linspace(-direct.half_support, direct.half_support, 1001)
    sup = float(np.max(np.abs(direct.phi(x) - scaled.phi(x))))
    details = {"sup_error": sup}
    ok = sup < 1e-8
    for p in (3.0, 4.0, 6.0, 10.0):
        exponent = np.log(c_coefficient(p, 4.0) / c_coefficient(p, 1.0)) / np.log(4.0)
        err = abs(exponent - (p + 4.0) / (2.0 * (p + 1.0)))
        ok = ok and err < 1e-6
        details[f"exponent_{p}"] = err
    return ok, details


CHECKS: List[Tuple[str, Check]] = [
    ("closed_form_compacton", check_cosine_compacton),
    ("pohozaev_identities", check_pohozaev),
    ("amplitude_and_support", check_amplitude_support),
    ("spectral_facts", check_spectral_facts),
    ("rayleigh_value", check_rayleigh),
    ("slope_agreement", check_slopes),
    ("threshold", check_threshold),
    ("frame_asymptotics", check_frame_asymptotics),
    ("conjugation_isometry", check_isometry),
    ("variational_oracle", check_variational),
    ("scaling_laws", check_scaling),
]


def run_selftest(names: Optional[List[str]] = None) -> Dict[str, Any]:
    """Run the named checks (all by default); each records pass/fail and its measurements"""
    known = [name for name, _ in CHECKS]
    unknown = sorted(set(names or []) - set(known))
    if unknown:
        raise DomainError(f"unknown selftest check(s) {unknown}; expected one of {known}")
    selected = [(name, check) for name, check in CHECKS if names is None or name in names]
    records = []
    for name, check in progress(selected, total=len(selected), desc="selftest"):
        try:
            ok, detail = check()
            records.append({"name": name, "passed": bool(ok), "detail": detail})
        except CompactonError as e:
            records.append({"name": name, "passed": False, "detail": {"error": f"{type(e).__name__}: {e}"}})
    return {"checks": records, "passed": all(r["passed"] for r in records)}
