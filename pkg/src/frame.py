import sys
import os
# Add the root directory to Python path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional

import numpy as np
import pandas as pd
from scipy import integrate

from config import QUAD_TOL, GRID_POINTS, POTENTIAL_CUTOFF
from src.errors import DomainError
from src.profile import CompactonProfile, one_minus_power_reflected
from src.singquad import SingularIntegrand, integrate_singular
from utils.console import status

OPERATORS = ("plus", "minus")


def _log_sech(z):
    """log sech z for any real z, no overflow"""
    z = np.abs(z)
    return np.log(2.0) - z - np.log1p(np.exp(-2.0 * z))


class TravelingFrame:
    """Change of variables t(x) = int_0^x dy / phi(y) mapping (-L, L) onto the line.

    In closed form t(phi) = 2 artanh(sqrt(1 - s^(p-2))) / ((p-2) sqrt(omega)), s = phi/phi0,
    so phi(x(t)) = phi0 sech^(2/(p-2))((p-2) sqrt(omega) t / 2).
    """

    def __init__(self, profile: CompactonProfile):
        self.profile = profile
        self.p = profile.params.p
        self.omega = profile.params.omega
        self.gamma = profile.params.gamma
        self.rate = (self.p - 2.0) * np.sqrt(self.omega) / 2.0

    def t_of_phi(self, phi):
        """t >= 0 as a function of the profile value"""
        s = np.clip(np.asarray(phi, dtype=float) / self.profile.phi0, 0.0, 1.0)
        r = np.sqrt(-np.expm1((self.p - 2.0) * np.log(np.where(s > 0.0, s, 1.0))))
        with np.errstate(divide="ignore"):
            out = (2.0 * np.log1p(r) - (self.p - 2.0) * np.log(s)) / ((self.p - 2.0) * np.sqrt(self.omega))
        return out if out.ndim else float(out)

    def t_of_phi_quad(self, phi: float, tol: float = QUAD_TOL) -> float:
        """Reference value of int_phi^phi0 ds / (s sqrt(omega - (2 gamma/p) s^(p-2)))"""
        s = float(phi) / self.profile.phi0
        if s >= 1.0:
            return 0.0
        if s <= 0.0:
            return float("inf")
        k = self.p - 2.0
        f = SingularIntegrand(
            evaluator=lambda u: 1.0 / (u * np.sqrt(-np.expm1(k * np.log(u)))),
            right_exponent=0.5,
            lower=s,
            upper=1.0,
            reflected=lambda w: 1.0 / ((1.0 - w) * np.sqrt(one_minus_power_reflected(w, k))),
        )
        return integrate_singular(f, tol) / np.sqrt(self.omega)

    def t_of_x(self, x):
        """Odd forward map; +-inf at and beyond the support edges"""
        x = np.asarray(x, dtype=float)
        out = np.sign(x) * self.t_of_phi(self.profile.phi(x))
        return out if out.ndim else float(out)

    def phi_of_t(self, t):
        out = self.profile.phi0 * np.exp(2.0 / (self.p - 2.0) * _log_sech(self.rate * np.asarray(t, dtype=float)))
        return out if out.ndim else float(out)

    def potential_shape(self, t):
        """phi^(p-2)(x(t)) = phi0^(p-2) sech^2(rate t)"""
        base = self.p * self.omega / (2.0 * self.gamma)
        out = base * np.exp(2.0 * _log_sech(self.rate * np.asarray(t, dtype=float)))
        return out if out.ndim else float(out)

    def x_of_t(self, t):
        t = np.asarray(t, dtype=float)
        out = np.sign(t) * self.profile.abscissa(self.phi_of_t(t))
        return out if out.ndim else float(out)

    def edge_gap(self, t):
        """L - |x(t)| without the cancellation of subtracting x from L"""
        out = np.asarray(self.profile.edge_distance(self.phi_of_t(t)))
        return out if out.ndim else float(out)

    def transport(self, u: Callable, t):
        """g(t) = sqrt(phi(x(t))) u(x(t)); int u^2 dx = int g^2 dt"""
        t = np.asarray(t, dtype=float)
        return np.sqrt(self.phi_of_t(t)) * u(self.x_of_t(t))


def build_frame(profile: CompactonProfile) -> TravelingFrame:
    return TravelingFrame(profile)


def plus_coefficient(p: float, gamma: float = 1.0) -> float:
    return gamma * (2.0 * p * p - 5.0 * p + 3.0) / (2.0 * p)


def minus_coefficient(p: float, gamma: float = 1.0) -> float:
    return 3.0 * gamma * (p + 1.0) / (2.0 * p)


def default_half_width(frame: TravelingFrame, cutoff: float = POTENTIAL_CUTOFF) -> float:
    """Smallest T with both potentials below cutoff * omega, floored at ln(1/cutoff)/sqrt(omega).

    The floor keeps the slowest bound state (decay sqrt(omega)/2 at threshold)
    well inside the box.
    """
    kappa = max(plus_coefficient(frame.p, frame.gamma), minus_coefficient(frame.p, frame.gamma))
    amplitude = kappa * frame.p * frame.omega / (2.0 * frame.gamma)
    ratio = np.sqrt(cutoff * frame.omega / amplitude)
    T = np.arccosh(1.0 / ratio) / frame.rate if ratio < 1.0 else 0.0
    while kappa * frame.potential_shape(T) >= cutoff * frame.omega:
        T = max(T * 1.01, T + 1e-3)
    return float(max(T, np.log(1.0 / cutoff) / np.sqrt(frame.omega)))


@dataclass(frozen=True)
class SchrodingerOperator:
    """-d^2/dt^2 + shift - W(t) on [-T, T] with W(t) = kappa phi^(p-2)(x(t))"""

    frame: TravelingFrame
    which: str
    shift: float
    kappa: float
    half_width: float
    points: int

    @cached_property
    def grid(self) -> np.ndarray:
        # integer multiples of h about the center, so the nodes are exactly symmetric
        return self.h * (np.arange(self.points) - 0.5 * (self.points - 1))

    @property
    def h(self) -> float:
        return 2.0 * self.half_width / (self.points - 1)

    def potential(self, t):
        # sampled on |t| so the grid values are exactly even
        return self.kappa * self.frame.potential_shape(np.abs(np.asarray(t, dtype=float)))

    @cached_property
    def potential_samples(self) -> np.ndarray:
        return self.potential(self.grid)

    def with_points(self, points: int) -> "SchrodingerOperator":
        return assemble(self.frame, self.which, self.half_width, points)

    def potential_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": self.grid, "W": self.potential_samples})

    def describe(self) -> dict:
        return {"operator": self.which, "shift": self.shift, "kappa": self.kappa,
                "T": self.half_width, "N": self.points, "h": self.h}


def assemble(frame: TravelingFrame, which: str, T: Optional[float] = None, N: int = GRID_POINTS) -> SchrodingerOperator:
    if which not in OPERATORS:
        raise DomainError(f"operator must be one of {OPERATORS}, got {which!r}")
    if T is None:
        T = default_half_width(frame)
    if not T > 0:
        raise DomainError(f"T must be positive, got {T}")
    if int(N) < 3:
        raise DomainError(f"N must be at least 3, got {N}")
    if which == "plus":
        shift, kappa = frame.omega / 4.0, plus_coefficient(frame.p, frame.gamma)
    else:
        shift, kappa = 9.0 * frame.omega / 4.0, minus_coefficient(frame.p, frame.gamma)
    status(f"Assembled {which} operator on [-{T:.4g}, {T:.4g}] with N={N}")
    return SchrodingerOperator(frame=frame, which=which, shift=float(shift), kappa=float(kappa),
                               half_width=float(T), points=int(N))


def assemble_plus(frame: TravelingFrame, T: Optional[float] = None, N: int = GRID_POINTS) -> SchrodingerOperator:
    return assemble(frame, "plus", T, N)


def assemble_minus(frame: TravelingFrame, T: Optional[float] = None, N: int = GRID_POINTS) -> SchrodingerOperator:
    return assemble(frame, "minus", T, N)


def fit_decay_rate(t, values) -> float:
    """Least-squares slope of log|values| against t"""
    t = np.asarray(t, dtype=float)
    logs = np.log(np.abs(np.asarray(values, dtype=float)))
    return float(np.polyfit(t, logs, 1)[0])


def quadratic_form_x(frame: TravelingFrame, u: Callable, du: Callable, which: str,
                     support: float, points: int = 20001) -> float:
    """Degenerate x-side form for u supported in [-support, support] inside (-L, L).

    plus:  int ((phi u)')^2 - (p-2) gamma int phi^(p-2) u^2
    minus: int ((phi u)')^2 + 2 int (omega - gamma phi^(p-2)) u^2
    """
    if not 0.0 < support < frame.profile.half_support:
        raise DomainError("test function support must lie strictly inside the compacton")
    x = np.linspace(-support, support, points)
    phi = np.asarray(frame.profile.phi(x))
    dphi = np.asarray(frame.profile.dphi(x))
    values = u(x)
    flux = dphi * values + phi * du(x)
    power = phi ** (frame.p - 2.0)
    if which == "plus":
        density = flux ** 2 - (frame.p - 2.0) * frame.gamma * power * values ** 2
    elif which == "minus":
        density = flux ** 2 + 2.0 * (frame.omega - frame.gamma * power) * values ** 2
    else:
        raise DomainError(f"operator must be one of {OPERATORS}, got {which!r}")
    return float(integrate.trapezoid(density, x))


def quadratic_form_t(op: SchrodingerOperator, g) -> float:
    """Discrete energy sum((Dg)^2) h + sum((shift - W) g^2) h with zero ghost values"""
    g = np.asarray(g, dtype=float)
    padded = np.concatenate(([0.0], g, [0.0]))
    slopes = np.diff(padded) / op.h
    return float(np.sum(slopes ** 2) * op.h + np.sum((op.shift - op.potential_samples) * g ** 2) * op.h)
