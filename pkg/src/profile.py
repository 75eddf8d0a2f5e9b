import sys
import os
# Add the root directory to Python path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from dataclasses import dataclass, asdict
from functools import lru_cache
from typing import Any, Dict, Tuple

import numpy as np
import pandas as pd
from scipy import special

from config import QUAD_TOL, ENDPOINT_BAND, PROFILE_SAMPLES, BISECTION_STEPS
from src.errors import DomainError, InconsistencyError
from src.singquad import SingularIntegrand, integrate_singular, bracket_roots
from utils.console import status

# closed-form and quadrature half-supports must agree to this relative level
_SUPPORT_AGREEMENT = 1e-9


def one_minus_power(s, k):
    """1 - s**k without cancellation for s near 1 (s = 0 gives 1)"""
    with np.errstate(divide="ignore"):
        return -np.expm1(k * np.log(s))


def one_minus_power_reflected(w, k):
    """1 - (1 - w)**k for small w"""
    return -np.expm1(k * np.log1p(-w))


@dataclass(frozen=True)
class WaveParams:
    """Exponent p, frequency omega and nonlinearity coefficient gamma of one wave"""

    p: float
    omega: float
    gamma: float = 1.0

    def __post_init__(self):
        for name in ("p", "omega", "gamma"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value}")
        if self.p <= 2:
            raise DomainError(f"p must exceed 2, got {self.p}")
        if self.omega <= 0:
            raise DomainError(f"omega must be positive, got {self.omega}")
        if self.gamma <= 0:
            raise DomainError(f"gamma must be positive, got {self.gamma}")

    @property
    def amplitude(self) -> float:
        return (self.p * self.omega / (2.0 * self.gamma)) ** (1.0 / (self.p - 2.0))

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


@lru_cache(maxsize=256)
def support_integral(p: float, tol: float = QUAD_TOL) -> float:
    """int_0^1 dz / sqrt(z - z^(p/2))"""
    k = 0.5 * p - 1.0
    f = SingularIntegrand(
        evaluator=lambda z: 1.0 / np.sqrt(z * one_minus_power(z, k)),
        left_exponent=0.5,
        right_exponent=0.5,
        reflected=lambda w: 1.0 / np.sqrt((1.0 - w) * one_minus_power_reflected(w, k)),
    )
    return integrate_singular(f, tol)


@lru_cache(maxsize=256)
def moment_integral(p: float, k: float, tol: float = QUAD_TOL) -> float:
    """int_0^1 s^k / sqrt(1 - s^(p-2)) ds"""
    f = SingularIntegrand(
        evaluator=lambda s: s ** k / np.sqrt(one_minus_power(s, p - 2.0)),
        right_exponent=0.5,
        reflected=lambda w: (1.0 - w) ** k / np.sqrt(one_minus_power_reflected(w, p - 2.0)),
    )
    return integrate_singular(f, tol)


@lru_cache(maxsize=256)
def energy_integral(p: float, tol: float = QUAD_TOL) -> float:
    """int_0^1 s^2 sqrt(1 - s^(p-2)) ds"""
    f = SingularIntegrand(
        evaluator=lambda s: s * s * np.sqrt(one_minus_power(s, p - 2.0)),
        reflected=lambda w: (1.0 - w) ** 2 * np.sqrt(one_minus_power_reflected(w, p - 2.0)),
    )
    return integrate_singular(f, tol)


def support_closed_form(p: float, omega: float, gamma: float = 1.0) -> float:
    """Half-support through the Beta function: phi0 B(1/(p-2), 1/2) / ((p-2) sqrt(omega))"""
    params = WaveParams(p, omega, gamma)
    a = 1.0 / (p - 2.0)
    return params.amplitude * a * special.beta(a, 0.5) / np.sqrt(omega)


@dataclass(frozen=True)
class CompactonProfile:
    """Bell-shaped compacton on [-L, L]; evaluators accept scalars or arrays"""

    params: WaveParams
    half_support: float
    phi0: float

    @property
    def edge_scale(self) -> float:
        # closed-form half-support; the abscissa map is edge_scale times a regularized Beta
        a = 1.0 / (self.params.p - 2.0)
        return self.phi0 * a * special.beta(a, 0.5) / np.sqrt(self.params.omega)

    def abscissa(self, phi):
        """x(phi) >= 0 on the right half of the support"""
        p = self.params.p
        s = np.clip(np.asarray(phi, dtype=float) / self.phi0, 0.0, 1.0)
        center = self.edge_scale * special.betainc(0.5, 1.0 / (p - 2.0), one_minus_power(s, p - 2.0))
        # near the edge 1 - s^(p-2) rounds to 1; measure from L instead
        edge = self.half_support - np.asarray(self.edge_distance(s * self.phi0))
        out = np.where(s ** (p - 2.0) < 0.5, edge, center)
        return out if out.ndim else float(out)

    def edge_distance(self, phi):
        """L - x(phi), accurate in relative terms near the support edge"""
        p = self.params.p
        s = np.clip(np.asarray(phi, dtype=float) / self.phi0, 0.0, 1.0)
        out = self.edge_scale * special.betainc(1.0 / (p - 2.0), 0.5, s ** (p - 2.0))
        return out if out.ndim else float(out)

    def _invert(self, xs: np.ndarray) -> np.ndarray:
        """s = phi/phi0 at |x| values strictly inside the support"""
        p = self.params.p
        a = 1.0 / (p - 2.0)
        scale = self.edge_scale
        s = np.ones_like(xs)
        near = xs >= 0.5 * self.half_support
        center = (~near) & (xs > 0.0)
        if near.any():
            target = self.half_support - xs[near]
            s[near] = bracket_roots(
                lambda t: scale * special.betainc(a, 0.5, t ** (p - 2.0)) - target,
                np.zeros_like(target), np.ones_like(target), BISECTION_STEPS)
        if center.any():
            target = xs[center]
            s[center] = bracket_roots(
                lambda t: scale * special.betainc(0.5, a, one_minus_power(t, p - 2.0)) - target,
                np.zeros_like(target), np.ones_like(target), BISECTION_STEPS)
        return s

    def phi(self, x):
        shape = np.shape(x)
        xs = np.abs(np.atleast_1d(np.asarray(x, dtype=float))).ravel()
        out = np.zeros_like(xs)
        dist = self.half_support - xs
        inside = dist > 0.0
        band = inside & (dist <= ENDPOINT_BAND * self.half_support)
        core = inside & ~band
        # asymptotic closure phi ~ sqrt(omega) (L - |x|) at the edge
        out[band] = np.sqrt(self.params.omega) * dist[band]
        if core.any():
            out[core] = self.phi0 * self._invert(xs[core])
        return out.reshape(shape) if shape else float(out[0])

    def dphi(self, x):
        x = np.asarray(x, dtype=float)
        s = np.asarray(self.phi(x)) / self.phi0
        magnitude = np.sqrt(self.params.omega * one_minus_power(s, self.params.p - 2.0))
        out = np.where(np.abs(x) < self.half_support, -np.sign(x) * magnitude, 0.0)
        return out if out.ndim else float(out)

    def d2phi(self, x):
        """phi'' from phi phi'' = ((2 - p)/p) gamma phi^(p-2); zero outside the support"""
        p, gamma = self.params.p, self.params.gamma
        values = np.asarray(self.phi(x))
        out = np.zeros_like(values)
        pos = values > 0.0
        out[pos] = (2.0 - p) / p * gamma * values[pos] ** (p - 3.0)
        return out if out.ndim else float(out)

    def Q(self, x):
        return np.asarray(self.phi(x)) ** 2 if np.ndim(x) else self.phi(x) ** 2


def build_profile(params: WaveParams, tol: float = QUAD_TOL) -> CompactonProfile:
    """Construct the unique bell-shaped compacton for (p, omega, gamma)"""
    phi0 = params.amplitude
    half_support = phi0 / (2.0 * np.sqrt(params.omega)) * support_integral(params.p, tol)
    closed = support_closed_form(params.p, params.omega, params.gamma)
    if abs(half_support - closed) > _SUPPORT_AGREEMENT * closed:
        raise InconsistencyError(
            "support quadrature disagrees with its Beta-function form",
            {"quadrature": half_support, "closed_form": closed, "p": params.p},
        )
    status(f"Built compacton p={params.p} omega={params.omega} gamma={params.gamma}: L={half_support}")
    return CompactonProfile(params=params, half_support=float(half_support), phi0=float(phi0))


def eval_phi(profile, x):
    return profile.phi(x)


def eval_dphi(profile, x):
    return profile.dphi(x)


def eval_Q(profile, x):
    return profile.Q(x)


def abscissa_quad(profile: CompactonProfile, q: float, tol: float = QUAD_TOL) -> float:
    """x(Q) = int_Q^Q0 dQ' / (2 sqrt(omega Q' - (2 gamma/p) Q'^(p/2))) by singular quadrature"""
    p, omega = profile.params.p, profile.params.omega
    q0 = profile.phi0 ** 2
    if q >= q0:
        return 0.0
    q = max(q, 0.0)
    k = 0.5 * p - 1.0

    def integrand(v):
        return 0.5 / np.sqrt(v * omega * one_minus_power(v / q0, k))

    def reflected(w):
        return 0.5 / np.sqrt((q0 - w) * omega * one_minus_power_reflected(w / q0, k))

    f = SingularIntegrand(integrand, left_exponent=0.5 if q == 0.0 else 0.0, right_exponent=0.5,
                          lower=q, upper=q0, reflected=reflected)
    return integrate_singular(f, tol)


def ode_residual(profile: CompactonProfile, x):
    """-phi (phi phi')' + omega phi - gamma phi^(p-1), with phi phi'' from the exact identity"""
    p, omega, gamma = profile.params.p, profile.params.omega, profile.params.gamma
    phi = np.asarray(profile.phi(x))
    dphi = np.asarray(profile.dphi(x))
    phi_phi2 = (2.0 - p) / p * gamma * phi ** (p - 2.0)
    return -phi * (dphi ** 2 + phi_phi2) + omega * phi - gamma * phi ** (p - 1.0)


def first_integral_residual(profile: CompactonProfile, x):
    p, omega, gamma = profile.params.p, profile.params.omega, profile.params.gamma
    phi = np.asarray(profile.phi(x))
    return np.asarray(profile.dphi(x)) ** 2 - omega + 2.0 * gamma / p * phi ** (p - 2.0)


@dataclass(frozen=True)
class WaveFunctionals:
    """Integral functionals of one profile.

    I1 = int (phi phi')^2, I2 = int phi^2 (mass), I3 = int phi^p,
    hamiltonian = I1/2 - (gamma/p) I3, c_norm = normalized-problem coefficient c(omega, p).
    """

    params: WaveParams
    I1: float
    I2: float
    I3: float
    hamiltonian: float
    c_norm: float

    @property
    def mass(self) -> float:
        return self.I2

    def pohozaev_residuals(self) -> Tuple[float, float, float]:
        p, omega, gamma = self.params.p, self.params.omega, self.params.gamma
        return (
            2.0 * self.I1 + omega * self.I2 - gamma * self.I3,
            self.I1 - (p - 2.0) / (p + 4.0) * omega * self.I2,
            gamma * self.I3 - 3.0 * p * omega / (p + 4.0) * self.I2,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {"params": self.params.to_dict(), "I1": self.I1, "I2": self.I2, "I3": self.I3,
                "hamiltonian": self.hamiltonian, "c_norm": self.c_norm}


def functionals(profile: CompactonProfile, tol: float = QUAD_TOL) -> WaveFunctionals:
    """I1, I2, I3 through the substitution dx = -dphi / sqrt(omega - (2 gamma/p) phi^(p-2))"""
    p, omega, gamma = profile.params.p, profile.params.omega, profile.params.gamma
    phi0, root = profile.phi0, np.sqrt(omega)
    I1 = 2.0 * phi0 ** 3 * root * energy_integral(p, tol)
    I2 = 2.0 * phi0 ** 3 / root * moment_integral(p, 2.0, tol)
    I3 = 2.0 * phi0 ** (p + 1.0) / root * moment_integral(p, p, tol)
    return WaveFunctionals(
        params=profile.params,
        I1=float(I1),
        I2=float(I2),
        I3=float(I3),
        hamiltonian=float(0.5 * I1 - gamma / p * I3),
        c_norm=c_coefficient(p, omega, tol),
    )


def mass_closed_form(p: float, omega: float, tol: float = QUAD_TOL) -> float:
    """int phi^2 for gamma = 1: 2 (p/2)^(3/(p-2)) omega^((8-p)/(2(p-2))) J(p)"""
    WaveParams(p, omega)
    exponent = (8.0 - p) / (2.0 * (p - 2.0))
    return 2.0 * (0.5 * p) ** (3.0 / (p - 2.0)) * omega ** exponent * moment_integral(p, 2.0, tol)


@lru_cache(maxsize=256)
def _coefficient_integral(p: float, tol: float) -> float:
    """K = 2 int_0^1 sqrt(z - z^(p/2)) dz + int_0^1 z / sqrt(z - z^(p/2)) dz"""
    k = 0.5 * p - 1.0
    regular = SingularIntegrand(
        evaluator=lambda z: np.sqrt(z * one_minus_power(z, k)),
        reflected=lambda w: np.sqrt((1.0 - w) * one_minus_power_reflected(w, k)),
    )
    singular = SingularIntegrand(
        evaluator=lambda z: np.sqrt(z / one_minus_power(z, k)),
        right_exponent=0.5,
        reflected=lambda w: np.sqrt((1.0 - w) / one_minus_power_reflected(w, k)),
    )
    return 2.0 * integrate_singular(regular, 0.5 * tol) + integrate_singular(singular, 0.5 * tol)


def c_coefficient(p: float, omega: float, tol: float = QUAD_TOL) -> float:
    """Coefficient c(omega, p) of the normalized wave (int Phi^p = 1).

    c = (p omega/2)^(3/(p+1)) omega^((p-2)/(2(p+1))) K^((p-2)/(p+1)),
    which equals I3^((p-2)/(p+1)) of the gamma = 1 wave.
    """
    WaveParams(p, omega)
    K = _coefficient_integral(p, tol)
    return float((0.5 * p * omega) ** (3.0 / (p + 1.0))
                 * omega ** ((p - 2.0) / (2.0 * (p + 1.0)))
                 * K ** ((p - 2.0) / (p + 1.0)))


def rescale_profile(base: CompactonProfile, omega: float) -> CompactonProfile:
    """Phi_omega(x) = omega^(1/(2(p+1))) Phi_1(omega^(p/(2p+2)) x) from the omega = 1 normalized wave"""
    p = base.params.p
    amplitude = omega ** (1.0 / (2.0 * (p + 1.0)))
    stretch = omega ** (p / (2.0 * p + 2.0))
    params = WaveParams(p, omega, base.params.gamma * omega ** ((p + 4.0) / (2.0 * (p + 1.0))))
    return CompactonProfile(params=params, half_support=base.half_support / stretch, phi0=base.phi0 * amplitude)


def scale_normalized(p: float, omega: float, route: str = "direct", tol: float = QUAD_TOL) -> CompactonProfile:
    """Normalized wave Phi_omega with int Phi^p = 1.

    route="direct" builds the gamma = c(omega, p) compacton; route="scaling"
    stretches the omega = 1 normalized wave by the scaling law.
    """
    if route == "direct":
        return build_profile(WaveParams(p, omega, c_coefficient(p, omega, tol)), tol)
    if route == "scaling":
        base = build_profile(WaveParams(p, 1.0, c_coefficient(p, 1.0, tol)), tol)
        return rescale_profile(base, float(omega))
    raise DomainError(f"unknown route {route!r} (expected 'direct' or 'scaling')")


def normalization_constant(p: float, omega: float, tol: float = QUAD_TOL) -> float:
    """alpha with Phi(x) = alpha phi(x / alpha) mapping the gamma = 1 wave onto the normalized one"""
    return float(c_coefficient(p, omega, tol) ** (-1.0 / (p - 2.0)))


def sample_profile(profile, samples: int = PROFILE_SAMPLES) -> pd.DataFrame:
    """Columns x, phi, dphi, Q on a uniform grid over [-L, L]"""
    if samples < 2:
        raise DomainError(f"samples must be at least 2, got {samples}")
    x = np.linspace(-profile.half_support, profile.half_support, samples)
    phi = np.asarray(profile.phi(x))
    return pd.DataFrame({"x": x, "phi": phi, "dphi": np.asarray(profile.dphi(x)), "Q": phi ** 2})


@dataclass(frozen=True)
class ProfileRecord:
    p: float
    omega: float
    gamma: float
    L: float
    phi0: float
    I1: float
    I2: float
    I3: float
    hamiltonian: float
    c: float

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


def profile_record(profile: CompactonProfile, tol: float = QUAD_TOL) -> ProfileRecord:
    values = functionals(profile, tol)
    return ProfileRecord(
        p=profile.params.p,
        omega=profile.params.omega,
        gamma=profile.params.gamma,
        L=profile.half_support,
        phi0=profile.phi0,
        I1=values.I1,
        I2=values.I2,
        I3=values.I3,
        hamiltonian=values.hamiltonian,
        c=values.c_norm,
    )
