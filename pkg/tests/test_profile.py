import numpy as np
import pytest
from scipy import special

from src.errors import CompactonError, DomainError
from src.profile import (
    WaveParams,
    abscissa_quad,
    build_profile,
    c_coefficient,
    energy_integral,
    eval_dphi,
    eval_phi,
    eval_Q,
    first_integral_residual,
    functionals,
    mass_closed_form,
    moment_integral,
    normalization_constant,
    ode_residual,
    profile_record,
    sample_profile,
    scale_normalized,
    support_closed_form,
    support_integral,
)

rng = np.random.default_rng(2024)
RANDOM_WAVES = list(zip(rng.uniform(2.5, 12.0, 8), rng.uniform(0.25, 4.0, 8), rng.uniform(0.5, 3.0, 8)))


def cosine_wave(x, omega):
    return np.sqrt(np.maximum(omega * (1.0 + np.cos(np.sqrt(2.0) * x)), 0.0))


@pytest.mark.parametrize("omega", [0.5, 1.0, 2.0, 3.0])
def test_cosine_compacton(omega):
    profile = build_profile(WaveParams(4.0, omega))
    assert profile.half_support == pytest.approx(np.pi / np.sqrt(2.0), abs=1e-10)
    assert profile.phi0 == pytest.approx(np.sqrt(2.0 * omega), rel=1e-14)
    x = np.linspace(-profile.half_support, profile.half_support, 1001)
    assert np.max(np.abs(profile.phi(x) - cosine_wave(x, omega))) < 1e-8


def test_amplitude_at_p4_omega2():
    profile = build_profile(WaveParams(4.0, 2.0, 1.0))
    assert profile.phi0 == pytest.approx(2.0, rel=1e-14)
    assert profile.phi(0.0) == pytest.approx(2.0, rel=1e-14)


def test_cosine_mass(cosine_profile):
    values = functionals(cosine_profile)
    assert values.mass == pytest.approx(np.sqrt(2.0) * np.pi, abs=1e-9)
    assert values.I3 == pytest.approx(3.0 * np.pi / np.sqrt(2.0), abs=1e-9)


def test_support_and_endpoints(cosine_profile):
    L = cosine_profile.half_support
    assert cosine_profile.phi(L) == 0.0
    assert cosine_profile.phi(-L) == 0.0
    assert cosine_profile.phi(L + 1.0) == 0.0
    assert cosine_profile.dphi(L + 1.0) == 0.0
    assert cosine_profile.dphi(0.0) == 0.0
    assert cosine_profile.dphi(L * (1.0 - 1e-9)) == pytest.approx(-1.0, abs=1e-6)
    assert cosine_profile.dphi(-L * (1.0 - 1e-9)) == pytest.approx(1.0, abs=1e-6)


def test_scalar_in_scalar_out(cosine_profile):
    assert isinstance(cosine_profile.phi(0.3), float)
    assert isinstance(cosine_profile.dphi(0.3), float)
    assert isinstance(cosine_profile.Q(0.3), float)
    assert np.shape(cosine_profile.phi(np.zeros((2, 3)))) == (2, 3)


@pytest.mark.parametrize("p", [3.0, 5.0, 7.5, 10.0])
def test_even_and_decreasing(p):
    profile = build_profile(WaveParams(p, 1.3))
    x = np.linspace(0.0, profile.half_support, 801)
    right = profile.phi(x)
    np.testing.assert_array_equal(right, profile.phi(-x))
    assert np.all(np.diff(right) <= 0.0)
    np.testing.assert_array_equal(profile.dphi(-x[1:-1]), -profile.dphi(x[1:-1]))


def test_eval_wrappers(cosine_profile):
    x = np.linspace(-2.0, 2.0, 9)
    np.testing.assert_array_equal(eval_phi(cosine_profile, x), cosine_profile.phi(x))
    np.testing.assert_array_equal(eval_dphi(cosine_profile, x), cosine_profile.dphi(x))
    np.testing.assert_allclose(eval_Q(cosine_profile, x), cosine_profile.phi(x) ** 2, rtol=0, atol=0)


@pytest.mark.parametrize("p,omega,gamma", [(3.0, 1.0, 1.0), (5.0, 0.7, 2.0), (7.5, 2.5, 0.5), (11.0, 1.0, 1.0)])
def test_profile_solves_the_ode(p, omega, gamma):
    profile = build_profile(WaveParams(p, omega, gamma))
    x = np.linspace(-0.99, 0.99, 397) * profile.half_support
    scale = omega * profile.phi0
    assert np.max(np.abs(ode_residual(profile, x))) < 1e-10 * scale
    assert np.max(np.abs(first_integral_residual(profile, x))) < 1e-10 * omega


@pytest.mark.parametrize("p", [3.0, 4.0, 6.0, 9.0])
def test_abscissa_round_trip(p):
    profile = build_profile(WaveParams(p, 1.0))
    x = np.linspace(0.0, 0.999, 41) * profile.half_support
    np.testing.assert_allclose(profile.abscissa(profile.phi(x)), x, rtol=0, atol=1e-10)
    for xi in x[::8]:
        q = profile.Q(xi)
        assert abscissa_quad(profile, q) == pytest.approx(profile.abscissa(np.sqrt(q)), abs=1e-9)
    assert abscissa_quad(profile, 0.0) == pytest.approx(profile.half_support, abs=1e-10)
    assert abscissa_quad(profile, profile.phi0 ** 2) == 0.0


@pytest.mark.parametrize("p,omega,gamma", RANDOM_WAVES)
def test_pohozaev_identities(p, omega, gamma):
    values = functionals(build_profile(WaveParams(float(p), float(omega), float(gamma))))
    scale = gamma * values.I3
    assert all(abs(r) < 1e-8 * scale for r in values.pohozaev_residuals())
    assert values.hamiltonian == pytest.approx(0.5 * values.I1 - gamma / p * values.I3, rel=1e-14)


@pytest.mark.parametrize("p", [2.5, 3.0, 4.0, 6.0, 10.0, 12.0])
def test_beta_function_integrals(p):
    a = 1.0 / (p - 2.0)
    assert support_integral(p) == pytest.approx(2.0 * a * special.beta(a, 0.5), abs=1e-11)
    assert moment_integral(p, 2.0) == pytest.approx(a * special.beta(3.0 * a, 0.5), abs=1e-11)
    assert moment_integral(p, p) == pytest.approx(a * special.beta((p + 1.0) * a, 0.5), abs=1e-11)
    assert energy_integral(p) == pytest.approx(a * special.beta(3.0 * a, 1.5), abs=1e-11)


@pytest.mark.parametrize("p,omega", [(3.0, 0.5), (6.0, 2.0), (10.0, 1.0)])
def test_support_matches_beta_form(p, omega):
    profile = build_profile(WaveParams(p, omega))
    assert profile.half_support == pytest.approx(support_closed_form(p, omega), rel=1e-11)


@pytest.mark.parametrize("p,omega", [(3.0, 0.5), (4.0, 1.0), (6.0, 2.0), (10.0, 3.0)])
def test_mass_closed_form(p, omega):
    assert mass_closed_form(p, omega) == pytest.approx(functionals(build_profile(WaveParams(p, omega))).I2,
                                                       rel=1e-11)


def test_cosine_coefficient(cosine_profile):
    I3 = 3.0 * np.pi / np.sqrt(2.0)
    assert c_coefficient(4.0, 1.0) == pytest.approx(I3 ** 0.4, rel=1e-10)
    assert c_coefficient(4.0, 1.0) == pytest.approx((9.0 * np.pi ** 2 / 2.0) ** 0.2, rel=1e-10)
    assert functionals(cosine_profile).c_norm == pytest.approx(I3 ** 0.4, rel=1e-10)


@pytest.mark.parametrize("p", [3.0, 6.0, 10.0])
def test_coefficient_against_unit_wave(p):
    for omega in (0.5, 1.0, 2.0):
        I3 = functionals(build_profile(WaveParams(p, omega))).I3
        assert c_coefficient(p, omega) == pytest.approx(I3 ** ((p - 2.0) / (p + 1.0)), rel=1e-10)


@pytest.mark.parametrize("p", [3.0, 4.0, 6.0, 10.0])
def test_coefficient_scaling_exponent(p):
    exponent = np.log(c_coefficient(p, 4.0) / c_coefficient(p, 1.0)) / np.log(4.0)
    assert exponent == pytest.approx((p + 4.0) / (2.0 * (p + 1.0)), abs=1e-10)


@pytest.mark.parametrize("p,omega", [(3.0, 1.0), (4.0, 2.0), (6.0, 0.5), (10.0, 1.5)])
def test_normalized_wave_has_unit_p_norm(p, omega):
    normalized = scale_normalized(p, omega)
    gamma = c_coefficient(p, omega)
    assert normalized.params.gamma == pytest.approx(gamma, rel=1e-15)
    assert functionals(normalized).I3 == pytest.approx(1.0, rel=1e-9)


def test_routes_agree():
    direct = scale_normalized(4.0, 16.0, "direct")
    scaled = scale_normalized(4.0, 16.0, "scaling")
    assert scaled.half_support == pytest.approx(direct.half_support, rel=1e-10)
    assert scaled.phi0 == pytest.approx(direct.phi0, rel=1e-12)
    x = np.linspace(-direct.half_support, direct.half_support, 1001)
    assert np.max(np.abs(direct.phi(x) - scaled.phi(x))) < 1e-8


def test_scaling_route_is_identity_at_unit_frequency():
    direct = scale_normalized(6.0, 1.0, "direct")
    scaled = scale_normalized(6.0, 1.0, "scaling")
    assert scaled == direct
    x = np.linspace(-direct.half_support, direct.half_support, 201)
    np.testing.assert_array_equal(scaled.phi(x), direct.phi(x))


def test_unknown_route():
    with pytest.raises(DomainError):
        scale_normalized(4.0, 1.0, "sideways")


@pytest.mark.parametrize("p", [3.0, 5.0])
def test_normalization_constant_maps_unit_coefficient_wave(p):
    alpha = normalization_constant(p, 2.0)
    unit = build_profile(WaveParams(p, 2.0))
    normalized = scale_normalized(p, 2.0)
    x = np.linspace(-0.9, 0.9, 51) * normalized.half_support
    assert normalized.half_support == pytest.approx(alpha * unit.half_support, rel=1e-10)
    np.testing.assert_allclose(normalized.phi(x), alpha * unit.phi(x / alpha), rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("kwargs", [
    {"p": 2.0, "omega": 1.0},
    {"p": 1.5, "omega": 1.0},
    {"p": 4.0, "omega": 0.0},
    {"p": 4.0, "omega": -1.0},
    {"p": 4.0, "omega": 1.0, "gamma": 0.0},
    {"p": float("nan"), "omega": 1.0},
])
def test_domain_errors(kwargs):
    with pytest.raises(DomainError):
        WaveParams(**kwargs)


def test_domain_error_is_a_value_error():
    with pytest.raises(ValueError):
        build_profile(WaveParams(4.0, -2.0))
    assert issubclass(DomainError, CompactonError)


def test_sample_profile(cosine_profile):
    table = sample_profile(cosine_profile, 101)
    assert list(table.columns) == ["x", "phi", "dphi", "Q"]
    assert len(table) == 101
    assert table["x"].iloc[0] == -cosine_profile.half_support
    assert table["phi"].iloc[50] == pytest.approx(np.sqrt(2.0), rel=1e-14)
    np.testing.assert_allclose(table["Q"], table["phi"] ** 2)
    with pytest.raises(DomainError):
        sample_profile(cosine_profile, 1)


def test_profile_record(cosine_profile):
    record = profile_record(cosine_profile).to_dict()
    assert set(record) == {"p", "omega", "gamma", "L", "phi0", "I1", "I2", "I3", "hamiltonian", "c"}
    assert record["L"] == cosine_profile.half_support
    assert record["I2"] == pytest.approx(np.sqrt(2.0) * np.pi, abs=1e-9)
