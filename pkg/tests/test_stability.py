import math

import numpy as np
import pytest

import src.stability as stability
from src.errors import DomainError, InconsistencyError
from src.profile import WaveParams, build_profile, functionals
from src.stability import (
    SWEEP_COLUMNS,
    THRESHOLD_NOTE,
    mass,
    minus_positivity,
    slope_D,
    slope_D_fd,
    slope_D_operator,
    sweep,
    threshold_p,
    verdict,
)


def test_slope_vanishes_exactly_at_eight():
    for omega in (0.5, 1.0, 3.0):
        D = slope_D(8.0, omega)
        assert D == 0.0
        assert math.copysign(1.0, D) == 1.0


def test_cosine_slope():
    assert slope_D(4.0, 1.0) == pytest.approx(-np.sqrt(2.0) * np.pi / 2.0, abs=1e-10)


@pytest.mark.parametrize("p", [2.5, 3.0, 5.0, 7.9, 8.1, 10.0, 12.0])
def test_sign_law(p):
    for omega in (0.5, 2.0):
        assert np.sign(slope_D(p, omega)) == (-1.0 if p < 8.0 else 1.0)


@pytest.mark.parametrize("p,omega", [(3.0, 1.0), (4.0, 1.0), (6.0, 0.5), (10.0, 2.0)])
def test_finite_difference_slope(p, omega):
    assert slope_D_fd(p, omega) == pytest.approx(slope_D(p, omega), abs=1e-6)


def test_finite_difference_slope_at_threshold():
    assert abs(slope_D_fd(8.0, 2.0)) < 1e-6


@pytest.mark.parametrize("delta", [0.0, -1e-3, 1.0, 2.0])
def test_finite_difference_step_domain(delta):
    with pytest.raises(DomainError):
        slope_D_fd(4.0, 1.0, delta)


@pytest.mark.parametrize("p", [4.0, 6.0, 10.0])
def test_operator_slope(p):
    closed = slope_D(p, 1.0)
    assert slope_D_operator(p, 1.0) == pytest.approx(closed, rel=0.02)


def test_mass_matches_functionals():
    for p, omega in ((3.0, 2.0), (6.0, 0.5)):
        assert mass(p, omega) == pytest.approx(functionals(build_profile(WaveParams(p, omega))).I2, rel=1e-11)


def test_stable_verdict():
    report = verdict(4.0, 1.0, "kdv")
    assert report.verdict == "stable"
    assert report.model == "degenerate-KdV"
    assert (report.n_Hplus, report.n_Hminus, report.n_D, report.k_Ham) == (1, 0, 1, 0)
    assert (report.k_r, report.k_c, report.k_i) == (0, 0, 0)
    assert report.theorem_class == "stable"
    assert report.D == pytest.approx(-np.sqrt(2.0) * np.pi / 2.0, abs=1e-10)
    assert report.D_numeric == pytest.approx(report.D, rel=0.02)
    assert report.L == pytest.approx(np.pi / np.sqrt(2.0), abs=1e-10)


def test_unstable_verdict():
    report = verdict(10.0, 1.0, "nls")
    assert report.verdict == "unstable"
    assert report.model == "degenerate-NLS"
    assert (report.n_D, report.k_Ham, report.k_r) == (0, 1, 1)
    assert report.theorem_class == "unstable"
    assert report.D > 0.0


def test_marginal_verdict_at_threshold():
    report = verdict(8.0, 3.0, "kdv", operator_route=False)
    assert report.verdict == "marginal"
    assert report.D == 0.0
    assert report.D_numeric is None
    assert report.theorem_class == "stable"
    assert report.notes[0] == THRESHOLD_NOTE
    assert report.k_Ham == 1
    assert "k_Ham = 1" in report.to_dict()["notes"][0]


@pytest.mark.parametrize("p", [6.0, 10.0])
def test_verdict_does_not_depend_on_omega(p):
    labels = {verdict(p, omega, operator_route=False).verdict for omega in (0.5, 1.0, 2.0)}
    assert len(labels) == 1


def test_both_models_agree():
    for p in (5.0, 9.0):
        assert verdict(p, 1.0, "kdv", operator_route=False).verdict == verdict(p, 1.0, "nls", operator_route=False).verdict


def test_unknown_model():
    with pytest.raises(DomainError):
        verdict(4.0, 1.0, "burgers")


def test_wrong_negative_count_is_an_inconsistency(monkeypatch):
    real = stability.lowest_eigenpairs

    def tampered(op, m):
        report = real(op, m)
        report.negative_count = 2
        return report

    monkeypatch.setattr(stability, "lowest_eigenpairs", tampered)
    with pytest.raises(InconsistencyError) as info:
        verdict(4.0, 1.0, operator_route=False)
    assert "eigenvalues" in info.value.diagnostics


def test_report_serialization():
    report = verdict(6.0, 1.0, operator_route=False)
    record = report.to_dict()
    assert record["verdict"] == "stable"
    assert isinstance(record["plus_eigenvalues"], list)
    row = report.to_row()
    assert list(row) == SWEEP_COLUMNS
    assert row["error"] is None


@pytest.mark.parametrize("p,N", [(3.0, 4001), (6.0, 4001), (10.0, 16001)])
def test_minus_positivity(p, N):
    out = minus_positivity(p, 1.0, N=N)
    assert out["ok"]
    assert out["n_Hminus"] == 0
    assert out["similarity"] > 1.0 - 1e-6


def test_threshold_root():
    assert threshold_p(1.0, 7.5, 8.5) == pytest.approx(8.0, abs=1e-10)
    assert threshold_p(2.0, 6.0, 9.0) == pytest.approx(8.0, abs=1e-10)


def test_sweep_locates_the_threshold():
    result = sweep(np.linspace(3.0, 12.0, 10), [1.0], operator_route=False)
    table = result.table
    assert list(table.columns) == SWEEP_COLUMNS
    assert len(table) == 10
    assert table["error"].isna().all()
    assert table.loc[table["p"] < 8.0, "verdict"].eq("stable").all()
    assert table.loc[table["p"] > 8.0, "verdict"].eq("unstable").all()
    assert table.loc[table["p"] == 8.0, "verdict"].item() == "marginal"
    assert [t["p_threshold"] for t in result.thresholds] == [8.0]


def test_sweep_brackets_an_off_grid_threshold():
    result = sweep([7.5, 8.5], [1.0, 2.0], operator_route=False)
    assert len(result.thresholds) == 2
    for item in result.thresholds:
        assert item["p_threshold"] == pytest.approx(8.0, abs=1e-10)
        assert item["bracket"] == [7.5, 8.5]


def test_sweep_rows_follow_grid_order():
    result = sweep([3.0, 6.0], [0.5, 2.0], operator_route=False)
    pairs = list(zip(result.table["p"], result.table["omega"]))
    assert pairs == [(3.0, 0.5), (3.0, 2.0), (6.0, 0.5), (6.0, 2.0)]


def test_sweep_mass_scaling():
    result = sweep([6.0], [0.5, 1.0, 2.0], operator_route=False)
    masses = result.table["mass"].to_numpy(dtype=float)
    exponent = (8.0 - 6.0) / (2.0 * (6.0 - 2.0))
    np.testing.assert_allclose(masses[[0, 2]] / masses[1], np.array([0.5, 2.0]) ** exponent, rtol=1e-10)


def test_sweep_records_failed_rows():
    result = sweep([2.0, 4.0], [1.0], operator_route=False)
    failed = result.table.iloc[0]
    assert failed["error"].startswith("DomainError")
    assert failed["verdict"] is None
    assert result.table.iloc[1]["verdict"] == "stable"


def test_empty_sweep():
    result = sweep([], [1.0])
    assert result.table.empty
    assert list(result.table.columns) == SWEEP_COLUMNS
    assert result.thresholds == []
    assert result.to_dict() == {"rows": [], "thresholds": []}


def test_parallel_sweep_matches_serial():
    serial = sweep([4.0, 9.0], [1.0], operator_route=False, workers=1)
    parallel = sweep([4.0, 9.0], [1.0], operator_route=False, workers=2)
    assert serial.to_dict() == parallel.to_dict()
