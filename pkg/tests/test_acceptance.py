"""Acceptance suite: every pinned battery criterion at its stated tolerance.

Each test prints one PASS/FAIL line.  The criteria share expensive fits and
scans through a session-scoped cache, exactly as the ``battery`` CLI
subcommand does, so the verdict pairs asserted here come from a single run.
"""

import pytest

from polycarleson.battery import (
    CRITERIA,
    MANIFEST,
    SYMBOL_NAMES,
    get_symbol,
)

RESULTS = {}


@pytest.fixture(scope="module")
def shared():
    return {}


def _run(number, shared):
    if number not in RESULTS:
        RESULTS[number] = CRITERIA[number](shared)
    result = RESULTS[number]
    print(result.line())
    return result


def test_criterion_01_product_exponents(shared):
    result = _run(1, shared)
    for case, info in result.details.items():
        assert abs(info["slope"] - info["target"]) <= 0.15, (case, info)
        assert info["seconds"] <= 300.0, (case, info)
    assert result.passed


def test_criterion_02_power_sum_exponents(shared):
    result = _run(2, shared)
    for case, info in result.details.items():
        assert abs(info["slope"] - info["target"]) <= 0.2, (case, info)
    assert result.passed


def test_criterion_03_sandwich_bounds(shared):
    result = _run(3, shared)
    for case, info in result.details.items():
        lo, hi = info["band"]
        assert lo <= info["slope"] <= hi, (case, info)
    assert result.passed


def test_criterion_04_disc_cap_scaling(shared):
    result = _run(4, shared)
    for case, info in result.details.items():
        if case == "seconds":
            assert info <= 10.0
            continue
        assert abs(info["slope"] - info["target"]) <= 0.05, (case, info)
    assert result.passed


def test_criterion_05_sharpness_thresholds(shared):
    result = _run(5, shared)
    assert abs(result.details["bounded3"]["slope"]) <= 0.1, result.details
    assert abs(result.details["unbounded4"]["slope"] + 1.0) <= 0.2, result.details
    assert result.passed


def test_criterion_06_bidisc(shared):
    result = _run(6, shared)
    for name in MANIFEST["bidisc"]["bounded"]:
        assert result.details[name]["outcome"] == "Bounded"
    assert result.details["mean_product"]["outcome"] == "Unbounded"
    assert result.details["mean_product"]["witness_diagonal_gap"] < 1e-3
    assert abs(result.details["mean_product scan"]["slope"] + 0.5) <= 0.2
    assert result.passed


def test_criterion_07_tridisc(shared):
    result = _run(7, shared)
    assert result.details["stacked_product3"]["outcome"] == "Bounded"
    assert result.details["repeated_product3"]["outcome"] == "Unbounded"
    assert abs(result.details["repeated_product3 scan"]["slope"] + 1.0) <= 0.2
    assert result.passed


def test_criterion_08_sufficient_not_necessary(shared):
    result = _run(8, shared)
    assert result.details["rank_sufficiency"] == "NecessityFails"
    assert result.details["tridisc_decision"] == "Bounded"
    assert result.passed


def test_criterion_09_beta_uniformity(shared):
    result = _run(9, shared)
    assert result.details["max_ratio"] <= 10.0 * result.details["beta0_max_ratio"]
    for beta, slope in result.details["slopes"].items():
        assert abs(slope) <= 0.1, (beta, slope)
    assert result.passed


def test_criterion_10_property_battery(shared):
    result = _run(10, shared)
    assert all(result.details["properties"].values()), result.details
    assert result.details["slice_gradient_constancy"]
    assert result.details["boundary_derivative_checks"]
    assert result.details["identity_ratio_worst_z"] <= 3.0
    assert result.details["certificates"]
    assert result.passed


def test_criterion_11_determinism(shared):
    result = _run(11, shared)
    assert result.details["identical"]
    assert result.passed


def test_cross_validation_slope_signs(shared):
    """Measured ratio slopes agree in sign with the rank-based verdicts."""
    for key in ("scan/bounded3",):
        if key in shared:
            assert shared[key].slope >= -0.1
    for key in ("scan/unbounded4", "scan/mean_product", "scan/repeated_product3"):
        if key in shared:
            assert shared[key].slope <= -0.3


def test_every_battery_symbol_is_certified():
    for name in SYMBOL_NAMES:
        assert get_symbol(name).certificate is not None, name
