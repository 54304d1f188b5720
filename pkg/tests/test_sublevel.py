import math

import pytest

from polycarleson.fitting import FitRefused, loglog_wls
from polycarleson.measure import AnnulusArc, WeightParam, disc_cap_measure, merge_arcs
from polycarleson.sublevel import (
    SublevelQuery,
    build_proposal,
    estimate_sublevel,
    find_value_fiber,
    fit_exponent,
)
from polycarleson.symbols import PolySymbol


def product_symbol(n):
    return PolySymbol.monomial(n, (1,) * n)


def power_sum_symbol(n):
    entries = []
    for j in range(n):
        alpha = [0] * n
        alpha[j] = n
        entries.append((tuple(alpha), 1.0 / n))
    return PolySymbol.from_tables([entries], n)


class TestValueFiber:
    def test_power_sum_fiber_is_finite(self):
        fiber = find_value_fiber(power_sum_symbol(2), 1.0)
        assert fiber.kind == "finite"
        assert len(fiber.points) == 4  # (±1, ±1)

    def test_power_sum_cube_roots(self):
        fiber = find_value_fiber(power_sum_symbol(3), 1.0)
        assert fiber.kind == "finite"
        assert len(fiber.points) == 27

    def test_product_fiber_is_manifold(self):
        fiber = find_value_fiber(product_symbol(2), 1.0)
        assert fiber.kind == "manifold"

    def test_contraction_fiber_empty(self):
        f = PolySymbol.monomial(2, (1, 1), coeff=0.5)
        assert find_value_fiber(f, 1.0).kind == "empty"


class TestBuildProposal:
    def test_product_gets_angle_window(self):
        region = build_proposal([(product_symbol(2), 1.0, 0.01)], 2)
        assert isinstance(region, AnnulusArc)
        assert region.window is not None
        assert region.window.coeffs == (1, 1)
        assert region.arcs == (None, None)
        assert region.depths[0] == pytest.approx(0.02)

    def test_power_sum_gets_fiber_arcs(self):
        region = build_proposal([(power_sum_symbol(2), 1.0, 0.01)], 2)
        assert isinstance(region, AnnulusArc)
        assert region.window is None
        assert region.arcs[0] is not None and len(region.arcs[0]) == 2

    def test_unused_coordinate_stays_free(self):
        # f = z1 z2 inside D^3: third coordinate unconstrained
        f = PolySymbol.monomial(3, (1, 1, 0))
        region = build_proposal([(f, 1.0, 0.01)], 3)
        assert region.depths[2] == 1.0

    def test_large_delta_degrades_to_full_polydisc(self):
        region = build_proposal([(product_symbol(2), 1.0, 2.0)], 2)
        from polycarleson.measure import FullPolydisc

        assert isinstance(region, FullPolydisc)


class TestEstimate:
    def test_whole_polydisc_at_delta_two(self):
        q = SublevelQuery(f=product_symbol(2), eta=1.0, delta=2.0,
                          beta=WeightParam(0.0), budget=10_000)
        est = estimate_sublevel(q)
        assert est.volume == pytest.approx(1.0)
        assert est.stderr == 0.0
        assert est.trusted

    def test_univariate_matches_disc_cap(self):
        f = PolySymbol.identity(1)
        q = SublevelQuery(f=f, eta=1.0, delta=0.25, beta=WeightParam(0.0),
                          budget=2_000_000, seed=3)
        est = estimate_sublevel(q)
        cap = disc_cap_measure(1.0, 0.25, WeightParam(0.0))
        assert est.trusted
        assert abs(est.volume - cap) < 3 * est.stderr

    def test_small_delta_relative_error(self):
        q = SublevelQuery(f=product_symbol(2), eta=1.0, delta=2.0**-6,
                          beta=WeightParam(0.0), budget=10_000_000, seed=5)
        est = estimate_sublevel(q)
        assert est.trusted
        assert est.volume > 0
        assert est.stderr / est.volume <= 0.05

    def test_budget_doubling_shrinks_stderr(self):
        args = dict(f=product_symbol(2), eta=1.0, delta=2.0**-4,
                    beta=WeightParam(0.0), seed=11)
        e1 = estimate_sublevel(SublevelQuery(budget=1_000_000, **args))
        e2 = estimate_sublevel(SublevelQuery(budget=2_000_000, **args))
        ratio = e1.stderr / e2.stderr
        assert ratio == pytest.approx(math.sqrt(2.0), rel=0.10)

    def test_zero_hits_reports_upper_bound(self):
        # proposal region far away from the sublevel set: no hits, one-sided bound
        f = PolySymbol.identity(1)
        wrong = AnnulusArc(depths=(0.01,), arcs=(merge_arcs([(math.pi - 0.2, 0.4)]),))
        q = SublevelQuery(f=f, eta=1.0, delta=0.05, beta=WeightParam(0.0),
                          budget=50_000, proposal=wrong, seed=2)
        est = estimate_sublevel(q)
        assert not est.trusted
        assert est.hits == 0
        assert est.upper_bound is not None and est.upper_bound > 0

    def test_leakage_flags_untrusted(self):
        # narrow region catches only a sliver of the sublevel set: audit sees the rest
        f = PolySymbol.identity(1)
        wrong = AnnulusArc(depths=(1.0,), arcs=(merge_arcs([(-0.05, 0.1)]),))
        q = SublevelQuery(f=f, eta=1.0, delta=0.8, beta=WeightParam(0.0),
                          budget=200_000, proposal=wrong, seed=4)
        est = estimate_sublevel(q)
        assert not est.trusted
        assert est.hits > 0
        assert "leakage" in est.reason

    def test_monotone_in_delta(self):
        fits = []
        for k, delta in enumerate([2.0**-6, 2.0**-5, 2.0**-4]):
            q = SublevelQuery(f=product_symbol(2), eta=1.0, delta=delta,
                              beta=WeightParam(0.0), budget=500_000, seed=21 + k)
            fits.append(estimate_sublevel(q))
        for a, b in zip(fits, fits[1:]):
            assert b.volume >= a.volume - 3 * math.hypot(a.stderr, b.stderr)


class TestFitExponent:
    def test_synthetic_slope_recovery(self):
        xs = [2.0**-k for k in range(4, 9)]
        ys = [0.37 * x**3 for x in xs]
        fit = loglog_wls(xs, ys, [1e-3] * len(xs))
        assert fit.slope == pytest.approx(3.0, abs=1e-6)

    def test_univariate_slope_two(self):
        fit = fit_exponent(PolySymbol.identity(1), 1.0, WeightParam(0.0),
                           delta_grid=[2.0**-k for k in range(4, 10)],
                           budget=1_000_000, seed=7)
        assert fit.slope == pytest.approx(2.0, abs=0.1)

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            fit_exponent(PolySymbol.identity(1), 1.0, WeightParam(0.0),
                         delta_grid=[0.5, 0.25, 0.13, 0.06], budget=1000)
        with pytest.raises(ValueError):
            fit_exponent(PolySymbol.identity(1), 1.0, WeightParam(0.0),
                         delta_grid=[0.5, 0.25, 0.125], budget=1000)

    def test_refuses_with_untrusted_points(self):
        wrong = AnnulusArc(depths=(0.001,), arcs=(merge_arcs([(math.pi, 0.1)]),))
        with pytest.raises(FitRefused):
            fit_exponent(PolySymbol.identity(1), 1.0, WeightParam(0.0),
                         delta_grid=[2.0**-k for k in range(4, 8)],
                         budget=10_000, proposal=wrong, seed=9)

    def test_csv_rows_shape(self):
        fit = fit_exponent(PolySymbol.identity(1), 1.0, WeightParam(0.0),
                           delta_grid=[2.0**-k for k in range(4, 8)],
                           budget=200_000, seed=13)
        header, rows = fit.csv_rows()
        assert header == ["delta", "estimate", "stderr", "hits", "region_mass", "trusted"]
        assert len(rows) == 4
