import numpy as np
import pytest

from polycarleson.carleson import beta_uniformity_probe, preimage_box_ratio, ratio_growth_scan
from polycarleson.fitting import FitRefused
from polycarleson.measure import CarlesonBox, WeightParam, carleson_box_measure
from polycarleson.symbols import PolySymbol, TorusPoint


def stacked_product(n):
    f = [((1,) * n, 1.0)]
    return PolySymbol.from_tables([f] * (n - 1) + [[]], n)


class TestPreimageRatio:
    def test_identity_ratio_one(self):
        box = CarlesonBox(TorusPoint((0.7, 2.1)), (0.3, 0.2))
        est = preimage_box_ratio(PolySymbol.identity(2), box, WeightParam(0.0),
                                 500_000, seed=1)
        assert est.trusted
        assert abs(est.ratio - 1.0) < 3 * est.stderr

    def test_identity_numerator_matches_quadrature(self):
        box = CarlesonBox(TorusPoint((0.0, 1.0)), (0.25, 0.4))
        beta = WeightParam(1.0)
        est = preimage_box_ratio(PolySymbol.identity(2), box, beta, 500_000, seed=2)
        target = carleson_box_measure(box, beta)
        assert abs(est.numerator - target) < 3 * est.numerator_stderr

    def test_rotation_preserves_ratio(self):
        alpha = np.exp(0.9j)
        rot = PolySymbol.from_tables([[((1, 0), alpha)], [((0, 1), 1.0)]], 2)
        # box centered at the rotated image of (1, 1)
        box = CarlesonBox(TorusPoint((0.9, 0.0)), (0.25, 0.25))
        est = preimage_box_ratio(rot, box, WeightParam(0.0), 500_000, seed=3)
        assert est.trusted
        assert abs(est.ratio - 1.0) < 3 * est.stderr

    def test_structurally_empty_preimage(self):
        damped = PolySymbol.from_tables([[((1, 1), 1.0)], [((1, 1), 0.5)]], 2)
        box = CarlesonBox(TorusPoint((0.0, 0.0)), (0.1, 0.1))
        est = preimage_box_ratio(damped, box, WeightParam(0.0), 10_000, seed=4)
        assert est.ratio == 0.0
        assert est.trusted

    def test_free_coordinate_is_vacuous(self):
        # radius-2 coordinates impose no constraint on the preimage
        sym = stacked_product(3)
        box = CarlesonBox(TorusPoint((0.0, 0.0, 0.0)), (0.1, 0.1, 2.0))
        est = preimage_box_ratio(sym, box, WeightParam(0.0), 2_000_000, seed=5)
        assert est.trusted
        assert est.ratio > 0.0


class TestScans:
    def test_identity_scan_flat(self):
        scan = ratio_growth_scan(PolySymbol.identity(2), TorusPoint((0.0, 0.0)),
                                 (True, True), WeightParam(0.0),
                                 [2.0**-k for k in range(3, 8)], 500_000, seed=6)
        assert abs(scan.slope) <= 0.05

    def test_refuses_short_grid(self):
        with pytest.raises(FitRefused):
            ratio_growth_scan(PolySymbol.identity(2), TorusPoint((0.0, 0.0)),
                              (True, True), WeightParam(0.0),
                              [0.25, 0.125, 0.0625], 10_000, seed=7)

    def test_csv_rows(self):
        scan = ratio_growth_scan(PolySymbol.identity(2), TorusPoint((0.0, 0.0)),
                                 (True, True), WeightParam(0.0),
                                 [2.0**-k for k in range(3, 7)], 100_000, seed=8)
        header, rows = scan.csv_rows()
        assert header == ["beta", "delta", "ratio", "stderr", "trusted"]
        assert len(rows) == 4

    def test_requires_some_shrink(self):
        with pytest.raises(ValueError):
            ratio_growth_scan(PolySymbol.identity(2), TorusPoint((0.0, 0.0)),
                              (False, False), WeightParam(0.0),
                              [0.5, 0.25, 0.125, 0.0625], 1000)


class TestBetaUniformity:
    def test_identity_uniform(self):
        report = beta_uniformity_probe(PolySymbol.identity(2), TorusPoint((0.0, 0.0)),
                                       (True, True), (-0.9, -0.5, -0.1),
                                       [2.0**-k for k in range(3, 7)], 200_000, seed=9)
        assert all(abs(s) < 0.1 for s in report.slopes)
        for scan in report.scans:
            for est in scan.estimates:
                assert abs(est.ratio - 1.0) < 4 * est.stderr
