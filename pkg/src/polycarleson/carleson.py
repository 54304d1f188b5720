"""Carleson-box preimage ratios: the measure-theoretic boundedness test.

A self-map of the polydisc composes boundedly on the weighted Bergman space
exactly when V_beta of box preimages is dominated by V_beta of the boxes,
uniformly over centers on the torus and radii.  The scans here measure the
ratio along shrinking boxes anchored at contact points: a log-log slope near
zero is evidence of a uniform Carleson constant, a negative slope certifies
blow-up.  Coordinates whose components do not touch the torus at the center
are left unconstrained (radius 2 covers the whole disc), matching the
extremal families in which only the binding components shrink.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULTS, LabConfig
from .fitting import FitRefused, loglog_wls
from .measure import CarlesonBox, WeightParam, carleson_box_measure
from .sublevel import PROVABLY_EMPTY, build_proposal, estimate_indicator
from .symbols import PolySymbol, TorusPoint, _eval_table


@dataclass(frozen=True)
class RatioEstimate:
    ratio: float
    stderr: float
    numerator: float
    numerator_stderr: float
    denominator: float
    hits: int
    region_mass: float
    leakage: float
    upper_bound: float | None
    trusted: bool
    reason: str


@dataclass(frozen=True)
class RatioScan:
    symbol: PolySymbol
    center: TorusPoint
    shrink: tuple[bool, ...]
    beta: WeightParam
    deltas: tuple[float, ...]
    estimates: tuple[RatioEstimate, ...]
    slope: float
    slope_stderr: float
    intercept: float

    def csv_rows(self) -> tuple[list[str], list[list]]:
        header = ["beta", "delta", "ratio", "stderr", "trusted"]
        rows = [
            [self.beta.beta, d, e.ratio, e.stderr, int(e.trusted)]
            for d, e in zip(self.deltas, self.estimates)
        ]
        return header, rows


@dataclass(frozen=True)
class BetaUniformityReport:
    symbol: PolySymbol
    center: TorusPoint
    shrink: tuple[bool, ...]
    betas: tuple[float, ...]
    deltas: tuple[float, ...]
    scans: tuple[RatioScan, ...]
    max_ratio: float
    slopes: tuple[float, ...]


def preimage_box_ratio(
    sym: PolySymbol,
    box: CarlesonBox,
    beta: WeightParam,
    budget: int,
    seed: int = 0,
    threads: int | None = None,
    config: LabConfig = DEFAULTS,
) -> RatioEstimate:
    """V_beta(Phi^{-1}(S(xi, delta))) / V_beta(S(xi, delta)) with propagated error.

    The numerator is importance-sampled from the proposal region built out of
    the binding components (radius below 1); the denominator is deterministic
    quadrature.  Radius-2 coordinates are vacuous by |Phi_j - xi_j| < 2 and are
    skipped in the membership test.
    """
    sym.require_certificate()
    if box.n != sym.n_out:
        raise ValueError("box dimension must match the number of components")
    n = sym.n_in
    denominator = carleson_box_measure(box, beta, quad_tol=config.quad_tol)
    xi = box.center.point()

    active = [j for j in range(sym.n_out) if box.radii[j] < 2.0]
    tables = [sym.components[j] for j in active]
    targets = [complex(xi[j]) for j in active]
    radii = [box.radii[j] for j in active]

    def membership(z):
        ok = np.ones(z.shape[0], dtype=bool)
        cache: dict = {}
        for table, target, r in zip(tables, targets, radii):
            ok &= np.abs(_eval_table(table, z, cache) - target) < r
        return ok

    bindings = [
        (sym.component(j), complex(xi[j]), box.radii[j])
        for j in range(sym.n_out)
        if box.radii[j] < 1.0
    ]
    region = build_proposal(bindings, n, config) if bindings else build_proposal([], n, config)
    if region == PROVABLY_EMPTY:
        return RatioEstimate(
            ratio=0.0, stderr=0.0, numerator=0.0, numerator_stderr=0.0,
            denominator=denominator, hits=0, region_mass=0.0, leakage=0.0,
            upper_bound=0.0, trusted=True, reason="preimage empty by structure",
        )
    est = estimate_indicator(
        membership, n, beta, region, budget, seed,
        f"carleson[{seed}]", threads=threads, config=config,
    )
    return RatioEstimate(
        ratio=est.volume / denominator,
        stderr=est.stderr / denominator,
        numerator=est.volume,
        numerator_stderr=est.stderr,
        denominator=denominator,
        hits=est.hits,
        region_mass=est.region_mass,
        leakage=est.leakage,
        upper_bound=None if est.upper_bound is None else est.upper_bound / denominator,
        trusted=est.trusted,
        reason=est.reason,
    )


def _scan_boxes(center: TorusPoint, shrink, delta: float) -> CarlesonBox:
    radii = tuple(delta if s else 2.0 for s in shrink)
    return CarlesonBox(center, radii)


def ratio_growth_scan(
    sym: PolySymbol,
    center: TorusPoint,
    shrink,
    beta: WeightParam,
    delta_grid,
    budget: int,
    seed: int = 0,
    threads: int | None = None,
    config: LabConfig = DEFAULTS,
) -> RatioScan:
    """Slope of log(preimage/box ratio) against log(delta) along shrinking boxes.

    ``shrink`` flags which coordinates shrink with delta; the rest stay
    unconstrained.  Slope near 0 is evidence of boundedness, decisively
    negative slope certifies an unbounded Carleson family.  Refuses to fit on
    fewer than 4 trusted points.
    """
    shrink = tuple(bool(s) for s in shrink)
    if len(shrink) != sym.n_out:
        raise ValueError("shrink mask length must match component count")
    if not any(shrink):
        raise ValueError("at least one coordinate must shrink")
    deltas = tuple(float(d) for d in delta_grid)
    estimates = []
    for k, d in enumerate(deltas):
        box = _scan_boxes(center, shrink, d)
        estimates.append(
            preimage_box_ratio(sym, box, beta, budget, seed=seed + 7919 * k,
                               threads=threads, config=config)
        )
    trusted = [(d, e) for d, e in zip(deltas, estimates) if e.trusted and e.ratio > 0]
    if len(trusted) < 4:
        raise FitRefused(f"only {len(trusted)} trusted scan points; need at least 4")
    xs = [d for d, _ in trusted]
    ys = [e.ratio for _, e in trusted]
    rel = [e.stderr / e.ratio for _, e in trusted]
    fit = loglog_wls(xs, ys, rel)
    return RatioScan(
        symbol=sym, center=center, shrink=shrink, beta=beta, deltas=deltas,
        estimates=tuple(estimates), slope=fit.slope, slope_stderr=fit.slope_stderr,
        intercept=fit.intercept,
    )


def beta_uniformity_probe(
    sym: PolySymbol,
    center: TorusPoint,
    shrink,
    beta_list,
    delta_grid,
    budget: int,
    seed: int = 0,
    threads: int | None = None,
    config: LabConfig = DEFAULTS,
) -> BetaUniformityReport:
    """Ratio matrix over (beta, delta) near the Hardy limit beta -> -1.

    A maximum that stays bounded with flat per-beta slopes is numerical
    evidence that the Carleson constants can be chosen uniformly in beta,
    which upgrades Bergman boundedness to the Hardy space.
    """
    betas = tuple(float(b) for b in beta_list)
    if any(not -0.95 < b < 0.0 for b in betas):
        raise ValueError("uniformity probe expects weights in (-0.95, 0)")
    scans = []
    for i, b in enumerate(betas):
        scans.append(
            ratio_growth_scan(sym, center, shrink, WeightParam(b), delta_grid,
                              budget, seed=seed + 104729 * i, threads=threads,
                              config=config)
        )
    max_ratio = max(e.ratio for s in scans for e in s.estimates if e.trusted)
    return BetaUniformityReport(
        symbol=sym, center=center, shrink=tuple(bool(s) for s in shrink),
        betas=betas, deltas=tuple(float(d) for d in delta_grid),
        scans=tuple(scans), max_ratio=max_ratio,
        slopes=tuple(s.slope for s in scans),
    )
