"""Sampled property checks for the analytic estimates behind the volume bounds.

Each check sweeps an explicit seeded sample set, records the worst case it
saw, and reports the empirical constant where the underlying estimate leaves
one unspecified.  The battery doubles as the regression suite for the
analysis layer: the inequalities are theorems, so a failed report indicates a
numerical bug, never a tolerance to relax.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .config import DEFAULTS, LabConfig
from .contact import ContactRequired, jc_check
from .measure import Region, WeightParam, restricted_sample
from .sublevel import DEFAULT_DELTA_GRID, fit_exponent
from .symbols import PolySymbol, TorusPoint

TWO_PI = 2.0 * math.pi


class RegionRejected(ValueError):
    """The sampled region violated a precondition (for example a Jacobian floor)."""


@dataclass(frozen=True)
class PropertyReport:
    name: str
    sample_count: int
    worst_violation: float       # most negative margin seen; >= 0 - tol passes
    empirical_constant: float
    passed: bool
    seed: int
    worst_sample: tuple = ()
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def enc(v):
            if isinstance(v, complex):
                return [v.real, v.imag]
            if isinstance(v, (tuple, list)):
                return [enc(x) for x in v]
            return v

        return {
            "name": self.name,
            "sample_count": self.sample_count,
            "worst_violation": self.worst_violation,
            "empirical_constant": self.empirical_constant,
            "passed": self.passed,
            "seed": self.seed,
            "worst_sample": enc(self.worst_sample),
            "details": {k: enc(v) for k, v in self.details.items()},
        }


def mobius_margin_check(
    family: Callable[[complex, float], complex],
    params,
    delta_grid=(0.5, 0.25, 0.125, 0.0625, 0.03125),
    samples_per_case: int = 256,
    seed: int = 0,
) -> PropertyReport:
    """Margin of a holomorphic family: |x| <= 1 - delta forces |phi(x,k)| <= 1 - C delta.

    Sweeps |x| = 1 - delta and records the empirical C = min (1 - |phi|)/delta,
    which must stay positive and above the analytic floor (1 - max_k |phi(0,k)|)/2.
    """
    params = [float(k) for k in params]
    rng = np.random.default_rng(seed)
    worst = math.inf
    worst_sample: tuple = ()
    count = 0
    floor = max(abs(complex(family(0.0, k))) for k in params)
    analytic_floor = (1.0 - floor) / 2.0
    for k in params:
        for delta in delta_grid:
            phases = TWO_PI * (np.arange(samples_per_case) + rng.random(samples_per_case)) / samples_per_case
            xs = (1.0 - delta) * np.exp(1j * phases)
            for x in xs:
                val = complex(family(complex(x), k))
                if abs(val) > 1.0 + 1e-12:
                    raise ValueError(
                        f"family value |phi({x:.4f}, {k})| = {abs(val):.6f} leaves the disc"
                    )
                margin = (1.0 - abs(val)) / delta
                count += 1
                if margin < worst:
                    worst = margin
                    worst_sample = (complex(x), k, delta)
    passed = worst > 0.0 and worst >= analytic_floor - 1e-12
    return PropertyReport(
        name="mobius_margin",
        sample_count=count,
        worst_violation=worst - analytic_floor,
        empirical_constant=worst,
        passed=passed,
        seed=seed,
        worst_sample=worst_sample,
        details={"analytic_floor": analytic_floor},
    )


def _scale_sweep(zeta: np.ndarray, radius: float, rng: np.random.Generator,
                 random_count: int, cap: int = 150_000) -> np.ndarray:
    """Sample points of D^n at scale ``radius`` around a torus point.

    Coordinates are parametrized by boundary distance sigma (log-spaced down
    to radius * 1e-4) and tangential angle, z_j = zeta_j (1-sigma_j) e^{i t_j}.
    The deterministic grid makes the per-scale maxima comparable across
    scales; the ratio extrema live in the thin sliver sigma << t^2, which
    uniform ball sampling almost never hits.
    """
    n = len(zeta)
    sigmas = radius * np.logspace(-4.0, 0.0, 7)
    ts = radius * np.linspace(-1.0, 1.0, 15)
    per = [(s, t) for s in sigmas for t in ts]
    grids = np.meshgrid(*([np.arange(len(per))] * n), indexing="ij")
    combos = np.stack([g.reshape(-1) for g in grids], axis=1)
    if len(combos) > cap:
        stride = int(math.ceil(len(combos) / cap))
        combos = combos[::stride]
    per_arr = np.array(per)
    sigma = per_arr[combos, 0]
    tang = per_arr[combos, 1]
    z = zeta * (1.0 - sigma) * np.exp(1j * tang)
    if random_count > 0:
        rs = radius * rng.random((random_count, n))
        rt = radius * (2.0 * rng.random((random_count, n)) - 1.0)
        z_rand = zeta * (1.0 - rs) * np.exp(1j * rt)
        z = np.concatenate([z, z_rand], axis=0)
    return z


def linearization_bound_check(
    f: PolySymbol,
    zeta: TorusPoint,
    eta: complex,
    radii=(0.2, 0.1, 0.05),
    samples_per_radius: int = 20_000,
    seed: int = 0,
    config: LabConfig = DEFAULTS,
) -> PropertyReport:
    """Stability of |f(z) - eta| <= C |sum_j df/dz_j(zeta) (z_j - zeta_j)| near a contact point.

    The empirical C is the max ratio over a deterministic boundary-distance
    sweep plus seeded random fill at each scale; the check asserts it is
    nonincreasing within 5% as the scale shrinks, the stabilization evidence
    that a single constant works on a full neighborhood.  Near-zero
    denominators are excluded and counted; more than 1% exclusions fail the
    report.
    """
    if f.n_out != 1:
        raise ValueError("linearization check needs a scalar symbol")
    z0 = zeta.point()
    val = f.evaluate(z0)[0]
    if abs(val - eta) > config.contact_tol * 10.0:
        raise ContactRequired(f"|f(zeta) - eta| = {abs(val - eta):.3e}")
    grad = f.jacobian(z0)[0]
    rot = np.conj(eta) * grad
    rng = np.random.default_rng(seed)
    cs = []
    excluded = 0
    total = 0
    worst_sample: tuple = ()
    for r in sorted(radii, reverse=True):
        z = _scale_sweep(z0, r, rng, samples_per_radius)
        num = np.abs(f.evaluate_batch(z)[:, 0] - eta)
        den = np.abs((z - z0) @ rot)
        keep = den > 1e-14
        excluded += int(np.sum(~keep))
        total += len(z)
        ratio = num[keep] / den[keep]
        idx = int(np.argmax(ratio))
        cs.append(float(ratio[idx]))
        worst_sample = tuple(z[keep][idx])
    stabilizes = all(c2 <= c1 * 1.05 for c1, c2 in zip(cs, cs[1:]))
    exclusion_ok = excluded <= 0.01 * total
    return PropertyReport(
        name="linearization_bound",
        sample_count=total,
        worst_violation=min(c1 * 1.05 - c2 for c1, c2 in zip(cs, cs[1:])),
        empirical_constant=cs[-1],
        passed=stabilizes and exclusion_ok and math.isfinite(cs[-1]),
        seed=seed,
        worst_sample=worst_sample,
        details={"constants_by_radius": tuple(cs), "radii": tuple(sorted(radii, reverse=True)),
                 "excluded": excluded},
    )


def schwarz_product_check(
    sym: PolySymbol,
    region: Region,
    c_floor: float,
    samples: int = 100_000,
    seed: int = 0,
    config: LabConfig = DEFAULTS,
) -> PropertyReport:
    """Product Schwarz inequality near a torus contact point.

    On a region where |det dPhi| > c_floor, the product of (1 - |Phi_j|^2)
    dominates (c_floor/k!)^k times the product of (1 - |z_j|^2).  The region
    is rejected outright if the Jacobian floor fails on any sample.
    """
    sym.require_certificate()
    k = sym.n_in
    if sym.n_out != k:
        raise ValueError("schwarz product check needs a square symbol")
    rng = np.random.default_rng(seed)
    z, _ = restricted_sample(region, WeightParam(0.0), rng, samples)
    dets = np.abs(np.linalg.det(sym.jacobian_batch(z)))
    if np.any(dets < c_floor - 1e-12):
        bad = z[int(np.argmin(dets))]
        raise RegionRejected(
            f"|det dPhi| = {dets.min():.6f} below floor {c_floor} at {bad}"
        )
    vals = sym.evaluate_batch(z)
    lhs = np.prod(1.0 - np.abs(vals) ** 2, axis=1)
    base = np.prod(1.0 - np.abs(z) ** 2, axis=1)
    const = (c_floor / math.factorial(k)) ** k
    margin = lhs - const * base
    idx = int(np.argmin(margin))
    ratios = lhs / base
    return PropertyReport(
        name="schwarz_product",
        sample_count=samples,
        worst_violation=float(margin[idx]),
        empirical_constant=float(ratios.min()),
        passed=bool(margin[idx] >= -1e-12),
        seed=seed,
        worst_sample=tuple(z[idx]),
        details={"required_constant": const, "jacobian_floor": c_floor},
    )


def upper_bound_battery(
    f: PolySymbol,
    zeta: TorusPoint,
    eta: complex,
    delta_grid=DEFAULT_DELTA_GRID,
    budget: int = 1_000_000,
    beta: WeightParam = WeightParam(0.0),
    seed: int = 0,
    threads: int | None = None,
    config: LabConfig = DEFAULTS,
) -> PropertyReport:
    """Sandwich check: the fitted volume exponent lies in [n+1 - 0.2, (3n+1)/2 + 0.2].

    Valid only for symbols whose rotated boundary derivatives at the contact
    point are all nonvanishing (checked, not assumed); maps that ignore one of
    their variables genuinely escape the upper bound.
    """
    jc = jc_check(f, zeta, eta, config)
    if not jc.passed or min(v.real for v in jc.values) <= config.jc_tol:
        raise ContactRequired(
            "sandwich bounds need nonvanishing rotated boundary derivatives"
        )
    n = f.n_in
    fit = fit_exponent(f, eta, beta, delta_grid=delta_grid, budget=budget,
                       seed=seed, threads=threads, config=config)
    lo = n + 1.0 - 0.2
    hi = (3.0 * n + 1.0) / 2.0 + 0.2
    violation = min(fit.slope - lo, hi - fit.slope)
    return PropertyReport(
        name="volume_exponent_sandwich",
        sample_count=budget * len(delta_grid),
        worst_violation=float(violation),
        empirical_constant=fit.slope,
        passed=bool(violation >= 0.0),
        seed=seed,
        worst_sample=(),
        details={"band": (lo, hi), "slope_stderr": fit.slope_stderr,
                 "deltas": tuple(fit.deltas)},
    )
