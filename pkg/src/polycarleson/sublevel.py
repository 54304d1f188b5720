"""Monte Carlo estimation of weighted sublevel-set volumes and their scaling.

The volumes V_beta({z in D^n : |f(z) - eta| <= delta}) decay like a power of
delta, far below what uniform sampling can resolve, so estimation draws from
proposal regions that provably contain the sublevel set: near-torus annuli
whose radial depth scales with delta, combined with either an angle-sum window
(when f is a single monomial, whose sublevel sets wrap around the torus) or
per-coordinate arcs of width ~ sqrt(delta) around the finite solution set of
f = eta on T^n.  A uniform "leakage audit" pass estimates the mass the region
might have missed; estimates failing the audit are flagged untrusted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .config import DEFAULTS, LabConfig
from .contact import _dedupe, find_contact_set
from .fitting import FitRefused, LogLogFit, loglog_wls
from .measure import (
    AngleSumWindow,
    AnnulusArc,
    FullPolydisc,
    Region,
    WeightParam,
    merge_arcs,
    region_contains,
    region_mass,
    restricted_sample,
    sample_polydisc,
)
from .montecarlo import run_batches, sum_counts
from .symbols import PolySymbol, TorusPoint, _eval_table, certify_self_map

TWO_PI = 2.0 * math.pi

AUTO = "auto"


@dataclass(frozen=True)
class SublevelQuery:
    f: PolySymbol
    eta: complex
    delta: float
    beta: WeightParam
    budget: int
    proposal: Region | str = AUTO
    seed: int = 0
    threads: int | None = None

    def __post_init__(self):
        if self.f.n_out != 1:
            raise ValueError("sublevel queries need a scalar symbol")
        if abs(abs(complex(self.eta)) - 1.0) > 1e-9:
            raise ValueError("target eta must be unimodular")
        if not 0.0 < self.delta <= 2.0:
            raise ValueError("delta must lie in (0, 2]")
        if self.budget < 1:
            raise ValueError("budget must be positive")


@dataclass(frozen=True)
class SublevelEstimate:
    delta: float
    volume: float          # restricted estimate plus measured leakage
    stderr: float
    hits: int
    region_mass: float
    leakage: float
    leakage_stderr: float
    upper_bound: float | None
    trusted: bool
    reason: str


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    slope_stderr: float
    max_abs_residual: float
    deltas: tuple[float, ...]          # trusted grid points used in the fit
    volumes: tuple[float, ...]
    stderrs: tuple[float, ...]         # per-delta standard errors
    points: tuple[SublevelEstimate, ...]  # every grid point, trusted or not

    def csv_rows(self) -> tuple[list[str], list[list]]:
        header = ["delta", "estimate", "stderr", "hits", "region_mass", "trusted"]
        rows = [
            [p.delta, p.volume, p.stderr, p.hits, p.region_mass, int(p.trusted)]
            for p in self.points
        ]
        return header, rows


# ---------------------------------------------------------------------------
# value fibers f = eta on the torus
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ValueFiber:
    kind: str  # "finite" | "manifold" | "empty"
    points: tuple[TorusPoint, ...]


def _newton_fiber(f: PolySymbol, eta: complex, theta0: np.ndarray, tol: float,
                  max_iter: int = 40) -> tuple[np.ndarray, np.ndarray]:
    """Damped Newton minimization of |f(e^{i theta}) - eta|^2."""
    n = f.n_in
    table = f.components[0]
    d1 = [f.derivative_table(0, j) for j in range(n)]
    d2 = [[f.second_derivative_table(0, j, k) for k in range(n)] for j in range(n)]

    def value(th):
        z = np.exp(1j * th)
        return np.abs(_eval_table(table, z, {}) - eta)

    def f_g_h(th):
        z = np.exp(1j * th)
        cache: dict = {}
        val = _eval_table(table, z, cache) - eta
        dphi = [_eval_table(d1[j], z, cache) for j in range(n)]
        w = [1j * z[:, j] * dphi[j] for j in range(n)]
        G = np.abs(val) ** 2
        g = np.empty((th.shape[0], n))
        H = np.empty((th.shape[0], n, n))
        conj_val = np.conj(val)
        for j in range(n):
            g[:, j] = 2.0 * np.real(conj_val * w[j])
        for j in range(n):
            for k in range(j, n):
                d2phi = _eval_table(d2[j][k], z, cache)
                dw = -z[:, j] * z[:, k] * d2phi
                if j == k:
                    dw = dw - z[:, j] * dphi[j]
                h = 2.0 * np.real(np.conj(w[k]) * w[j] + conj_val * dw)
                H[:, j, k] = h
                H[:, k, j] = h
        return G, g, H

    th = theta0.copy()
    for _ in range(max_iter):
        G, g, H = f_g_h(th)
        gnorm = np.linalg.norm(g, axis=1)
        if np.max(gnorm) < 1e-14:
            break
        try:
            step = -np.linalg.solve(H, g[..., None])[..., 0]
        except np.linalg.LinAlgError:
            step = -np.einsum("bij,bj->bi", np.linalg.pinv(H), g)
        bad = ~np.isfinite(step).all(axis=1)
        if np.any(bad):
            step[bad] = -np.einsum("bij,bj->bi", np.linalg.pinv(H[bad]), g[bad])
        norms = np.linalg.norm(step, axis=1, keepdims=True)
        step = np.where(norms > 0.5, step * (0.5 / np.maximum(norms, 1e-300)), step)
        improved = np.zeros(th.shape[0], dtype=bool)
        trial = th.copy()
        for t in (1.0, 0.5, 0.25, 0.125):
            cand = th + t * step
            Gc = f_g_h(cand)[0]
            take = (~improved) & (Gc <= G + 1e-18)
            trial[take] = cand[take]
            improved |= take
        th = trial
    return th % TWO_PI, value(th)


@lru_cache(maxsize=64)
def _value_fiber_cached(f: PolySymbol, eta: complex, contact_tol: float,
                        merge_radius: float, fiber_cap: int) -> ValueFiber:
    cs = find_contact_set(f, [0])
    if cs.is_empty:
        return ValueFiber("empty", ())
    seeds = np.array([p.angles for p in cs.points], dtype=float)
    z = np.exp(1j * seeds)
    vals = _eval_table(f.components[0], z, {})
    close = np.abs(vals - eta) <= 0.7
    if not np.any(close):
        return ValueFiber("empty", ())
    theta, resid = _newton_fiber(f, eta, seeds[close], contact_tol)
    ok = resid <= contact_tol
    if not np.any(ok):
        return ValueFiber("empty", ())
    pts, _ = _dedupe(theta[ok], resid[ok], merge_radius)
    if len(pts) > fiber_cap:
        return ValueFiber("manifold", ())
    return ValueFiber("finite", tuple(TorusPoint(tuple(p)) for p in pts))


def find_value_fiber(f: PolySymbol, eta: complex, config: LabConfig = DEFAULTS) -> ValueFiber:
    """Solve f = eta on T^n, classified as a finite point set or a manifold."""
    return _value_fiber_cached(f, complex(eta), config.contact_tol, config.merge_radius,
                               config.fiber_cap)


# ---------------------------------------------------------------------------
# proposal construction
# ---------------------------------------------------------------------------


PROVABLY_EMPTY = "provably-empty"


def _split_structure(f: PolySymbol):
    """Classify a scalar symbol for proposal building.

    Returns one of
      ("monomial", c0, c, alpha)          a single (possibly multi-variable)
                                          monomial plus an optional constant,
      ("separable", c0, [(j, m, c), ...]) a sum of single-variable monomials
                                          plus an optional constant,
      ("general", None, None)             anything else.
    """
    c0 = 0j
    terms = []
    for alpha, c in f.components[0]:
        if sum(alpha) == 0:
            c0 += c
            continue
        terms.append((alpha, c))
    if len(terms) == 1:
        return ("monomial", c0, terms[0][1], terms[0][0])
    if terms and all(sum(a > 0 for a in alpha) == 1 for alpha, _ in terms):
        parts = []
        seen = set()
        for alpha, c in terms:
            j = next(i for i, a in enumerate(alpha) if a > 0)
            if j in seen:
                return ("general", None, None)  # two powers of one variable
            seen.add(j)
            parts.append((j, alpha[j], c))
        return ("separable", c0, parts)
    return ("general", None, None)


def _interior_slice_max(f: PolySymbol, j: int) -> float:
    """Upper bound for max |f| over the closure of the slice {z_j = 0}.

    Feeds the Schwarz-margin radial bound: |f| >= 1 - delta forces
    1 - |z_j| <= 4*delta / (1 - slice max).
    """
    if f.n_in == 1:
        return abs(f.evaluate(np.zeros(1, dtype=complex))[0])
    sliced = f.restrict({j: 0.0})
    cert = certify_self_map(sliced, cert_tol=2.0).certificate  # screen only, never rejects
    return min(cert.grid_max + cert.lipschitz_margin, 1.0)


def build_proposal(bindings, n: int, config: LabConfig = DEFAULTS):
    """Region provably containing every set {|f_i - eta_i| <= delta_i} jointly.

    ``bindings`` is a list of (scalar symbol, unimodular target, tolerance).
    Containment bounds per binding:

    * monomial c z^alpha (+ const): modulus pins radii (1 - r_j <= d/alpha_j
      with d = delta/|c|) and the imaginary part pins the angle combination
      sum alpha_j theta_j to a window of half-width ~ d;
    * separable sum of single-variable monomials: the real-part alignment
      argument pins each rotated coordinate, 1 - r_j <= d_j/m_j and angle
      within sqrt(2 d_j)/m_j of each branch root, d_j = delta/|c_j|;
    * anything else: arcs of width ~ sqrt(delta) around the finite value
      fiber f = eta, radial depth from the interior-slice Schwarz floor.

    All bounds carry the margin K/2 (K for general-fiber arcs); the leakage
    audit guards the construction at runtime.  Returns PROVABLY_EMPTY when a
    binding target is beyond the reach of its component.
    """
    K = config.proposal_margin
    k_half = K / 2.0

    dedup: dict[tuple, tuple[PolySymbol, complex, float]] = {}
    for f, eta, delta in bindings:
        if f.n_in != n or f.n_out != 1:
            raise ValueError("binding symbol dimension mismatch")
        key = (f.components[0], complex(eta))
        if key not in dedup or delta < dedup[key][2]:
            dedup[key] = (f, complex(eta), float(delta))
    items = list(dedup.values())

    depth_candidates: list[list[float]] = [[] for _ in range(n)]
    arc_specs: list[list[tuple[float, float]]] = [[] for _ in range(n)]
    windows: list[tuple[tuple[int, ...], float, float]] = []

    for f, eta, delta in items:
        structure = _split_structure(f)
        kind = structure[0]
        if kind == "monomial":
            _, c0, c, alpha = structure
            cmod = abs(c)
            u = eta - c0
            umod = abs(u)
            if umod - cmod > delta + 1e-12:
                return PROVABLY_EMPTY
            if cmod - umod > 1e-9 or cmod < 1e-12:
                continue  # level set sits inside the polydisc; no torus structure
            d = delta / cmod
            base = math.atan2(u.imag, u.real) - math.atan2(c.imag, c.real)
            width = k_half * d
            live = [j for j in range(n) if alpha[j] > 0]
            for j in live:
                depth_candidates[j].append(k_half * d / alpha[j])
            if len(live) == 1:
                j = live[0]
                m = alpha[j]
                if width / m < math.pi:
                    for k in range(m):
                        arc_specs[j].append(((base + TWO_PI * k) / m - width / m, 2.0 * width / m))
            elif live and width < math.pi:
                windows.append((alpha, base, width))
        elif kind == "separable":
            _, c0, parts = structure
            u = eta - c0
            umod = abs(u)
            csum = sum(abs(c) for _, _, c in parts)
            if umod - csum > delta + 1e-12:
                return PROVABLY_EMPTY
            if csum - umod > 1e-9:
                continue  # not an extremal target: level set leaves the torus corner
            base_u = math.atan2(u.imag, u.real)
            for j, m, c in parts:
                cmod = abs(c)
                if cmod < 1e-12:
                    continue
                d = delta / cmod
                depth_candidates[j].append(k_half * d / m)
                half = k_half * math.sqrt(2.0 * d) / m
                if half < math.pi:
                    base = base_u - math.atan2(c.imag, c.real)
                    for k in range(m):
                        arc_specs[j].append(((base + TWO_PI * k) / m - half, 2.0 * half))
        else:
            live = [j for j in range(n) if f.depends_on(j)]
            for j in live:
                slice_max = _interior_slice_max(f, j)
                if slice_max < 1.0 - 1e-3:
                    depth_candidates[j].append(4.0 * delta / (1.0 - slice_max))
            fiber = find_value_fiber(f, eta, config)
            if fiber.kind == "finite" and fiber.points:
                half = K * math.sqrt(delta)
                if half < math.pi:
                    for j in live:
                        for pt in fiber.points:
                            arc_specs[j].append((pt.angles[j] - half, 2.0 * half))

    depths = tuple(min(1.0, min(ds)) if ds else 1.0 for ds in depth_candidates)
    arcs: list = []
    for j in range(n):
        arcs.append(merge_arcs(arc_specs[j]) if arc_specs[j] else None)

    window = None
    for alpha, base, width in windows:
        solvable = [j for j in range(n) if alpha[j] > 0 and arcs[j] is None]
        if solvable:
            j0 = max(solvable, key=lambda j: alpha[j])
            window = AngleSumWindow(coeffs=tuple(alpha), center=base % TWO_PI,
                                    halfwidth=width, solve_index=j0)
            break  # one exact window; extra constraints stay in the membership test

    if window is None and all(a is None for a in arcs) and all(d >= 1.0 for d in depths):
        return FullPolydisc(n)
    return AnnulusArc(depths=depths, arcs=tuple(arcs), window=window)


# ---------------------------------------------------------------------------
# estimation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IndicatorEstimate:
    """Restricted Monte Carlo integral of an indicator over D^n with trust flags."""

    volume: float
    stderr: float
    hits: int
    region_mass: float
    leakage: float
    leakage_stderr: float
    upper_bound: float | None
    trusted: bool
    reason: str


def estimate_indicator(
    membership,
    n: int,
    beta: WeightParam,
    region: Region,
    budget: int,
    seed: int,
    label: str,
    threads: int | None = None,
    config: LabConfig = DEFAULTS,
) -> IndicatorEstimate:
    """Shared engine: restricted estimate plus uniform leakage audit.

    ``membership(z)`` maps an (N, n) complex batch to a boolean mask.  The
    region must contain the support up to mass the audit can see; the total
    reported is restricted estimate + measured leakage.  Zero hits or leakage
    above the threshold fraction of the estimate mark the result untrusted
    (zero hits also report a one-sided upper confidence bound).
    """
    mass = region_mass(region, beta, quad_tol=config.quad_tol)

    def main_worker(rng, count):
        z, _ = restricted_sample(region, beta, rng, count, quad_tol=config.quad_tol)
        return (int(np.count_nonzero(membership(z))),)

    (hits,) = sum_counts(
        run_batches(budget, seed, label, main_worker, threads=threads,
                    batch_size=config.batch_size)
    )
    p = hits / budget
    restricted = mass * p
    stderr = mass * math.sqrt(max(p * (1.0 - p), 0.0) / budget)

    leakage = 0.0
    leak_stderr = 0.0
    if not isinstance(region, FullPolydisc):
        audit_budget = max(1, int(round(budget * config.leakage_fraction)))

        def audit_worker(rng, count):
            z = sample_polydisc(n, beta, rng, count)
            outside = membership(z) & ~region_contains(region, z)
            return (int(np.count_nonzero(outside)),)

        (leak_hits,) = sum_counts(
            run_batches(audit_budget, seed, label + "/audit", audit_worker,
                        threads=threads, batch_size=config.batch_size)
        )
        q = leak_hits / audit_budget
        leakage = q
        leak_stderr = math.sqrt(max(q * (1.0 - q), 0.0) / audit_budget)

    total = restricted + leakage
    total_stderr = math.hypot(stderr, leak_stderr)
    trusted = True
    reason = "ok"
    upper = None
    if hits == 0:
        trusted = False
        reason = "zero hits"
        upper = config.zero_hit_factor / budget * mass + leakage
    elif leakage > config.leakage_threshold * restricted:
        trusted = False
        reason = (
            f"leakage audit {leakage:.3e} exceeds {config.leakage_threshold:.0%} "
            f"of estimate {restricted:.3e}"
        )
    return IndicatorEstimate(
        volume=total, stderr=total_stderr, hits=hits, region_mass=mass,
        leakage=leakage, leakage_stderr=leak_stderr, upper_bound=upper,
        trusted=trusted, reason=reason,
    )


def estimate_sublevel(query: SublevelQuery, config: LabConfig = DEFAULTS) -> SublevelEstimate:
    """Unbiased V_beta estimate of the sublevel set, with trust bookkeeping.

    The restricted estimate covers the proposal region; a uniform audit pass
    (10% of the budget) measures sublevel mass outside the region.  The total
    is restricted + leakage; leakage above 1% of the restricted estimate, or a
    zero hit count, flags the point untrusted (zero hits additionally report a
    one-sided upper confidence bound).
    """
    f, eta, delta, beta = query.f, complex(query.eta), query.delta, query.beta
    f.require_certificate()
    n = f.n_in
    region = query.proposal
    if region == AUTO:
        region = build_proposal([(f, eta, delta)], n, config)
    if region == PROVABLY_EMPTY:
        return SublevelEstimate(
            delta=delta, volume=0.0, stderr=0.0, hits=0, region_mass=0.0,
            leakage=0.0, leakage_stderr=0.0, upper_bound=0.0,
            trusted=True, reason="target beyond component range; set empty",
        )
    table = f.components[0]

    def membership(z):
        return np.abs(_eval_table(table, z, {}) - eta) <= delta

    est = estimate_indicator(
        membership, n, beta, region, query.budget, query.seed,
        f"sublevel[{query.seed}]", threads=query.threads, config=config,
    )
    return SublevelEstimate(
        delta=delta, volume=est.volume, stderr=est.stderr, hits=est.hits,
        region_mass=est.region_mass, leakage=est.leakage,
        leakage_stderr=est.leakage_stderr, upper_bound=est.upper_bound,
        trusted=est.trusted, reason=est.reason,
    )


def _check_geometric(deltas) -> tuple[float, ...]:
    deltas = tuple(float(d) for d in deltas)
    if len(deltas) < 4:
        raise ValueError("delta grid needs at least 4 points")
    ratios = [b / a for a, b in zip(deltas[:-1], deltas[1:])]
    if max(ratios) - min(ratios) > 1e-9 * max(ratios):
        raise ValueError("delta grid must be geometric")
    return deltas


DEFAULT_DELTA_GRID = tuple(2.0**-k for k in range(4, 10))


def fit_exponent(
    f: PolySymbol,
    eta: complex,
    beta: WeightParam,
    delta_grid=DEFAULT_DELTA_GRID,
    budget: int = 1_000_000,
    proposal: Region | str = AUTO,
    seed: int = 0,
    threads: int | None = None,
    config: LabConfig = DEFAULTS,
) -> ExponentFit:
    """Weighted log-log fit of sublevel volume against delta over a geometric grid.

    Untrusted points are excluded; the fit refuses to run on fewer than four
    trusted points.
    """
    deltas = _check_geometric(delta_grid)
    points = []
    for k, delta in enumerate(deltas):
        q = SublevelQuery(f=f, eta=eta, delta=delta, beta=beta, budget=budget,
                          proposal=proposal, seed=seed + 7919 * k, threads=threads)
        points.append(estimate_sublevel(q, config))
    trusted = [p for p in points if p.trusted]
    if len(trusted) < 4:
        raise FitRefused(
            f"only {len(trusted)} trusted points out of {len(points)}; need at least 4"
        )
    xs = [p.delta for p in trusted]
    ys = [p.volume for p in trusted]
    rel = [p.stderr / p.volume for p in trusted]
    fit: LogLogFit = loglog_wls(xs, ys, rel)
    return ExponentFit(
        slope=fit.slope,
        intercept=fit.intercept,
        slope_stderr=fit.slope_stderr,
        max_abs_residual=fit.max_abs_residual,
        deltas=tuple(xs),
        volumes=tuple(ys),
        stderrs=tuple(p.stderr for p in trusted),
        points=tuple(points),
    )
