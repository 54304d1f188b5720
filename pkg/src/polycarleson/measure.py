"""Weighted measures on the polydisc: exact quadrature and seeded sampling.

The weighted area measure on the disc is dA_beta = (beta+1)(1-|z|^2)^beta dA
with dA normalized so the disc has measure 1; the polydisc carries the product
V_beta.  Carleson boxes are products of disc caps |z_j - xi_j| < delta_j, and
their measures reduce to a 1-D radial integral because the angular width of a
cap slice is available in closed form.

Sampling regions come in three shapes: the full polydisc, products of disc
caps around torus points ("corners"), and annulus-arc products with an
optional angle-sum window (the shape carved out by near-torus sublevel sets).
All samplers draw exactly from V_beta restricted to the region and report the
exact region mass, so indicator Monte Carlo over them is unbiased.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .config import DEFAULTS
from .symbols import TorusPoint

TWO_PI = 2.0 * math.pi


class QuadratureBudgetExceeded(RuntimeError):
    pass


class EmptyRegion(ValueError):
    pass


@dataclass(frozen=True)
class WeightParam:
    """Bergman weight exponent beta. Only beta > -1 gives a finite measure;
    betas below -0.95 are rejected because the radial density is then too
    peaked for the fixed quadrature grading."""

    beta: float

    def __post_init__(self):
        b = float(self.beta)
        if not b > -1.0:
            raise ValueError(f"weight parameter must exceed -1, got {b}")
        if b < -0.95:
            raise ValueError(
                f"beta={b} rejected: radial density too peaked below -0.95 for the fixed grading"
            )
        object.__setattr__(self, "beta", b)


@dataclass(frozen=True)
class CarlesonBox:
    """Box S(xi, delta) = {z in D^n : |z_j - xi_j| < delta_j}.

    Radii live in (0, 2]; radius 2 covers the whole disc in that coordinate
    (inputs above 2 are clamped).
    """

    center: TorusPoint
    radii: tuple[float, ...]

    def __post_init__(self):
        radii = tuple(min(float(d), 2.0) for d in self.radii)
        if len(radii) != self.center.n:
            raise ValueError("box radii and center dimension differ")
        if any(d <= 0.0 for d in radii):
            raise ValueError("box radii must be positive")
        object.__setattr__(self, "radii", radii)

    @property
    def n(self) -> int:
        return self.center.n


def radial_sample(beta: WeightParam | float, u):
    """Inverse-CDF radius: r = sqrt(1 - (1-u)^{1/(beta+1)}).

    Maps uniform u in [0,1) to the radial law with density
    (beta+1)(1-r^2)^beta * 2r on [0,1).
    """
    b = beta.beta if isinstance(beta, WeightParam) else float(beta)
    u = np.asarray(u, dtype=float)
    return np.sqrt(1.0 - (1.0 - u) ** (1.0 / (b + 1.0)))


def annulus_mass(beta: WeightParam, s: float) -> float:
    """V_beta radial mass of {1 - s <= |z| < 1}: (s(2-s))^{beta+1}."""
    s = min(max(float(s), 0.0), 1.0)
    if s == 0.0:
        return 0.0
    return (s * (2.0 - s)) ** (beta.beta + 1.0)


def _cap_angular_halfwidth(r: np.ndarray, amod: float, delta: float) -> np.ndarray:
    """Half-width in angle of {theta : |r e^{i theta} - a| < delta} for |a| = amod."""
    r = np.asarray(r, dtype=float)
    if amod == 0.0:
        return np.where(r < delta, math.pi, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        cosval = (r * r + amod * amod - delta * delta) / (2.0 * r * amod)
    # circle of radius r=0 degenerates to the origin: inside iff |a| < delta
    cosval = np.where(r == 0.0, -2.0 if amod < delta else 2.0, cosval)
    return np.arccos(np.clip(cosval, -1.0, 1.0))


def disc_cap_measure(
    a: complex,
    delta: float,
    beta: WeightParam,
    quad_tol: float = DEFAULTS.quad_tol,
    max_panels: int = 200,
) -> float:
    """A_beta(D(a, delta) ∩ D) by deterministic radial quadrature.

    The angular integral of a cap slice is exact, leaving a 1-D radial
    integral.  Substituting v = (1-r^2)^(beta+1) absorbs the weight (whose
    derivative is singular at r = 1 for beta < 0) exactly; panels are split at
    the kinks of the angular width and graded geometrically toward r = 1.
    Error above quad_tol raises instead of silently truncating.
    """
    amod = abs(complex(a))
    delta = float(delta)
    if delta <= 0.0:
        raise ValueError("cap radius must be positive")
    r_lo = max(0.0, amod - delta)
    r_hi = min(1.0, amod + delta)
    if r_lo >= 1.0:
        return 0.0
    if amod + delta <= 1.0 + 1e-15 and beta.beta == 0.0:
        # cap fully inside the disc, Lebesgue case: normalized area delta^2
        return delta * delta
    if delta >= 1.0 + amod:
        return 1.0  # cap covers the whole disc

    b = beta.beta
    p = 1.0 / (b + 1.0)

    # Substitute v = (1 - r^2)^(beta+1): dv absorbs the radial weight exactly,
    # leaving the bounded integrand alpha(r(v))/pi.  Geometric panels toward
    # v = 0 (that is, r = 1) absorb the residual sqrt-type kink for beta != 0.
    def integrand(v):
        v = np.asarray(v, dtype=float)
        u = np.clip(v, 0.0, 1.0) ** p
        r = np.sqrt(np.clip(1.0 - u, 0.0, 1.0))
        return _cap_angular_halfwidth(r, amod, delta) / math.pi

    def v_of_r(r: float) -> float:
        return max(1.0 - r * r, 0.0) ** (b + 1.0)

    v_lo = v_of_r(r_hi)  # r increasing <-> v decreasing
    v_hi = v_of_r(r_lo)
    breaks = {v_lo, v_hi}
    for kink in (abs(amod - delta), amod + delta, delta - amod):
        if r_lo < kink < r_hi:
            breaks.add(v_of_r(kink))
    pts = sorted(breaks)
    panels: list[tuple[float, float]] = []
    for lo, hi in zip(pts[:-1], pts[1:]):
        if lo <= 1e-13 and hi > 1e-8:
            # grade geometrically away from v = 0
            edges = [lo]
            k = 24
            while k >= 1:
                e = hi / 2.0**k
                if e > lo:
                    edges.append(e)
                k -= 1
            edges.append(hi)
            panels.extend((e0, e1) for e0, e1 in zip(edges[:-1], edges[1:]) if e1 > e0)
        else:
            panels.append((lo, hi))
    if len(panels) > max_panels:
        raise QuadratureBudgetExceeded(f"{len(panels)} panels exceed budget {max_panels}")

    total = 0.0
    err_total = 0.0
    per_panel = quad_tol / (2 * max(len(panels), 1))
    for lo, hi in panels:
        val, err = integrate.quad(integrand, lo, hi, epsabs=per_panel, epsrel=1e-10, limit=100)
        total += val
        err_total += err
    if err_total > quad_tol:
        raise QuadratureBudgetExceeded(
            f"accumulated quadrature error {err_total:.3e} exceeds tolerance {quad_tol:.3e}"
        )
    return min(max(total, 0.0), 1.0)


def carleson_box_measure(box: CarlesonBox, beta: WeightParam, quad_tol: float = DEFAULTS.quad_tol) -> float:
    """V_beta(S(xi, delta)) as the product of per-coordinate cap measures."""
    total = 1.0
    for xi_j, d_j in zip(box.center.point(), box.radii):
        total *= disc_cap_measure(xi_j, d_j, beta, quad_tol=quad_tol)
    return total


def sample_polydisc(n: int, beta: WeightParam, rng: np.random.Generator, size: int) -> np.ndarray:
    """(size, n) i.i.d. points with law V_beta: uniform angles, inverse-CDF radii."""
    theta = rng.random((size, n)) * TWO_PI
    r = radial_sample(beta, rng.random((size, n)))
    return r * np.exp(1j * theta)


# ---------------------------------------------------------------------------
# sampling regions
# ---------------------------------------------------------------------------

Arc = tuple[float, float]  # (start angle in [0, 2pi), length in (0, 2pi])


def merge_arcs(arcs: list[Arc]) -> tuple[Arc, ...] | None:
    """Normalize a list of arcs into disjoint sorted intervals; None = full circle."""
    if not arcs:
        raise EmptyRegion("no arcs supplied")
    segs: list[tuple[float, float]] = []
    for start, length in arcs:
        if length <= 0.0:
            continue
        if length >= TWO_PI:
            return None
        s = start % TWO_PI
        end = s + length
        if end <= TWO_PI:
            segs.append((s, end))
        else:  # wraps: split
            segs.append((s, TWO_PI))
            segs.append((0.0, end - TWO_PI))
    if not segs:
        raise EmptyRegion("all arcs empty")
    segs.sort()
    merged = [segs[0]]
    for s, e in segs[1:]:
        if s <= merged[-1][1] + 1e-15:
            merged[-1] = (merged[-1][0], max(merged[-1][1], e))
        else:
            merged.append((s, e))
    # wrap-around join between last and first
    if len(merged) > 1 and merged[0][0] <= 1e-15 and merged[-1][1] >= TWO_PI - 1e-15:
        first = merged.pop(0)
        merged[-1] = (merged[-1][0], TWO_PI + first[1])
    total = sum(e - s for s, e in merged)
    if total >= TWO_PI - 1e-12:
        return None
    return tuple((s, e - s) for s, e in merged)


@dataclass(frozen=True)
class AngleSumWindow:
    """Joint angular constraint: sum_j coeffs_j * theta_j in center ± halfwidth (mod 2pi).

    ``solve_index`` names the coordinate solved for during sampling; its arc
    must be the full circle, which keeps both the mass formula and the sampler
    exact for any positive integer coefficient (the mod-2pi branches are
    equidistributed).
    """

    coeffs: tuple[int, ...]
    center: float
    halfwidth: float
    solve_index: int

    def __post_init__(self):
        if self.halfwidth <= 0.0:
            raise EmptyRegion("angle window must have positive width")
        if self.halfwidth > math.pi:
            raise ValueError("angle window wider than the circle; drop the window instead")
        if self.coeffs[self.solve_index] <= 0:
            raise ValueError("solve coordinate needs a positive integer coefficient")


@dataclass(frozen=True)
class FullPolydisc:
    n: int


@dataclass(frozen=True)
class ProductCorner:
    """Product of disc caps around torus-point coordinates: prod_j D(xi_j, rho_j) ∩ D."""

    centers: tuple[complex, ...]
    radii: tuple[float, ...]

    def __post_init__(self):
        if len(self.centers) != len(self.radii):
            raise ValueError("centers and radii length mismatch")
        if any(rho <= 0 for rho in self.radii):
            raise EmptyRegion("corner radii must be positive")
        if any(abs(abs(complex(c)) - 1.0) > 1e-9 for c in self.centers):
            raise ValueError("corner centers must lie on the torus")
        object.__setattr__(self, "centers", tuple(complex(c) for c in self.centers))
        object.__setattr__(self, "radii", tuple(float(r) for r in self.radii))

    @property
    def n(self) -> int:
        return len(self.centers)


@dataclass(frozen=True)
class AnnulusArc:
    """Product region {r_j in [1-s_j, 1), theta_j in arcs_j} ∩ optional angle-sum window.

    arcs entry None means the full circle.  Depth 1 means the full radial range.
    """

    depths: tuple[float, ...]
    arcs: tuple[tuple[Arc, ...] | None, ...]
    window: AngleSumWindow | None = None

    def __post_init__(self):
        if len(self.depths) != len(self.arcs):
            raise ValueError("depths and arcs length mismatch")
        depths = tuple(min(max(float(s), 0.0), 1.0) for s in self.depths)
        if any(s <= 0.0 for s in depths):
            raise EmptyRegion("annulus depths must be positive")
        object.__setattr__(self, "depths", depths)
        if self.window is not None:
            if len(self.window.coeffs) != len(depths):
                raise ValueError("window coefficient length mismatch")
            if self.arcs[self.window.solve_index] is not None:
                raise ValueError("window solve coordinate must have a full-circle arc")

    @property
    def n(self) -> int:
        return len(self.depths)


Region = FullPolydisc | ProductCorner | AnnulusArc


def region_mass(region: Region, beta: WeightParam, quad_tol: float = DEFAULTS.quad_tol) -> float:
    """Exact V_beta mass of a sampling region (closed form except corner caps)."""
    if isinstance(region, FullPolydisc):
        return 1.0
    if isinstance(region, ProductCorner):
        total = 1.0
        for c, rho in zip(region.centers, region.radii):
            total *= disc_cap_measure(c, rho, beta, quad_tol=quad_tol)
        if total == 0.0:
            raise EmptyRegion("corner region has zero mass")
        return total
    total = 1.0
    for s, arcs in zip(region.depths, region.arcs):
        total *= annulus_mass(beta, s)
        if arcs is not None:
            total *= sum(length for _, length in arcs) / TWO_PI
    if region.window is not None:
        total *= min(2.0 * region.window.halfwidth, TWO_PI) / TWO_PI
    if total == 0.0:
        raise EmptyRegion("annulus-arc region has zero mass")
    return total


def _sample_restricted_radius(beta: WeightParam, s: float, u: np.ndarray) -> np.ndarray:
    """Radii with law A_beta restricted to [1-s, 1)."""
    b = beta.beta
    tail = (s * (2.0 - s)) ** (b + 1.0)  # 1 - F(1-s)
    return np.sqrt(1.0 - ((1.0 - u) * tail) ** (1.0 / (b + 1.0)))


def _sample_multi_arc(arcs: tuple[Arc, ...], rng: np.random.Generator, size: int) -> np.ndarray:
    lengths = np.array([length for _, length in arcs])
    starts = np.array([start for start, _ in arcs])
    cum = np.cumsum(lengths)
    pick = np.searchsorted(cum, rng.random(size) * cum[-1], side="right")
    return (starts[pick] + rng.random(size) * lengths[pick]) % TWO_PI


def _sample_corner_coordinate(
    center: complex, rho: float, beta: WeightParam, rng: np.random.Generator, size: int
) -> np.ndarray:
    """Rejection sampling of A_beta restricted to D(center, rho) ∩ D.

    The proposal is the bounding annulus-arc (radial depth min(rho,1), angular
    half-width arcsin(min(rho,1))), which contains the cap for torus centers.
    """
    amod = abs(center)
    base = math.atan2(center.imag, center.real)
    s = min(rho, 1.0)
    if rho >= 1.0 + amod:
        theta = rng.random(size) * TWO_PI
        r = radial_sample(beta, rng.random(size))
        return r * np.exp(1j * theta)
    halfw = math.asin(min(rho / max(amod, 1e-15), 1.0)) if amod > 0 else math.pi
    out = np.empty(size, dtype=complex)
    filled = 0
    while filled < size:
        m = max(2 * (size - filled), 1024)
        r = _sample_restricted_radius(beta, s, rng.random(m))
        theta = base + (rng.random(m) * 2.0 - 1.0) * halfw
        z = r * np.exp(1j * theta)
        keep = np.abs(z - center) < rho
        z = z[keep]
        take = min(len(z), size - filled)
        out[filled : filled + take] = z[:take]
        filled += take
    return out


def restricted_sample(
    region: Region, beta: WeightParam, rng: np.random.Generator, size: int,
    quad_tol: float = DEFAULTS.quad_tol,
) -> tuple[np.ndarray, float]:
    """(size, n) points uniform w.r.t. V_beta restricted to the region, plus its exact mass."""
    mass = region_mass(region, beta, quad_tol=quad_tol)
    if isinstance(region, FullPolydisc):
        return sample_polydisc(region.n, beta, rng, size), mass
    if isinstance(region, ProductCorner):
        z = np.empty((size, region.n), dtype=complex)
        for j, (c, rho) in enumerate(zip(region.centers, region.radii)):
            z[:, j] = _sample_corner_coordinate(c, rho, beta, rng, size)
        return z, mass

    n = region.n
    r = np.empty((size, n), dtype=float)
    theta = np.empty((size, n), dtype=float)
    for j in range(n):
        s = region.depths[j]
        r[:, j] = _sample_restricted_radius(beta, s, rng.random(size)) if s < 1.0 else radial_sample(
            beta, rng.random(size)
        )
    window = region.window
    for j in range(n):
        if window is not None and j == window.solve_index:
            continue
        arcs = region.arcs[j]
        theta[:, j] = rng.random(size) * TWO_PI if arcs is None else _sample_multi_arc(arcs, rng, size)
    if window is not None:
        j0 = window.solve_index
        m = window.coeffs[j0]
        target = window.center + (rng.random(size) * 2.0 - 1.0) * window.halfwidth
        rest = sum(window.coeffs[j] * theta[:, j] for j in range(n) if j != j0)
        branch = rng.integers(0, m, size=size)
        theta[:, j0] = ((target - rest) + TWO_PI * branch) / m % TWO_PI
    return r * np.exp(1j * theta), mass


def region_contains(region: Region, z: np.ndarray) -> np.ndarray:
    """Vectorized membership test for points of D^n (boolean array of length N)."""
    z = np.asarray(z, dtype=complex)
    if isinstance(region, FullPolydisc):
        return np.ones(z.shape[0], dtype=bool)
    if isinstance(region, ProductCorner):
        ok = np.ones(z.shape[0], dtype=bool)
        for j, (c, rho) in enumerate(zip(region.centers, region.radii)):
            ok &= np.abs(z[:, j] - c) < rho
        return ok
    ok = np.ones(z.shape[0], dtype=bool)
    r = np.abs(z)
    theta = np.angle(z) % TWO_PI
    for j in range(region.n):
        s = region.depths[j]
        if s < 1.0:
            ok &= r[:, j] >= 1.0 - s
        arcs = region.arcs[j]
        if arcs is not None:
            in_arc = np.zeros(z.shape[0], dtype=bool)
            for start, length in arcs:
                in_arc |= (theta[:, j] - start) % TWO_PI <= length
            ok &= in_arc
    if region.window is not None:
        w = region.window
        phase = sum(w.coeffs[j] * theta[:, j] for j in range(region.n))
        dev = (phase - w.center + math.pi) % TWO_PI - math.pi
        ok &= np.abs(dev) <= w.halfwidth
    return ok
