"""Torus contact sets, numerical rank, and boundary-derivative checks.

A contact set collects the points of T^n where selected components of a
certified self-map attain unit modulus.  Detection screens a dense angle grid
(min over selected component moduli within a coarse margin of 1) and then
drives candidates onto the contact locus with a damped Newton ascent on the
smooth objective sum_i |Phi_i|^2.  Whether the refined set is a finite point
list or a sampled positive-dimensional locus is decided by the fraction of
accepted grid cells.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .config import DEFAULTS, LabConfig, contact_grid_res
from .symbols import MonomialTable, PolySymbol, TorusPoint, _eval_table

TWO_PI = 2.0 * math.pi


class ContactRequired(ValueError):
    """Raised when an operation needs a torus contact point and was given none."""


@dataclass(frozen=True)
class ContactSet:
    symbol: PolySymbol
    index_set: tuple[int, ...]
    kind: str  # "empty" | "finite" | "positive_dimensional"
    points: tuple[TorusPoint, ...]
    residuals: tuple[float, ...]
    grid_res: int
    accepted_fraction: float
    contact_tol: float
    merge_radius: float

    @property
    def is_empty(self) -> bool:
        return self.kind == "empty"

    def to_csv_rows(self) -> tuple[list[str], list[list]]:
        n = self.symbol.n_in
        header = [f"theta_{j + 1}" for j in range(n)] + ["residual", "kind"]
        rows = [
            [*pt.angles, res, self.kind]
            for pt, res in zip(self.points, self.residuals)
        ]
        return header, rows


@dataclass(frozen=True)
class RankInfo:
    rank: int
    singular_values: tuple[float, ...]
    inconclusive: bool


@dataclass(frozen=True)
class RankReport:
    point: TorusPoint
    singular_values: tuple[float, ...]
    rank: int
    target: int
    passed: bool
    inconclusive: bool


@dataclass(frozen=True)
class JCReport:
    """Rotated boundary derivatives conj(eta) * zeta_j * df/dz_j(zeta).

    At a torus contact point of a holomorphic self-map these are real and
    nonnegative; a violation beyond jc_tol indicates a numerical bug or a map
    that is not actually a self-map.
    """

    values: tuple[complex, ...]
    passed: bool
    max_imag: float
    min_real: float


@dataclass(frozen=True)
class SliceReport:
    passed: bool
    max_deviation: float
    gradient: tuple[complex, ...]


# ---------------------------------------------------------------------------
# grid screening
# ---------------------------------------------------------------------------


@lru_cache(maxsize=6)
def _modulus_grid(table: MonomialTable, n: int, res: int) -> np.ndarray:
    """|polynomial| over the res^n torus grid, float32, flat C order."""
    theta = TWO_PI * np.arange(res) / res
    ring = np.exp(1j * theta)
    if n == 1:
        vals = _eval_table(table, ring[:, None], {})
        return np.abs(vals).astype(np.float32)
    out = np.empty(res**n, dtype=np.float32)
    block = res ** (n - 1)
    tail = np.meshgrid(*([ring] * (n - 1)), indexing="ij")
    tail_flat = np.stack([g.reshape(-1) for g in tail], axis=1)
    z = np.empty((block, n), dtype=complex)
    z[:, 1:] = tail_flat
    for i0 in range(res):
        z[:, 0] = ring[i0]
        vals = _eval_table(table, z, {})
        out[i0 * block : (i0 + 1) * block] = np.abs(vals)
    return out


def _grid_angles(idx: np.ndarray, n: int, res: int) -> np.ndarray:
    coords = np.stack(np.unravel_index(idx, (res,) * n), axis=1)
    return coords * (TWO_PI / res)


# ---------------------------------------------------------------------------
# Newton refinement on the torus
# ---------------------------------------------------------------------------


def _refine(sym: PolySymbol, index_set: tuple[int, ...], theta: np.ndarray,
            contact_tol: float, max_iter: int = 30) -> tuple[np.ndarray, np.ndarray]:
    """Damped Newton ascent of F(theta) = sum_i |Phi_i(e^{i theta})|^2.

    Returns refined angles and residuals 1 - min_i |Phi_i|.  Stationary
    directions (flat contact loci) are handled through the pseudo-inverse.
    """
    n = sym.n_in
    comps = [sym.components[i] for i in index_set]
    d1 = [[sym.derivative_table(i, j) for j in range(n)] for i in index_set]
    d2 = [[[sym.second_derivative_table(i, j, k) for k in range(n)] for j in range(n)]
          for i in index_set]

    def moduli_residual(th):
        z = np.exp(1j * th)
        cache: dict = {}
        mods = [np.abs(_eval_table(t, z, cache)) for t in comps]
        return 1.0 - np.minimum.reduce(mods)

    def f_g_h(th):
        z = np.exp(1j * th)
        cache: dict = {}
        B = th.shape[0]
        F = np.zeros(B)
        g = np.zeros((B, n))
        H = np.zeros((B, n, n))
        for ci, i in enumerate(index_set):
            phi = _eval_table(comps[ci], z, cache)
            dphi = [_eval_table(d1[ci][j], z, cache) for j in range(n)]
            w = [1j * z[:, j] * dphi[j] for j in range(n)]
            F += np.abs(phi) ** 2
            conj_phi = np.conj(phi)
            for j in range(n):
                g[:, j] += 2.0 * np.real(conj_phi * w[j])
            for j in range(n):
                for k in range(j, n):
                    d2phi = _eval_table(d2[ci][j][k], z, cache)
                    dw = -z[:, j] * z[:, k] * d2phi
                    if j == k:
                        dw = dw - z[:, j] * dphi[j]
                    val = 2.0 * np.real(np.conj(w[k]) * w[j] + conj_phi * dw)
                    H[:, j, k] += val
                    if k != j:
                        H[:, k, j] += val
        return F, g, H

    th = theta.copy()
    for _ in range(max_iter):
        F, g, H = f_g_h(th)
        gnorm = np.linalg.norm(g, axis=1)
        active = gnorm > 1e-13
        if not np.any(active):
            break
        step = np.zeros_like(th)
        Ha = H[active]
        ga = g[active]
        try:
            sa = -np.linalg.solve(Ha, ga[..., None])[..., 0]
        except np.linalg.LinAlgError:
            sa = -np.einsum("bij,bj->bi", np.linalg.pinv(Ha), ga)
        bad = ~np.isfinite(sa).all(axis=1)
        if np.any(bad):
            sa[bad] = -np.einsum("bij,bj->bi", np.linalg.pinv(Ha[bad]), ga[bad])
        step[active] = sa
        # clip absurd steps, then damp until F does not decrease
        norms = np.linalg.norm(step, axis=1, keepdims=True)
        step = np.where(norms > 0.5, step * (0.5 / np.maximum(norms, 1e-300)), step)
        improved = np.zeros(th.shape[0], dtype=bool)
        trial = th.copy()
        for t in (1.0, 0.5, 0.25, 0.125):
            cand = th + t * step
            Fc = f_g_h(cand)[0]
            take = (~improved) & (Fc >= F - 1e-15)
            trial[take] = cand[take]
            improved |= take
        th = trial
        if np.max(gnorm) < 1e-12:
            break
    return th % TWO_PI, moduli_residual(th)


def _dedupe(theta: np.ndarray, residuals: np.ndarray, merge_radius: float) -> tuple[np.ndarray, np.ndarray]:
    """Greedy clustering in the wrap-around sup metric; keeps the best residual."""
    order = np.lexsort(theta.T[::-1])
    reps: list[int] = []
    for idx in order:
        if reps:
            d = np.abs((theta[idx] - theta[reps] + math.pi) % TWO_PI - math.pi)
            close = np.flatnonzero(np.max(d, axis=1) < merge_radius)
            if close.size:
                r_pos = int(close[0])
                if residuals[idx] < residuals[reps[r_pos]]:
                    reps[r_pos] = idx
                continue
        reps.append(idx)
    reps_arr = np.array(reps, dtype=int)
    final_order = np.lexsort(theta[reps_arr].T[::-1])
    reps_arr = reps_arr[final_order]
    return theta[reps_arr], residuals[reps_arr]


def find_contact_set(
    sym: PolySymbol,
    index_set,
    grid_res: int | None = None,
    config: LabConfig = DEFAULTS,
) -> ContactSet:
    """Detect {zeta in T^n : |Phi_i(zeta)| = 1 for i in index_set}.

    Components that are single monomials impose either no constraint (unit
    coefficient modulus: the full torus) or an impossible one, so they are
    resolved structurally before any grid work.
    """
    sym.require_certificate()
    index_set = tuple(sorted(int(i) for i in index_set))
    if not index_set:
        raise ValueError("index set must be nonempty")
    for i in index_set:
        if not 0 <= i < sym.n_out:
            raise ValueError(f"component index {i} out of range")
    n = sym.n_in
    res = grid_res if grid_res is not None else contact_grid_res(n)

    def _result(kind, pts, res_vals, frac):
        return ContactSet(
            symbol=sym, index_set=index_set, kind=kind,
            points=tuple(TorusPoint(tuple(p)) for p in pts),
            residuals=tuple(float(r) for r in res_vals),
            grid_res=res, accepted_fraction=float(frac),
            contact_tol=config.contact_tol, merge_radius=config.merge_radius,
        )

    # structural shortcut for monomial components
    grid_components: list[int] = []
    for i in index_set:
        mono = sym.monomial_structure(i)
        if mono is None:
            grid_components.append(i)
            continue
        c, _alpha = mono
        if abs(abs(c) - 1.0) <= config.contact_tol:
            continue  # unit modulus everywhere on T^n: no constraint
        return _result("empty", [], [], 0.0)
    zero_components = [i for i in index_set if not sym.components[i]]
    if zero_components:
        return _result("empty", [], [], 0.0)

    if not grid_components:
        # whole torus; deterministic coarse sample grid
        side = max(2, int(round(config.posdim_sample_cap ** (1.0 / n))))
        theta = TWO_PI * np.arange(side) / side
        grids = np.meshgrid(*([theta] * n), indexing="ij")
        pts = np.stack([g.reshape(-1) for g in grids], axis=1)
        return _result("positive_dimensional", pts, np.zeros(len(pts)), 1.0)

    mods = [_modulus_grid(sym.components[i], n, res) for i in grid_components]
    m = mods[0] if len(mods) == 1 else np.minimum.reduce(mods)
    candidates = np.flatnonzero(m >= 1.0 - config.coarse_margin)
    total_cells = res**n
    frac_coarse = len(candidates) / total_cells
    if len(candidates) == 0:
        return _result("empty", [], [], 0.0)

    stride = max(1, math.ceil(len(candidates) / config.posdim_sample_cap))
    seeds = candidates[::stride]
    theta0 = _grid_angles(seeds, n, res)
    theta, residual = _refine(sym, tuple(grid_components), theta0, config.contact_tol)
    accepted = residual <= config.contact_tol
    acc_rate = float(np.mean(accepted)) if len(accepted) else 0.0
    frac = frac_coarse * acc_rate
    if not np.any(accepted):
        return _result("empty", [], [], frac)

    theta_a = theta[accepted]
    res_a = residual[accepted]
    if frac > config.manifold_frac:
        order = np.lexsort(theta_a.T[::-1])
        return _result("positive_dimensional", theta_a[order], res_a[order], frac)

    pts, resid = _dedupe(theta_a, res_a, config.merge_radius)
    if len(pts) > config.finite_cap:
        # a thin curve sampled densely looks like very many separated points;
        # the cell fraction missed it, the point count does not
        return _result("positive_dimensional", pts, resid, frac)
    h = TWO_PI / res
    if len(pts) <= 64:
        for a, b in itertools.combinations(range(len(pts)), 2):
            d = np.abs((pts[a] - pts[b] + math.pi) % TWO_PI - math.pi)
            if np.max(d) < 2.0 * h:
                warnings.warn(
                    f"grid resolution {res} may be too small to separate contact points "
                    f"{pts[a]} and {pts[b]}",
                    stacklevel=2,
                )
                break
    return _result("finite", pts, resid, frac)


# ---------------------------------------------------------------------------
# rank analysis
# ---------------------------------------------------------------------------


def numerical_rank(matrix: np.ndarray, rank_tol: float = DEFAULTS.rank_tol,
                   rank_band: float = DEFAULTS.rank_band) -> RankInfo:
    """Rank by singular values: sigma_k counts iff sigma_k > rank_tol * sigma_1.

    Singular values falling in the open band (rank_tol, rank_band) * sigma_1
    are an honest gray zone and set the inconclusive flag instead of being
    silently tie-broken.
    """
    matrix = np.asarray(matrix, dtype=complex)
    sv = np.linalg.svd(matrix, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return RankInfo(rank=0, singular_values=tuple(float(s) for s in sv), inconclusive=False)
    rel = sv / sv[0]
    rank = int(np.sum(rel > rank_tol))
    inconclusive = bool(np.any((rel > rank_tol) & (rel < rank_band)))
    return RankInfo(rank=rank, singular_values=tuple(float(s) for s in sv), inconclusive=inconclusive)


def rank_report(sym: PolySymbol, index_set: tuple[int, ...], point: TorusPoint,
                config: LabConfig = DEFAULTS) -> RankReport:
    """Rank of the Jacobian block d_zeta Phi_I against the target |I|."""
    J = sym.jacobian(point.point())
    block = J[list(index_set), :]
    info = numerical_rank(block, config.rank_tol, config.rank_band)
    target = len(index_set)
    return RankReport(
        point=point,
        singular_values=info.singular_values,
        rank=info.rank,
        target=target,
        passed=(info.rank == target and not info.inconclusive),
        inconclusive=info.inconclusive,
    )


# ---------------------------------------------------------------------------
# boundary derivative and slice checks
# ---------------------------------------------------------------------------


def jc_check(f: PolySymbol, zeta: TorusPoint, eta: complex,
             config: LabConfig = DEFAULTS) -> JCReport:
    """Check that conj(eta) * zeta_j * df/dz_j(zeta) is real and >= -jc_tol for all j."""
    if f.n_out != 1:
        raise ValueError("jc_check needs a scalar symbol")
    z = zeta.point()
    val = f.evaluate(z)[0]
    if abs(val - eta) > max(config.contact_tol, 1e-12) * 10.0:
        raise ContactRequired(
            f"point is not a contact point for target {eta}: |f(zeta) - eta| = {abs(val - eta):.3e}"
        )
    grad = f.jacobian(z)[0]
    rotated = tuple(complex(np.conj(eta) * z[j] * grad[j]) for j in range(f.n_in))
    max_imag = max(abs(v.imag) for v in rotated)
    min_real = min(v.real for v in rotated)
    passed = max_imag <= config.jc_tol and min_real >= -config.jc_tol
    return JCReport(values=rotated, passed=passed, max_imag=max_imag, min_real=min_real)


def slice_gradient_constancy(
    psi: PolySymbol,
    m: int,
    zeta_tail: TorusPoint,
    z0,
    config: LabConfig = DEFAULTS,
    n_samples: int = 100,
    seed: int = 0,
) -> SliceReport:
    """Verify that z -> grad psi(z, zeta'') is constant over the interior slice D^m.

    The precondition is unit modulus at (z0, zeta''); the conclusion justifies
    checking rank conditions on the torus only, since gradients propagate
    unchanged from the distinguished boundary into mixed boundary faces.
    """
    if psi.n_out != 1:
        raise ValueError("slice check needs a scalar symbol")
    n = psi.n_in
    if not 1 <= m < n:
        raise ValueError("split must satisfy 1 <= m < n")
    if zeta_tail.n != n - m:
        raise ValueError("tail point dimension mismatch")
    z0 = np.asarray(z0, dtype=complex)
    if z0.shape != (m,):
        raise ValueError("interior point dimension mismatch")
    tail = zeta_tail.point()
    base = np.concatenate([z0, tail])
    val = psi.evaluate(base)[0]
    if abs(abs(val) - 1.0) > config.contact_tol:
        raise ContactRequired(
            f"|psi(z0, zeta'')| = {abs(val):.12f} is not within contact_tol of 1"
        )
    ref_grad = psi.jacobian(base)[0]
    rng = np.random.default_rng(seed)
    r = np.sqrt(rng.random((n_samples, m)))
    ang = rng.random((n_samples, m)) * TWO_PI
    heads = r * np.exp(1j * ang)
    pts = np.concatenate([heads, np.tile(tail, (n_samples, 1))], axis=1)
    grads = psi.jacobian_batch(pts)[:, 0, :]
    max_dev = float(np.max(np.abs(grads - ref_grad)))
    return SliceReport(
        passed=max_dev <= config.slice_tol,
        max_deviation=max_dev,
        gradient=tuple(complex(g) for g in ref_grad),
    )
