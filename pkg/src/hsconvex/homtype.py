"""Quasimetric structure of the boundary: quasiballs, measure, maximal function.

The boundary with the quasimetric d(w, z) = |<d rho(w), w - z>| and surface
measure is a space of homogeneous type: quasiballs of radius delta have
measure comparable to delta^n.  This module builds quadrature grids on level
surfaces, verifies the homogeneity numerically, checks the two comparison
estimates relating d to the defining function on the shell, and computes the
Hardy-Littlewood maximal function over centred quasiballs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import exterior
from .domain import pairing, project_boundary
from .sphere import angular_mesh, random_angular_mesh, surface_nodes

__all__ = [
    "BoundaryGrid",
    "build_boundary_grid",
    "qdist",
    "grid_qdist",
    "quasiball",
    "check_homogeneous",
    "qm_exterior_check",
    "maximal_function",
    "maximal_function_brute",
]


@dataclass(frozen=True)
class BoundaryGrid:
    """Quadrature grid on a level surface rho = t.

    ``w_sigma`` are surface-measure weights, ``w_S`` the Leray-Levy weights
    (density times w_sigma; the two measures are equivalent, so both weight
    vectors are strictly positive).  ``grad`` and ``pair_self`` cache the
    holomorphic gradient and <d rho(w), w> per node, which makes quasimetric
    distance fields a single matrix product.
    """

    domain: object
    level: float
    nodes: np.ndarray      # (N, n)
    grad: np.ndarray       # (N, n)
    w_sigma: np.ndarray    # (N,)
    w_S: np.ndarray        # (N,)
    density: np.ndarray    # (N,)
    pair_self: np.ndarray  # (N,)
    resolution: tuple

    @property
    def size(self):
        return self.nodes.shape[0]

    @property
    def sigma_total(self):
        return float(self.w_sigma.sum())

    @property
    def quasi_spacing(self):
        """Radius at which a quasiball holds about one node on average."""
        return float(np.sqrt(self.sigma_total / self.size))

    def diameter(self, sample=256, seed=0):
        rng = np.random.default_rng(seed)
        idx = rng.choice(self.size, size=min(sample, self.size), replace=False)
        d = np.abs(self.pair_self[idx, None]
                   - self.grad[idx] @ self.nodes.T)
        return float(d.max())


def build_boundary_grid(domain, t=0.0, resolution=10000, kind="product",
                        seed=0, mesh=None):
    """Grid on rho = t; ``resolution`` is a node-count target or an angle triple.

    ``kind="product"`` gives the Gauss-Legendre/trapezoid mesh (high order for
    smooth integrands); ``kind="random"`` gives seeded Monte Carlo nodes whose
    quasiball measures are unbiased, for homogeneity and maximal-function
    statistics.
    """
    if mesh is None:
        if kind == "product":
            mesh = angular_mesh(resolution)
        elif kind == "random":
            n = resolution if np.isscalar(resolution) else int(np.prod(resolution))
            mesh = random_angular_mesh(n, seed=seed)
        else:
            raise ValueError(f"unknown grid kind {kind!r}")
    nodes, w_sigma, g = surface_nodes(domain, mesh, t)
    density = exterior.grid_leray_density(domain, nodes, g)
    if np.any(density <= 0):
        raise ValueError("non-positive Leray density; orientation broken")
    w_s = density * w_sigma
    return BoundaryGrid(domain=domain, level=float(t), nodes=nodes, grad=g,
                        w_sigma=w_sigma, w_S=w_s, density=density,
                        pair_self=pairing(g, nodes), resolution=mesh.resolution)


def qdist(domain, w, z):
    """Quasimetric d(w, z) = |<d rho(w), w - z>| (not symmetric)."""
    w = np.asarray(w, dtype=complex)
    z = np.asarray(z, dtype=complex)
    g = np.asarray(domain.grad(w))
    return np.abs(pairing(g, w - z))


def grid_qdist(grid, z):
    """Distances d(w_i, z) from every grid node; z may be a batch (..., n)."""
    z = np.asarray(z, dtype=complex)
    if z.ndim == 1:
        return np.abs(grid.pair_self - grid.grad @ z)
    return np.abs(grid.pair_self[None, :] - z @ grid.grad.T)


def quasiball(grid, z, delta):
    """Node subset {w : d(w, z) < delta} and its surface measure."""
    if delta <= 0:
        return np.zeros(grid.size, dtype=bool), 0.0
    mask = grid_qdist(grid, z) < delta
    return mask, float(grid.w_sigma[mask].sum())


def check_homogeneous(grid, deltas=None, n_centers=50, n_triples=4000, seed=0):
    """Fit the measure-scaling exponent and sample the quasi-triangle constant.

    Returns a dict with ``fitted_dimension`` (mean least-squares slope of
    log sigma(B(z, delta)) against log delta over random centers) and
    ``quasi_triangle_constant`` (max of d(x,z)/(d(x,y)+d(y,z)) over sampled
    triples of nodes).
    """
    rng = np.random.default_rng(seed)
    diam = grid.diameter(seed=seed)
    if deltas is None:
        deltas = diam * np.array([0.025, 0.05, 0.1, 0.2])
    deltas = np.asarray(deltas, dtype=float)
    if deltas.size < 3:
        raise ValueError("need >= 3 radii to fit a scaling exponent")

    centers = rng.choice(grid.size, size=min(n_centers, grid.size),
                         replace=False)
    slopes = []
    for ci in centers:
        d = grid_qdist(grid, grid.nodes[ci])
        meas = np.array([grid.w_sigma[d < r].sum() for r in deltas])
        if np.any(meas <= 0):
            continue
        slope = np.polyfit(np.log(deltas), np.log(meas), 1)[0]
        slopes.append(slope)
    if not slopes:
        raise ValueError("all sampled quasiballs were empty; grid too coarse")

    xi = rng.choice(grid.size, size=(n_triples, 3))
    ok = (xi[:, 0] != xi[:, 1]) & (xi[:, 1] != xi[:, 2])
    xi = xi[ok]
    x, y, z = (grid.nodes[xi[:, 0]], grid.nodes[xi[:, 1]], grid.nodes[xi[:, 2]])
    gx = grid.grad[xi[:, 0]]
    gy = grid.grad[xi[:, 1]]
    dxz = np.abs(pairing(gx, x - z))
    dxy = np.abs(pairing(gx, x - y))
    dyz = np.abs(pairing(gy, y - z))
    denom = dxy + dyz
    keep = denom > 1e-14
    ratios = dxz[keep] / denom[keep]
    return {
        "fitted_dimension": float(np.mean(slopes)),
        "dimension_std": float(np.std(slopes)),
        "quasi_triangle_constant": float(ratios.max()),
        "deltas": deltas.tolist(),
        "n_centers": int(len(slopes)),
    }


def _percentile_range(r):
    return {
        "lo": float(np.percentile(r, 0.5)),
        "hi": float(np.percentile(r, 99.5)),
        "min": float(r.min()),
        "max": float(r.max()),
        "n": int(r.size),
    }


def qm_exterior_check(domain, w_exterior=None, z_boundary=None,
                      tau=None, tau_center=None, w2=None):
    """Empirical ratio ranges for the two shell comparison estimates.

    First estimate: d(w, z) against rho(w) + d(pr(w), z) for exterior w and
    boundary z.  Second: d(tau, w) against rho(tau) + d(z, w) for tau in an
    external approach region with apex z.  Ranges are reported as the
    [0.5, 99.5] percentile envelope plus full min/max.
    """
    report = {}
    if w_exterior is not None:
        w = np.asarray(w_exterior, dtype=complex)
        z = np.asarray(z_boundary, dtype=complex)
        num = qdist(domain, w, z)
        pr = project_boundary(domain, w, 0.0)
        den = np.asarray(domain.rho(w)) + qdist(domain, pr, z)
        ratios = num / den
        report["shell_comparison"] = _percentile_range(ratios)
    if tau is not None:
        tau = np.asarray(tau, dtype=complex)
        zc = np.asarray(tau_center, dtype=complex)
        w2 = np.asarray(w2, dtype=complex)
        num = qdist(domain, tau, w2)
        den = np.asarray(domain.rho(tau)) + qdist(domain, zc, w2)
        ratios = num / den
        report["region_comparison"] = _percentile_range(ratios)
    return report


@dataclass(frozen=True)
class CenterSet:
    """Weighted boundary points for outer integrals (stratified quadrature)."""

    nodes: np.ndarray
    w_sigma: np.ndarray

    @property
    def size(self):
        return self.nodes.shape[0]


def stratified_centers(grid, pole=None, n_bulk=24, n_per_annulus=3,
                       n_annuli=8, seed=0):
    """Centers stratified in quasimetric annuli around a boundary pole.

    Outer integrals of fields that blow up toward one boundary point need
    centers that resolve every dyadic distance scale; uniform random centers
    almost surely miss the near zone.  Weights are the annulus measures split
    over their samples, so sums against them estimate the surface integral.
    Strata are seeded independently, so deepening the ladder only adds inner
    annuli and leaves shared strata (including the bulk) identical; ratio
    tests across refinement stages then see the added strata, not redraw
    noise.
    """
    if pole is None:
        pole = np.zeros(grid.nodes.shape[1], dtype=complex)
        pole[0] = 1.0
    d = grid_qdist(grid, np.asarray(pole, dtype=complex))
    d_top = 0.5 * grid.diameter()
    nodes, weights = [], []
    edges = d_top * 2.0 ** (-np.arange(n_annuli + 1, dtype=float))
    for i in range(n_annuli):
        hi, lo = edges[i], edges[i + 1]
        mask = (d >= lo) & (d < hi)
        cnt = int(mask.sum())
        if cnt == 0:
            continue
        take = min(n_per_annulus, cnt)
        rng_i = np.random.default_rng([seed, i])
        idx = rng_i.choice(np.nonzero(mask)[0], size=take, replace=False)
        w = float(grid.w_sigma[mask].sum()) / take
        nodes.append(grid.nodes[idx])
        weights.append(np.full(take, w))
    # the disk inside the last annulus is omitted: the estimator measures
    # the integral truncated at the ladder depth, which is the monotone
    # refinement object the finite/infinite verdicts compare
    bulk = d >= d_top
    if np.any(bulk):
        take = min(n_bulk, int(bulk.sum()))
        rng_b = np.random.default_rng([seed, 10 ** 6])
        idx = rng_b.choice(np.nonzero(bulk)[0], size=take, replace=False)
        w = float(grid.w_sigma[bulk].sum()) / take
        nodes.append(grid.nodes[idx])
        weights.append(np.full(take, w))
    return CenterSet(nodes=np.concatenate(nodes),
                     w_sigma=np.concatenate(weights))


def _radius_ladder(grid, n_levels=12):
    diam = grid.diameter()
    return diam * 2.0 ** (-np.arange(n_levels, dtype=float))


def maximal_function(grid, a, n_levels=12, chunk=256):
    """Centred quasiball maximal function over a dyadic radius ladder.

    Ma(z) = sup over radii of the sigma-average of |a| over B(z, r); the
    degenerate radius (the node itself) is always included, so Ma >= |a|.
    """
    a = np.abs(np.asarray(a, dtype=float))
    if a.shape != (grid.size,):
        raise ValueError("field must be per-node")
    radii = _radius_ladder(grid, n_levels)
    aw = a * grid.w_sigma
    out = a.copy()
    for start in range(0, grid.size, chunk):
        sl = slice(start, min(start + chunk, grid.size))
        d = grid_qdist(grid, grid.nodes[sl])         # (C, N)
        for r in radii:
            mask = d < r
            num = mask @ aw
            den = mask @ grid.w_sigma
            avg = np.where(den > 0, num / np.maximum(den, 1e-300), 0.0)
            out[sl] = np.maximum(out[sl], avg)
    return out


def maximal_function_brute(grid, a, chunk=64):
    """Exact discrete sup over all radii (oracle for the dyadic ladder)."""
    a = np.abs(np.asarray(a, dtype=float))
    aw = a * grid.w_sigma
    out = np.empty(grid.size)
    for start in range(0, grid.size, chunk):
        sl = slice(start, min(start + chunk, grid.size))
        d = grid_qdist(grid, grid.nodes[sl])
        order = np.argsort(d, axis=1)
        num = np.cumsum(np.take_along_axis(
            np.broadcast_to(aw, d.shape), order, axis=1), axis=1)
        den = np.cumsum(np.take_along_axis(
            np.broadcast_to(grid.w_sigma, d.shape), order, axis=1), axis=1)
        out[sl] = (num / den).max(axis=1)
    return out
