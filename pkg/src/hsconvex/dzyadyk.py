"""Polynomial approximation of the reproducing kernel.

For a fixed boundary point the kernel is a power of 1/(1 - lambda), where
lambda is the gradient pairing normalized by its value at the point itself.
As z ranges over the closed domain, lambda stays inside a lune: the region cut
from the disk |lambda| <= R by the chord through 1 at angle t, where t is
determined by the argument of the self-pairing.  A degree-j polynomial
T_j(t, .) approximating 1/(1 - lambda) with weighted error

    |1/(1-lambda) - T_j| <= C1 j^(-r) |1-lambda|^(-(1+r))

away from the 1/j-neighborhood of 1, and |T_j| <= C2 j on that neighborhood,
yields a kernel approximant of degree jn in z with the far/near estimates
needed by the dyadic approximation machinery.  Existence is classical; here
the approximants are realized by weighted least squares on a boundary mesh of
the lune (optionally sharpened by Lawson reweighting toward the minimax fit)
and every instance carries measured certificate constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .domain import pairing
from .sphere import random_angular_mesh, surface_nodes
from .domain import radial_level, random_unit_directions

__all__ = [
    "Lune",
    "CauchyApproximant",
    "KernelApproximant",
    "lune_of",
    "lune_radius",
    "build_T",
    "build_T_blend",
    "build_Kglob",
    "validate_Kglob",
    "T_QUANT_STEP",
]

T_QUANT_STEP = np.pi / 64.0


@dataclass(frozen=True)
class Lune:
    """Region bounded by the bigger arc of |lambda| = R and a chord through 1.

    The chord has direction e^{it}; the lune is the side containing 0, which
    requires sin(t) > 0.  Membership is closed up to ``tol``.
    """

    t: float
    R: float

    def side(self, lam):
        """Signed distance to the chord line; negative inside the lune."""
        lam = np.asarray(lam, dtype=complex)
        return np.real((lam - 1.0) * np.exp(1j * (0.5 * np.pi - self.t)))

    def contains(self, lam, tol=1e-9):
        lam = np.asarray(lam, dtype=complex)
        return (np.abs(lam) <= self.R + tol) & (self.side(lam) <= tol)

    def chord_span(self):
        """Chord parameters s with 1 + s e^{it} on the circle |lambda| = R."""
        c = math.cos(self.t)
        disc = math.sqrt(c * c + self.R ** 2 - 1.0)
        return (-c - disc, -c + disc)


def lune_radius(domain, eps=None, n_xi=400, n_z=400, seed=3, margin=1.05):
    """R = sup |lambda(xi, z)| over shell points xi and interior z, + margin."""
    eps = domain.eps_shell if eps is None else float(eps)
    rng = np.random.default_rng(seed)
    dirs = random_unit_directions(rng, n_xi, domain.n)
    ts = rng.uniform(1e-4 * eps, eps, size=n_xi)
    r = radial_level(domain, dirs, ts)
    xi = r[:, None] * dirs
    g = np.asarray(domain.grad(xi))
    c = pairing(g, xi)
    zdirs = random_unit_directions(rng, n_z, domain.n)
    rz = radial_level(domain, zdirs, 0.0)
    z = (rng.uniform(0, 1, n_z) ** (1.0 / (2 * domain.n)))[:, None] * rz[:, None] * zdirs
    lam = (g @ z.T) / c[:, None]
    return float(np.abs(lam).max() * margin)


def lune_of(domain, xi, R=None, eps=None):
    """The lune containing lambda(xi, .) for a shell point xi."""
    xi = np.asarray(xi, dtype=complex)
    g = np.asarray(domain.grad(xi))
    c = complex(pairing(g, xi))
    if abs(c) < 1e-12:
        raise ValueError("self-pairing vanished; the origin must be interior")
    t = 0.5 * np.pi - np.angle(c)
    if R is None:
        R = lune_radius(domain, eps)
    if not 0.0 < t < np.pi:
        raise ValueError(f"chord angle t={t:.3f} outside (0, pi); "
                         "domain geometry violates the interior-origin bound")
    return Lune(t=float(t), R=float(R))


# ---------------------------------------------------------------------------
# the one-variable approximant
# ---------------------------------------------------------------------------

@dataclass
class CauchyApproximant:
    """Degree-j polynomial fit of 1/(1 - lambda) on a lune.

    Coefficients are stored against the scaled basis (lambda / scale)^m for
    conditioning; ``cert`` records the measured constants C1 (weighted error
    away from 1) and C2 (max of |T|/j near 1) plus fit diagnostics.
    """

    j: int
    t: float
    r: float
    coeffs: np.ndarray
    scale: float
    cert: dict = field(default_factory=dict)

    def __call__(self, lam):
        lam = np.asarray(lam, dtype=complex)
        return np.polynomial.polynomial.polyval(lam / self.scale, self.coeffs)

    def lambda_coeffs(self):
        """Coefficients against plain powers of lambda."""
        m = np.arange(self.coeffs.size)
        return self.coeffs / self.scale ** m


def _lune_boundary_mesh(lune, j, n_arc=200, n_chord=160, n_inner=80):
    """Mesh of the boundary of (lune minus the 1/j-disk about 1).

    Pieces: the bigger arc of |lambda| = R, the chord with geometric grading
    toward 1 (excluding |1-lambda| < 1/j), and the inner circular arc
    |1-lambda| = 1/j inside the lune.
    """
    R, t = lune.R, lune.t
    cut = 1.0 / j
    phis = 2.0 * np.pi * (np.arange(n_arc) + 0.5) / n_arc
    arc = R * np.exp(1j * phis)
    arc = arc[(lune.side(arc) <= 1e-12) & (np.abs(1.0 - arc) >= cut)]

    s_lo, s_hi = lune.chord_span()
    pieces = []
    for s_end in (s_lo, s_hi):
        a = abs(s_end)
        if a <= cut:
            continue
        g = np.geomspace(cut, a, n_chord // 2)
        pieces.append(np.sign(s_end) * g)
    svals = np.concatenate(pieces) if pieces else np.array([])
    chord = 1.0 + np.exp(1j * t) * svals

    thetas = t + np.pi * (np.arange(n_inner) + 0.5) / n_inner
    inner = 1.0 + cut * np.exp(1j * thetas)
    inner = inner[np.abs(inner) <= R + 1e-12]
    return np.concatenate([arc, chord, inner])


def build_T(j, t, r, lune=None, R=1.05, n_lawson=80, cond_limit=1e12,
            moment_exact=None):
    """Weighted least-squares realization of the Dzyadyk approximant.

    The fit minimizes the residual against 1/(1 - lambda) times the target
    weight j^r |1 - lambda|^(1+r) on the boundary mesh; Lawson reweighting
    pushes the weighted error toward equioscillation so the measured C1 stays
    flat in j.  Certificates are suprema over the mesh (the weighted error is
    log-subharmonic, so boundary suprema control the region).

    ``moment_exact = q`` pins the Taylor coefficients at the origin to the
    geometric series through order q (the polynomial-projection pipeline
    needs exact low moments); the remaining degrees of freedom fit the
    weighted residual of the tail.
    """
    if j < 1:
        raise ValueError("degree must be at least 1")
    if lune is None:
        lune = Lune(t=float(t), R=float(R))
    mesh = _lune_boundary_mesh(lune, j)
    target = 1.0 / (1.0 - mesh)
    w = float(j) ** r * np.abs(1.0 - mesh) ** (1.0 + r)

    scale = lune.R
    deg = int(j)
    q = -1 if moment_exact is None else min(int(moment_exact), deg)
    fixed = np.zeros(mesh.size, dtype=complex)
    if q >= 0:
        # pinned head: sum_{m<=q} lambda^m, absorbed into the target
        head = np.polynomial.polynomial.polyval(
            mesh, np.ones(q + 1)).astype(complex)
        fixed = head
    free_lo = q + 1

    flagged = False
    while True:
        V = np.vander(mesh / scale, deg + 1, increasing=True)[:, free_lo:]
        if V.shape[1] == 0:
            break
        sv = np.linalg.svd(V * w[:, None], compute_uv=False)
        cond = sv[0] / max(sv[-1], 1e-300)
        if cond <= cond_limit or deg <= max(2, free_lo):
            break
        deg = max(max(2, free_lo), int(deg * 0.9))
        flagged = True

    resid_target = target - fixed
    if deg + 1 - free_lo > 0:
        # Lawson iteration: reweighting the least-squares fit by the weighted
        # residual drives it toward the weighted Chebyshev fit; keep the best.
        lw = np.ones(mesh.size)
        best = None
        stall = 0
        for _ in range(max(1, n_lawson)):
            W = w * lw
            coef_free, *_ = np.linalg.lstsq(V * W[:, None],
                                            resid_target * W, rcond=None)
            err = np.abs(V @ coef_free - resid_target) * w
            c1 = float(err.max())
            if best is None or c1 < best[0] * (1.0 - 1e-6):
                best = (c1, coef_free)
                stall = 0
            else:
                stall += 1
                if stall > 20:
                    break
            lw = lw * np.maximum(err / max(err.max(), 1e-300), 1e-12)
            lw /= max(lw.max(), 1e-300)
        c1, coef_free = best
    else:
        coef_free = np.zeros(0, dtype=complex)
        c1 = float((np.abs(fixed - target) * w).max())

    coef = np.zeros(deg + 1, dtype=complex)
    if q >= 0:
        coef[: q + 1] = scale ** np.arange(q + 1)   # lambda^m in scaled basis
    coef[free_lo:] = coef_free
    approx = CauchyApproximant(j=int(j), t=float(lune.t), r=float(r),
                               coeffs=coef, scale=scale)
    approx.cert = _certify(approx, lune, c1=c1, mesh_size=mesh.size,
                           cond=float(cond) if V.shape[1] else 0.0,
                           flagged=flagged)
    approx.cert["moment_exact"] = q
    return approx


def _certify(approx, lune, c1=None, mesh_size=0, cond=0.0, flagged=False):
    j = approx.j
    cut = 1.0 / j
    if c1 is None:
        mesh = _lune_boundary_mesh(lune, j)
        err = np.abs(approx(mesh) - 1.0 / (1.0 - mesh))
        c1 = float((err * j ** approx.r
                    * np.abs(1.0 - mesh) ** (1.0 + approx.r)).max())
    thetas = approx.t + np.pi * (np.arange(120) + 0.5) / 120
    near = 1.0 + cut * np.exp(1j * thetas)
    near = near[lune.contains(near)]
    svals = np.linspace(-cut, cut, 80)
    chord = 1.0 + np.exp(1j * approx.t) * svals
    chord = chord[np.abs(chord) <= lune.R + 1e-12]
    cap = np.concatenate([near, chord])
    c2 = float(np.abs(approx(cap)).max() / j) if cap.size else 0.0
    return {"C1": float(c1), "C2": c2, "mesh_size": int(mesh_size),
            "cond": cond, "flagged": bool(flagged), "j": int(j),
            "t": float(approx.t), "r": float(approx.r)}


def build_T_blend(j, t, lune, c=0.6):
    """Geometric-series blend, a quick smoke-test approximant.

    phi is a quadratic with phi(1) = 1 mapping the lune (approximately) into
    the unit disk; T = (1 - phi^m)/(1 - lambda) with 2m - 1 <= j.  Returns a
    plain callable plus its measured certificate; rate constants are far worse
    than the least-squares fit, which is the point of keeping it around.
    """
    m = max(1, (j + 1) // 2)
    rot = np.exp(-1j * t)

    def phi(lam):
        zeta = (np.asarray(lam, dtype=complex) - 1.0) * rot
        w = 1j * c * zeta
        return 1.0 + w + 0.5 * w * w

    def T(lam):
        lam = np.asarray(lam, dtype=complex)
        num = 1.0 - phi(lam) ** m
        den = 1.0 - lam
        out = np.where(np.abs(den) < 1e-12, float(m) + 0j, num / den)
        return out

    mesh = _lune_boundary_mesh(lune, j)
    err = np.abs(T(mesh) - 1.0 / (1.0 - mesh))
    r = 1.0
    c1 = float((err * j ** r * np.abs(1.0 - mesh) ** (1.0 + r)).max())
    phimax = float(np.abs(phi(mesh)).max())
    return T, {"C1": c1, "r": r, "phi_max": phimax, "m": m}


# ---------------------------------------------------------------------------
# the assembled kernel approximant
# ---------------------------------------------------------------------------

def _quantize_t(t, step=T_QUANT_STEP):
    return float(np.round(t / step) * step)


def build_T_band(j, t, delta, lune=None, R=1.05, n_lawson=60, r_band=2.0):
    """Distance-weighted fit away from a fixed cut neighborhood of 1.

    For source points at height rho the pairing with domain points stays at
    least a fixed multiple of rho away from 1 (the shell comparison
    estimate), so the kernel restricted to one dyadic height band only needs
    accuracy on the lune minus a disk of radius ``delta`` about 1.  The fit
    keeps the distance weight |1 - lambda|^(1+r) (without the degree factor):
    low degrees then stay uniformly bounded while high degrees converge
    geometrically on the fixed subregion.  The certificate records the
    weighted sup ``eta`` with |err| <= eta |1 - lambda|^-(1+r) on the band.
    """
    if lune is None:
        lune = Lune(t=float(t), R=float(R))
    delta = float(min(max(delta, 1e-8), 1.5))
    jd = max(1.0, 1.0 / delta)
    mesh = _lune_boundary_mesh(lune, jd, n_arc=300, n_chord=200, n_inner=90)
    target = 1.0 / (1.0 - mesh)
    w = np.abs(1.0 - mesh) ** (1.0 + r_band)
    scale = lune.R
    V = np.vander(mesh / scale, int(j) + 1, increasing=True)
    lw = np.ones(mesh.size)
    best = None
    stall = 0
    for _ in range(max(1, n_lawson)):
        W = w * lw
        coef, *_ = np.linalg.lstsq(V * W[:, None], target * W, rcond=None)
        err = np.abs(V @ coef - target) * w
        e = float(err.max())
        if best is None or e < best[0] * (1.0 - 1e-6):
            best = (e, coef)
            stall = 0
        else:
            stall += 1
            if stall > 15:
                break
        lw = lw * np.maximum(err / max(err.max(), 1e-300), 1e-12)
        lw /= max(lw.max(), 1e-300)
    e, coef = best
    approx = CauchyApproximant(j=int(j), t=float(lune.t), r=float(r_band),
                               coeffs=coef, scale=scale)
    approx.cert = {"eta": e, "delta": delta, "mesh_size": int(mesh.size),
                   "j": int(j), "t": float(lune.t), "band": True,
                   "r_band": r_band}
    return approx


_QM_LOWER_CACHE = {}


def qm_lower_constant(domain, eps=None, n=4000, seed=9):
    """Sampled lower bound of d(xi, z) / (rho(xi) |c(xi)|) over shell pairs.

    This is the measured constant of the shell comparison estimate in the
    normalized pairing variable: for xi at height rho, lambda(xi, z) stays at
    least this multiple of rho away from 1.
    """
    key = domain.key()
    if key in _QM_LOWER_CACHE:
        return _QM_LOWER_CACHE[key]
    eps = domain.eps_shell if eps is None else float(eps)
    rng = np.random.default_rng(seed)
    dirs = random_unit_directions(rng, n, domain.n)
    ts = eps * rng.uniform(1e-3, 1.0, n) ** 2
    rr = radial_level(domain, dirs, ts)
    xi = rr[:, None] * dirs
    g = np.asarray(domain.grad(xi))
    c = pairing(g, xi)
    zdirs = random_unit_directions(rng, n, domain.n)
    rz = radial_level(domain, zdirs, 0.0)
    z = rz[:, None] * zdirs
    d = np.abs(pairing(g, xi - z))
    val = float((d / (ts * np.abs(c))).min())
    _QM_LOWER_CACHE[key] = val
    return val


@dataclass
class KernelApproximant:
    """K_k(xi, z) = c(xi)^(-n) T_j(t(xi), lambda)^n with lambda = <g, z>/c.

    As a polynomial in z the degree is at most jn, with jn >= k > (j-1)n.
    Approximants are cached per quantized chord angle (the coefficients vary
    continuously in t, so nearby angles share one fit).

    With ``band_edges`` set (descending heights), source points pick a
    band-adapted uniform fit by their height rho(xi): the pairing stays a
    fixed multiple of rho away from the singular point, so each band's fit
    converges geometrically on its subregion.  The result is still a
    polynomial of degree <= jn in z (the selector depends on xi only).
    """

    domain: object
    k: int
    r: float
    R: float
    j: int = 0
    moment_exact: object = None
    band_edges: object = None        # descending rho edges, or None
    band_delta: float = 0.5
    cache: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.k < self.domain.n:
            raise ValueError("target degree must be at least n")
        self.j = int(math.ceil(self.k / self.domain.n))

    def t_of(self, c_pair):
        return 0.5 * np.pi - np.angle(c_pair)

    def band_of(self, rho):
        """Band index per height; deepest band catches everything below."""
        edges = self.band_edges
        idx = np.searchsorted(-np.asarray(edges), -np.asarray(rho),
                              side="right")
        return np.clip(idx - 1, 0, len(edges) - 1)

    def approximant_for(self, tq, band=None):
        key = (self.j, round(tq / T_QUANT_STEP), band)
        if key not in self.cache:
            lune = Lune(t=tq, R=self.R)
            if band is None:
                self.cache[key] = build_T(self.j, tq, self.r, lune,
                                          moment_exact=self.moment_exact)
            else:
                lo = self.band_edges[min(band + 1, len(self.band_edges) - 1)] \
                    if band + 1 < len(self.band_edges) else 0.5 * self.band_edges[-1]
                delta = self.band_delta * lo
                self.cache[key] = build_T_band(self.j, tq, delta, lune)
        return self.cache[key]

    def eval(self, xi, z, grad_xi=None):
        """Evaluate at shell points xi (M, n) against z (n,) or (Z, n)."""
        xi = np.atleast_2d(np.asarray(xi, dtype=complex))
        g = np.asarray(self.domain.grad(xi)) if grad_xi is None else grad_xi
        c = pairing(g, xi)
        t = self.t_of(c)
        tq = np.round(t / T_QUANT_STEP).astype(int)
        z = np.asarray(z, dtype=complex)
        single = z.ndim == 1
        zz = np.atleast_2d(z)
        lam = (g @ zz.T) / c[:, None]
        out = np.empty_like(lam)
        n = self.domain.n
        if self.band_edges is None:
            bands = np.full(xi.shape[0], -1)
        else:
            bands = self.band_of(np.asarray(self.domain.rho(xi)))
        for q in np.unique(tq):
            for b in np.unique(bands):
                sel = (tq == q) & (bands == b)
                if not np.any(sel):
                    continue
                T = self.approximant_for(q * T_QUANT_STEP,
                                         None if b < 0 else int(b))
                out[sel] = T(lam[sel]) ** n / (c[sel, None] ** n)
        return out[:, 0] if single else out

    def certificates(self):
        return {k: v.cert for k, v in self.cache.items()}


def build_Kglob(domain, k, r=2.0, R=None, eps=None, moment_exact=None,
                banded=False, n_bands=12):
    """Kernel approximant of degree k with rate parameter r.

    ``moment_exact="half"`` pins half the Taylor coefficients (the pipeline
    projector default); an integer pins that many orders; None fits freely.
    ``banded=True`` switches to per-height-band uniform fits (the projector
    construction for continuation densities).
    """
    if R is None:
        R = lune_radius(domain, eps)
    j = int(math.ceil(k / domain.n))
    if moment_exact == "half":
        moment_exact = j // 2
    band_edges = None
    band_delta = 0.5
    if banded:
        eps_b = domain.eps_shell if eps is None else float(eps)
        band_edges = eps_b * 2.0 ** (-np.arange(n_bands, dtype=float))
        band_delta = 0.8 * qm_lower_constant(domain, eps_b)
    return KernelApproximant(domain=domain, k=int(k), r=float(r), R=float(R),
                             moment_exact=moment_exact,
                             band_edges=band_edges, band_delta=band_delta)


def validate_Kglob(domain, kglob, n_xi=300, n_z=40, seed=11, eps=None,
                   exact=None):
    """Measured far/near constants over stratified sample pairs.

    Far samples (d(xi, z) >= 1/k) certify sup |K - K_k| k^r d^(n+r); near
    samples (d <= 1/k) certify sup |K_k| / k^n.  Pass ``exact`` to score a
    different evaluator (the exact kernel itself scores C_far = 0).
    """
    from .forms import clf_kernel

    eps = domain.eps_shell if eps is None else float(eps)
    rng = np.random.default_rng(seed)
    k = kglob.k
    n = domain.n

    dirs = random_unit_directions(rng, n_xi, n)
    ts = eps * rng.uniform(1e-3, 1.0, n_xi) ** 2
    rr = radial_level(domain, dirs, ts)
    xi = rr[:, None] * dirs
    g = np.asarray(domain.grad(xi))
    gn = np.linalg.norm(g, axis=-1)
    nu = np.conj(g) / gn[:, None]
    ct = np.empty_like(g)
    ct[:, 0] = -g[:, 1] / gn
    ct[:, 1] = g[:, 0] / gn

    # interior z constructed around each xi at prescribed quasimetric depth
    u = np.geomspace(0.2 / k, 2.0, n_z)
    a = rng.uniform(-1, 1, (n_xi, n_z)) * np.sqrt(u)[None, :]
    zs = (xi[:, None, :]
          - (u / gn[:, None])[:, :, None] * nu[:, None, :]
          + a[:, :, None] * ct[:, None, :])
    zs = zs.reshape(-1, n)
    keep = np.asarray(domain.rho(zs)) <= 0.0
    zs = zs[keep]

    xi_rep = np.repeat(xi, n_z, axis=0)[keep]
    g_rep = np.repeat(g, n_z, axis=0)[keep]
    d = np.abs(pairing(g_rep, xi_rep - zs))
    kern = clf_kernel(domain, xi_rep, zs, grad_xi=g_rep)
    if exact is None:
        approx = _eval_pairs(kglob, xi_rep, g_rep, zs)
    else:
        approx = exact(xi_rep, zs)

    far = d >= 1.0 / k
    near = d <= 1.0 / k
    report = {"k": int(k), "j": int(kglob.j), "r": float(kglob.r),
              "n_far": int(far.sum()), "n_near": int(near.sum())}
    if np.any(far):
        report["C_far"] = float(
            (np.abs(kern[far] - approx[far]) * k ** kglob.r
             * d[far] ** (n + kglob.r)).max())
    if np.any(near):
        report["C_near"] = float(np.abs(approx[near]).max() / k ** n)
    return report


def _eval_pairs(kglob, xi, g, z):
    """kglob evaluated on matched pairs (xi_i, z_i)."""
    c = pairing(g, xi)
    t = kglob.t_of(c)
    tq = np.round(t / T_QUANT_STEP).astype(int)
    lam = pairing(g, z) / c
    out = np.empty_like(lam)
    for q in np.unique(tq):
        sel = tq == q
        T = kglob.approximant_for(q * T_QUANT_STEP)
        out[sel] = T(lam[sel]) ** kglob.domain.n / c[sel] ** kglob.domain.n
    return out
