"""Strongly convex domains in C^n and their differential geometry.

A domain is given by a defining function rho (negative inside, zero on the
boundary) together with its holomorphic gradient and the two complex Hessian
blocks.  Level sets ``rho = t`` for small ``|t|`` form a family of nearby
strongly convex surfaces; all geometric operations (nearest-point projection,
reflection across the boundary, local normal form) live on this shell.

All callables are vectorized over a leading batch axis: points are complex
arrays of shape ``(..., n)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "DomainSpec",
    "BoundaryPointData",
    "NormalForm",
    "DomainValidationError",
    "ProjectionError",
    "ball",
    "ellipsoid",
    "perturbed_ball",
    "make_domain",
    "domain_eval",
    "real_hessian",
    "project_boundary",
    "symmetric_point",
    "normalize_at",
    "boundary_point_data",
    "radial_level",
    "random_shell_points",
    "pairing",
    "real_dot",
]


class DomainValidationError(ValueError):
    """Raised when a defining function fails the strong convexity checks."""


class ProjectionError(RuntimeError):
    """Nearest-point iteration failed; carries the last iterate and residual."""

    def __init__(self, message, last_iterate=None, residual=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual


# ---------------------------------------------------------------------------
# small complex/real linear algebra helpers shared across the package
# ---------------------------------------------------------------------------

def pairing(g, v):
    """C-bilinear pairing <g, v> = sum_j g_j v_j over the last axis."""
    return np.sum(np.asarray(g) * np.asarray(v), axis=-1)


def real_dot(u, v):
    """Real inner product of C^n = R^(2n): Re sum_j u_j conj(v_j)."""
    return np.real(np.sum(np.asarray(u) * np.conj(v), axis=-1))


def as_real(v):
    """Complex (..., n) -> real (..., 2n), coordinates ordered x1,y1,...,xn,yn."""
    v = np.asarray(v)
    out = np.empty(v.shape[:-1] + (2 * v.shape[-1],), dtype=float)
    out[..., 0::2] = v.real
    out[..., 1::2] = v.imag
    return out


def as_complex(r):
    """Inverse of :func:`as_real`."""
    r = np.asarray(r, dtype=float)
    return r[..., 0::2] + 1j * r[..., 1::2]


@dataclass(frozen=True)
class DomainSpec:
    """Strongly convex domain via a defining function with analytic derivatives.

    Attributes
    ----------
    n : complex dimension.
    rho : callable, points (..., n) -> real values (...).
    grad : holomorphic gradient, components d(rho)/dz_j, shape (..., n).
    hess_mixed : callable -> Hermitian matrix A_jk = d2(rho)/(dz_j dzbar_k).
    hess_holo : callable -> symmetric matrix H_jk = d2(rho)/(dz_j dz_k).
    eps_shell : validated width of the two-sided shell around the boundary.
    contains_origin : the origin must be interior for the kernel machinery.
    exact_project : optional closed-form nearest-point map (z, t) -> xi.
    """

    n: int
    rho: Callable
    grad: Callable
    hess_mixed: Callable
    hess_holo: Callable
    eps_shell: float
    contains_origin: bool = True
    name: str = "custom"
    params: tuple = ()
    exact_project: Optional[Callable] = None

    def key(self):
        """Stable identity used for grid caching."""
        return (self.name, self.n, tuple(float(p) for p in self.params),
                float(self.eps_shell))


@dataclass(frozen=True)
class BoundaryPointData:
    """A point on a level surface with its adapted frames.

    ``normal`` is the unit complex normal (equal to the real outward unit
    normal as a vector), ``tangent_frame`` is a real-orthonormal basis of the
    (2n-1)-dimensional real tangent space ordered so that (normal, frame) is
    positively oriented, and ``ct_frame`` spans the complex tangent space.
    """

    xi: np.ndarray
    level: float
    normal: np.ndarray
    tangent_frame: np.ndarray   # (2n-1, n) complex rows
    ct_frame: np.ndarray        # (n-1, n) complex rows


@dataclass(frozen=True)
class NormalForm:
    """Holomorphic change of coordinates flattening rho at a boundary point.

    The map  w = Phi (z - xi) + ((z - xi)^T B (z - xi)) e_n  turns rho into
    2 Re(w_n) + conj(w)^T A' w + O(|w|^3) with A' positive definite.
    """

    phi: np.ndarray
    b: np.ndarray
    hermitian_form: np.ndarray


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------

def ball(eps_shell=0.1, validate=True):
    """Unit ball, rho(z) = |z|^2 - 1."""

    def rho(z):
        z = np.asarray(z, dtype=complex)
        return np.sum(np.abs(z) ** 2, axis=-1) - 1.0

    def grad(z):
        return np.conj(np.asarray(z, dtype=complex))

    def hess_mixed(z):
        z = np.asarray(z, dtype=complex)
        return np.broadcast_to(np.eye(z.shape[-1], dtype=complex),
                               z.shape + (z.shape[-1],)).copy()

    def hess_holo(z):
        z = np.asarray(z, dtype=complex)
        return np.zeros(z.shape + (z.shape[-1],), dtype=complex)

    def exact_project(z, t):
        z = np.asarray(z, dtype=complex)
        r = np.sqrt(1.0 + t)
        nrm = np.linalg.norm(z, axis=-1, keepdims=True)
        return r * z / nrm

    return make_domain(2, rho, grad, hess_mixed, hess_holo, eps_shell,
                       name="ball", params=(), exact_project=exact_project,
                       validate=validate)


def ellipsoid(c1=2.0, c2=1.0, eps_shell=0.1, validate=True):
    """Axis-aligned ellipsoid, rho(z) = c1 |z_1|^2 + c2 |z_2|^2 - 1."""
    c = np.array([c1, c2], dtype=float)

    def rho(z):
        z = np.asarray(z, dtype=complex)
        return np.sum(c * np.abs(z) ** 2, axis=-1) - 1.0

    def grad(z):
        return c * np.conj(np.asarray(z, dtype=complex))

    def hess_mixed(z):
        z = np.asarray(z, dtype=complex)
        return np.broadcast_to(np.diag(c).astype(complex),
                               z.shape + (z.shape[-1],)).copy()

    def hess_holo(z):
        z = np.asarray(z, dtype=complex)
        return np.zeros(z.shape + (z.shape[-1],), dtype=complex)

    return make_domain(2, rho, grad, hess_mixed, hess_holo, eps_shell,
                       name="ellipsoid", params=(c1, c2), validate=validate)


def perturbed_ball(beta=0.1, eps_shell=0.1, validate=True):
    """Perturbed quadric, rho(z) = |z|^2 + beta Re(z_1^2) - 1.

    Strongly convex for |beta| < 1; the holomorphic Hessian block is nonzero,
    which exercises the quadratic term of the normal form.
    """

    def rho(z):
        z = np.asarray(z, dtype=complex)
        return (np.sum(np.abs(z) ** 2, axis=-1)
                + beta * np.real(z[..., 0] ** 2) - 1.0)

    def grad(z):
        z = np.asarray(z, dtype=complex)
        g = np.conj(z).copy()
        g[..., 0] += beta * z[..., 0]
        return g

    def hess_mixed(z):
        z = np.asarray(z, dtype=complex)
        return np.broadcast_to(np.eye(z.shape[-1], dtype=complex),
                               z.shape + (z.shape[-1],)).copy()

    def hess_holo(z):
        z = np.asarray(z, dtype=complex)
        h = np.zeros(z.shape + (z.shape[-1],), dtype=complex)
        h[..., 0, 0] = beta
        return h

    return make_domain(2, rho, grad, hess_mixed, hess_holo, eps_shell,
                       name="perturbed_ball", params=(beta,), validate=validate)


_CATALOG = {
    "ball": ball,
    "ellipsoid": ellipsoid,
    "perturbed_ball": perturbed_ball,
}


def from_catalog(name, params=(), eps_shell=0.1, validate=True):
    """Instantiate a catalog domain by name and positional parameter list."""
    if name not in _CATALOG:
        raise KeyError(f"unknown domain {name!r}; catalog: {sorted(_CATALOG)}")
    return _CATALOG[name](*params, eps_shell=eps_shell, validate=validate)


def make_domain(n, rho, grad, hess_mixed, hess_holo, eps_shell,
                contains_origin=True, name="custom", params=(),
                exact_project=None, validate=True, n_check=1000, seed=7):
    dom = DomainSpec(n=n, rho=rho, grad=grad, hess_mixed=hess_mixed,
                     hess_holo=hess_holo, eps_shell=float(eps_shell),
                     contains_origin=contains_origin, name=name,
                     params=tuple(params), exact_project=exact_project)
    if validate:
        validate_domain(dom, n_check=n_check, seed=seed)
    return dom


def validate_domain(domain, n_check=1000, seed=7, fd_check=True):
    """Strong convexity and derivative consistency checks by shell sampling.

    Raises :class:`DomainValidationError` with a witness point on failure.
    Returns a dict of measured margins for reporting.
    """
    if domain.eps_shell <= 0:
        raise DomainValidationError("eps_shell must be positive")
    if domain.contains_origin:
        r0 = float(domain.rho(np.zeros(domain.n, dtype=complex)))
        if not r0 < 0:
            raise DomainValidationError(f"rho(0) = {r0:.3g} is not negative")

    rng = np.random.default_rng(seed)
    # gross non-convexity first: a box sample yields a Hessian witness even
    # when the level sets are unreachable along some rays
    box = rng.uniform(-1.3, 1.3, size=(max(200, n_check // 5), 2 * domain.n))
    box_pts = as_complex(box)
    eigs_box = np.linalg.eigvalsh(real_hessian(domain, box_pts))
    i_bad = int(np.argmin(eigs_box[:, 0]))
    if eigs_box[i_bad, 0] <= 0:
        raise DomainValidationError(
            "real Hessian not positive definite: min eigenvalue "
            f"{eigs_box[i_bad, 0]:.3g} at z = {box_pts[i_bad]}")
    try:
        pts = random_shell_points(domain, rng, n_check,
                                  (-domain.eps_shell, domain.eps_shell))
    except ProjectionError as exc:
        raise DomainValidationError(
            "cannot sample the shell (level sets unreachable along some "
            f"rays): {exc}") from exc
    hess = real_hessian(domain, pts)
    eigs = np.linalg.eigvalsh(hess)
    i_min = int(np.argmin(eigs[:, 0]))
    lam_min = float(eigs[i_min, 0])
    if lam_min <= 0:
        raise DomainValidationError(
            "real Hessian not positive definite on the shell: "
            f"min eigenvalue {lam_min:.3g} at z = {pts[i_min]}")

    report = {"hessian_min_eig": lam_min, "n_check": int(n_check)}
    if fd_check:
        sub = pts[:: max(1, n_check // 50)]
        rel = _fd_consistency(domain, sub)
        if rel > 1e-6:
            raise DomainValidationError(
                f"analytic derivatives disagree with finite differences "
                f"(max rel err {rel:.3g})")
        report["fd_max_rel_err"] = float(rel)
    return report


def _fd_consistency(domain, pts, h=1e-5):
    """Max relative error of grad/hess against central finite differences."""
    pts = np.atleast_2d(pts)
    n = domain.n
    g = np.asarray(domain.grad(pts))
    scale = 1.0 + np.abs(g).max()
    worst = 0.0
    for j in range(n):
        ex = np.zeros(n, complex); ex[j] = h
        ey = np.zeros(n, complex); ey[j] = 1j * h
        dx = (np.asarray(domain.rho(pts + ex)) - np.asarray(domain.rho(pts - ex))) / (2 * h)
        dy = (np.asarray(domain.rho(pts + ey)) - np.asarray(domain.rho(pts - ey))) / (2 * h)
        gj = 0.5 * (dx - 1j * dy)           # d/dz_j of a real function
        worst = max(worst, float(np.abs(gj - g[:, j]).max() / scale))
        # second derivatives: differentiate the analytic gradient
        gx = (np.asarray(domain.grad(pts + ex)) - np.asarray(domain.grad(pts - ex))) / (2 * h)
        gy = (np.asarray(domain.grad(pts + ey)) - np.asarray(domain.grad(pts - ey))) / (2 * h)
        hol = 0.5 * (gx - 1j * gy)          # d(grad)/dz_j  -> column j of H
        mix = 0.5 * (gx + 1j * gy)          # d(grad)/dzbar_j
        H = np.asarray(domain.hess_holo(pts))
        A = np.asarray(domain.hess_mixed(pts))
        hs = 1.0 + np.abs(H).max() + np.abs(A).max()
        worst = max(worst, float(np.abs(hol - H[:, :, j]).max() / hs))
        # d(grad_k)/dzbar_j = conj(d2 rho / dz_j dzbar_k)... A_kj entries
        worst = max(worst, float(np.abs(mix - np.conj(A[:, :, j])).max() / hs))
    return worst


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def domain_eval(domain, z):
    """Evaluate rho with all derivative blocks at z.

    Returns ``(rho, grad, A, B)`` where ``A`` is the mixed Hessian and ``B``
    the holomorphic one.  Non-finite values raise immediately, naming the
    offending point.
    """
    z = np.asarray(z, dtype=complex)
    r = np.asarray(domain.rho(z), dtype=float)
    g = np.asarray(domain.grad(z))
    a = np.asarray(domain.hess_mixed(z))
    b = np.asarray(domain.hess_holo(z))
    for arr, tag in ((r, "rho"), (g, "grad"), (a, "hess_mixed"), (b, "hess_holo")):
        if not np.all(np.isfinite(arr)):
            bad = np.argwhere(~np.isfinite(arr))[0]
            raise FloatingPointError(
                f"non-finite {tag} at z={z.reshape(-1, domain.n)[bad[0] if z.ndim > 1 else 0]}")
    return r, g, a, b


def real_hessian(domain, z):
    """Real 2n x 2n Hessian of rho, coordinates (x1, y1, ..., xn, yn)."""
    z = np.asarray(z, dtype=complex)
    H = np.asarray(domain.hess_holo(z))
    A = np.asarray(domain.hess_mixed(z))
    n = domain.n
    out = np.empty(z.shape[:-1] + (2 * n, 2 * n), dtype=float)
    # d2/dx_j dx_k = 2Re(H_jk + A_jk); d2/dy_j dy_k = 2Re(A_jk - H_jk)
    # d2/dx_j dy_k = 2Im(A_jk) - 2Im(H_jk) ... from d/dx = dz + dzbar etc.
    out[..., 0::2, 0::2] = 2 * (H.real + A.real)
    out[..., 1::2, 1::2] = 2 * (A.real - H.real)
    out[..., 0::2, 1::2] = 2 * (A.imag - H.imag)
    out[..., 1::2, 0::2] = -2 * (A.imag + H.imag)
    return out


def real_gradient(domain, z):
    """Real gradient of rho as a complex vector (equals 2 conj(grad))."""
    return 2.0 * np.conj(np.asarray(domain.grad(z)))


# ---------------------------------------------------------------------------
# radial parametrization of level sets (the domains are star shaped about 0)
# ---------------------------------------------------------------------------

def radial_level(domain, dirs, t, r0=None, tol=1e-13, max_iter=60):
    """Radii r(theta) with rho(r * theta) = t for unit directions theta.

    Newton in r; the catalog domains are strongly convex with the origin
    interior, so rho is strictly increasing in r near the shell.
    """
    dirs = np.asarray(dirs, dtype=complex)
    r = np.full(dirs.shape[:-1], 1.0 if r0 is None else r0, dtype=float)
    t_arr = np.broadcast_to(np.asarray(t, dtype=float), r.shape)
    for _ in range(max_iter):
        pts = r[..., None] * dirs
        val = np.asarray(domain.rho(pts)) - t_arr
        if np.all(np.abs(val) < tol):
            break
        g = np.asarray(domain.grad(pts))
        slope = 2.0 * np.real(pairing(g, dirs))
        slope = np.where(np.abs(slope) < 1e-14, 1e-14, slope)
        step = val / slope
        step = np.clip(step, -0.2, 0.2)
        r = r - step
    resid = np.abs(np.asarray(domain.rho(r[..., None] * dirs)) - t_arr)
    if not np.all(resid < 1e-10):
        raise ProjectionError("radial level solve failed",
                              residual=float(resid.max()))
    return r


def random_unit_directions(rng, m, n):
    v = rng.standard_normal((m, 2 * n))
    v /= np.linalg.norm(v, axis=-1, keepdims=True)
    return as_complex(v)


def random_shell_points(domain, rng, m, t_range):
    """Uniform-in-level random points with rho(z) in the given range."""
    dirs = random_unit_directions(rng, m, domain.n)
    ts = rng.uniform(t_range[0], t_range[1], size=m)
    r = radial_level(domain, dirs, ts)
    return r[:, None] * dirs


# ---------------------------------------------------------------------------
# nearest-point projection onto a level surface
# ---------------------------------------------------------------------------

def project_boundary(domain, z, t=0.0, tol=1e-11, max_iter=100,
                     with_frames=True):
    """Nearest point on the level surface rho = t.

    Damped Newton on the KKT system (rho(xi) = t, z - xi parallel to the real
    gradient), vectorized over a batch of points.  Points that fail to
    converge fall back to a projected-gradient descent along the surface; if
    that also fails a :class:`ProjectionError` carries the last iterate.

    Returns a :class:`BoundaryPointData` for a single input point, or the
    batch array of projected points (with_frames is ignored for batches).
    """
    z = np.asarray(z, dtype=complex)
    single = z.ndim == 1
    pts = np.atleast_2d(z)

    if domain.exact_project is not None:
        xi = np.asarray(domain.exact_project(pts, t), dtype=complex)
    else:
        xi = _project_newton(domain, pts, t, tol, max_iter)

    if single:
        xi0 = xi[0]
        if not with_frames:
            return xi0
        return boundary_point_data(domain, xi0, t)
    return xi


def _project_newton(domain, pts, t, tol, max_iter):
    m, n = pts.shape
    dim = 2 * n + 1
    dirs = pts / np.linalg.norm(pts, axis=-1, keepdims=True)
    r = radial_level(domain, dirs, t)
    xi = r[:, None] * dirs
    grad = real_gradient(domain, xi)
    lam = real_dot(pts - xi, grad) / np.maximum(real_dot(grad, grad), 1e-300)

    def residual(xi_c, lam_c, targets):
        g = real_gradient(domain, xi_c)
        f1 = as_real(targets - xi_c - lam_c[:, None] * g)
        f2 = (np.asarray(domain.rho(xi_c)) - t)[:, None]
        return np.concatenate([f1, f2], axis=1), g

    res, grad = residual(xi, lam, pts)
    norm0 = np.linalg.norm(res, axis=1)
    active = norm0 > tol
    for _ in range(max_iter):
        if not np.any(active):
            break
        idx = np.nonzero(active)[0]
        xa, la, pa = xi[idx], lam[idx], pts[idx]
        hess = real_hessian(domain, xa)
        ga = real_gradient(domain, xa)
        J = np.zeros((len(idx), dim, dim))
        J[:, :2 * n, :2 * n] = -np.eye(2 * n) - la[:, None, None] * hess
        J[:, :2 * n, 2 * n] = -as_real(ga)
        J[:, 2 * n, :2 * n] = as_real(ga)
        ra, _ = residual(xa, la, pa)
        try:
            step = np.linalg.solve(J, -ra[..., None])[..., 0]
        except np.linalg.LinAlgError:
            step = np.stack([np.linalg.lstsq(J[i], -ra[i], rcond=None)[0]
                             for i in range(len(idx))])
        # damping: accept the longest step in {1, 1/2, ...} that reduces |F|
        cur = np.linalg.norm(ra, axis=1)
        scale = np.ones(len(idx))
        xa_new, la_new = xa, la
        for _ in range(25):
            cand_xi = xa + as_complex(scale[:, None] * step[:, :2 * n])
            cand_la = la + scale * step[:, 2 * n]
            rc, _ = residual(cand_xi, cand_la, pa)
            better = np.linalg.norm(rc, axis=1) < cur
            if np.all(better):
                xa_new, la_new = cand_xi, cand_la
                break
            scale = np.where(better, scale, scale * 0.5)
        else:
            cand_xi = xa + as_complex(scale[:, None] * step[:, :2 * n])
            cand_la = la + scale * step[:, 2 * n]
            xa_new, la_new = cand_xi, cand_la
        xi[idx], lam[idx] = xa_new, la_new
        res, grad = residual(xi, lam, pts)
        active = np.linalg.norm(res, axis=1) > tol

    bad = np.linalg.norm(res, axis=1) > 1e2 * tol
    if np.any(bad):
        for i in np.nonzero(bad)[0]:
            xi[i] = _project_descent(domain, pts[i], t)
        res_b = np.abs(np.asarray(domain.rho(xi[bad])) - t)
        if np.any(res_b > 1e-9):
            i = np.nonzero(bad)[0][int(np.argmax(res_b))]
            raise ProjectionError(
                f"projection failed to converge for z={pts[i]}",
                last_iterate=xi[i], residual=float(res_b.max()))
    return xi


def _project_descent(domain, z, t, max_iter=400, tol=1e-12):
    """Fallback: projected gradient descent on |z - xi|^2 along the surface."""
    dirvec = z / np.linalg.norm(z)
    r = radial_level(domain, dirvec[None], t)[0]
    xi = r * dirvec
    step = 1.0
    d2 = np.sum(np.abs(z - xi) ** 2)
    for _ in range(max_iter):
        g = real_gradient(domain, xi[None])[0]
        nu = g / np.linalg.norm(g)
        tang = (z - xi) - real_dot(z - xi, nu) * nu
        if np.linalg.norm(tang) < tol:
            break
        cand_dir = xi + step * tang
        cand_dir /= np.linalg.norm(cand_dir)
        rr = radial_level(domain, cand_dir[None], t)[0]
        cand = rr * cand_dir
        d2c = np.sum(np.abs(z - cand) ** 2)
        if d2c < d2:
            xi, d2 = cand, d2c
            step = min(step * 1.3, 4.0)
        else:
            step *= 0.5
            if step < 1e-14:
                break
    return xi


def boundary_point_data(domain, xi, t=None):
    """Assemble frames at a surface point; see :class:`BoundaryPointData`."""
    xi = np.asarray(xi, dtype=complex)
    lvl = float(domain.rho(xi)) if t is None else float(t)
    g = np.asarray(domain.grad(xi))
    gn = np.linalg.norm(g)
    if gn < 1e-12:
        raise ProjectionError(f"degenerate gradient at xi={xi}")
    nu = np.conj(g) / gn
    ct = _complex_tangent_basis(g)
    frame = [1j * nu]
    for u in ct:
        frame.extend([u, 1j * u])
    return BoundaryPointData(xi=xi, level=lvl, normal=nu,
                             tangent_frame=np.array(frame),
                             ct_frame=ct)


def _complex_tangent_basis(g):
    """Hermitian-orthonormal basis of {v : <g, v> = 0} (C-bilinear pairing)."""
    g = np.asarray(g, dtype=complex)
    n = g.shape[-1]
    # v is pairing-orthogonal to g iff v is Hermitian-orthogonal to conj(g)
    a = np.conj(g) / np.linalg.norm(g)
    M = np.concatenate([a[:, None], np.eye(n, dtype=complex)], axis=1)
    q, _ = np.linalg.qr(M)
    basis = q[:, 1:n].T
    return basis


def symmetric_point(domain, z, t=0.0):
    """Reflection across the level surface: z* = 2 pr(z) - z."""
    z = np.asarray(z, dtype=complex)
    single = z.ndim == 1
    pts = np.atleast_2d(z)
    pr = project_boundary(domain, pts, t)
    out = 2.0 * pr - pts
    return out[0] if single else out


# ---------------------------------------------------------------------------
# normal form at a boundary point
# ---------------------------------------------------------------------------

def normalize_at(domain, xi):
    """Holomorphic coordinates flattening the surface at xi.

    The linear part sends the complex tangent directions to the first n-1
    coordinates and the pairing with the gradient to w_n; the quadratic part
    absorbs the holomorphic-holomorphic second order terms of rho into w_n.
    """
    xi = np.asarray(xi, dtype=complex)
    g = np.asarray(domain.grad(xi))
    if np.linalg.norm(g) < 1e-12:
        raise ProjectionError(f"degenerate gradient at xi={xi}; cannot normalize")
    ct = _complex_tangent_basis(g)
    n = domain.n
    phi = np.empty((n, n), dtype=complex)
    for i, u in enumerate(ct):
        phi[i] = np.conj(u)          # row i: w_i = <z - xi, u>_Hermitian
    phi[n - 1] = g                   # w_n = <grad, z - xi>
    b = 0.5 * np.asarray(domain.hess_holo(xi))
    psi = np.linalg.inv(phi)
    a = np.asarray(domain.hess_mixed(xi))
    aprime = np.conj(psi).T @ a @ psi
    aprime = 0.5 * (aprime + np.conj(aprime).T)
    return NormalForm(phi=phi, b=b, hermitian_form=aprime)


def normal_form_pushforward(domain, xi, nf, w, iters=3):
    """Invert the normal-form map: points z with phi(xi, z) = w.

    The map is linear plus a quadratic correction in the last coordinate, so
    a short fixed-point iteration inverts it for small w.
    """
    w = np.asarray(w, dtype=complex)
    psi = np.linalg.inv(nf.phi)
    n = domain.n
    h = w @ psi.T
    for _ in range(iters):
        q = np.einsum("...i,ij,...j->...", h, nf.b, h)
        w_corr = w.copy()
        w_corr[..., n - 1] = w[..., n - 1] - q
        h = w_corr @ psi.T
    return xi + h
