"""Labeled test functions with closed-form derivatives and norm oracles.

Families: polynomials, entire exponentials, boundary power singularities
(1 - <z, a>)^s, the logarithm log(1 - <z, a>), and a product of a power
singularity with a polynomial factor.  Powers and logs use the principal
branch; with the singular direction a on the boundary those functions are
holomorphic inside (the pairing stays in the right half plane 1 - <z, a>).

Oracle labels classify Hardy-Sobolev membership per (l, p) by the trend of
the top-derivative level norms on a geometric inner ladder, computed by a
graded two-angle quadrature that resolves the boundary singularity scale by
scale.  Borderline (logarithmically divergent) cases read "unknown" and are
excluded from acceptance counts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .domain import radial_level
from .forms import HoloFunction, multi_indices

__all__ = [
    "CorpusEntry",
    "build_corpus",
    "classify_norm",
    "power_function",
    "log_function",
    "exp_function",
    "monomial",
    "falling",
]


@dataclass
class CorpusEntry:
    f: HoloFunction
    family: str
    params: dict
    oracle_label: dict = field(default_factory=dict)   # (l, p) -> label

    def smoothness_rank(self):
        """Coarse smoothness ordering key (larger = smoother)."""
        if self.family in ("polynomial", "entire"):
            return np.inf
        if self.family == "log_singularity":
            return 0.0
        return float(self.params.get("s", 0.0))


def falling(s, m):
    out = 1.0
    for i in range(m):
        out *= (s - i)
    return out


def monomial(alpha, label=None):
    alpha = tuple(int(a) for a in alpha)

    def ev(z):
        z = np.asarray(z, dtype=complex)
        out = np.ones(z.shape[:-1], dtype=complex)
        for j, a in enumerate(alpha):
            out = out * z[..., j] ** a
        return out

    def deriv(beta, z):
        z = np.asarray(z, dtype=complex)
        out = np.ones(z.shape[:-1], dtype=complex)
        for j, (a, b) in enumerate(zip(alpha, beta)):
            if b > a:
                return np.zeros(z.shape[:-1], dtype=complex)
            out = out * falling(a, b) * z[..., j] ** (a - b)
        return out

    return HoloFunction(eval=ev, deriv=deriv, validity=np.inf,
                        label=label or "z^" + str(alpha))


def exp_function(a, label=None):
    a = np.asarray(a, dtype=complex)

    def ev(z):
        return np.exp(np.asarray(z, dtype=complex) @ a)

    def deriv(beta, z):
        fac = np.prod(a ** np.asarray(beta))
        return fac * ev(z)

    return HoloFunction(eval=ev, deriv=deriv, validity=np.inf,
                        label=label or "exp")


def power_function(s, a=(1.0, 0.0), label=None):
    """(1 - <z, a>)^s with the principal branch, singular where <z, a> = 1."""
    a = np.asarray(a, dtype=complex)
    s = float(s)

    def u(z):
        return 1.0 - np.asarray(z, dtype=complex) @ a

    def ev(z):
        return u(z) ** s

    def deriv(beta, z):
        m = sum(beta)
        fac = falling(s, m) * np.prod((-a) ** np.asarray(beta))
        return fac * u(z) ** (s - m)

    return HoloFunction(eval=ev, deriv=deriv, validity=0.0,
                        label=label or f"(1-z.a)^{s}")


def log_function(a=(1.0, 0.0), label=None):
    a = np.asarray(a, dtype=complex)

    def u(z):
        return 1.0 - np.asarray(z, dtype=complex) @ a

    def ev(z):
        return np.log(u(z))

    def deriv(beta, z):
        m = sum(beta)
        if m == 0:
            return ev(z)
        fac = np.prod((-a) ** np.asarray(beta)) * (-1.0) ** (m - 1) * \
            _fact(m - 1)
        return fac * u(z) ** (-m)

    return HoloFunction(eval=ev, deriv=deriv, validity=0.0,
                        label=label or "log(1-z.a)")


def _fact(m):
    out = 1.0
    for i in range(2, m + 1):
        out *= i
    return out


def product_power(s, a=(1.0, 0.0), label=None):
    """(1 - <z, a>)^s * z_2 via the Leibniz rule on the second factor."""
    base = power_function(s, a)

    def ev(z):
        z = np.asarray(z, dtype=complex)
        return base.eval(z) * z[..., 1]

    def deriv(beta, z):
        z = np.asarray(z, dtype=complex)
        b2 = beta[1]
        out = base.deriv(beta, z) * z[..., 1]
        if b2 >= 1:
            out = out + b2 * base.deriv((beta[0], b2 - 1), z)
        return out

    return HoloFunction(eval=ev, deriv=deriv, validity=0.0,
                        label=label or f"(1-z.a)^{s} z2")


# ---------------------------------------------------------------------------
# the norm-trend oracle
# ---------------------------------------------------------------------------

def _graded_level_integral(domain, h, t, n_coarse=64,
                           n_fine=64, alpha_floor=1e-6):
    """Integral of |h(z1)|^p-type integrands over the level surface rho = t.

    The corpus integrands factor as h(z_1) |z_2|^(m2 p) with all angular
    dependence in one phase, so the level integral reduces to two angles.
    The (alpha, phi) mesh is graded geometrically toward the singular point
    (alpha, phi) = (0, 0), resolving the peak scale by scale.
    """
    a_reg = np.linspace(0.12, 0.5 * np.pi, n_coarse)
    a_sing = np.geomspace(alpha_floor, 0.12, n_fine)
    alph = np.unique(np.concatenate([a_sing, a_reg]))
    p_reg = np.linspace(0.35, np.pi, n_coarse)
    p_sing = np.geomspace(1e-7, 0.35, n_fine)
    phi = np.unique(np.concatenate([p_sing, p_reg]))
    phi = np.concatenate([-phi[::-1], phi])

    A, PH = np.meshgrid(alph, phi, indexing="ij")
    dirs = np.empty(A.shape + (2,), dtype=complex)
    dirs[..., 0] = np.cos(A) * np.exp(1j * PH)
    dirs[..., 1] = np.sin(A)
    rr = radial_level(domain, dirs.reshape(-1, 2), t).reshape(A.shape)
    pts = rr[..., None] * dirs

    g = np.asarray(domain.grad(pts))
    grad_re = 2.0 * np.conj(g)
    slope = np.real(np.sum(grad_re * np.conj(dirs), axis=-1))
    tang = grad_re - slope[..., None] * dirs
    gsr = rr[..., None] * (-tang) / slope[..., None]
    gs2 = np.real(np.sum(gsr * np.conj(gsr), axis=-1))
    jac = rr ** 2 * np.sqrt(rr ** 2 + gs2) * np.cos(A) * np.sin(A)

    vals = np.abs(h(pts[..., 0], np.abs(pts[..., 1]))) * jac
    ia = np.trapezoid(vals, alph, axis=0)
    return 2.0 * np.pi * float(np.trapezoid(ia, phi))


def classify_norm(domain, f, l, p, eps_frac=1.0, n_levels=6,
                  stable=1.05, divergent=1.4):
    """finite / infinite / unknown for the order-l p-norm by level trends.

    Evaluates the worst derivative-norm trend over |alpha| = l on the ladder
    t = -eps 4^-i; power-type divergences show ratios bounded away from 1,
    stable norms converge to 1 quickly, and logarithmic borderline growth
    lands in between and is reported unknown.
    """
    eps = domain.eps_shell * eps_frac
    levels = [-eps * 4.0 ** (-i) for i in range(n_levels)]
    worst = "finite"
    for alpha in multi_indices(domain.n, l):
        if sum(alpha) != l and l > 0:
            continue
        vals = []
        for t in levels:
            def h(z1, z2abs, alpha=alpha):
                return np.abs(_eval_dalpha(f, alpha, z1, z2abs)) ** p
            vals.append(_graded_level_integral(domain, h, t))
        vals = np.array(vals)
        r1 = vals[-1] / max(vals[-2], 1e-300)
        r2 = vals[-2] / max(vals[-3], 1e-300)
        if min(r1, r2) >= divergent:
            return "infinite"
        if max(r1, r2) > stable:
            worst = "unknown"
    return worst


def _eval_dalpha(f, alpha, z1, z2abs):
    """Derivative modulus on the surface (corpus integrands).

    Every corpus derivative factors as h(z_1) z_2^kappa, so its modulus only
    sees |z_2|; evaluating at the real value |z_2| keeps the measure factor
    of the second coordinate (it damps the singular ray, which shifts
    borderline classifications).
    """
    z = np.stack([z1, z2abs.astype(complex)], axis=-1)
    return f.d(alpha, z)


def build_corpus(domain, l_probe=(0, 1, 2, 3), p_probe=(2.0, 4.0),
                 with_labels=True):
    """The labeled corpus; oracle labels filled by the norm classifier."""
    entries = [
        CorpusEntry(monomial((0, 0), label="1"), "polynomial", {"deg": 0}),
        CorpusEntry(monomial((1, 0), label="z1"), "polynomial", {"deg": 1}),
        CorpusEntry(monomial((2, 1), label="z1^2 z2"), "polynomial",
                    {"deg": 3}),
        CorpusEntry(exp_function((1.0, 2.0), label="exp(z1+2z2)"), "entire",
                    {"a": [1.0, 2.0]}),
        CorpusEntry(power_function(0.6, label="(1-z1)^0.6"),
                    "power_singularity", {"s": 0.6}),
        CorpusEntry(power_function(1.5, label="(1-z1)^1.5"),
                    "power_singularity", {"s": 1.5}),
        CorpusEntry(power_function(2.5, label="(1-z1)^2.5"),
                    "power_singularity", {"s": 2.5}),
        CorpusEntry(log_function(label="log(1-z1)"), "log_singularity",
                    {"s": 0.0}),
        CorpusEntry(product_power(1.5, label="(1-z1)^1.5 z2"), "product",
                    {"s": 1.5}),
    ]
    if with_labels:
        for e in entries:
            for l in l_probe:
                for p in p_probe:
                    if e.family in ("polynomial", "entire"):
                        e.oracle_label[(l, p)] = "finite"
                    else:
                        e.oracle_label[(l, p)] = classify_norm(
                            domain, e.f, l, p)
        _enforce_monotone(entries, l_probe, p_probe)
    return entries


def _enforce_monotone(entries, l_probe, p_probe):
    """Divergence at order l forces divergence at higher orders."""
    for e in entries:
        for p in p_probe:
            seen_inf = False
            for l in sorted(l_probe):
                lab = e.oracle_label.get((l, p))
                if seen_inf:
                    e.oracle_label[(l, p)] = "infinite"
                elif lab == "infinite":
                    seen_inf = True
