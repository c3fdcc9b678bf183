import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hsconvex import continuation as cn, corpus, domain as dom, forms, homtype
from hsconvex.pipeline import PolynomialCn, taylor_sections


@pytest.fixture(scope="module")
def shell(ball):
    return forms.build_shell_grid(ball, 0.1, 3000, n_bands=8,
                                  nodes_per_band=3)


class TestCutoff:
    @given(st.floats(0.01, 10.0), st.floats(1.1, 4.0))
    @settings(max_examples=30, deadline=None)
    def test_profile_bounds(self, a, factor):
        chi = cn.Cutoff(a, a * factor)
        t = np.linspace(0, a * factor * 1.5, 200)
        v = chi(t)
        assert np.all((v >= 0) & (v <= 1))
        assert chi(a) == 1.0 and chi(a * factor) == 0.0
        assert np.all(np.diff(v) <= 1e-12)

    def test_derivative_matches_fd(self):
        chi = cn.Cutoff(0.05, 0.1)
        t = np.linspace(0.051, 0.099, 40)
        fd = (chi(t + 1e-7) - chi(t - 1e-7)) / 2e-7
        assert np.abs(fd - chi.deriv(t)).max() <= 1e-5


class TestSymmetryContinuation:
    def test_linear_exact_jets(self, ball, rng):
        # degree-1 function with order-2 jets: dbar vanishes off the ramp
        f = corpus.monomial((1, 0))
        cont = cn.extend_by_symmetry(ball, f, m=2, eps=0.1)
        pts = dom.random_shell_points(ball, rng, 40, (0.001, 0.049))
        db = cont.dbar_eval(pts)
        assert np.abs(db).max() <= 1e-10

    def test_m1_fd_oracle(self, ball, rng):
        f = corpus.exp_function((1.0, 0.5))
        cont = cn.extend_by_symmetry(ball, f, m=1, eps=0.1)
        pts = dom.random_shell_points(ball, rng, 15, (0.02, 0.08))
        db = cont.dbar_eval(pts)
        h = 1e-5
        for j in range(2):
            ex = np.zeros(2, complex)
            ex[j] = h
            ey = np.zeros(2, complex)
            ey[j] = 1j * h
            fd = ((cont.f_eval(pts + ex) - cont.f_eval(pts - ex)) / (2 * h)
                  + 1j * (cont.f_eval(pts + ey) - cont.f_eval(pts - ey))
                  / (2 * h)) / 2
            rel = np.abs(fd - db[:, j]) / np.maximum(np.abs(db[:, j]), 1e-6)
            assert rel.max() <= 1e-3

    def test_support_height(self, ball, rng):
        f = corpus.monomial((1, 0))
        cont = cn.extend_by_symmetry(ball, f, m=2, eps=0.1)
        dirs = dom.random_unit_directions(rng, 10, 2)
        far = dom.radial_level(ball, dirs, 0.11)[:, None] * dirs
        assert np.abs(cont.f_eval(far)).max() == 0.0

    def test_decay_order_along_ray(self, ball):
        # generic ray away from the singular direction (rays through points
        # with z1* = 0 degenerate: every surviving jet term carries a power
        # of z1 - z1* for this one-variable function)
        f = corpus.power_function(-0.3)
        cont = cn.extend_by_symmetry(ball, f, m=3, eps=0.1)
        heights = np.geomspace(3e-4, 3e-2, 8)
        direction = np.array([0.6, 0.8], complex)
        ray = np.sqrt(1 + heights)[:, None] * direction[None, :]
        db = np.abs(cont.dbar_eval(ray)).sum(axis=1)
        slope = np.polyfit(np.log(heights), np.log(db), 1)[0]
        assert slope >= 3 - 1 - 0.2

    def test_requires_derivatives(self, ball):
        f = forms.HoloFunction(eval=lambda z: z[..., 0], deriv=None,
                               validity=np.inf, label="bare")
        with pytest.raises(ValueError):
            cn.extend_by_symmetry(ball, f, m=2)


class TestGlobalContinuation:
    def test_constant_sequence_dbar_vanishes_inside(self, ball, rng):
        p = PolynomialCn({(0, 0): 1.0})
        cont = cn.extend_by_global(ball, [p, p, p], eps=0.1)
        pts = dom.random_shell_points(ball, rng, 30, (0.001, 0.049))
        assert np.abs(cont.dbar_eval(pts)).max() == 0.0

    def test_two_term_closed_form(self):
        big = dom.ball(eps_shell=1.0)
        p2 = PolynomialCn({})
        p4 = PolynomialCn({(0, 0): 1.0})
        cont = cn.extend_by_global(big, [p2, p4], eps=1.0)
        rng = np.random.default_rng(0)
        pts = dom.random_shell_points(big, rng, 500, (0.01, 0.99))
        rho = big.rho(pts)
        lam = cont.lambda_field(pts)
        on_shell1 = (rho > 0.5) & (rho <= 1.0)
        assert np.allclose(lam[on_shell1], 1.0 / rho[on_shell1])
        db = np.abs(cont.dbar_eval(pts)).sum(axis=1)
        # defect supported in the blend zone, bounded by the cutoff scale
        live = db > 1e-14
        assert np.all(rho[live] > 0.5)
        chi_scale = cont.meta["chi_lipschitz"]
        g1 = np.abs(big.grad(pts)).sum(axis=1)
        bound = (2.0 * chi_scale + chi_scale) * g1 * \
            np.maximum(lam, 1.0 / rho)
        assert np.all(db[live] <= bound[live] * 1.05)

    def test_interface_continuity(self, ball):
        degrees = [2, 4, 8, 16]
        p_seq = taylor_sections(
            lambda a: 1.0 / (np.prod([np.math.factorial(x) for x in a])
                             if False else 1.0)
            if sum(a) == 0 else 0.3 ** sum(a), degrees)
        cont = cn.extend_by_global(ball, p_seq, eps=0.1)
        for k in (4, 5):
            rho0 = 2.0 ** -k
            r = np.sqrt(1 + rho0)
            z = np.array([[r * np.cos(0.3), r * np.sin(0.3)]],
                         dtype=complex)
            up = cont.f_eval(z * (1 + 1e-10))
            dn = cont.f_eval(z * (1 - 1e-10))
            assert abs(up - dn) <= 1e-7 * max(1.0, abs(up))

    def test_needs_two_terms(self, ball):
        with pytest.raises(ValueError):
            cn.extend_by_global(ball, [PolynomialCn({(0, 0): 1.0})])


class TestVerifyPac:
    def test_zero_defect_zero_function(self, ball, shell):
        cont = cn.Continuation(
            kind="global",
            f_eval=lambda z: np.zeros(np.asarray(z).shape[:-1], complex),
            dbar_eval=lambda z: np.zeros(np.asarray(z).shape, complex),
            support_height=0.1, domain=ball)
        rep = cn.verify_pac(cont, shell, np.zeros((1, 2), complex),
                            lambda z: np.zeros(z.shape[0], complex))
        assert np.abs(rep["values"]).max() == 0.0

    def test_polynomial_reconstruction(self, ball, shell):
        f = corpus.monomial((2, 0))
        cont = cn.extend_by_symmetry(ball, f, m=3, eps=0.1)
        zs = np.array([[0.0, 0.0], [0.3, 0.0], [0.1, 0.2]], complex)
        rep = cn.verify_pac(cont, shell, zs, f)
        assert rep["max_rel_err"] <= 1e-2

    def test_global_from_taylor_sections_improves_with_k(self):
        # run on the wide-shell ball so the low dyadic shells, where the
        # section differences are O(1), fall inside the support
        big = dom.ball(eps_shell=1.0)
        sh = forms.build_shell_grid(big, 1.0, 3000, n_bands=8,
                                    nodes_per_band=3)
        truth = corpus.exp_function((1.0, 0.0))
        errs = []
        for kmax in (2, 3, 4):
            degrees = [2 ** k for k in range(1, kmax + 1)]
            p_seq = taylor_sections(
                lambda a: 0.0 if a[1] else 1.0 / _fact(a[0]), degrees)
            cont = cn.extend_by_global(big, p_seq, eps=1.0)
            rep = cn.verify_pac(cont, sh,
                                np.array([[0.2, 0.1]], complex), truth)
            errs.append(rep["max_rel_err"])
        assert errs[1] <= 1.2 * errs[0] and errs[2] <= 1.2 * errs[1]

    def test_error_decreases_with_resolution(self, ball):
        f = corpus.monomial((2, 1))
        cont = cn.extend_by_symmetry(ball, f, m=3, eps=0.1)
        zs = np.array([[0.3, 0.2], [0.0, 0.0]], complex)
        errs = []
        for res, nb, npb in ((3000, 8, 2), (6000, 8, 3)):
            sh = forms.build_shell_grid(ball, 0.1, res, n_bands=nb,
                                        nodes_per_band=npb)
            errs.append(cn.verify_pac(cont, sh, zs, f)["max_rel_err"])
        assert errs[1] <= errs[0] / 1.4


def _fact(m):
    out = 1
    for i in range(2, m + 1):
        out *= i
    return out


class TestSobolevFunctional:
    def test_zero_defect(self, ball):
        p = PolynomialCn({(0, 0): 1.0})
        cont = cn.extend_by_global(ball, [p, p], eps=0.1)
        grid = homtype.build_boundary_grid(ball, 0.0, 2000, kind="random",
                                           seed=3)
        centers = homtype.stratified_centers(grid, n_bulk=6,
                                             n_per_annulus=1, n_annuli=4)
        val = cn.sobolev_functional(cont, 1, 2.0, eta=0.25, eps=0.04,
                                    centers=centers,
                                    resolution=(8, 1, 4, 4, 4))
        assert val == 0.0

    def test_smooth_stable_vs_singular_divergent(self, ball):
        from hsconvex.sphere import graded_angular_mesh
        mesh = graded_angular_mesh(n_phi2=6, alpha_floor=5e-4,
                                   phi_floor=1e-6, q=(4, 3), deg_hint=8)
        src = homtype.build_boundary_grid(ball, 0.0, mesh=mesh)
        stages = [(6, (10, 2, 6, 6, 6)), (8, (12, 2, 6, 6, 6)),
                  (10, (14, 2, 6, 6, 6))]

        def run(f, l):
            cont = cn.extend_by_symmetry(ball, f, m=l + 1, eps=0.1)
            vals = []
            for ann, res in stages:
                centers = homtype.stratified_centers(
                    src, n_bulk=10, n_per_annulus=2, n_annuli=ann, seed=7)
                vals.append(cn.sobolev_functional(
                    cont, l, 2.0, eta=0.25, eps=0.025, centers=centers,
                    resolution=res))
            return vals

        smooth = run(corpus.monomial((2, 1)), 2)
        assert cn.sobolev_verdict(smooth) == "finite"
        singular = run(corpus.power_function(0.6), 2)
        assert cn.sobolev_verdict(singular) == "infinite"
