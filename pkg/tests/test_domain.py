import numpy as np
import pytest

from hsconvex import domain as dom


def fd_gradient(domain, z, h=1e-6):
    n = domain.n
    out = np.zeros(n, dtype=complex)
    for j in range(n):
        ex = np.zeros(n, complex)
        ex[j] = h
        ey = np.zeros(n, complex)
        ey[j] = 1j * h
        dx = (domain.rho(z + ex) - domain.rho(z - ex)) / (2 * h)
        dy = (domain.rho(z + ey) - domain.rho(z - ey)) / (2 * h)
        out[j] = 0.5 * (dx - 1j * dy)
    return out


class TestEval:
    def test_ball_boundary_point(self, ball):
        r, g, a, bb = dom.domain_eval(ball, np.array([1.0, 0.0], complex))
        assert r == pytest.approx(0.0, abs=1e-14)
        assert np.allclose(g, [1.0, 0.0])
        assert np.allclose(a, np.eye(2))
        assert np.allclose(bb, 0.0)

    def test_ellipsoid_origin(self, ellipsoid):
        r, g, a, _ = dom.domain_eval(ellipsoid, np.zeros(2, complex))
        assert r == pytest.approx(-1.0)
        assert np.allclose(g, 0.0)
        assert np.allclose(np.diag(a), [2.0, 1.0])

    def test_perturbed_fd_oracle(self, perturbed, rng):
        pts = dom.random_shell_points(perturbed, rng, 20, (-0.08, 0.08))
        g = perturbed.grad(pts)
        for i in range(0, 20, 5):
            fd = fd_gradient(perturbed, pts[i])
            assert np.abs(fd - g[i]).max() <= 1e-6 * (1 + np.abs(g[i]).max())

    def test_nonfinite_rejected(self, ball):
        bad = dom.make_domain(
            2, lambda z: np.full(np.asarray(z).shape[:-1], np.nan),
            ball.grad, ball.hess_mixed, ball.hess_holo, 0.1, validate=False)
        with pytest.raises(FloatingPointError):
            dom.domain_eval(bad, np.array([1.0, 0.0], complex))

    def test_validation_rejects_nonconvex(self):
        with pytest.raises(dom.DomainValidationError):
            dom.perturbed_ball(beta=1.5)

    def test_validation_requires_interior_origin(self, ball):
        shifted = dom.make_domain(
            2, lambda z: np.sum(np.abs(np.asarray(z) - 2.0) ** 2, -1) - 1,
            lambda z: np.conj(np.asarray(z) - 2.0),
            ball.hess_mixed, ball.hess_holo, 0.1, validate=False)
        with pytest.raises(dom.DomainValidationError):
            dom.validate_domain(shifted, fd_check=False)


class TestProjection:
    def test_ball_outside(self, ball):
        bp = dom.project_boundary(ball, np.array([1.2, 0.0], complex))
        assert np.allclose(bp.xi, [1.0, 0.0], atol=1e-10)

    def test_ball_inside(self, ball):
        bp = dom.project_boundary(ball, np.array([0.9, 0.0], complex))
        assert np.allclose(bp.xi, [1.0, 0.0], atol=1e-10)

    def test_ellipsoid_vs_dense_argmin(self, ellipsoid):
        z = np.array([0.8, 0.0], complex)
        bp = dom.project_boundary(ellipsoid, z)
        assert np.allclose(bp.xi, [1 / np.sqrt(2), 0.0], atol=1e-8)
        # dense boundary sampling oracle
        th = np.linspace(0, 2 * np.pi, 20000, endpoint=False)
        cand = np.stack([np.cos(th) / np.sqrt(2), np.sin(th)], axis=-1)
        cand = cand * (1.0 / np.sqrt(2 * np.cos(th) ** 2 + np.sin(th) ** 2
                                     ))[:, None]
        # oracle along the real (z1, z2) slice through z
        vals = np.abs(cand[:, 0] - 0.8) ** 2 + np.abs(cand[:, 1]) ** 2
        assert np.sum(np.abs(z - bp.xi) ** 2) <= vals.min() + 1e-8

    def test_point_data_invariants(self, perturbed):
        bp = dom.project_boundary(perturbed,
                                  np.array([1.0 + 0.1j, 0.2], complex))
        assert abs(perturbed.rho(bp.xi)) <= 1e-10
        assert abs(np.linalg.norm(bp.normal) - 1.0) <= 1e-12
        g = perturbed.grad(bp.xi)
        for v in bp.ct_frame:
            assert abs(np.sum(g * v)) <= 1e-8

    def test_idempotence(self, perturbed, rng):
        pts = dom.random_shell_points(perturbed, rng, 10, (0.01, 0.09))
        xi = dom.project_boundary(perturbed, pts, 0.0)
        xi2 = dom.project_boundary(perturbed, xi + 0, 0.0)
        assert np.abs(xi - xi2).max() <= 1e-8

    def test_failure_carries_iterate(self, ball):
        with pytest.raises(dom.ProjectionError) as info:
            dom.radial_level(ball, np.array([[1.0, 0.0]], dtype=complex),
                             5.0, max_iter=1)
        assert info.value.residual is not None


class TestSymmetricPoint:
    def test_ball_radial(self, ball):
        zs = dom.symmetric_point(ball, np.array([1.2, 0.0], complex))
        assert np.allclose(zs, [0.8, 0.0], atol=1e-10)

    def test_ball_along_axis(self, ball):
        zs = dom.symmetric_point(ball, np.array([0.0, 1.05], complex))
        assert np.allclose(zs, [0.0, 0.95], atol=1e-10)

    def test_perturbed_distance_symmetry(self, perturbed):
        bp = dom.project_boundary(perturbed, np.array([1.0, 0.1], complex))
        z = bp.xi + 0.05 * bp.normal
        zs = dom.symmetric_point(perturbed, z)
        pr = dom.project_boundary(perturbed, z, with_frames=False)
        assert abs(np.linalg.norm(zs - pr) - np.linalg.norm(z - pr)) <= 1e-8
        assert perturbed.rho(zs) < 0

    def test_involution_comparability(self, ball, rng):
        pts = dom.random_shell_points(ball, rng, 50, (1e-3, 0.025))
        zs = dom.symmetric_point(ball, pts)
        ratio = np.abs(ball.rho(zs)) / np.abs(ball.rho(pts))
        assert np.all(ratio >= 0.5) and np.all(ratio <= 2.0)


class TestNormalForm:
    def test_ball_has_no_holo_part(self, ball):
        nf = dom.normalize_at(ball, np.array([0.0, 1.0], complex))
        assert np.abs(nf.b).max() == 0.0
        assert np.all(np.linalg.eigvalsh(nf.hermitian_form) > 0)

    def test_perturbed_quadratic_part(self, perturbed):
        xi = dom.project_boundary(perturbed,
                                  np.array([1.05, 0.0], complex)).xi
        nf = dom.normalize_at(perturbed, xi)
        assert np.abs(nf.b).max() > 1e-3

    def test_residual_cubic_order(self, perturbed, rng):
        xi = dom.project_boundary(perturbed,
                                  np.array([1.0, 0.1], complex)).xi
        nf = dom.normalize_at(perturbed, xi)
        radii = np.geomspace(1e-3, 1e-1, 7)
        w0 = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        w0 /= np.linalg.norm(w0)
        resid = []
        for r in radii:
            w = r * w0
            z = dom.normal_form_pushforward(perturbed, xi, nf, w)
            model = 2 * np.real(w[-1]) + np.real(
                np.conj(w) @ nf.hermitian_form @ w)
            resid.append(max(abs(perturbed.rho(z) - model), 1e-16))
        slope = np.polyfit(np.log(radii), np.log(resid), 1)[0]
        assert slope >= 2.9

    def test_positive_definite_everywhere(self, ellipsoid, rng):
        pts = dom.random_shell_points(ellipsoid, rng, 5, (-1e-6, 1e-6))
        for xi in pts:
            nf = dom.normalize_at(ellipsoid, xi)
            assert np.all(np.linalg.eigvalsh(nf.hermitian_form) > 0)

    def test_degenerate_gradient_rejected(self, ball):
        with pytest.raises(dom.ProjectionError):
            dom.normalize_at(ball, np.zeros(2, complex))
