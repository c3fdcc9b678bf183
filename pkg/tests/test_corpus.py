import numpy as np
import pytest

from hsconvex import corpus, forms


@pytest.fixture(scope="module")
def entries(ball):
    return corpus.build_corpus(ball)


def fd_dbar_check(f, z, h=1e-6):
    """Cauchy-Riemann residual of eval by central differences."""
    out = []
    for j in range(2):
        ex = np.zeros(2, complex)
        ex[j] = h
        ey = np.zeros(2, complex)
        ey[j] = 1j * h
        db = ((f(z + ex) - f(z - ex)) / (2 * h)
              + 1j * (f(z + ey) - f(z - ey)) / (2 * h)) / 2
        out.append(abs(db))
    return max(out)


class TestEntries:
    def test_count_and_families(self, entries):
        assert len(entries) >= 8
        fams = {e.family for e in entries}
        assert {"polynomial", "entire", "power_singularity",
                "log_singularity", "product"} <= fams

    def test_cauchy_riemann(self, entries):
        z = np.array([0.4 + 0.1j, -0.3 + 0.2j])
        for e in entries:
            scale = max(1.0, abs(complex(e.f(z))))
            assert fd_dbar_check(e.f, z) <= 1e-6 * scale

    def test_derivatives_match_fd(self, entries):
        z = np.array([0.35 - 0.2j, 0.1 + 0.4j])
        h = 1e-5
        for e in entries:
            for alpha in ((1, 0), (0, 1), (2, 0)):
                j = 0 if alpha == (1, 0) or alpha == (2, 0) else 1
                lower = tuple(a - (1 if i == j else 0)
                              for i, a in enumerate(alpha))
                if min(lower) < 0:
                    continue
                ex = np.zeros(2, complex)
                ex[j] = h
                fd = (e.f.d(lower, z + ex) - e.f.d(lower, z - ex)) / (2 * h)
                exact = e.f.d(alpha, z)
                assert abs(fd - exact) <= 1e-5 * max(1.0, abs(exact))


class TestOracleLabels:
    def test_polynomials_always_finite(self, entries):
        for e in entries:
            if e.family in ("polynomial", "entire"):
                assert all(v == "finite" for v in e.oracle_label.values())

    def test_power_06_pattern(self, entries):
        e = next(x for x in entries if x.params.get("s") == 0.6
                 and x.family == "power_singularity")
        assert e.oracle_label[(1, 2.0)] == "finite"
        assert e.oracle_label[(2, 2.0)] == "infinite"
        assert e.oracle_label[(1, 4.0)] == "finite"
        assert e.oracle_label[(2, 4.0)] == "infinite"

    def test_log_pattern(self, entries):
        e = next(x for x in entries if x.family == "log_singularity")
        assert e.oracle_label[(0, 2.0)] == "finite"
        assert e.oracle_label[(2, 2.0)] == "infinite"
        # order one at p = 2 is exactly logarithmically divergent
        assert e.oracle_label[(1, 2.0)] == "unknown"

    def test_monotone_in_l(self, entries):
        for e in entries:
            for p in (2.0, 4.0):
                seen_inf = False
                for l in (0, 1, 2, 3):
                    lab = e.oracle_label[(l, p)]
                    if seen_inf:
                        assert lab == "infinite"
                    if lab == "infinite":
                        seen_inf = True

    def test_product_z2_damping(self, entries):
        # the z2 factor vanishes on the singular ray and damps the top
        # derivative: the bare power diverges at order 3 while the product
        # sits exactly on the logarithmic borderline
        base = next(x for x in entries if x.params.get("s") == 1.5
                    and x.family == "power_singularity")
        prod = next(x for x in entries if x.family == "product")
        assert base.oracle_label[(3, 2.0)] == "infinite"
        assert prod.oracle_label[(3, 2.0)] == "unknown"

    def test_smoothness_rank_order(self, entries):
        ranks = {e.f.label: e.smoothness_rank() for e in entries}
        assert ranks["(1-z1)^2.5"] > ranks["(1-z1)^1.5"] > \
            ranks["(1-z1)^0.6"] > ranks["log(1-z1)"]
        assert ranks["exp(z1+2z2)"] == np.inf
