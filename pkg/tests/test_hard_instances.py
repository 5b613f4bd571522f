import itertools
import math

import numpy as np
import pytest

from padua.errors import ValidationError
from padua.hard_instances import (
    PSI0,
    BumpSum,
    bump,
    cell_centers,
    export_csv,
    gaussian_kl_mc,
    hard_pair,
    kl_budget,
    mollifier_eval,
    mollifier_norm,
    packing_family,
    packing_separation,
    squeezed,
)

from reference import (
    MOLLIFIER_1D,
    MOLLIFIER_2D,
    MOLLIFIER_2D_POINTS,
    MOLLIFIER_POINTS,
    MOLLIFIER_SUP,
    kl_gauss,
)

GRID = np.linspace(-1, 1, 4096)


class TestMollifier:
    def test_examples(self):
        assert mollifier_eval(0.0) == pytest.approx(math.exp(-1), rel=1e-15)
        assert mollifier_eval(1.0) == 0.0 and mollifier_eval(-1.0) == 0.0
        assert mollifier_eval(0.5) == pytest.approx(0.263597, abs=1e-6)

    @pytest.mark.parametrize("order", [0, 1, 2])
    def test_analytic_against_symbolic(self, order):
        got = mollifier_eval(np.array(MOLLIFIER_POINTS), order)
        np.testing.assert_allclose(got, MOLLIFIER_1D[order], rtol=1e-12, atol=1e-15)

    def test_third_order_finite_difference(self):
        got = mollifier_eval(np.array(MOLLIFIER_POINTS), 3)
        np.testing.assert_allclose(got, MOLLIFIER_1D[3], rtol=1e-4, atol=1e-4)

    @pytest.mark.parametrize("alpha", sorted(MOLLIFIER_2D))
    def test_2d_partials(self, alpha):
        got = mollifier_eval(np.array(MOLLIFIER_2D_POINTS), alpha)
        np.testing.assert_allclose(got, MOLLIFIER_2D[alpha], rtol=1e-12)

    def test_outside_ball(self):
        assert mollifier_eval(np.array([0.8, 0.7]), (0, 0)) == 0.0
        np.testing.assert_array_equal(mollifier_eval(np.array([1.2, -3.0]), 2), 0.0)

    def test_boundary_decay(self):
        radii = 1 - 10.0 ** -np.arange(2, 7)
        for order in (0, 1, 2):
            v = np.abs(mollifier_eval(radii, order))
            assert np.all(np.diff(v) <= 0)
            assert v[-1] <= 1e-8
        u = np.array([1.0, 1.0]) / math.sqrt(2) * (1 - 1e-6)
        for alpha in ((0, 0), (1, 0), (1, 1), (0, 2)):
            assert abs(mollifier_eval(u, alpha)) <= 1e-8

    def test_norm(self):
        assert mollifier_norm(1.0) == pytest.approx(MOLLIFIER_SUP[1], rel=1e-6)
        assert mollifier_norm(2.0) == pytest.approx(MOLLIFIER_SUP[2], rel=1e-5)
        assert mollifier_norm(0.5) >= MOLLIFIER_SUP[0]
        assert mollifier_norm(1.5) >= MOLLIFIER_SUP[1]
        with pytest.raises(ValidationError):
            mollifier_norm(0.0)


class TestSqueezed:
    def test_center_and_support(self):
        assert squeezed(0.5, 0.0) == pytest.approx(PSI0)
        x = np.array([0.25, 0.3, -0.25, -0.9])
        np.testing.assert_array_equal(squeezed(0.25, x, 0), 0.0)

    @pytest.mark.parametrize("rho", [1.0, 0.5, 0.25])
    def test_derivative_scaling(self, rho):
        x = np.linspace(-rho, rho, 400_001)
        got = np.abs(squeezed(rho, x, 1)).max()
        assert got == pytest.approx(MOLLIFIER_SUP[1] / rho, rel=1e-3)

    def test_invalid(self):
        with pytest.raises(ValidationError):
            squeezed(0.0, 0.1)

    def test_bump(self):
        assert bump(0.0, 0.5) == pytest.approx(1.0)
        assert bump(0.25, 0.5) == 0.0


class TestHardPair:
    def test_sup_example(self):
        hp = hard_pair(K=4, psi0=1.0, nu=1.0)
        want = 0.5 / max(math.exp(-1), MOLLIFIER_SUP[1])
        x = np.linspace(-1, 1, 200_001)
        assert np.abs(hp.f2(x)).max() == pytest.approx(want, rel=1e-6)
        assert hp.rho == 0.5 and hp.K == 4

    @pytest.mark.parametrize("nu", [0.5, 1.0, 1.5, 2.0])
    def test_sup_formula(self, nu):
        hp = hard_pair(K=8, psi0=0.7, nu=nu, cell=3)
        x = np.linspace(-1, 1, 160_001)
        want = 0.7 * hp.rho**nu / hp.psi_norm
        assert np.abs(hp.f2(x)).max() == pytest.approx(want, rel=1e-6)
        assert hp.f2_norm_bound == pytest.approx(0.7 * 2**nu * math.e)

    def test_f1_and_support(self):
        hp = hard_pair(K=5, psi0=1.0, nu=1.0, cell=2)
        x = np.linspace(-1, 1, 10_001)
        np.testing.assert_array_equal(hp.f1(x), 0.0)
        lo, hi = -1 + 2 * hp.rho, -1 + 3 * hp.rho
        outside = (x <= lo) | (x >= hi)
        np.testing.assert_array_equal(hp.f2(x[outside]), 0.0)
        assert hp.cell_center[0] == pytest.approx((lo + hi) / 2)

    def test_boundaries_vanish(self):
        hp = hard_pair(K=4, psi0=1.0, nu=2.0, cell=1)
        edges = -1 + hp.rho * np.arange(5)
        for a in (0, 1, 2):
            np.testing.assert_array_equal(hp.f2.eval(edges, a), 0.0)

    def test_no_jumps_across_boundaries(self):
        hp = hard_pair(K=4, psi0=1.0, nu=2.0, cell=2)
        edges = -1 + hp.rho * np.arange(1, 4)
        for a in (0, 1, 2):
            for e in edges:
                left = hp.f2.eval(e - 1e-9, a)
                right = hp.f2.eval(e + 1e-9, a)
                assert abs(left - right) <= 1e-6

    def test_2d(self):
        hp = hard_pair(K=3, psi0=1.0, nu=1.0, d=2, cell=(1, 2))
        axis = np.linspace(-1, 1, 601)
        X = np.stack(np.meshgrid(axis, axis, indexing="ij"), -1).reshape(-1, 2)
        v = hp.f2(X)
        assert np.abs(v).max() == pytest.approx(hp.amplitude, rel=1e-3)
        np.testing.assert_allclose(hp.cell_center, [0.0, 2 / 3])

    def test_invalid(self):
        with pytest.raises(ValidationError):
            hard_pair(K=0, psi0=1, nu=1)
        with pytest.raises(ValidationError):
            hard_pair(K=4, psi0=1, nu=1, cell=4)
        with pytest.raises(ValidationError):
            hard_pair(K=4, psi0=1, nu=1, d=2, cell=(0, 5))

    def test_csv(self, tmp_path):
        hp = hard_pair(K=4, psi0=1.0, nu=1.0)
        hp.to_csv(tmp_path / "hp.csv", m=300)
        data = np.loadtxt(tmp_path / "hp.csv", delimiter=",", skiprows=1)
        assert data.shape == (300, 3)


class TestPacking:
    def test_zero_member(self):
        fam = packing_family(4, 1.0, J=3)
        np.testing.assert_array_equal(fam[0](GRID), 0.0)

    def test_one_vs_zero(self):
        fam = packing_family(4, 1.0, J=2)
        dist = np.abs(fam[1](np.linspace(-1, 1, 200_001)) - fam[0](np.linspace(-1, 1, 200_001))).max()
        assert dist == pytest.approx(0.5 / max(math.exp(-1), MOLLIFIER_SUP[1]), rel=1e-3)

    def test_pairwise_separation(self):
        fam = packing_family(4, 1.0)
        assert len(fam) == 16
        vals = np.array([f(GRID) for f in fam])
        # the 4096-grid misses the exact peak by O(h^2); allow that
        bound = packing_separation(4, 1.0) * (1 - 1e-3)
        for i, j in itertools.combinations(range(16), 2):
            assert np.abs(vals[i] - vals[j]).max() >= bound

    def test_cap_and_bits(self):
        fam = packing_family(12, 2.0, J=1024)
        assert len(fam) == 1024
        np.testing.assert_array_equal(fam[5].coeffs[:4], [1, 0, 1, 0])
        with pytest.raises(ValidationError):
            packing_family(4, 1.0, J=17)
        with pytest.raises(ValidationError):
            packing_family(12, 1.0, J=2000)

    def test_members_smooth(self):
        fam = packing_family(4, 2.0, J=16)
        edges = -1 + 0.5 * np.arange(5)
        for f in fam[::5]:
            for a in (0, 1, 2):
                np.testing.assert_array_equal(f.eval(edges, a), 0.0)
                for e in edges[1:-1]:
                    assert abs(f.eval(e - 1e-9, a) - f.eval(e + 1e-9, a)) <= 1e-6

    def test_periodic(self, rng):
        f = packing_family(4, 1.0, J=16)[15]
        x = rng.uniform(-1, 1, 500)
        np.testing.assert_allclose(f(x), f(x + 2), atol=1e-12)

    def test_bumpsum_validation(self):
        with pytest.raises(ValidationError):
            BumpSum(3, 1, 1.0, 1.0, np.zeros(2))
        np.testing.assert_allclose(cell_centers(2, 1)[:, 0], [-0.5, 0.5])


class TestKL:
    def test_worked_example(self):
        r = kl_budget(n=1000, K=10, psi0=1.0, sigma=1.0, nu=1.0, d=1, psi_norm=1.0)
        assert r.budget == 2.0
        assert r.error_prob_bound == 0.0

    def test_zero_and_sigma_scaling(self):
        assert kl_budget(0, 10, 1.0, 1.0, 1.0, psi_norm=1.0).budget == 0.0
        a = kl_budget(500, 6, 1.0, 0.5, 1.5).budget
        b = kl_budget(500, 6, 1.0, 1.0, 1.5).budget
        assert a / b == pytest.approx(4.0, rel=1e-12)

    def test_min_K(self):
        r = kl_budget(1000, 10, 1.0, 1.0, 1.0, psi_norm=1.0)
        assert r.min_K == math.ceil((1000 / 4) ** (1 / 3))
        assert kl_budget(1, 1, 1.0, 1.0, 1.0, psi_norm=1.0).min_K == 1

    def test_error_probability(self):
        r = kl_budget(10, 10, 1.0, 1.0, 1.0, psi_norm=1.0)
        assert r.error_prob_bound == pytest.approx((1 - math.sqrt(r.budget / 2)) / 2)

    def test_invalid(self):
        with pytest.raises(ValidationError):
            kl_budget(10, 2, 1.0, 0.0, 1.0)

    def test_gaussian_kl_monte_carlo(self):
        mean, se = gaussian_kl_mc(1.0, 1.0, 10**6, np.random.default_rng(0))
        assert mean == pytest.approx(kl_gauss(1.0, 1.0), rel=0.05)
        assert se > 0


def test_export_csv(tmp_path):
    export_csv(tmp_path / "x.csv", {"a": packing_family(2, 1.0, J=2)[1]}, m=50)
    lines = open(tmp_path / "x.csv").read().splitlines()
    assert lines[0] == "x,a" and len(lines) == 51
