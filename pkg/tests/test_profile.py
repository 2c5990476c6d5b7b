"""Closed-form profile objects: pinned values, identities, residuals."""

import numpy as np
import pytest

import hp_oracles as hp
from wavemaplab import profile as wp


def fd1(f, x, h):
    # 4th-order centered first derivative of a callable
    return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h)


def wronskian_fd(f, g, x, h):
    return f(x) * fd1(g, x, h) - fd1(f, x, h) * g(x)


class TestUStar:
    def test_pinned_values(self):
        assert wp.u_star(1.0, 0.0, 0.0) == pytest.approx(2.0, abs=1e-14)
        assert wp.u_star(1.0, 0.0, 1.0) == pytest.approx(np.pi / 2, abs=1e-14)
        # time translation: shifting t and T together changes nothing
        assert wp.u_star(2.0, 1.0, 1.0) == pytest.approx(np.pi / 2, abs=1e-14)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            wp.u_star(1.0, 1.0, 0.5)
        with pytest.raises(ValueError):
            wp.u_star(1.0, 1.5, 0.5)
        with pytest.raises(ValueError):
            wp.u_star(1.0, 0.0, -0.1)

    def test_series_branch_seam(self):
        # values just below and above the cancellation cut agree smoothly;
        # u_star(1, 0, r) is the same closed form as psi_star's first slot
        for r in (0.009, 0.0099, 0.0101, 0.011):
            want = hp.eval_mp(hp.psi_star1_mp, r)
            assert wp.u_star(1.0, 0.0, r) == pytest.approx(want, rel=1e-14)


class TestPsiStar:
    def test_endpoints(self):
        p1, p2 = wp.psi_star(0.0)
        assert (p1, p2) == pytest.approx((2.0, 2.0), abs=1e-14)
        p1, p2 = wp.psi_star(1.0)
        assert (p1, p2) == pytest.approx((np.pi / 2, 1.0), abs=1e-14)

    def test_domain(self):
        with pytest.raises(ValueError):
            wp.psi_star(1.2)
        with pytest.raises(ValueError):
            wp.psi_star(-0.1)

    def test_static_identity(self):
        # psi2 = psi1 + rho * psi1' with the derivative in closed form
        rho = np.linspace(0.02, 1.0, 1000)
        p1, p2 = wp.psi_star(rho)
        dp1 = (2.0 / rho) * (1.0 / (1.0 + rho * rho) - np.arctan(rho) / rho)
        res = p2 - p1 - rho * dp1
        assert np.max(np.abs(res)) < 1e-12
        # at the origin the identity reduces to psi1(0) = psi2(0)
        p1, p2 = wp.psi_star(0.0)
        assert p1 == p2


class TestEmbed:
    def test_origin_is_north_pole(self):
        out = wp.corotational_embed(17.3, 0.0, np.array([1.0, 0.0, 0.0]))
        assert np.allclose(out, [0.0, 0.0, 0.0, 1.0], atol=1e-15)

    def test_quarter_turn(self):
        out = wp.corotational_embed(np.pi / 2, 1.0, np.array([1.0, 0.0, 0.0]))
        assert np.allclose(out, [1.0, 0.0, 0.0, 0.0], atol=1e-15)

    def test_unit_norm(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            u = rng.normal(scale=3.0)
            r = rng.uniform(0.0, 2.0)
            d = rng.normal(size=3)
            d /= np.linalg.norm(d)
            out = wp.corotational_embed(u, r, d)
            assert abs(np.linalg.norm(out) - 1.0) < 1e-15


class TestModes:
    def test_eigenfunction_g_values(self):
        assert wp.eigenfunction_g(0.0) == pytest.approx((1.0, 2.0), abs=1e-15)
        assert wp.eigenfunction_g(1.0) == pytest.approx((0.5, 0.5), abs=1e-15)

    def test_g1_annihilated_at_lambda_one(self):
        # residual via hand derivatives of 1/(1+rho^2); the 4/rho term is
        # folded against g1' analytically so the origin stays benign
        rho = np.linspace(1e-3, 0.99, 500)
        w = 1.0 / (1.0 + rho * rho)
        g1 = w
        d2 = (6.0 * rho * rho - 2.0) * w**3
        term1 = (rho * rho - 1.0) * d2
        term_d1 = (-12.0 * rho * rho + 8.0) * w * w  # (6 rho - 4/rho) * g1'
        res = term1 + term_d1 + 6.0 * g1 - 16.0 * w * w * g1
        assert np.max(np.abs(res)) < 1e-12

    def test_gtilde1_pinned_value(self):
        assert wp.gtilde1(0.5) == pytest.approx(-15.52666101439307, abs=1e-10)

    def test_gtilde1_matches_oracle(self):
        for r in (0.05, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99):
            want = hp.eval_mp(hp.gtilde1_mp, r)
            assert wp.gtilde1(r) == pytest.approx(want, rel=1e-13)

    def test_gtilde1_residual(self):
        for r in np.linspace(0.1, 0.9, 17):
            res = hp.spectral_residual(hp.gtilde1_mp, r, 1.0)
            assert abs(res) < 1e-10

    def test_gtilde1_domain(self):
        for bad in (0.0, 1.0, -0.2, 1.3):
            with pytest.raises(ValueError):
                wp.gtilde1(bad)

    def test_wronskian_g_pair(self):
        # W(g1, gtilde1) rho^4 (1 - rho^2) = 3, derivative by high-precision diff
        for r in (0.2, 0.5, 0.8):
            w = hp.wronskian_mp(hp.g1_mp, hp.gtilde1_mp, r)
            assert w.real * r**4 * (1 - r * r) == pytest.approx(3.0, abs=1e-10)

    def test_wronskian_g_pair_fd_on_package(self):
        # same identity measured directly on the package functions
        for r in (0.2, 0.5, 0.8):
            h = 1.5e-4 * min(r, 1.0 - r)
            w = wronskian_fd(
                lambda x: wp.eigenfunction_g(x)[0], wp.gtilde1, r, h
            )
            assert w * r**4 * (1 - r * r) == pytest.approx(3.0, abs=1e-10)


class TestFreePair:
    def test_psi0_origin_limit(self):
        assert wp.free_psi0_psi1(0.0)[0] == pytest.approx(1.0 / 3.0, abs=1e-15)

    def test_branch_seam(self):
        for r in (0.008, 0.0099, 0.0101, 0.02):
            want = hp.eval_mp(hp.psi0_mp, r)
            assert wp.free_psi0_psi1(r)[0] == pytest.approx(want, rel=1e-14)

    def test_wronskian(self):
        # W(psi0, psi1) rho^4 (1-rho^2) = -1 using the exact psi1' = -3/rho^4
        for r in (0.25, 0.5, 0.75):
            psi0, psi1 = wp.free_psi0_psi1(r)
            dpsi1 = -3.0 * r**-4.0
            dpsi0 = 1.0 / (r * (1 - r * r)) - 3.0 * (np.arctanh(r) - r) / r**4
            w = psi0 * dpsi1 - dpsi0 * psi1
            assert w * r**4 * (1 - r * r) == pytest.approx(-1.0, abs=1e-10)

    def test_psi0_residual_free_equation(self):
        for r in np.linspace(0.1, 0.9, 9):
            res = hp.free_residual(hp.psi0_mp, r, 1.0)
            assert abs(res) < 1e-10
        for r in np.linspace(0.1, 0.9, 9):
            res = hp.free_residual(hp.psi1_mp, r, 1.0)
            assert abs(res) < 1e-10


class TestBesselPair:
    LAM = 0.5 + 2.0j

    def test_vanishes_at_origin(self):
        assert abs(wp.bessel_b(1, 1e-8, self.LAM)) < 1e-12
        assert abs(wp.bessel_b(1, 0.0, self.LAM)) == 0.0

    def test_lambda_one_rejected(self):
        with pytest.raises(ValueError):
            wp.bessel_b(1, 0.3, 1.0)

    def test_matches_oracle(self):
        for r in (0.05, 0.3, 0.7, 0.95):
            for j, ref in ((1, hp.b1_mp), (2, hp.b2_mp)):
                want = hp.eval_mp(ref, r, self.LAM)
                got = wp.bessel_b(j, r, self.LAM)
                assert abs(got - want) < 1e-12 * (1 + abs(want))

    def test_branch_seam(self):
        # |x| = |1-lam| atanh(rho) crosses the cut near rho = 0.01/|1-lam|;
        # the series side is machine-exact, the direct side loses ~4 digits
        # to the cos - sin/x cancellation right at the cut
        lam = 0.5 + 2.0j
        for r, tol in ((0.0040, 1e-14), (0.0048, 1e-14), (0.0050, 1e-11), (0.0060, 1e-11)):
            want = hp.eval_mp(hp.b1_mp, r, lam)
            got = wp.bessel_b(1, r, lam)
            assert abs(got - want) < tol * abs(want)

    def test_wronskian(self):
        r, lam = 0.3, self.LAM
        h = 3e-4
        w = wronskian_fd(
            lambda x: wp.bessel_b(1, x, lam), lambda x: wp.bessel_b(2, x, lam), r, h
        )
        assert abs(w - 1j * (1 - lam)) < 1e-10

    def test_b1_residual(self):
        for r in (0.2, 0.5, 0.8):
            res = hp.bessel_residual(lambda x: hp.b1_mp(x, self.LAM), r, self.LAM)
            assert abs(res) < 1e-8

    def test_b1_residual_fd_on_package(self):
        # float64 check straight on the package function
        lam = self.LAM
        for r in (0.3, 0.5, 0.7):
            h = 2e-3 * min(r, 1 - r)
            f = lambda x: wp.bessel_b(1, x, lam)
            d2 = (-f(r - 2 * h) + 16 * f(r - h) - 30 * f(r) + 16 * f(r + h) - f(r + 2 * h)) / (
                12 * h * h
            )
            phi = np.arctanh(r)
            pot = (2 * lam - lam**2) / (1 - r * r) ** 2 - 2 / (phi**2 * (1 - r * r) ** 2)
            assert abs(d2 + pot * f(r)) < 1e-8


class TestPurePowerPair:
    def test_lambda_one_closed_form(self):
        rho = np.linspace(0.0, 0.99, 50)
        got = wp.free_w(1, rho, 1.0)
        assert np.allclose(got, np.sqrt(1 - rho * rho), atol=1e-15)

    def test_matches_oracle(self):
        lam = 0.5 + 3.0j
        for r in (0.1, 0.5, 0.9, 0.999):
            for j, ref in ((1, hp.w1_mp), (2, hp.w2_mp)):
                want = hp.eval_mp(ref, r, lam)
                got = wp.free_w(j, r, lam)
                assert abs(got - want) < 1e-12 * (1 + abs(want))

    def test_wronskian(self):
        r, lam = 0.5, 0.5 + 3.0j
        h = 3e-4
        w = wronskian_fd(
            lambda x: wp.free_w(1, x, lam), lambda x: wp.free_w(2, x, lam), r, h
        )
        assert abs(w - 2 * (1 - lam)) < 1e-10

    def test_w2_residual(self):
        lam = 0.5 + 3.0j
        for r in (0.2, 0.5, 0.8):
            res = hp.pure_power_residual(lambda x: hp.w2_mp(x, lam), r, lam)
            assert abs(res) < 1e-8


class TestPotentials:
    def test_pinned_values(self):
        assert wp.potential_V(0.0) == -16.0
        assert wp.potential_V(1.0) == -4.0
        assert wp.potential_VN(0.0) == -16.0
        assert wp.potential_VN(1.0) == 0.0

    def test_weighted_identity(self):
        rho = np.linspace(0.0, 1.0, 257)
        assert np.array_equal(
            wp.potential_VN(rho), wp.potential_V(rho) * (1 - rho * rho)
        )


class TestNonlinearity:
    def test_zero_perturbation(self):
        rho = np.linspace(0.0, 1.0, 101)
        assert np.all(wp.nonlinearity_N(0.0, rho) == 0.0)

    def test_origin_cubic(self):
        # N(u, 0) = -8 u^2 - (4/3) u^3
        for u in (1.0, 2.0, -0.3, 0.004):
            want = -8.0 * u * u - (4.0 / 3.0) * u**3
            assert wp.nonlinearity_N(u, 0.0) == pytest.approx(want, rel=1e-13)
        assert wp.nonlinearity_N(1.0, 0.0) == pytest.approx(-28.0 / 3.0, rel=1e-14)

    def test_matches_direct_oracle(self):
        for u in (-1.7, 0.3, 1.9):
            for r in (0.1, 0.5, 1.0):
                want = hp.eval_mp(hp.nonlin_direct_mp, u, r)
                assert wp.nonlinearity_N(u, r) == pytest.approx(want, rel=1e-11)

    def test_dual_form_agreement(self):
        u = np.linspace(-2.0, 2.0, 200)[:, None]
        rho = np.linspace(0.05, 1.0, 200)[None, :]
        direct = wp.nonlinearity_N(u, rho, form="direct")
        series = wp.nonlinearity_N(u, rho, form="series")
        assert np.max(np.abs(direct - series)) < 1e-9

    def test_domain(self):
        with pytest.raises(ValueError):
            wp.nonlinearity_N(1.0, 1.5)
        with pytest.raises(ValueError):
            wp.nonlinearity_N(1.0, 0.5, form="bogus")
