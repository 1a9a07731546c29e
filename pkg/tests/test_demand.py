import numpy as np
import pytest

from platform_eq.demand import (FixedPointError, MarketState, PriceProfile,
                                contraction_margin, fixed_point_multistart,
                                logit_shares, monte_carlo_shares, sensitivities,
                                share_fixed_point)
from platform_eq.model import MarketParams, Side


class TestLogitShares:
    def test_symmetry(self):
        assert logit_shares([0.0, 0.0, 0.0], 1.0) == pytest.approx([1 / 3] * 3, abs=1e-15)

    def test_dominance_limit(self):
        s = logit_shares([0.0, 40.0], 1.0)
        assert s[0] == pytest.approx(0.0, abs=1e-12)
        assert s[1] == pytest.approx(1.0, abs=1e-12)

    def test_symmetric_platforms_equal_omega(self):
        # common platform utility u against outside 0: share = 1/(e^{-z} + N)
        for n, u, beta in ((2, -1.0, 1.0), (5, 0.7, 0.4), (3, 2.0, 2.5)):
            s = logit_shares([0.0] + [u] * n, beta)
            z = u / beta
            assert s[1] == pytest.approx(1.0 / (np.exp(-z) + n), rel=1e-13)

    def test_sum_and_translation_invariance(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            u = rng.normal(size=6)
            beta = rng.uniform(0.05, 5.0)
            s = logit_shares(u, beta)
            assert abs(s.sum() - 1.0) <= 1e-12
            s2 = logit_shares(u + 13.7, beta)
            assert np.max(np.abs(s - s2)) <= 1e-12

    def test_overflow_safety(self):
        s = logit_shares([0.0, 5.0, 4.9], 1e-4)  # u/beta ~ 5e4
        assert np.all(np.isfinite(s)) and abs(s.sum() - 1.0) <= 1e-12

    def test_invalid_inputs(self):
        with pytest.raises(ValueError, match="invalid utility"):
            logit_shares([0.0, np.nan], 1.0)
        with pytest.raises(ValueError):
            logit_shares([0.0, 1.0], 0.0)


class TestFixedPoint:
    def test_zero_externality_closed_form(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            n = int(rng.integers(2, 7))
            params = MarketParams.uniform(n, rng.uniform(0.3, 2.0))
            prices = rng.uniform(-2, 2, size=(2, n))
            state = share_fixed_point(params, prices)
            for k in (0, 1):
                direct = logit_shares(np.concatenate([[0.0], -prices[k]]), params.beta[k])
                assert np.max(np.abs(state.shares[k] - direct)) <= 1e-12

    def test_simplex_invariant(self):
        params = MarketParams(3, (0.5, 0.9), ((0.3, 0.1), (-0.2, 0.4)), (0.2, -0.1))
        state = share_fixed_point(params, PriceProfile.symmetric(3, 0.5, -0.3))
        assert np.max(np.abs(state.shares.sum(axis=1) - 1.0)) <= 1e-10
        assert np.all(state.shares >= 0)

    def test_symmetric_reduced_system_oracle(self):
        # N=2, beta=(1,1), Phi=((.3,.1),(.1,.3)), symmetric prices (1,1), u0=0:
        # both sides identical, so x solves x = omega((0.4 x - 1)/1).
        def omega(z, n=2):
            return 1.0 / (np.exp(-z) + n)

        lo, hi = 0.0, 0.5
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if omega(0.4 * mid - 1.0) - mid > 0:
                lo = mid
            else:
                hi = mid
        x_oracle = 0.5 * (lo + hi)

        params = MarketParams(2, (1.0, 1.0), ((0.3, 0.1), (0.1, 0.3)))
        state = share_fixed_point(params, PriceProfile.symmetric(2, 1.0, 1.0))
        inside = state.platform_shares
        assert inside[0, 0] == pytest.approx(inside[0, 1], abs=1e-12)
        assert inside[0, 0] == pytest.approx(inside[1, 0], abs=1e-12)
        assert inside[0, 0] == pytest.approx(x_oracle, abs=1e-10)

    def test_multistart_agreement_under_contraction(self):
        rng = np.random.default_rng(7)
        tried = 0
        while tried < 10:
            n = int(rng.integers(2, 5))
            params = MarketParams(
                n, tuple(rng.uniform(0.8, 2.5, 2)),
                tuple(tuple(row) for row in rng.uniform(-0.3, 0.3, (2, 2))),
                tuple(rng.uniform(-1, 1, 2)))
            if contraction_margin(params) <= 0:
                continue
            tried += 1
            prices = rng.uniform(-2, 2, (2, n))
            res = fixed_point_multistart(params, prices, starts=10, seed=tried)
            assert not res.multiple
            assert res.max_distance < 1e-9

    def test_price_monotonicity(self):
        params = MarketParams.uniform(3, 1.0)
        base = share_fixed_point(params, PriceProfile.symmetric(3, 0.5, 0.5))
        bumped_prices = np.array([[0.7, 0.5, 0.5], [0.5, 0.5, 0.5]])
        bumped = share_fixed_point(params, bumped_prices)
        assert bumped.shares[0, 1] < base.shares[0, 1]
        assert np.all(np.delete(bumped.shares[0], 1) >= np.delete(base.shares[0], 1))

    def test_nonconvergence_error_carries_residual(self):
        params = MarketParams.uniform(2, 1.0, phi_own=0.3)
        with pytest.raises(FixedPointError) as err:
            share_fixed_point(params, PriceProfile.symmetric(2, 1.0, 1.0), max_iter=2)
        assert err.value.residual > 0

    def test_input_validation(self):
        params = MarketParams.uniform(2, 1.0)
        with pytest.raises(ValueError):
            share_fixed_point(params, np.zeros((2, 3)))
        with pytest.raises(ValueError):
            share_fixed_point(params, np.zeros((2, 2)), damping=0.0)


class TestContractionMargin:
    def test_zero_externality(self):
        assert contraction_margin(MarketParams.uniform(4, 0.7)) == 1.0

    def test_row_sum_arithmetic(self):
        params = MarketParams(2, (1.0, 1.0), ((0.95, 0.95), (0.2, 0.2)))
        assert contraction_margin(params) == pytest.approx(0.05)

    def test_uncertified(self):
        params = MarketParams(2, (0.1, 0.1), ((0.5, 0.5), (0.5, 0.5)))
        assert contraction_margin(params) < 0

    def test_logit_lipschitz_bound_oracle(self):
        # M_T bound: sum_l |dT^i/du^l| = 2 T (1-T)/beta <= 1/(2 beta),
        # maximized numerically over random utility vectors
        rng = np.random.default_rng(5)
        beta = 0.37
        worst = 0.0
        for _ in range(2000):
            u = rng.normal(scale=3.0, size=5)
            t = logit_shares(u, beta)
            worst = max(worst, float(np.max(2.0 * t * (1.0 - t) / beta)))
        assert worst <= 1.0 / (2.0 * beta) + 1e-12


class TestSensitivities:
    def test_finite_difference_oracle(self):
        params = MarketParams.uniform(2, 1.0)
        h = 1e-6
        for z in (-3.0, -1.2, 0.0, 0.8, 2.5):
            sens = sensitivities(z, params, Side.BUYER)
            n = params.n_platforms
            u = np.concatenate([[0.0], np.full(n, z)])  # beta = 1: u = z
            e1 = np.zeros(n + 1)
            e1[1] = h
            s_fd = (logit_shares(u + e1, 1.0)[1] - logit_shares(u - e1, 1.0)[1]) / (2 * h)
            e2 = np.zeros(n + 1)
            e2[2] = h
            r_fd = (logit_shares(u + e2, 1.0)[1] - logit_shares(u - e2, 1.0)[1]) / (2 * h)
            assert sens.s == pytest.approx(s_fd, rel=1e-7)
            assert sens.r == pytest.approx(r_fd, rel=1e-7)

    def test_value_at_zero(self):
        # N=2, beta=1, z=0: all three options equal, T=1/3, so s = T(1-T) = 2/9
        sens = sensitivities(0.0, MarketParams.uniform(2, 1.0), Side.BUYER)
        assert sens.s == pytest.approx(2 / 9, abs=1e-15)
        assert sens.r == pytest.approx(-1 / 9, abs=1e-15)

    def test_empty_market_limit(self):
        sens = sensitivities(-80.0, MarketParams.uniform(3, 1.0), Side.BUYER)
        assert abs(sens.s) < 1e-30 and abs(sens.r) < 1e-30

    def test_signs_and_foc_denominator(self):
        params = MarketParams.uniform(4, 0.6)
        n = params.n_platforms
        for z in np.linspace(-10, 10, 81):
            sens = sensitivities(z, params, Side.SELLER)
            assert sens.s > 0 and sens.r < 0
            assert sens.s + (n - 1) * sens.r > 0


class TestMonteCarlo:
    def test_symmetric_frequencies(self):
        n = 3
        params = MarketParams.uniform(n, 1.0)
        state = MarketState(np.full((2, n + 1), 1.0 / (n + 1)))
        prices = PriceProfile.symmetric(n, 0.0, 0.0)
        mc = monte_carlo_shares(params, prices, state, samples=1_000_000, seed=9)
        assert np.max(np.abs(mc.shares.shares - 0.25) / mc.stderr) < 3.0

    def test_self_consistency_with_fixed_point(self):
        params = MarketParams(2, (1.0, 0.8), ((0.3, 0.05), (0.05, 0.2)), (0.1, -0.2))
        prices = PriceProfile.symmetric(2, 0.8, 0.4)
        state = share_fixed_point(params, prices)
        mc = monte_carlo_shares(params, prices, state, samples=400_000, seed=123)
        dev = np.abs(mc.shares.shares - state.shares) / np.maximum(mc.stderr, 1e-12)
        assert np.max(dev) < 3.0

    def test_noise_dominated_limit(self):
        n = 3
        params = MarketParams.uniform(n, 1e4)
        state = MarketState(np.full((2, n + 1), 1.0 / (n + 1)))
        prices = np.array([[0.0, 0.5, 1.0], [1.0, 0.3, 0.0]])
        mc = monte_carlo_shares(params, prices, state, samples=200_000, seed=4)
        assert np.max(np.abs(mc.shares.shares - 0.25)) < 0.005

    def test_reproducible_under_seed(self):
        params = MarketParams.uniform(2, 1.0)
        state = MarketState(np.full((2, 3), 1.0 / 3))
        prices = PriceProfile.symmetric(2, 1.0, 1.0)
        a = monte_carlo_shares(params, prices, state, samples=10_000, seed=77)
        b = monte_carlo_shares(params, prices, state, samples=10_000, seed=77)
        assert np.array_equal(a.shares.shares, b.shares.shares)


class TestMarketState:
    def test_rejects_off_simplex(self):
        with pytest.raises(ValueError):
            MarketState(np.array([[0.5, 0.6], [0.5, 0.5]]))
        with pytest.raises(ValueError):
            MarketState(np.array([[1.2, -0.2], [0.5, 0.5]]))
