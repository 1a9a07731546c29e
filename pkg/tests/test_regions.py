import numpy as np
import pytest

from platform_eq.model import MarketParams, Side, cne_existence_bound
from platform_eq.regions import (FIGURES, ThresholdKind, Verdict, classify_direction,
                                 classify_existence, classify_sign_z, eval_threshold,
                                 figure_paint, figure_threshold_curve, grid_agreement,
                                 region_grid)
from platform_eq.equilibrium import solve_cne
from platform_eq.statics import fd_derivative

from test_model import bisect_isolate


class TestThresholdArithmetic:
    def test_exact_values(self):
        assert eval_threshold(ThresholdKind.F_EXISTENCE, 4) == pytest.approx(0.375, abs=1e-12)
        assert eval_threshold(ThresholdKind.G_X, 2) == pytest.approx(5 / 6, abs=1e-12)
        assert eval_threshold(ThresholdKind.G_CS, 2) == pytest.approx(15 / 16, abs=1e-12)
        assert eval_threshold(ThresholdKind.H_PI, 2) == pytest.approx(0.75, abs=1e-12)
        assert eval_threshold(ThresholdKind.G_P_U, 2) == pytest.approx((3 + np.sqrt(5)) / 4, abs=1e-12)
        assert eval_threshold(ThresholdKind.F_P_U, 2) == pytest.approx(0.5, abs=1e-12)
        assert eval_threshold(ThresholdKind.G_PI_U, 2) == pytest.approx(np.sqrt(1 / 8) + 0.5, abs=1e-12)
        assert eval_threshold(ThresholdKind.GAMMA, 4, 0.0, -1.0) == pytest.approx(0.8, abs=1e-12)
        assert eval_threshold(ThresholdKind.GAMMA_C, 4, 0.0, -1.0) == pytest.approx(0.2, abs=1e-12)
        assert eval_threshold(ThresholdKind.CE_EXISTENCE, 2) == pytest.approx(8 / 54, abs=1e-12)
        assert eval_threshold(ThresholdKind.TWO_PHI, 5) == 2.0
        assert eval_threshold(ThresholdKind.PHI, 5) == 1.0

    def test_f_p_special_case_n3(self):
        assert eval_threshold(ThresholdKind.F_P, 3, 0.9) == pytest.approx(0.6, abs=1e-12)
        with pytest.raises(ValueError):
            eval_threshold(ThresholdKind.F_P, 2, 1.0)

    def test_cubic_thresholds_match_isolator(self):
        from platform_eq.regions import _CUBIC_KINDS
        cases = [(ThresholdKind.G_P, 4, -1.0), (ThresholdKind.G_P, 2, -0.6),
                 (ThresholdKind.F_P, 4, 1.0), (ThresholdKind.F_P, 6, 0.5),
                 (ThresholdKind.F_CS_U, 3, 1.0), (ThresholdKind.F_PI, 2, -1.0),
                 (ThresholdKind.G_PI, 3, 1.0), (ThresholdKind.F_CS, 7, 1.0)]
        for kind, n, phi in cases:
            value = eval_threshold(kind, n, phi)
            builder, which = _CUBIC_KINDS[kind]
            cubic = builder(float(n), phi)
            assert abs(cubic(value)) <= 1e-9 * cubic.scale
            iso = bisect_isolate(lambda x: cubic(x), lo=-20, hi=20, n=80001)
            assert iso, (kind, n, phi)
            expected = max(iso) if which == "largest" else iso[0]
            assert value == pytest.approx(expected, abs=1e-7)
            if which == "unique":
                assert len(iso) == 1

    def test_threshold_limits(self):
        # g_p -> 0 and f_p -> 1 (phi multiples), f -> 0, g_cs -> 0 as N grows
        assert abs(eval_threshold(ThresholdKind.G_P, 1e3, -1.0)) < 1e-2
        assert abs(eval_threshold(ThresholdKind.G_P, 1e6, -1.0)) < 1e-4
        assert eval_threshold(ThresholdKind.F_P, 1e3, 1.0) == pytest.approx(1.0, abs=1e-2)
        assert eval_threshold(ThresholdKind.F_P, 1e6, 1.0) == pytest.approx(1.0, abs=1e-3)
        assert eval_threshold(ThresholdKind.F_EXISTENCE, 1e6) < 1e-5
        assert eval_threshold(ThresholdKind.G_CS, 1e6) < 1e-5

    def test_gamma_vs_gamma_c(self):
        rng = np.random.default_rng(41)
        for _ in range(300):
            n = int(rng.integers(2, 9))
            phi = rng.uniform(-2, 2)
            u0 = rng.uniform(-3, 3)
            g = eval_threshold(ThresholdKind.GAMMA, n, phi, u0)
            gc = eval_threshold(ThresholdKind.GAMMA_C, n, phi, u0)
            if g >= 0:
                assert g >= gc - 1e-12

    def test_gamma_monotone_in_u0(self):
        for n, phi in ((2, 0.5), (4, -1.0), (6, 2.0)):
            u0s = np.linspace(-4, 4, 41)
            vals = [eval_threshold(ThresholdKind.GAMMA, n, phi, u) for u in u0s]
            assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))

    def test_critical_outside_utility_consistency(self):
        # at u0 = u_tilde the gamma curve meets the existence bound (phi > 0),
        # and the collusive analogue meets 8 phi/(27N)
        for n, phi in ((2, 1.0), (4, 0.7), (7, 2.0)):
            u_t = eval_threshold(ThresholdKind.U_TILDE, n, phi)
            g = eval_threshold(ThresholdKind.GAMMA, n, phi, u_t)
            assert g == pytest.approx(cne_existence_bound(n) * phi, rel=1e-9)
            u_tc = eval_threshold(ThresholdKind.U_TILDE_C, n, phi)
            gc = eval_threshold(ThresholdKind.GAMMA_C, n, phi, u_tc)
            assert gc == pytest.approx(8 * phi / (27 * n), rel=1e-12)

    def test_argument_checks(self):
        with pytest.raises(ValueError, match="phi_kk"):
            eval_threshold(ThresholdKind.GAMMA, 4)
        with pytest.raises(ValueError, match="u0"):
            eval_threshold(ThresholdKind.GAMMA, 4, 1.0)
        with pytest.raises(ValueError):
            eval_threshold(ThresholdKind.F_EXISTENCE, 1.5)


class TestSignClassifiers:
    def test_cne_examples(self):
        label = classify_sign_z("cne", MarketParams.uniform(4, 1.0, u0=-1.0), Side.BUYER)
        assert label.verdict is Verdict.NEGATIVE
        assert label.margin == pytest.approx(0.2)
        label = classify_sign_z("cne", MarketParams.uniform(4, 0.5, u0=-1.0), Side.BUYER)
        assert label.verdict is Verdict.POSITIVE

    def test_verdicts_match_solved_sign(self):
        for beta, u0 in ((1.0, -1.0), (0.5, -1.0), (0.3, 0.2), (2.0, 0.5)):
            params = MarketParams.uniform(4, beta, u0=u0)
            label = classify_sign_z("cne", params, Side.BUYER)
            z = solve_cne(params).z.z_b
            assert label.verdict is (Verdict.NEGATIVE if z < 0 else Verdict.POSITIVE)

    def test_ce_demonstrates_gamma_ordering(self):
        # beta between gamma_c and gamma: positive under competition,
        # negative under collusion
        params = MarketParams.uniform(4, 0.5, u0=-1.0)
        assert classify_sign_z("cne", params, Side.BUYER).verdict is Verdict.POSITIVE
        assert classify_sign_z("ce", params, Side.BUYER).verdict is Verdict.NEGATIVE

    def test_positive_branch_unreachable_above_u_tilde(self):
        n, phi = 4, 1.0
        u_t = eval_threshold(ThresholdKind.U_TILDE, n, phi)
        rng = np.random.default_rng(43)
        for _ in range(50):
            beta = cne_existence_bound(n) * phi + rng.uniform(1e-6, 3.0)
            params = MarketParams.uniform(n, beta, phi_own=phi, u0=u_t + 0.01)
            label = classify_sign_z("cne", params, Side.BUYER)
            assert label.verdict in (Verdict.NEGATIVE, Verdict.BOUNDARY)

    def test_existence_gate(self):
        params = MarketParams.uniform(4, 0.2, phi_own=1.0)
        label = classify_sign_z("cne", params, Side.BUYER)
        assert label.verdict is Verdict.INDETERMINATE
        assert "existence" in label.reason

    def test_boundary_verdict(self):
        gamma = eval_threshold(ThresholdKind.GAMMA, 4, 0.0, -1.0)
        params = MarketParams.uniform(4, gamma + 1e-12, u0=-1.0)
        assert classify_sign_z("cne", params, Side.BUYER).verdict is Verdict.BOUNDARY


class TestDirectionClassifiers:
    def test_price_dn_examples(self):
        label = classify_direction("price", "n_platforms",
                                   MarketParams.uniform(4, 1.0, phi_own=-1.0), Side.BUYER)
        assert label.verdict is Verdict.DECREASING
        label = classify_direction("price", "n_platforms",
                                   MarketParams.uniform(4, 0.5, phi_own=1.0), Side.BUYER)
        assert label.verdict is Verdict.INCREASING
        assert fd_derivative("price", "n_platforms",
                             MarketParams.uniform(4, 0.5, phi_own=1.0), Side.BUYER) > 0
        # N = 2 lacks the increase region
        label = classify_direction("price", "n_platforms",
                                   MarketParams.uniform(2, 0.52, phi_own=1.0), Side.BUYER)
        assert label.verdict is Verdict.INDETERMINATE

    def test_profit_dn_base_case(self):
        params = MarketParams.uniform(2, 1.0)
        z = solve_cne(params).z.z_b
        label = classify_direction("profit", "n_platforms", params, Side.BUYER, z_star=z)
        assert label.verdict is Verdict.DECREASING
        with pytest.raises(ValueError, match="z_star"):
            classify_direction("profit", "n_platforms", params, Side.BUYER)

    def test_cs_du0_regions(self):
        label = classify_direction("consumer_surplus", "u0",
                                   MarketParams.uniform(3, 2.5, phi_own=1.0), Side.BUYER)
        assert label.verdict is Verdict.INCREASING
        fcsu = eval_threshold(ThresholdKind.F_CS_U, 3, 1.0)
        beta = 0.5 * (cne_existence_bound(3) + fcsu)
        label = classify_direction("consumer_surplus", "u0",
                                   MarketParams.uniform(3, beta, phi_own=1.0), Side.BUYER)
        assert label.verdict is Verdict.DECREASING
        assert fd_derivative("consumer_surplus", "u0",
                             MarketParams.uniform(3, beta, phi_own=1.0), Side.BUYER) < 0

    def test_indeterminate_gap(self):
        # between f_pu(N) phi and g_pu(N) phi the price/u0 sign is unclassified
        g = eval_threshold(ThresholdKind.G_P_U, 3)
        f = eval_threshold(ThresholdKind.F_P_U, 3)
        beta = 0.5 * (f + g)
        label = classify_direction("price", "u0",
                                   MarketParams.uniform(3, beta, phi_own=1.0), Side.BUYER)
        assert label.verdict is Verdict.INDETERMINATE

    def test_classifier_soundness_sweep(self):
        rng = np.random.default_rng(44)
        checked = 0
        quantities = (("price", "u0"), ("profit", "u0"), ("consumer_surplus", "u0"),
                      ("price", "n_platforms"), ("participation", "n_platforms"),
                      ("consumer_surplus", "n_platforms"), ("profit", "n_platforms"))
        while checked < 60:
            n = int(rng.integers(2, 7))
            beta = float(rng.uniform(0.1, 3.0))
            phi = float(rng.uniform(-2.0, 2.0))
            u0 = float(rng.uniform(-1.5, 1.5))
            params = MarketParams.uniform(n, beta, phi_own=phi, u0=u0)
            quantity, wrt = quantities[checked % len(quantities)]
            try:
                z = solve_cne(params).z.z_b
                label = classify_direction(quantity, wrt, params, Side.BUYER, z_star=z)
            except (ValueError, ArithmeticError):
                continue
            if label.sign == 0 or label.margin <= 0.01:
                continue
            fd = fd_derivative(quantity, wrt, params, Side.BUYER)
            if abs(fd) <= 1e-8:
                continue
            assert np.sign(fd) == label.sign, (params, quantity, wrt, label)
            checked += 1


class TestRegionGrids:
    def test_fig1_boundary_trace(self):
        grid = region_grid("existence_cne", resolution=80, n=4)
        nb = len(grid.betas)
        f4 = 0.375
        for i, phi in enumerate(grid.phis):
            for j, beta in enumerate(grid.betas):
                verdict = grid.labels[i * nb + j].verdict
                if phi <= 0:
                    assert verdict is Verdict.POSITIVE
                elif beta > f4 * phi + 0.02:
                    assert verdict is Verdict.POSITIVE
                elif beta < f4 * phi - 0.02:
                    assert verdict is Verdict.NEGATIVE

    def test_fig2_partition_at_gamma(self):
        grid = region_grid("sign_z_cne", resolution=60, n=4, u0=-1.0)
        nb = len(grid.betas)
        for i, phi in enumerate(grid.phis):
            gamma = eval_threshold(ThresholdKind.GAMMA, 4, float(phi), -1.0)
            for j, beta in enumerate(grid.betas):
                label = grid.labels[i * nb + j]
                if label.verdict is Verdict.POSITIVE:
                    assert beta < gamma + 1e-9
                elif label.verdict is Verdict.NEGATIVE:
                    assert beta > gamma - 1e-9

    def test_grid_agreement_high(self):
        for classifier, u0 in (("sign_z_cne", -1.0), ("price_dn", 0.0),
                               ("participation_dn", 0.0), ("cs_dn", 0.0)):
            grid = region_grid(classifier, resolution=50, n=4, u0=u0, solve_signs=True)
            agree, checked, frac = grid_agreement(grid)
            assert checked > 100
            assert frac >= 0.99, (classifier, agree, checked)

    def test_figure_paint_and_curve(self):
        grid = region_grid("cs_dn", resolution=40, n=4, u0=0.0)
        paint = figure_paint("fig6", grid)
        assert paint.shape == (40, 40)
        assert set(np.unique(paint)) <= {-1, 0, 1}
        assert np.any(paint == -1)  # demonstration band present
        curve = figure_threshold_curve("fig6", grid)
        assert len(curve) > 10

    def test_errors_become_indeterminate(self):
        grid = region_grid("sign_z_cne", resolution=12, n=4, u0=0.0)
        bad = [l for l in grid.labels if l.verdict is Verdict.INDETERMINATE]
        assert all(l.reason for l in bad)

    def test_figure_specs_cover_panels(self):
        assert set(FIGURES) == {"fig1", "fig2", "fig3", "fig4", "fig5", "fig6"}
        assert FIGURES["fig2"].panel_u0 == (-1.0, 0.5)
        assert FIGURES["fig3"].n == 200
        assert FIGURES["fig6"].panel_u0 == (0.0,)

    def test_existence_classifier(self):
        assert classify_existence("cne", MarketParams.uniform(4, 0.4, phi_own=1.0),
                                  Side.BUYER).verdict is Verdict.POSITIVE
        assert classify_existence("ce", MarketParams.uniform(2, 0.1, phi_own=1.0),
                                  Side.BUYER).verdict is Verdict.NEGATIVE
