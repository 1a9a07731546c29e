import dataclasses

import numpy as np
import pytest

from platform_eq.equilibrium import solve_ce, solve_cne
from platform_eq.model import MarketParams, Side
from platform_eq.verify import (deviation_profit, numeric_price_hessian,
                                soc_ce_hessian, soc_cne_diag, soc_report,
                                verify_nash)

BASE = MarketParams.uniform(2, 1.0)


@pytest.fixture(scope="module")
def base_eq():
    return solve_cne(BASE)


class TestDeviationProfit:
    def test_symmetric_point_reproduces_solver_profit(self, base_eq):
        p = base_eq.prices
        profit = deviation_profit(BASE, p, p)
        assert profit == pytest.approx(base_eq.total_profit, abs=1e-9)

    def test_price_overshoot_collapses_shares(self, base_eq):
        p = base_eq.prices
        dev = (p[0] + 10.0, p[1] + 10.0)
        assert deviation_profit(BASE, p, dev) < 1e-3

    def test_grid_argmax_at_center(self, base_eq):
        # profit over a coarse grid around p* peaks at the symmetric cell
        p = np.array(base_eq.prices)
        offsets = np.linspace(-0.3, 0.3, 13)
        best = None
        for db in offsets:
            for ds in offsets:
                val = deviation_profit(BASE, p, (p[0] + db, p[1] + ds))
                if best is None or val > best[0]:
                    best = (val, db, ds)
        assert best[1] == 0.0 and best[2] == 0.0


class TestVerifyNash:
    def test_base_case_certified(self, base_eq):
        report = verify_nash(BASE, base_eq, radius=0.5, grid_n=41)
        assert report.best_gain >= -1e-12
        assert report.certified(1e-6)
        assert report.base_profit == pytest.approx(base_eq.total_profit, abs=1e-9)

    def test_perturbed_point_detected(self, base_eq):
        fake = dataclasses.replace(base_eq, prices=(base_eq.prices[0] + 0.1,
                                                    base_eq.prices[1] + 0.1))
        report = verify_nash(BASE, fake, radius=0.5, grid_n=21)
        assert report.best_gain > 1e-4
        assert not report.certified(1e-6)

    def test_small_cross_externalities(self):
        params = MarketParams(3, (1.0, 0.9), ((0.2, 0.03), (-0.02, 0.1)), (0.1, -0.1))
        eq = solve_cne(params)
        report = verify_nash(params, eq, radius=0.5, grid_n=21)
        assert report.certified(1e-6)

    def test_rejects_ce_point(self):
        eq = solve_ce(BASE)
        with pytest.raises(ValueError):
            verify_nash(BASE, eq)


class TestSecondOrderConditions:
    def test_cne_diag_negative_in_region(self, base_eq):
        val = soc_cne_diag(base_eq.z.z_b, BASE, Side.BUYER)
        assert val < 0

    def test_cne_diag_sign_matches_numeric_hessian(self, base_eq):
        # at the optimum the price-space and share-space curvatures share a sign
        for params in (BASE, MarketParams.uniform(3, 0.8, phi_own=0.5),
                       MarketParams.uniform(2, 1.5, phi_own=-1.0, u0=-0.5)):
            eq = solve_cne(params)
            closed = soc_cne_diag(eq.z.z_b, params, Side.BUYER)
            H = numeric_price_hessian(params, eq)
            assert closed < 0
            assert H[0, 0] < 0 and H[1, 1] < 0

    def test_out_of_region_not_asserted(self):
        # just outside the existence region the closed form may change sign;
        # the call must still evaluate and report
        params = MarketParams.uniform(4, 0.375 - 1e-3, phi_own=1.0)
        eq = solve_cne(params)
        val = soc_cne_diag(eq.z.z_b, params, Side.BUYER)
        assert np.isfinite(val)

    def test_ce_hessian_zero_phi_diagonal(self):
        eq = solve_ce(BASE)
        H, neg_def = soc_ce_hessian(eq.z, BASE)
        assert H[0, 1] == 0.0 and H[1, 0] == 0.0
        assert H[0, 0] < 0 and H[1, 1] < 0 and neg_def

    def test_ce_hessian_antisymmetric_cross_cancels(self):
        params = MarketParams(2, (1.0, 1.0), ((0.0, 0.5), (-0.5, 0.0)))
        H, _ = soc_ce_hessian((0.3, -0.2), params)
        assert H[0, 1] == 0.0 and H[1, 0] == 0.0

    def test_ce_hessian_negative_definite_at_solution(self):
        params = MarketParams.uniform(2, 1.0, phi_own=1.0)
        eq = solve_ce(params)
        H, neg_def = soc_ce_hessian(eq.z, params)
        assert neg_def
        assert np.all(np.linalg.eigvalsh(H) < 0)

    def test_soc_report_both_regimes(self):
        params = MarketParams.uniform(2, 1.0, phi_own=0.4)
        rep = soc_report(params, solve_cne(params))
        assert rep.cne_diag is not None and all(v < 0 for v in rep.cne_diag)
        assert rep.numeric_negative_definite
        rep_ce = soc_report(params, solve_ce(params))
        assert rep_ce.ce_hessian is not None and rep_ce.closed_form_negative
        assert rep_ce.numeric_negative_definite

    def test_closed_form_requires_decoupled(self):
        params = MarketParams(2, (1.0, 1.0), ((0.0, 0.1), (0.1, 0.0)))
        with pytest.raises(ValueError):
            soc_cne_diag(0.0, params, Side.BUYER)
        rep = soc_report(params, solve_cne(params))
        assert rep.cne_diag is None
        assert rep.numeric_negative_definite
