"""Certify solved equilibria: price-space deviation search and second-order checks.

A competitive point is certified by letting one platform deviate in price space
(every candidate runs its own stage-2 fixed point with the other N-1 platforms
held at the symmetric prices) over a grid plus a simplex polish; the best gain
over the symmetric profit should be numerically zero.  Second-order conditions
come in closed form at zero cross-side externalities and as numeric price-space
Hessians otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from ._families import eval_series, s_coefficients
from .demand import fixed_point_batch, share_fixed_point
from .equilibrium import SymmetricEquilibrium, ZPoint
from .model import MarketParams, Side


@dataclass(frozen=True)
class DeviationReport:
    """Outcome of the best-response search around a symmetric candidate point."""

    base: SymmetricEquilibrium
    base_profit: float
    best_deviation_prices: tuple[float, float]
    best_gain: float
    grid_radius: float
    grid_n: int
    refined: bool

    def certified(self, rel_tol: float = 1e-6) -> bool:
        return self.best_gain <= rel_tol * max(1.0, abs(self.base_profit))


@dataclass(frozen=True, eq=False)
class SOCReport:
    """Closed-form and numeric second-order diagnostics at a solved point."""

    cne_diag: tuple[float, float] | None
    ce_hessian: np.ndarray | None
    numeric_hessian: np.ndarray
    closed_form_negative: bool | None
    numeric_negative_definite: bool


# --------------------------------------------------------------------------
# deviation search
# --------------------------------------------------------------------------

def _full_prices(params: MarketParams, others, deviation) -> np.ndarray:
    n = params.n_platforms
    prices = np.empty((2, n))
    prices[0, :] = others[0]
    prices[1, :] = others[1]
    prices[0, 0] = deviation[0]
    prices[1, 0] = deviation[1]
    return prices


def deviation_profit(params: MarketParams, others_price, deviation,
                     damping: float = 0.5, tol: float = 1e-12,
                     x0=None) -> float:
    """Profit of platform 1 when platforms 2..N charge others_price and
    platform 1 charges deviation; shares from the full stage-2 fixed point."""
    prices = _full_prices(params, others_price, deviation)
    state = share_fixed_point(params, prices, damping=damping, tol=tol, x0=x0)
    x1 = state.platform_shares[:, 0]
    return float(x1[0] * deviation[0] + x1[1] * deviation[1])


def verify_nash(params: MarketParams, eq: SymmetricEquilibrium,
                radius: float = 0.5, grid_n: int = 41,
                polish_iters: int = 200, damping: float = 0.5,
                fp_tol: float = 1e-12, grid_max_iter: int = 20_000) -> DeviationReport:
    """Grid search over deviating prices in [p* - r|p*|, p* + r|p*|]^2, then a
    Nelder-Mead polish from the best cell.

    The symmetric point itself sits in the search set, so best_gain >= -1e-12
    by construction; a materially positive gain falsifies the equilibrium and
    is reported, not raised.
    """
    if eq.regime != "cne":
        raise ValueError("verify_nash certifies competitive points")
    p_star = np.array(eq.prices)
    half = radius * np.abs(p_star)
    grids = [np.linspace(p_star[k] - half[k], p_star[k] + half[k], grid_n)
             for k in (0, 1)]
    pb, ps = np.meshgrid(grids[0], grids[1], indexing="ij")
    m = grid_n * grid_n
    prices = np.empty((m, 2, params.n_platforms))
    prices[:, 0, :] = p_star[0]
    prices[:, 1, :] = p_star[1]
    prices[:, 0, 0] = pb.ravel()
    prices[:, 1, 0] = ps.ravel()

    n_opt = params.n_platforms + 1
    x_sym = np.empty((2, n_opt))
    x_sym[:, 1:] = np.array(eq.shares)[:, None]
    x_sym[:, 0] = 1.0 - np.array(eq.participation)
    x0 = np.broadcast_to(x_sym, (m, 2, n_opt)).copy()
    shares, resid = fixed_point_batch(params, prices, damping=damping,
                                      tol=fp_tol, max_iter=grid_max_iter, x0=x0)
    profits = shares[:, 0, 1] * prices[:, 0, 0] + shares[:, 1, 1] * prices[:, 1, 0]
    profits = np.where(resid <= fp_tol, profits, -np.inf)

    base_profit = deviation_profit(params, p_star, p_star,
                                   damping=damping, tol=fp_tol, x0=x_sym)
    best_idx = int(np.argmax(profits))
    best_prices = np.array([prices[best_idx, 0, 0], prices[best_idx, 1, 0]])
    best_profit = max(float(profits[best_idx]), base_profit)

    refined = False
    res = optimize.minimize(
        lambda q: -deviation_profit(params, p_star, q, damping=damping,
                                    tol=fp_tol, x0=x_sym),
        best_prices, method="Nelder-Mead",
        options={"maxiter": polish_iters, "xatol": 1e-10, "fatol": 1e-14})
    if -res.fun > best_profit:
        best_profit = -res.fun
        best_prices = res.x
        refined = True

    return DeviationReport(
        base=eq,
        base_profit=base_profit,
        best_deviation_prices=(float(best_prices[0]), float(best_prices[1])),
        best_gain=float(best_profit - base_profit),
        grid_radius=radius,
        grid_n=grid_n,
        refined=refined,
    )


# --------------------------------------------------------------------------
# second-order conditions
# --------------------------------------------------------------------------

def soc_cne_diag(z: float, params: MarketParams, side: Side,
                 n: float | None = None) -> float:
    """Closed-form own-share second derivative of the deviator's profit
    (cross externalities zero); negative throughout the existence region."""
    if not params.cross_externalities_zero:
        raise ValueError("closed-form SOC requires zero cross-side externalities")
    n = float(params.n_platforms if n is None else n)
    beta = params.beta[side.index]
    phi = params.phi_own(side)
    z = float(z)
    num = eval_series(s_coefficients(beta, phi, n), 0, z)
    ez = np.exp(z)
    den = ez * (beta * ((n - 1.0) * ez + 1.0) * (n * ez + 1.0) - ez * phi) ** 3
    if abs(den) < 1e-300:
        raise ArithmeticError("vanishing SOC denominator")
    return float(num / den)


def soc_ce_hessian(z: ZPoint | tuple, params: MarketParams,
                   n: float | None = None) -> tuple[np.ndarray, bool]:
    """Closed-form Hessian of total collusive profit in share space and its
    negative-definiteness verdict via leading principal minors."""
    n = float(params.n_platforms if n is None else n)
    zv = z.as_array() if isinstance(z, ZPoint) else np.asarray(z, dtype=float)
    beta = params.beta_arr
    phi = params.phi_arr
    emz = np.exp(-zv)
    ez = np.exp(zv)
    diag = -n * emz * (beta * (n * ez + 1.0) ** 3 - 2.0 * ez * np.diag(phi))
    off = n * (phi[0, 1] + phi[1, 0])
    H = np.array([[diag[0], off], [off, diag[1]]])
    neg_def = H[0, 0] < 0 and (H[0, 0] * H[1, 1] - off * off) > 0
    return H, bool(neg_def)


def numeric_price_hessian(params: MarketParams, eq: SymmetricEquilibrium,
                          step_scale: float = 1e-4) -> np.ndarray:
    """Second differences of the relevant stage-1 objective in price space.

    For a competitive point the objective is the deviating platform's profit;
    for a collusive point it is total profit with all platforms moving together.
    Second differences lose half the working digits, so the step is coarse.
    """
    p_star = np.array(eq.prices)
    h = step_scale * np.maximum(1.0, np.abs(p_star))

    if eq.regime == "cne":
        def objective(q):
            return deviation_profit(params, p_star, q, tol=1e-13)
    else:
        def objective(q):
            prices = np.repeat(np.asarray(q, dtype=float)[:, None], params.n_platforms, axis=1)
            state = share_fixed_point(params, prices, tol=1e-13)
            x1 = state.platform_shares[:, 0]
            return float(params.n_platforms * (x1[0] * q[0] + x1[1] * q[1]))

    f0 = objective(p_star)
    H = np.empty((2, 2))
    for a in (0, 1):
        e_a = np.zeros(2)
        e_a[a] = h[a]
        H[a, a] = (objective(p_star + e_a) - 2.0 * f0 + objective(p_star - e_a)) / h[a] ** 2
    e_b = np.array([h[0], 0.0])
    e_s = np.array([0.0, h[1]])
    H[0, 1] = H[1, 0] = (objective(p_star + e_b + e_s) - objective(p_star + e_b - e_s)
                         - objective(p_star - e_b + e_s) + objective(p_star - e_b - e_s)) \
        / (4.0 * h[0] * h[1])
    return H


def soc_report(params: MarketParams, eq: SymmetricEquilibrium) -> SOCReport:
    """Assemble closed-form (when applicable) and numeric SOC diagnostics."""
    numeric = numeric_price_hessian(params, eq)
    eigs = np.linalg.eigvalsh(0.5 * (numeric + numeric.T))
    numeric_nd = bool(np.all(eigs < 0))
    cne_diag = None
    ce_hess = None
    closed_ok = None
    if eq.regime == "cne":
        if params.cross_externalities_zero:
            cne_diag = (soc_cne_diag(eq.z.z_b, params, Side.BUYER, eq.n),
                        soc_cne_diag(eq.z.z_s, params, Side.SELLER, eq.n))
            closed_ok = cne_diag[0] < 0 and cne_diag[1] < 0
    else:
        ce_hess, closed_ok = soc_ce_hessian(eq.z, params, eq.n)
    return SOCReport(cne_diag=cne_diag, ce_hessian=ce_hess,
                     numeric_hessian=numeric,
                     closed_form_negative=closed_ok,
                     numeric_negative_definite=numeric_nd)
