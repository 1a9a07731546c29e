"""Stage-1 equilibria in the normalized net-utility variable z.

Both regimes reduce to a two-equation system beta z = (Phi - H(z)) Omega(z) - u0
with a regime-specific pricing matrix H.  With zero cross-side externalities
the system decouples into two strictly monotone scalar equations, solved by
bracketed bisection plus a Newton polish; otherwise a damped Newton starts from
the decoupled root.  All formulas accept a real-valued platform count so that
derivatives with respect to N can be validated by central differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._families import a_coefficients, eval_series
from .model import EULER_GAMMA, MarketParams, Side, check_cne_existence, check_ce_existence

Z_BRACKET = 60.0


class FOCSingularityError(ArithmeticError):
    """The pricing-matrix denominator (J_phi or a K factor) vanished."""


class SolverError(RuntimeError):
    """Equilibrium solve failed; carries a short trace of the attempt."""

    def __init__(self, message: str, trace: list[str] | None = None):
        super().__init__(message)
        self.trace = tuple(trace or ())


@dataclass(frozen=True)
class ZPoint:
    """Per-side normalized net deterministic utility."""

    z_b: float
    z_s: float

    def as_array(self) -> np.ndarray:
        return np.array([self.z_b, self.z_s])

    def side(self, side: Side) -> float:
        return self.z_b if side is Side.BUYER else self.z_s

    def __iter__(self):
        return iter((self.z_b, self.z_s))


@dataclass(frozen=True)
class SymmetricEquilibrium:
    """Solved symmetric equilibrium for one regime ("cne" or "ce").

    Profit fields are per platform; `aggregate_profit` scales by N, which is
    the collusive total the cartel actually maximizes.
    """

    regime: str
    z: ZPoint
    prices: tuple[float, float]
    shares: tuple[float, float]
    participation: tuple[float, float]
    profit_per_side: tuple[float, float]
    total_profit: float
    consumer_surplus: tuple[float, float]
    foc_residual: float
    price_check: float
    n: float
    params: MarketParams
    warnings: tuple[str, ...] = field(default_factory=tuple)

    @property
    def aggregate_profit(self) -> float:
        return self.n * self.total_profit


@dataclass(frozen=True)
class RegimeComparison:
    """Competitive vs collusive equilibria with the price-gap decomposition.

    decomposition_externality[k] + decomposition_utility[k] equals
    (p_ce - p_cne)[k]: the first term is the lost network benefit
    (Phi (x_ce - x_cne))_k, the second the withheld utility beta_k (z_cne - z_ce).
    """

    cne: SymmetricEquilibrium
    ce: SymmetricEquilibrium
    dz: tuple[float, float]
    d_participation: tuple[float, float]
    d_price: tuple[float, float]
    decomposition_externality: tuple[float, float]
    decomposition_utility: tuple[float, float]

    @property
    def decomposition_residual(self) -> float:
        gap = np.array(self.ce.prices) - np.array(self.cne.prices)
        recon = np.array(self.decomposition_externality) + np.array(self.decomposition_utility)
        return float(np.max(np.abs(gap - recon)))


# --------------------------------------------------------------------------
# elementary maps
# --------------------------------------------------------------------------

def _piecewise_z(z, neg_fn, pos_fn):
    """Evaluate a function by its z<0 / z>=0 stable branches, preserving scalars."""
    z = np.asarray(z, dtype=float)
    zz = np.atleast_1d(z)
    out = np.empty_like(zz)
    neg = zz < 0
    out[neg] = neg_fn(zz[neg])
    out[~neg] = pos_fn(zz[~neg])
    return float(out[0]) if z.ndim == 0 else out


def omega(z, n):
    """Symmetric per-platform share 1/(e^{-z} + N), evaluated overflow-free."""
    return _piecewise_z(
        z,
        lambda v: np.exp(v) / (1.0 + n * np.exp(v)),
        lambda v: 1.0 / (np.exp(-v) + n),
    )


def omega_prime(z, n):
    """d omega/dz = e^{-z}/(e^{-z}+N)^2 in a form stable for either sign of z."""
    return _piecewise_z(
        z,
        lambda v: np.exp(v) / (1.0 + n * np.exp(v)) ** 2,
        lambda v: np.exp(-v) / (np.exp(-v) + n) ** 2,
    )


def _as_z_array(z) -> np.ndarray:
    if isinstance(z, ZPoint):
        return z.as_array()
    arr = np.asarray(z, dtype=float)
    if arr.shape != (2,):
        raise ValueError("z must provide (z_b, z_s)")
    return arr


# --------------------------------------------------------------------------
# pricing matrices and FOC residuals
# --------------------------------------------------------------------------

def h_matrix(z, params: MarketParams, n: float | None = None) -> np.ndarray:
    """Competitive pricing matrix H(z).

    Entries combine L_k = (N-1) beta_k (1+N e^{z_k}) / J_phi,
    d_k = beta_k (1+N e^{z_k}), h_k = beta_k (1+e^{z_k})(e^{-z_k}+N),
    K_k = phi_kk - beta_k (1+N e^{z_k})(e^{-z_k}+N-1) and
    J_phi = K_b K_s - phi_sb phi_bs.
    """
    zv = _as_z_array(z)
    n = float(params.n_platforms if n is None else n)
    beta = params.beta_arr
    phi = params.phi_arr
    with np.errstate(over="ignore", invalid="ignore"):
        ez = np.exp(zv)
        emz = np.exp(-zv)
        one_nez = 1.0 + n * ez
        d = beta * one_nez
        h = beta * (1.0 + ez) * (emz + n)
        K = np.diag(phi) - beta * one_nez * (emz + n - 1.0)
        j_phi = K[0] * K[1] - phi[1, 0] * phi[0, 1]
        scale = abs(K[0] * K[1]) + abs(phi[1, 0] * phi[0, 1]) + 1.0
        if abs(j_phi) < 1e-14 * scale:
            raise FOCSingularityError("FOC singularity (J_phi or K_k vanishes)")
        L = (n - 1.0) * beta * one_nez / j_phi
        return np.array([
            [L[0] * d[0] * K[1] + h[0] - phi[0, 0], -phi[1, 0] * (d[1] * L[0] + 1.0)],
            [-phi[0, 1] * (d[0] * L[1] + 1.0), L[1] * d[1] * K[0] + h[1] - phi[1, 1]],
        ])


def hc_matrix(z, params: MarketParams, n: float | None = None) -> np.ndarray:
    """Collusive pricing matrix H^C(z): diagonal beta_k (1+N e^{z_k})^2 / e^{z_k} - phi_kk,
    off-diagonal -phi_sb / -phi_bs."""
    zv = _as_z_array(z)
    n = float(params.n_platforms if n is None else n)
    beta = params.beta_arr
    phi = params.phi_arr
    # (1+N e^z)^2 / e^z expanded so neither exponential is squared
    with np.errstate(over="ignore"):
        diag = beta * (np.exp(-zv) + 2.0 * n + n * n * np.exp(zv)) - np.diag(phi)
    return np.array([[diag[0], -phi[1, 0]], [-phi[0, 1], diag[1]]])


def cne_foc_residual(z, params: MarketParams, n: float | None = None) -> np.ndarray:
    """(Phi - H(z)) Omega(z) - u0 - beta z; zero exactly at the competitive z*."""
    zv = _as_z_array(z)
    n = float(params.n_platforms if n is None else n)
    H = h_matrix(zv, params, n)
    om = omega(zv, n)
    with np.errstate(invalid="ignore"):  # callers reject non-finite probes
        return (params.phi_arr - H) @ om - params.u0_arr - params.beta_arr * zv


def ce_foc_residual(z, params: MarketParams, n: float | None = None) -> np.ndarray:
    """(Phi - H^C(z)) Omega(z) - u0 - beta z; zero exactly at the collusive z."""
    zv = _as_z_array(z)
    n = float(params.n_platforms if n is None else n)
    H = hc_matrix(zv, params, n)
    om = omega(zv, n)
    with np.errstate(invalid="ignore"):
        return (params.phi_arr - H) @ om - params.u0_arr - params.beta_arr * zv


# --------------------------------------------------------------------------
# decoupled (zero cross-externality) scalar forms
# --------------------------------------------------------------------------

def mk_value(z, beta, phi_kk, n, u0):
    """Decoupled competitive FOC residual M_k(z); strictly decreasing in the
    existence region.  Two algebraically identical branches keep every
    exponential bounded for either sign of z."""
    scalar = all(np.ndim(a) == 0 for a in (z, beta, phi_kk, u0))
    z, b, f, u = (np.atleast_1d(np.asarray(a, dtype=float))
                  for a in np.broadcast_arrays(z, beta, phi_kk, u0))
    out = np.empty_like(z)
    neg = z < 0
    e, bb, ff = np.exp(z[neg]), b[neg], f[neg]
    num = -bb * bb * (1.0 + n * e) ** 3 \
        + bb * ff * e * (3.0 + (2.0 * n - 1.0) * e) * (1.0 + n * e) - 2.0 * ff * ff * e * e
    den = (1.0 + n * e) * (bb * (1.0 + (n - 1.0) * e) * (1.0 + n * e) - e * ff)
    with np.errstate(divide="ignore", invalid="ignore"):
        out[neg] = num / den
    w, bb, ff = np.exp(-z[~neg]), b[~neg], f[~neg]
    num = -bb * bb * (w + n) ** 3 + bb * ff * (3.0 * w + 2.0 * n - 1.0) * (w + n) \
        - 2.0 * ff * ff * w
    den = (w + n) * (bb * (w + n - 1.0) * (w + n) - w * ff)
    with np.errstate(divide="ignore", invalid="ignore"):
        out[~neg] = num / den
    out = out - b * z - u
    return float(out[0]) if scalar else out


def mk_slope(z, beta, phi_kk, n):
    """dM_k/dz via the slope coefficient family; strictly negative in the existence region."""
    z = np.asarray(z, dtype=float)
    coeffs = a_coefficients(beta, phi_kk, n)
    num = eval_series(coeffs, 0, z)
    ez = np.exp(np.minimum(z, 80.0))
    den = (1.0 + n * ez) ** 2 * (beta * (1.0 + (n - 1.0) * ez) * (1.0 + n * ez) - ez * phi_kk) ** 2
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = -num / den
    return out if out.ndim else float(out)


def mkc_value(z, beta, phi_kk, n, u0):
    """Decoupled collusive FOC residual 2 phi omega(z) - beta (1+N e^z) - u0 - beta z."""
    z = np.asarray(z, dtype=float)
    out = 2.0 * phi_kk * omega(z, n) - beta * (1.0 + n * np.exp(np.minimum(z, 80.0))) \
        - u0 - beta * z
    return out if np.ndim(out) else float(out)


def mkc_slope(z, beta, phi_kk, n):
    """dM_k^C/dz = (2 e^z phi - beta (N e^z + 1)^3) / (N e^z + 1)^2."""
    z = np.asarray(z, dtype=float)
    ez = np.exp(np.minimum(z, 80.0))
    out = 2.0 * phi_kk * omega_prime(z, n) - beta * (1.0 + n * ez)
    return out if np.ndim(out) else float(out)


def decoupled_price(z, beta, phi_kk, n):
    """Symmetric competitive price as a function of z alone (cross externalities zero)."""
    b, f = beta, phi_kk

    def _neg(v):
        e = np.exp(v)
        num = (b + e * (b * n - f)) * (b * (n * e + 1.0) ** 2 - e * f)
        den = (1.0 + n * e) * (b * (1.0 + (n - 1.0) * e) * (1.0 + n * e) - e * f)
        return num / den

    def _pos(v):
        w = np.exp(-v)
        num = (b * w + b * n - f) * (b * (n + w) ** 2 - w * f)
        den = (w + n) * (b * (w + n - 1.0) * (w + n) - w * f)
        return num / den

    return _piecewise_z(z, _neg, _pos)


# --------------------------------------------------------------------------
# scalar root finding on the decoupled FOCs
# --------------------------------------------------------------------------

def _bisect(f, lo: float, hi: float, xtol: float = 1e-13, max_iter: int = 200) -> float:
    lo_positive = f(lo) > 0
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        # a pole inside the bracket reads as non-finite: shrink from the right
        on_lo_side = np.isfinite(fm) and ((fm > 0) == lo_positive)
        if on_lo_side:
            lo = mid
        else:
            hi = mid
        if hi - lo <= xtol:
            break
    return 0.5 * (lo + hi)


def _newton_polish(f, fprime, z: float, iters: int = 6) -> float:
    for _ in range(iters):
        v = f(z)
        sl = fprime(z)
        if sl == 0 or not np.isfinite(sl):
            break
        step = v / sl
        z_new = z - step
        if not np.isfinite(z_new) or abs(f(z_new)) >= abs(v):
            break
        z = z_new
    return z


def _expand_bracket(f, lo: float, hi: float) -> tuple[float, float]:
    for _ in range(20):
        if f(lo) > 0:
            break
        lo *= 2.0
    else:
        raise SolverError("no root in range: lower bracket expansion exhausted")
    for _ in range(20):
        if f(hi) < 0:
            break
        hi *= 2.0
    else:
        raise SolverError("no root in range: upper bracket expansion exhausted")
    return lo, hi


def _solve_decoupled_side(value, slope, existence_ok: bool,
                          profit_of) -> tuple[float, list[str]]:
    """Root of a strictly decreasing scalar FOC; scans for multiple roots when
    the existence certificate fails and then keeps the max-profit root."""
    warnings: list[str] = []
    lo, hi = _expand_bracket(value, -Z_BRACKET, Z_BRACKET)
    if existence_ok:
        z = _newton_polish(value, slope, _bisect(value, lo, hi))
        return z, warnings
    zs = np.linspace(lo, hi, 601)
    vals = np.asarray(value(zs))
    roots: list[float] = []
    for i in range(len(zs) - 1):
        a, b = vals[i], vals[i + 1]
        if not (np.isfinite(a) and np.isfinite(b)) or (a > 0) == (b > 0):
            continue
        cand = _newton_polish(value, slope, _bisect(value, zs[i], zs[i + 1]))
        if abs(value(cand)) < 1e-8 and not any(abs(cand - r) < 1e-8 for r in roots):
            roots.append(cand)
    if not roots:
        z = _newton_polish(value, slope, _bisect(value, lo, hi))
        if abs(value(z)) > 1e-8:
            raise SolverError("no root in range after scan")
        return z, warnings
    if len(roots) > 1:
        warnings.append(f"multiple FOC roots ({len(roots)}); selected max-profit root")
        roots.sort(key=profit_of, reverse=True)
    return roots[0], warnings


def solve_decoupled_batch(value_fn, beta, phi_kk, n, u0, iters: int = 110):
    """Vectorized bisection for grids of decoupled FOCs of one regime.

    Returns z arrays with NaN where the bracket never sign-changes or the
    bisection lands on a pole instead of a root (possible outside the
    existence region).
    """
    beta, phi_kk, u0 = np.broadcast_arrays(np.asarray(beta, float),
                                           np.asarray(phi_kk, float),
                                           np.asarray(u0, float))
    lo = np.full(beta.shape, -Z_BRACKET)
    hi = np.full(beta.shape, Z_BRACKET)
    flo = value_fn(lo, beta, phi_kk, n, u0)
    fhi = value_fn(hi, beta, phi_kk, n, u0)
    bad = ~((flo > 0) & (fhi < 0))
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = value_fn(mid, beta, phi_kk, n, u0)
        take_lo = np.isfinite(fm) & (fm > 0)
        lo = np.where(take_lo, mid, lo)
        hi = np.where(take_lo, hi, mid)
    z = 0.5 * (lo + hi)
    resid = value_fn(z, beta, phi_kk, n, u0)
    bad |= ~np.isfinite(resid) | (np.abs(resid) > 1e-6)
    return np.where(bad, np.nan, z)


# --------------------------------------------------------------------------
# coupled 2D Newton
# --------------------------------------------------------------------------

def _newton2d(residual, z0: np.ndarray, tol: float, max_iter: int = 80,
              fd_step: float = 1e-7) -> np.ndarray:
    z = z0.copy()
    F = residual(z)
    trace: list[str] = []
    for it in range(max_iter):
        err = float(np.max(np.abs(F)))
        if err <= tol:
            return z
        J = np.empty((2, 2))
        for j in range(2):
            dz = np.zeros(2)
            dz[j] = fd_step
            J[:, j] = (residual(z + dz) - residual(z - dz)) / (2.0 * fd_step)
        try:
            step = np.linalg.solve(J, F)
        except np.linalg.LinAlgError as exc:
            raise SolverError("singular Jacobian in coupled Newton", trace) from exc
        lam = 1.0
        for _ in range(100):
            z_new = z - lam * step
            F_new = residual(z_new)
            if np.all(np.isfinite(F_new)) and np.max(np.abs(F_new)) < err:
                break
            lam *= 0.5
        else:
            trace.append(f"iter {it}: stalled at residual {err:.3e}")
            raise SolverError("coupled Newton diverged (line search exhausted)", trace)
        trace.append(f"iter {it}: residual {err:.3e} -> {np.max(np.abs(F_new)):.3e}")
        z, F = z_new, F_new
    if float(np.max(np.abs(F))) <= tol:
        return z
    raise SolverError("coupled Newton did not reach tolerance", trace)


# --------------------------------------------------------------------------
# public solvers
# --------------------------------------------------------------------------

def consumer_surplus(params: MarketParams, prices, shares, n: float | None = None) -> np.ndarray:
    """Per-side consumer surplus mu + beta (ln(N+1) + gamma_EM) - p + (Phi x)_k.

    The first term is the expected maximum of the N+1 idiosyncratic taste draws.
    """
    n = float(params.n_platforms if n is None else n)
    p = np.asarray(prices, dtype=float)
    x = np.asarray(shares, dtype=float)
    emax = params.mu_arr + params.beta_arr * (np.log(n + 1.0) + EULER_GAMMA)
    return emax - p + params.phi_arr @ x


def _assemble(regime: str, zv: np.ndarray, params: MarketParams, n: float,
              matrix_fn, residual_fn, warnings: list[str]) -> SymmetricEquilibrium:
    om = omega(zv, n)
    H = matrix_fn(zv, params, n)
    prices_alt = params.phi_arr @ om - params.beta_arr * zv - params.u0_arr
    with np.errstate(invalid="ignore"):
        prices_matrix = H @ om
        diff = np.abs(prices_matrix - prices_alt)
    # the literal matrix product overflows for astronomically large |z|;
    # the cross-check is then unavailable, not zero
    price_check = float(np.max(diff)) if np.all(np.isfinite(diff)) else float("inf")
    if regime == "cne" and params.cross_externalities_zero:
        # same value as the H Omega row, but in the cancellation-free closed
        # form (the literal matrix product loses digits for |z| >> 1)
        prices = np.array([decoupled_price(zv[k], params.beta[k], params.phi[k][k], n)
                           for k in (0, 1)])
    elif regime == "ce" and params.cross_externalities_zero:
        prices = prices_alt
    else:
        prices = prices_matrix
    if regime == "ce" and not np.any(params.phi_arr):
        ez = np.exp(np.minimum(zv, 80.0))
        price_check = max(price_check,
                          float(np.max(np.abs(prices - params.beta_arr * (1.0 + n * ez)))))
    resid = float(np.max(np.abs(residual_fn(zv, params, n))))
    cs = consumer_surplus(params, prices, om, n)
    per_side = prices * om
    return SymmetricEquilibrium(
        regime=regime,
        z=ZPoint(float(zv[0]), float(zv[1])),
        prices=(float(prices[0]), float(prices[1])),
        shares=(float(om[0]), float(om[1])),
        participation=(float(n * om[0]), float(n * om[1])),
        profit_per_side=(float(per_side[0]), float(per_side[1])),
        total_profit=float(per_side.sum()),
        consumer_surplus=(float(cs[0]), float(cs[1])),
        foc_residual=resid,
        price_check=price_check,
        n=n,
        params=params,
        warnings=tuple(warnings),
    )


def _solve(regime: str, params: MarketParams, tol: float, n: float | None) -> SymmetricEquilibrium:
    n = float(params.n_platforms if n is None else n)
    if regime == "cne":
        exists = check_cne_existence(params, n)
        value_fn, slope_fn, matrix_fn, residual_fn = mk_value, mk_slope, h_matrix, cne_foc_residual
    else:
        exists = check_ce_existence(params, n)
        value_fn, slope_fn, matrix_fn, residual_fn = mkc_value, mkc_slope, hc_matrix, ce_foc_residual
    warnings: list[str] = []
    for side, ok in zip(Side, exists):
        if not ok:
            warnings.append(f"{regime} existence condition fails on side {side.label}")

    dec = params if params.cross_externalities_zero else params.decoupled()
    z = np.empty(2)
    for k in (0, 1):
        beta, phi_kk, u0 = dec.beta[k], dec.phi[k][k], dec.u0[k]
        z[k], w = _solve_decoupled_side(
            lambda zz: value_fn(zz, beta, phi_kk, n, u0),
            lambda zz: slope_fn(zz, beta, phi_kk, n),
            exists[k],
            profit_of=lambda zz: (phi_kk * omega(zz, n) - beta * zz - u0) * omega(zz, n),
        )
        warnings.extend(w)

    if not params.cross_externalities_zero:
        z = _newton2d(lambda zz: residual_fn(zz, params, n), z, tol=min(tol, 1e-12))
    return _assemble(regime, z, params, n, matrix_fn, residual_fn, warnings)


def solve_cne(params: MarketParams, tol: float = 1e-10, n: float | None = None) -> SymmetricEquilibrium:
    """Solve the symmetric competitive equilibrium.

    With zero cross-side externalities each side is solved independently by
    bracketed bisection on the monotone decoupled FOC followed by a Newton
    polish with the analytic slope; otherwise a damped Newton on the full
    two-equation system starts from the decoupled root.  A failed existence
    check downgrades to a warning on the result (region-boundary sweeps need
    values slightly outside the certified region).
    """
    return _solve("cne", params, tol, n)


def solve_ce(params: MarketParams, tol: float = 1e-10, n: float | None = None) -> SymmetricEquilibrium:
    """Solve the collusive equilibrium; same contract as :func:`solve_cne`."""
    return _solve("ce", params, tol, n)


def compare_regimes(params: MarketParams, tol: float = 1e-10) -> RegimeComparison:
    """Solve both regimes and decompose the collusion-minus-competition price gap."""
    cne = solve_cne(params, tol)
    ce = solve_ce(params, tol)
    z_star = cne.z.as_array()
    z_c = ce.z.as_array()
    x_star = np.array(cne.shares)
    x_c = np.array(ce.shares)
    ext_term = params.phi_arr @ (x_c - x_star)
    util_term = params.beta_arr * (z_star - z_c)
    return RegimeComparison(
        cne=cne,
        ce=ce,
        dz=tuple(z_star - z_c),
        d_participation=tuple(np.array(cne.participation) - np.array(ce.participation)),
        d_price=tuple(np.array(cne.prices) - np.array(ce.prices)),
        decomposition_externality=(float(ext_term[0]), float(ext_term[1])),
        decomposition_utility=(float(util_term[0]), float(util_term[1])),
    )
