"""Stage-2 user behavior: logit shares, the share fixed point, and a sampling oracle.

Shares live on a per-side probability simplex over N+1 options (index 0 is the
outside option, indices 1..N the platforms).  The fixed-point map feeds each
side's externality-adjusted utilities back through the logit formula; a damped
iteration solves it for arbitrary, possibly asymmetric, price profiles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import MarketParams, Side

SIMPLEX_TOL = 1e-10


class FixedPointError(RuntimeError):
    """Raised when the damped share iteration fails to reach tolerance."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (last residual {residual:.3e})")
        self.residual = float(residual)


@dataclass(frozen=True)
class PriceProfile:
    """Per-platform, per-side prices; the outside option always costs 0."""

    buyer: tuple[float, ...]
    seller: tuple[float, ...]

    def __post_init__(self):
        b = tuple(float(p) for p in np.atleast_1d(self.buyer))
        s = tuple(float(p) for p in np.atleast_1d(self.seller))
        if len(b) != len(s):
            raise ValueError("buyer and seller price vectors must have equal length")
        if not (np.all(np.isfinite(b)) and np.all(np.isfinite(s))):
            raise ValueError("prices must be finite")
        object.__setattr__(self, "buyer", b)
        object.__setattr__(self, "seller", s)

    @classmethod
    def symmetric(cls, n_platforms: int, p_b: float, p_s: float) -> "PriceProfile":
        return cls(buyer=(p_b,) * n_platforms, seller=(p_s,) * n_platforms)

    @property
    def n_platforms(self) -> int:
        return len(self.buyer)

    def as_array(self) -> np.ndarray:
        return np.array([self.buyer, self.seller], dtype=float)


@dataclass(frozen=True, eq=False)
class MarketState:
    """Per-side share vectors (x_k^0, x_k^1, ..., x_k^N); row 0 buyers, row 1 sellers."""

    shares: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.shares, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != 2 or arr.shape[1] < 2:
            raise ValueError("shares must have shape (2, N+1)")
        if np.any(arr < -SIMPLEX_TOL) or np.any(np.abs(arr.sum(axis=1) - 1.0) > SIMPLEX_TOL):
            raise ValueError("each side's shares must lie on the probability simplex")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "shares", arr)

    @property
    def n_platforms(self) -> int:
        return self.shares.shape[1] - 1

    @property
    def outside(self) -> np.ndarray:
        return self.shares[:, 0]

    @property
    def platform_shares(self) -> np.ndarray:
        """Inside shares only, shape (2, N)."""
        return self.shares[:, 1:]

    def side(self, side: Side) -> np.ndarray:
        return self.shares[side.index]


@dataclass(frozen=True)
class ShareSensitivities:
    """Own-utility (s) and cross-platform (r) share derivatives at a symmetric profile."""

    s: float
    r: float


@dataclass(frozen=True, eq=False)
class MonteCarloShares:
    """Empirical choice frequencies with binomial standard errors."""

    shares: MarketState
    stderr: np.ndarray
    samples: int
    seed: int


class GumbelDraw:
    """Seedable source of idiosyncratic utilities; identical seeds reproduce draws."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._rng = np.random.default_rng(seed)

    def draw(self, params: MarketParams, side: Side, size) -> np.ndarray:
        """Draws with the side's location mu_k and scale beta_k."""
        return self._rng.gumbel(loc=params.mu[side.index],
                                scale=params.beta[side.index], size=size)


# --------------------------------------------------------------------------
# closed-form logit
# --------------------------------------------------------------------------

def logit_shares(det_utilities, beta: float) -> np.ndarray:
    """Softmax choice probabilities exp(u_i/beta) / sum_j exp(u_j/beta).

    Computed with max-subtraction so u/beta far outside the exp range cannot
    overflow.  Entries sum to 1 to within 1e-12.
    """
    u = np.asarray(det_utilities, dtype=float)
    if not np.all(np.isfinite(u)):
        raise ValueError("invalid utility")
    if not (np.isfinite(beta) and beta > 0):
        raise ValueError("beta must be positive")
    scaled = u / beta
    scaled = scaled - scaled.max()
    e = np.exp(scaled)
    return e / e.sum()


def _sigma(x: np.ndarray, params: MarketParams, prices: np.ndarray) -> np.ndarray:
    """One application of the share map; x has shape (..., 2, N+1), prices (..., 2, N)."""
    phi = params.phi_arr
    beta = params.beta_arr
    ext = np.einsum("kl,...ln->...kn", phi, x[..., :, 1:])
    u_in = ext - prices
    u0 = np.broadcast_to(params.u0_arr[:, None], u_in.shape[:-1] + (1,))
    u = np.concatenate([u0, u_in], axis=-1)
    scaled = u / beta[:, None]
    scaled = scaled - scaled.max(axis=-1, keepdims=True)
    e = np.exp(scaled)
    return e / e.sum(axis=-1, keepdims=True)


def _iterate(params: MarketParams, prices: np.ndarray, x0: np.ndarray,
             damping: float, tol: float, max_iter: int) -> tuple[np.ndarray, float, int]:
    """Damped iteration x <- (1-d) x + d Sigma(x); returns (x, sup residual of Sigma(x)-x, iters)."""
    x = x0
    resid = np.inf
    for it in range(max_iter):
        s = _sigma(x, params, prices)
        resid = np.max(np.abs(s - x))
        if resid <= tol:
            return x, float(resid), it
        x = (1.0 - damping) * x + damping * s
    return x, float(resid), max_iter


def _coerce_prices(params: MarketParams, prices) -> np.ndarray:
    if isinstance(prices, PriceProfile):
        arr = prices.as_array()
    else:
        arr = np.asarray(prices, dtype=float)
    if arr.shape[-2:] != (2, params.n_platforms):
        raise ValueError(f"prices must have shape (..., 2, {params.n_platforms})")
    if not np.all(np.isfinite(arr)):
        raise ValueError("prices must be finite")
    return arr


def share_fixed_point(params: MarketParams, prices, damping: float = 0.5,
                      tol: float = 1e-12, max_iter: int = 100_000,
                      x0: MarketState | np.ndarray | None = None) -> MarketState:
    """Solve x = Sigma(x) for the per-side share vectors at the given prices.

    Args:
        params: market parameters.
        prices: PriceProfile or array of shape (2, N).
        damping: step size d in x <- (1-d) x + d Sigma(x), in (0, 1].
        tol: sup-norm tolerance on Sigma(x) - x.
        max_iter: iteration cap.
        x0: optional warm start.

    Raises:
        FixedPointError: no convergence within max_iter; the exception carries
            the last residual so callers can retry with smaller damping.
    """
    if not (0.0 < damping <= 1.0):
        raise ValueError("damping must lie in (0, 1]")
    if tol <= 0:
        raise ValueError("tol must be positive")
    p = _coerce_prices(params, prices)
    n = params.n_platforms
    if x0 is None:
        start = np.full((2, n + 1), 1.0 / (n + 1))
    else:
        start = x0.shares if isinstance(x0, MarketState) else np.asarray(x0, dtype=float)
    x, resid, _ = _iterate(params, p, start, damping, tol, max_iter)
    if resid > tol:
        raise FixedPointError("share fixed point did not converge", resid)
    return MarketState(x)


def fixed_point_batch(params: MarketParams, prices_batch: np.ndarray,
                      damping: float = 0.5, tol: float = 1e-12,
                      max_iter: int = 100_000, x0: np.ndarray | None = None
                      ) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized fixed point over a leading batch of price profiles.

    Returns (shares, residuals) with shares of shape (..., 2, N+1); cells that
    failed to converge keep their last iterate and a residual above tol.
    """
    p = _coerce_prices(params, prices_batch)
    n = params.n_platforms
    if x0 is None:
        x0 = np.broadcast_to(np.full((2, n + 1), 1.0 / (n + 1)), p.shape[:-1] + (n + 1,)).copy()
    x = x0
    for _ in range(max_iter):
        s = _sigma(x, params, p)
        resid = np.max(np.abs(s - x), axis=(-2, -1))
        if np.all(resid <= tol):
            return x, resid
        x = (1.0 - damping) * x + damping * s
    return x, resid


@dataclass(frozen=True, eq=False)
class MultiStartResult:
    """Distinct fixed points found from random interior starts."""

    points: tuple[MarketState, ...]
    max_distance: float

    @property
    def multiple(self) -> bool:
        return len(self.points) > 1


def fixed_point_multistart(params: MarketParams, prices, starts: int = 10,
                           seed: int = 0, damping: float = 0.5, tol: float = 1e-12,
                           max_iter: int = 100_000, dedupe_tol: float = 1e-9
                           ) -> MultiStartResult:
    """Run the fixed point from `starts` random interior starts and report all
    distinct limits.  With a positive contraction margin the result must be a
    single point; otherwise multiplicity is reported rather than hidden.
    """
    rng = np.random.default_rng(seed)
    p = _coerce_prices(params, prices)
    n = params.n_platforms
    x0 = rng.dirichlet(np.ones(n + 1), size=(starts, 2))
    batch_p = np.broadcast_to(p, (starts, 2, n)).copy()
    x, resid = fixed_point_batch(params, batch_p, damping, tol, max_iter, x0=x0)
    if np.any(resid > tol):
        raise FixedPointError("a multistart replicate did not converge", float(resid.max()))
    max_dist = 0.0
    points: list[np.ndarray] = []
    for i in range(starts):
        for j in range(i + 1, starts):
            max_dist = max(max_dist, float(np.max(np.abs(x[i] - x[j]))))
        if not any(np.max(np.abs(x[i] - q)) <= dedupe_tol for q in points):
            points.append(x[i])
    return MultiStartResult(points=tuple(MarketState(q) for q in points),
                            max_distance=max_dist)


# --------------------------------------------------------------------------
# contraction diagnostics and logit derivatives
# --------------------------------------------------------------------------

def contraction_margin(params: MarketParams) -> float:
    """1 - M_T * M_phi; positive values certify a unique stage-2 fixed point.

    M_phi is the max absolute row sum of the externality matrix (the Lipschitz
    constant of the linear externality map) and M_T is the logit bound
    1/(2 min beta) on the summed share derivatives.
    """
    phi = params.phi_arr
    m_phi = float(np.max(np.sum(np.abs(phi), axis=1)))
    m_t = 1.0 / (2.0 * min(params.beta))
    return 1.0 - m_t * m_phi


def sensitivities(z: float, params: MarketParams, side: Side) -> ShareSensitivities:
    """Own- and cross-platform share derivatives at a symmetric profile.

    In the normalized net-utility variable: s = e^z (1+(N-1)e^z) / (beta (1+N e^z)^2)
    and r = -e^{2z} / (beta (1+N e^z)^2), evaluated in whichever exponential
    form stays finite for the sign of z.
    """
    beta = params.beta[side.index]
    if not beta > 0:
        raise ValueError("beta must be positive")
    n = float(params.n_platforms)
    z = float(z)
    if z <= 0.0:
        ez = np.exp(z)
        denom = beta * (1.0 + n * ez) ** 2
        s = ez * (1.0 + (n - 1.0) * ez) / denom
        r = -(ez * ez) / denom
    else:
        emz = np.exp(-z)
        denom = beta * (emz + n) ** 2
        s = (emz + n - 1.0) / denom
        r = -1.0 / denom
    return ShareSensitivities(s=float(s), r=float(r))


# --------------------------------------------------------------------------
# Monte Carlo sampling oracle
# --------------------------------------------------------------------------

def monte_carlo_shares(params: MarketParams, prices, fixed_state: MarketState,
                       samples: int, seed: int, chunk: int = 250_000
                       ) -> MonteCarloShares:
    """Estimate choice frequencies by simulating idiosyncratic taste draws.

    The externality term is frozen at `fixed_state` (no re-equilibration inside
    the sampler), which isolates the discrete-choice layer: each simulated user
    draws one taste per option and picks the utility argmax.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    p = _coerce_prices(params, prices)
    n = params.n_platforms
    phi = params.phi_arr
    ext = phi @ fixed_state.platform_shares  # (2, N)
    source = GumbelDraw(seed)
    freqs = np.empty((2, n + 1))
    for side in Side:
        k = side.index
        u_det = np.concatenate([[params.u0[k]], ext[k] - p[k]])
        counts = np.zeros(n + 1, dtype=np.int64)
        left = samples
        while left > 0:
            m = min(left, chunk)
            eps = source.draw(params, side, size=(m, n + 1))
            choice = np.argmax(eps + u_det, axis=1)
            counts += np.bincount(choice, minlength=n + 1)
            left -= m
        freqs[k] = counts / samples
    stderr = np.sqrt(freqs * (1.0 - freqs) / samples)
    return MonteCarloShares(shares=MarketState(freqs), stderr=stderr,
                            samples=samples, seed=seed)
