# %% [markdown]
# # Stage 1: competitive and collusive pricing
#
# Platforms choose prices first; users react per the stage-2 logit demand.
# Both regimes reduce to a two-equation system in the normalized net
# deterministic utility z = (u - u0)/beta, with a regime-specific pricing
# matrix.  The solver works in z-space and maps back to prices two
# independent ways as a consistency check.

# %%
import numpy as np

from platform_eq import MarketParams, solve_ce, solve_cne

params = MarketParams.uniform(2, beta=1.0)

eq = solve_cne(params)
print("competitive:  z* = %.6f  p* = %.6f  share = %.6f  CS = %.6f"
      % (eq.z.z_b, eq.prices[0], eq.shares[0], eq.consumer_surplus[0]))
print("FOC residual %.1e   price cross-check %.1e" % (eq.foc_residual, eq.price_check))

ce = solve_ce(params)
print("collusive:    z  = %.6f  p  = %.6f  share = %.6f  CS = %.6f"
      % (ce.z.z_b, ce.prices[0], ce.shares[0], ce.consumer_surplus[0]))

# %% [markdown]
# With externalities the platforms subsidize whichever side generates value
# for the other: note the sellers' price falling below the buyers' price once
# sellers confer a large cross benefit.

# %%
params2 = MarketParams(
    n_platforms=3,
    beta=(1.0, 0.8),
    phi=((0.1, 0.4),   # buyers gain 0.4 per unit of seller mass
         (0.05, -0.2)),
    u0=(0.2, -0.1),
)
eq2 = solve_cne(params2)
print("\ncoupled market: p_b = %.4f  p_s = %.4f  (z_b=%.3f, z_s=%.3f)"
      % (*eq2.prices, eq2.z.z_b, eq2.z.z_s))

# %% [markdown]
# Pushing the outside option to extremes reproduces the closed-form limits:
# at u0 -> -inf nobody opts out and the no-outside-option price N beta/(N-1)
# emerges; at u0 -> +inf competition for the few remaining users drives the
# price to beta.

# %%
for u0 in (-40.0, 0.0, 40.0):
    eq_u = solve_cne(params.replace(u0=(u0, u0)))
    print(f"u0 = {u0:+5.0f}:  p* = {eq_u.prices[0]:.6f}  "
          f"participation = {eq_u.participation[0]:.6f}")

# %% [markdown]
# And as the number of platforms grows the market approaches full coverage
# with price equal to the taste-heterogeneity scale.

# %%
for n in (2, 10, 100, 10_000):
    eq_n = solve_cne(params, n=float(n))
    print(f"N = {n:>6}:  p* = {eq_n.prices[0]:.4f}  N x* = {eq_n.participation[0]:.4f}")
