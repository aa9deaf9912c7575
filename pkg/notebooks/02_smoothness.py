# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#   kernelspec:
#     display_name: Python 3
#     language: python
#     name: python3
# ---

# %% [markdown]
# # Smoothness measures
#
# Weighted second-order moduli, Steklov means and the K-functional upper
# estimate, on the window [0, 10].

# %%
import numpy as np

from modszasz import WeightedSpace, abs_shift, monomial, sine
from modszasz.smoothness import (
    k_functional_upper,
    lipschitz_alpha_estimate,
    modulus2,
    steklov_mean,
    steklov_second_derivative,
)

space = WeightedSpace(N=0, x_max=10.0, grid_points=2049)

# %% [markdown]
# ## Moduli
#
# For t^2 the modulus is exactly 2 delta^2. A kink gives 2 delta.

# %%
for delta in (0.1, 0.01):
    print(delta, modulus2(monomial(2), space, delta).value, modulus2(abs_shift(1.0), space, delta).value)

# %% [markdown]
# ## Steklov mean
#
# f_h stays within omega^2(f, h) of f, and its second derivative is bounded by
# 9 h^-2 omega^2(f, h).

# %%
x = space.grid()
for h in (0.5, 0.1):
    f = abs_shift(1.0)
    omega = modulus2(f, space, h).value
    gap = np.max(np.abs(f(x) - steklov_mean(f, h, x)))
    curv = np.max(np.abs(steklov_second_derivative(f, h, x)))
    print(f"h = {h}: gap / omega = {gap / omega:.3f}, h^2 |f_h''| / (9 omega) = {curv * h**2 / (9 * omega):.3f}")

# %% [markdown]
# ## K-functional and Lipschitz exponents

# %%
for delta in (1e-2, 1e-3):
    print(delta, k_functional_upper(sine(), space, delta), 10 * modulus2(sine(), space, np.sqrt(delta)).value)

deltas = [0.2, 0.1, 0.05, 0.025]
for f in (monomial(2), abs_shift(1.0), monomial(1)):
    est = lipschitz_alpha_estimate(f, space, deltas)
    print(f.spec(), est.alpha, est.saturated)
