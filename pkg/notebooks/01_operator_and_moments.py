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
# # The operator and its moments
#
# S_n(f; x) = sum_k s_{b,k}(x) f(k/b) with b = b_n. Here we evaluate it for a few
# sequences and compare the truncated series with the exact moment polynomials.

# %%
from fractions import Fraction

import numpy as np

from modszasz import BnSequence, EvalConfig, apply, monomial, sine
from modszasz.moments import build_table, central_moment, raw_moment

# %% [markdown]
# ## Sequences
#
# The classical operator uses b_n = n. Partial sums of N^{-p} grow more slowly,
# so at equal n they smooth more.

# %%
families = {
    "classical": BnSequence.classical(),
    "psum:1": BnSequence.psum(1),
    "psum:0.5": BnSequence.psum(0.5),
    "geometric:2": BnSequence.geometric(2),
}
for name, seq in families.items():
    print(f"{name:12s}", [round(seq.value(n), 3) for n in (1, 5, 10, 20)])

# %% [markdown]
# ## Evaluation
#
# Truncation is driven by a tolerance on the weighted Poisson tail; the same
# call also accepts a fixed cutoff index.

# %%
x = np.linspace(0, 3, 7)
seq = BnSequence.psum(0.5)
for n in (10, 100, 1000):
    err = np.abs(apply(sine(), seq, n, x) - np.sin(x))
    print(f"n = {n:5d}  b_n = {seq.value(n):8.3f}  max |S_n sin - sin| = {err.max():.3e}")

print("fixed k = 5:", apply(sine(), seq, 10, 1.0, EvalConfig(fixed_k=5)))

# %% [markdown]
# ## Moments
#
# S_n(t^r; x) is a polynomial whose coefficients are Stirling numbers of the
# second kind. Central moments are collected in exact integer arithmetic first.

# %%
table = build_table(8)
for r in range(1, 5):
    print(r, table.a[r][1:])

b, xv = 10.0, 1.0
print("raw r=3:", raw_moment(table, 3, xv, b), "series:", apply(monomial(3), BnSequence.table([b]), 1, xv))
print("mu_4 exact:", central_moment(table, 4, Fraction(1), Fraction(10), exact=True))
