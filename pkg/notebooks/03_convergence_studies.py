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
# # Convergence studies
#
# Each study takes an ExperimentSpec and returns a report with rows and a
# summary. Reports write to CSV or JSON.

# %%
import math

from modszasz import BnSequence, EvalConfig, WeightedSpace, abs_shift, monomial, sine
from modszasz.experiments import ExperimentSpec, run

# %% [markdown]
# ## Uniform convergence
#
# For t^2 the error is x / b_n, so the sup over [0, 5] is 5 / n for b_n = n.

# %%
report = run(ExperimentSpec("converge", monomial(2), n_ladder=(10, 20, 40), x_max=5.0, x_points=33))
for row in report.rows:
    print(row["n"], row["sup_error"], row["ratio"])

# %% [markdown]
# ## Voronovskaja limit
#
# b_n [S_n f - f] approaches (x/2) f''. The residual for sin shrinks about tenfold
# per decade of b_n.

# %%
report = run(ExperimentSpec("voronovskaja", sine(), BnSequence.geometric(10), n_ladder=(1, 2, 3),
                            x_max=math.pi, x_points=129))
print(report.summary["shrink_factors"])

# %% [markdown]
# ## Direct estimate and exponents
#
# The ratio error / omega^2(f, sqrt(x / b_n)) stays bounded. The decay and
# smoothness slopes agree for t^2 (alpha = 2) and |t - 1| (alpha = 1).

# %%
sweep = BnSequence.geometric(math.sqrt(10))
report = run(ExperimentSpec("direct_bound", abs_shift(1.0), sweep, n_ladder=tuple(range(2, 9)),
                            space=WeightedSpace(0, 10.0, 1024), x_max=2.0, x_points=33, h_samples=16,
                            eval=EvalConfig(tol=1e-14)))
print("C_hat", report.summary["C_hat"], "slope", report.summary["loglog_slope"])

for f, N in ((monomial(2), 2), (abs_shift(1.0), 0)):
    s = run(ExperimentSpec("alpha_inverse", f, sweep, n_ladder=(2, 3, 4, 5, 6, 7),
                           space=WeightedSpace(N, 10.0, 4096), x_max=4.0)).summary
    print(f.spec(), s["decay_slope"], s["modulus_slope"], s["consistency_gap"])
