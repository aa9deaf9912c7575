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
# # Comparison figures
#
# Curve bundles for e^x and sin x with a fixed truncation index. The output is
# CSV; any plotting tool can read it.

# %%
import tempfile
from pathlib import Path

from modszasz import EvalConfig
from modszasz.experiments import ExperimentSpec, figures, run

print(sorted(figures.SETTINGS))

# %%
spec = ExperimentSpec("figures", eval=EvalConfig(fixed_k=100), settings=("F1a", "F5b", "F6b"))
report = run(spec)
print(report.summary)

# %% [markdown]
# ## Sup errors per curve
#
# With k fixed, large b_n and wide intervals leave most Poisson mass past the
# cutoff, and the curves fall away from the target. This is expected.

# %%
for row in report.rows:
    if row["setting"] == "F6b" and row["n"] in (20, 25, 80, 100):
        print(row["curve"], f"{row['sup_error']:.3e}")

# %%
out = Path(tempfile.mkdtemp()) / "figures.csv"
for path in report.write(out):
    print(path.name, path.stat().st_size)
