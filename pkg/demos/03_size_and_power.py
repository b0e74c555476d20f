# %% [markdown]
# # Empirical size and power
#
# Rejection rates over Monte Carlo replicates for the four population
# scenarios, next to the published values at 100,000 replications.

# %%
from blockcorr.simulation import ExperimentConfig, empirical_rate, published_value, table_csv

reps = 2000
cells = [
    ("I", (2, 2, 3), (16, 30)),
    ("II", (10, 10, 15), (40, 100)),
    ("III", (10, 10, 15), (40, 50, 100)),
    ("IV", (10, 10, 15), (50, 100)),
]
rows = []
for scenario, sizes, ns in cells:
    rows += empirical_rate(ExperimentConfig(scenario, sizes, ns, reps=reps)).rows
print(table_csv(rows))

# %%
for r in rows:
    ref = published_value(r.scenario, r.spec.sizes, r.n)
    print(f"{r.scenario:3s} {str(r.spec):12s} n={r.n:<4d} rate {r.rate:.4f} +- {r.se:.4f}  published {ref:.4f}")

# %% [markdown]
# Wide data: (50, 50, 75) with n = 100, where the likelihood ratio test is
# not available.

# %%
wide = empirical_rate(ExperimentConfig("I", (50, 50, 75), (100,), reps=500))
print(wide.rate(100))
