# %% [markdown]
# # Block correlation and the Schott type statistic
#
# Three groups of variables observed together. We build the block
# correlation matrix, look at the Pillai traces between groups and run the
# independence test.

# %%
import numpy as np

from blockcorr import (
    RngStream,
    block_correlation,
    gaussian_sample,
    pillai_trace,
    reduced_matrix,
    scenario_population,
    schott_statistic,
    schott_test,
)

sizes = (2, 2, 3)
X = gaussian_sample(scenario_population("I", sizes), 30, RngStream(0))
X.shape

# %% [markdown]
# Diagonal blocks of B are identities; off-diagonal blocks carry the
# whitened cross-correlations.

# %%
B = block_correlation(X, sizes)
np.round(B.matrix, 3)

# %%
pairs = [(0, 1), (0, 2), (1, 2)]
traces = {pair: pillai_trace(X, sizes, *pair) for pair in pairs}
print(traces)
print(sum(traces.values()), schott_statistic(X, sizes))

# %% [markdown]
# The reduced (n-1) x (n-1) matrix has the same nonzero spectrum, which is
# what makes the statistic cheap when p exceeds n.

# %%
ev_B = np.sort(B.eigenvalues())[::-1]
ev_R = np.sort(reduced_matrix(X, sizes).eigenvalues())[::-1]
print(np.round(ev_B, 4))
print(np.round(ev_R[:7], 4))

# %% [markdown]
# Independent groups: the test should not reject. Equicorrelated groups
# of sizes (10, 10, 15) with 100 observations: it nearly always does.

# %%
print(schott_test(X, sizes).summary())

# %%
big = (10, 10, 15)
Y = gaussian_sample(scenario_population("III", big), 100, RngStream(1))
print(schott_test(Y, big).summary())

# %% [markdown]
# More variables than observations: p = 105, n = 60.

# %%
wide = (30, 30, 45)
Z = gaussian_sample(scenario_population("I", wide), 60, RngStream(2))
print(schott_test(Z, wide).summary())
