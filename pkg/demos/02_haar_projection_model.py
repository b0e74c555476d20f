# %% [markdown]
# # Haar projections and the null law of tr(B^2)
#
# Under independence the reduced block correlation matrix behaves like a
# sum of independently rotated projections. This notebook checks the
# ingredients by simulation.

# %%
import numpy as np
from scipy import stats

from blockcorr import RngStream, haar_orthogonal
from blockcorr.freeness import (
    WEINGARTEN_PATTERNS,
    ProjectionSumModel,
    trq2_mean,
    trq2_leading_var,
    mc_moments,
    mc_weingarten,
    null_trB2,
    sample_trQ2,
    weingarten_moment,
)

O = haar_orthogonal(5, RngStream(0))
np.round(O.T @ O, 12)

# %% [markdown]
# Fourth-order moments of Haar entries against their closed forms.

# %%
for name in sorted(WEINGARTEN_PATTERNS):
    est, se = mc_weingarten(name, 6, 50_000, RngStream(1))
    exact = float(weingarten_moment(name, 6))
    print(f"{name:7s} exact {exact:+.5f}  mc {est:+.5f}  z {(est - exact) / se:+.2f}")

# %% [markdown]
# Mean and variance of tr Q^2 for ranks (10, 10, 15) in dimension 49.

# %%
model = ProjectionSumModel(49, (10, 10, 15))
rep = mc_moments(model, 3000, RngStream(2))
for row in rep.rows():
    print("{:12s} mc {:9.4f}  se {:.4f}  closed form {:.4f}".format(*row))
print(trq2_mean(model, exact=True), trq2_leading_var(model))

# %% [markdown]
# Same law: tr(B^2) from Gaussian data with n = 20 against tr Q^2 with N = 19.

# %%
a = null_trB2((3, 4), 20, 3000, RngStream(3))
b = sample_trQ2(ProjectionSumModel(19, (3, 4)), 3000, RngStream(4))
print(np.mean(a), np.mean(b), stats.ks_2samp(a, b).pvalue)
