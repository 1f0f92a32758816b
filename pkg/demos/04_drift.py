# # Drift on OneMax
#
# The expected one-step change of the ones-count, split into its forward and
# backward parts, decides between polynomial and exponential behaviour.

# %%
import math

from sswmlab.experiments import make_config
from sswmlab.markov import build_chain, check_drift_bounds, check_negative_drift, drift_profile

n = 100

# %%
for nb in (0.5 * math.log(11 * n), 0.25 * math.log(n)):
    chain = build_chain(make_config("sswm", "onemax", n, beta=1.0, nbeta=nb))
    prof = drift_profile(chain)
    print(f"N*beta={nb:.3f}: net drift near the optimum", [f"{v:.2e}" for v in prof.delta[n - 4 : n]])

# %% [markdown]
# Above the threshold the drift bounds hold and the net drift stays positive.
# Below it, the last few zero-bits push the process back, which is what the
# negative drift conditions check.

# %%
above = build_chain(make_config("sswm", "onemax", n, beta=1.0, nbeta="auto"))
rep = check_drift_bounds(above)
print("drift bounds pass:", rep.passed, " constant c =", round(rep.drift_constant, 4))

below = build_chain(make_config("sswm", "onemax", n, beta=1.0, nbeta=0.25 * math.log(n)))
neg = check_negative_drift(below, 1, 3, epsilon=0.01, r=1.0, delta=0.1)
print("negative drift below the threshold:", neg.holds)
