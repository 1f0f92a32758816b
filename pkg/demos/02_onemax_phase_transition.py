# # OneMax: n log n above the threshold, stuck below it
#
# With N*beta at least ln(11n)/2 SSWM climbs OneMax in O(n log n) steps.
# Halve the selection strength and the same budget is no longer enough.

# %%
import math

import numpy as np

from sswmlab.experiments import make_config, phase_transition_scan, run_trials, scaling_fit

# %%
ns = (64, 128, 256)
medians = []
for n in ns:
    cfg = make_config("sswm", "onemax", n, beta=1.0, nbeta="auto")
    recs = run_trials(cfg, 50, "10^3*n*ln(n)", master_seed=1)
    medians.append(np.median([r.generations for r in recs]))
    print(n, medians[-1])

fit = scaling_fit(list(zip(ns, medians)), "nlogn")
print(f"slope against n ln n: {fit.slope:.3f} (r2 {fit.r2:.4f})")

# %% [markdown]
# Scan N*beta at n = 256. The success rate jumps from 0 to 1 over a narrow
# range a little above (1/2) ln n; finite budgets push it upward.

# %%
n = 256
grid = np.linspace(1.2, 4.0, 8)
scan = phase_transition_scan(n, 1.0, grid, "50*n*ln(n)", trials=20, master_seed=2)
for nb, rate, k, t in scan.points:
    print(f"N*beta={nb:.2f}  success {k}/{t}")
print("empirical threshold", scan.threshold, " ln(n)/2 =", round(0.5 * math.log(n), 3))
