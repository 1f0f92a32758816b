# # Crossing a cliff: exact expected times
#
# On Cliff_d the (1+1) EA must jump d bits at once from the top of the cliff;
# SSWM can step down into the valley and climb out. Both times are computed
# exactly on the ones-count chain, no sampling.

# %%
import math

from sswmlab.experiments import make_config
from sswmlab.markov import build_chain, expected_hitting_times

n = 30
N = 0.5 * math.log(11 * n)

# %%
print(" d        EA          SSWM     speed-up")
for d in range(3, 8):
    ea = expected_hitting_times(build_chain(make_config("ea", "cliff", n, d)))[0]
    ss = expected_hitting_times(build_chain(make_config("sswm", "cliff", n, d, beta=1.0, N=N)))[0]
    print(f"{d:2d} {ea:12.4g} {ss:12.4g} {ea / ss:10.2f}")

# %% [markdown]
# Each extra unit of width multiplies the EA's time by roughly n, while the
# speed-up of SSWM grows with d.
