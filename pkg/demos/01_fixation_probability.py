# # Fixation probability as an acceptance rule
#
# SSWM accepts a mutant with the probability that it takes over a population
# of N individuals. Here we look at that curve and at its envelope.

# %%
import numpy as np

from sswmlab import SelectionParams, p_fix, p_fix_bounds
from sswmlab.selection import p_fix_array

# %% [markdown]
# Neutral mutants fix with probability 1/N, and a population of one accepts
# everything, including worsenings.

# %%
print(p_fix(0, SelectionParams(10, 0.3)))
print(p_fix(-5, SelectionParams(1, 0.3)))
print(p_fix(1, SelectionParams(2, 1.0)))

# %% [markdown]
# Larger populations make the curve steeper: improvements are still accepted
# while worsenings become exponentially unlikely.

# %%
deltas = np.linspace(-3, 3, 7)
for N in (2, 5, 20):
    row = p_fix_array(deltas, SelectionParams(N, 1.0))
    print(f"N={N:>3}", np.array2string(row, precision=4))

# %% [markdown]
# The lower and upper envelopes bracket the exact value on both sides of zero.

# %%
sel = SelectionParams(2, 1.0)
for df in (-1.0, 1.0):
    lo, hi = p_fix_bounds(df, sel)
    print(f"df={df:+}: {lo:.5f} <= {p_fix(df, sel):.5f} <= {hi:.5f}")
