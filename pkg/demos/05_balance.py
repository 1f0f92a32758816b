# # Balance: following the steeper gradient
#
# Balance rewards the leading ones of the first half far more than the ones
# of the second half, and punishes drifting too far on the second half with a
# trap. SSWM with small beta and large N tracks the steep part; the elitist
# EA grabs the shallow part and falls into the trap.

# %%
from sswmlab.experiments import make_config, run_trials, summarize

n = 64
budget = "10*n^2.5"

# %%
for algo in ("sswm", "ea"):
    cfg = make_config(algo, "balance", n, beta="n^-1.5", nbeta="ln(n)")
    recs = run_trials(cfg, 20, budget, master_seed=5)
    s = summarize(recs)
    traps = sum(r.balance_stats.hit_trap for r in recs)
    print(f"{algo:5s} success {s.successes}/{s.trials}  trapped runs {traps}")

# %% [markdown]
# Inside the window n/16 < |b| < 7n/16 SSWM never lowers the leading-ones
# count: in that region it behaves as if it were elitist.

# %%
cfg = make_config("sswm", "balance", n, beta="n^-1.5", nbeta="ln(n)")
recs = run_trials(cfg, 20, budget, master_seed=6)
stats = [r.balance_stats for r in recs]
print("LO decreases inside the window:", sum(s.lo_decrease_in_window for s in stats))
print("relevant-step fraction:", sum(s.relevant_steps for s in stats) / sum(r.generations for r in recs))
