import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sswmlab.experiments import (
    TRIAL_COLUMNS,
    BudgetError,
    SweepSpec,
    TrialRecord,
    binomial_upper_band,
    eval_expression,
    make_config,
    phase_transition_scan,
    resolve_budget,
    run_trials,
    scaling_fit,
    summarize,
    sweep,
    write_summary_json,
    write_trials_csv,
)


def records(gens, success=True):
    cfg = make_config("ea", "onemax", 4).describe()
    return [TrialRecord(i, cfg, "x", 0, g, success, 0.0) for i, g in enumerate(gens)]


class TestExpressions:
    def test_budget_example(self):
        assert resolve_budget("50*n*log(n)", 16) == 2219
        assert resolve_budget("50*n*ln(n)", 16) == math.ceil(50 * 16 * math.log(16))

    def test_power_forms(self):
        assert eval_expression("10*n^2.5", 64) == pytest.approx(10 * 64**2.5)
        assert eval_expression("n**-1.5", 64) == pytest.approx(64**-1.5)
        assert eval_expression("n^-1.5", 64) == pytest.approx(64**-1.5)
        assert eval_expression("2^3^2", 1) == 2**9
        assert eval_expression("0.5*ln(11*n)", 64) == pytest.approx(0.5 * math.log(704))

    def test_plain_numbers(self):
        assert resolve_budget(100, 5) == 100
        assert resolve_budget("7.2", 5) == 8

    @pytest.mark.parametrize("bad", ["n+", "__import__('os')", "m*2", "ln(n, 2)", "1/0", "-n", "ln(0)"])
    def test_rejects(self, bad):
        with pytest.raises(BudgetError):
            resolve_budget(bad, 4)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(2, 10**4), st.floats(0.1, 100))
    def test_matches_python(self, n, c):
        assert eval_expression(f"{c!r}*n*ln(n)", n) == pytest.approx(c * n * math.log(n), rel=1e-12)


class TestConfig:
    def test_auto_nbeta(self):
        cfg = make_config("sswm", "onemax", 128, nbeta="auto", beta=1.0)
        assert cfg.selection.nbeta == pytest.approx(0.5 * math.log(11 * 128))

    def test_expression_params(self):
        cfg = make_config("sswm", "balance", 64, beta="n^-1.5", nbeta="ln(n)")
        assert cfg.selection.beta == pytest.approx(64**-1.5)
        assert cfg.selection.N == pytest.approx(math.log(64) * 64**1.5)

    def test_both_population_forms(self):
        with pytest.raises(ValueError):
            make_config("sswm", "onemax", 8, nbeta=2.0, N=3.0)


class TestTrials:
    def test_optimal_initial(self):
        recs = run_trials(make_config("ea", "onemax", 4), 5, 10, initial="1111")
        assert all(r.success and r.generations == 0 for r in recs)
        assert [r.trial_id for r in recs] == list(range(5))

    def test_deterministic(self):
        cfg = make_config("sswm", "cliff", 16, 3)
        assert run_trials(cfg, 20, 10**4, master_seed=5) == run_trials(cfg, 20, 10**4, master_seed=5)

    def test_master_seed_matters(self):
        cfg = make_config("sswm", "onemax", 32)
        a = [r.generations for r in run_trials(cfg, 10, 10**4, master_seed=1)]
        b = [r.generations for r in run_trials(cfg, 10, 10**4, master_seed=2)]
        assert a != b

    def test_coupon_collector(self):
        recs = run_trials(make_config("ea", "onemax", 3, mutation="local"), 10**5, 1000, master_seed=3, initial="000")
        g = np.array([r.generations for r in recs])
        assert abs(g.mean() - 5.5) < 4 * math.sqrt(6.75 / g.size)

    def test_balance_stats_attached(self):
        recs = run_trials(make_config("ea", "balance", 16), 3, 200)
        assert all(r.balance_stats is not None for r in recs)
        assert all(r.row()["lo_decrease_events"] != "" for r in recs)

    def test_workers_do_not_change_results(self):
        cfg = make_config("sswm", "onemax", 24)
        base = run_trials(cfg, 40, 10**4, master_seed=9, workers=1)
        assert run_trials(cfg, 40, 10**4, master_seed=9, workers=2) == base

    def test_rejects_zero_trials(self):
        with pytest.raises(ValueError):
            run_trials(make_config("ea", "onemax", 4), 0, 10)


class TestSummary:
    def test_small(self):
        s = summarize(records([1, 2, 3]))
        assert s.median == 2 and s.mean == 2 and s.success_rate == 1.0
        assert math.isnan(s.ci_low)  # fewer than 10 successes

    def test_skewed(self):
        s = summarize(records([1, 1, 1, 101]))
        assert s.median == 1 and s.mean == 26

    def test_all_failures(self):
        s = summarize(records([5, 5], success=False))
        assert s.success_rate == 0 and not s.runtime_defined and math.isnan(s.mean)
        assert s.as_dict()["mean"] is None

    def test_bootstrap_interval(self):
        rng = np.random.default_rng(0)
        g = rng.integers(50, 150, size=200)
        s = summarize(records(g))
        assert s.ci_low < g.mean() < s.ci_high
        assert s.ci_high - s.ci_low == pytest.approx(2 * 1.96 * g.std() / math.sqrt(g.size), rel=0.15)

    def test_mixed(self):
        recs = records([10, 20]) + records([99], success=False)
        s = summarize(recs)
        assert s.successes == 2 and s.success_rate == pytest.approx(2 / 3) and s.mean == 15

    def test_empty(self):
        with pytest.raises(ValueError):
            summarize([])

    def test_binomial_band(self):
        from scipy.stats import binom

        band = binomial_upper_band(100, 0.05)
        assert binom.cdf(band, 100, 0.05) >= 0.99 > binom.cdf(band - 1, 100, 0.05)


class TestSweep:
    def test_cell_count(self):
        spec = SweepSpec({"n": [8, 16], "beta": [0.5, 1, 2]}, trials=1, budget=10)
        assert len(spec.cells()) == 6

    def test_empty_dimension(self):
        with pytest.raises(ValueError):
            SweepSpec({"n": [8], "beta": []}, trials=1, budget=10)

    def test_unknown_key(self):
        with pytest.raises(ValueError):
            SweepSpec({"colour": [1]}, trials=1, budget=10)

    def test_invalid_cells_skipped(self):
        spec = SweepSpec({"fitness": ["balance"], "n": [7, 8]}, trials=3, budget="10*n")
        cells = sweep(spec, 0)
        assert cells[0].error and cells[0].summary is None
        assert cells[1].error is None and cells[1].summary.trials == 3

    def test_seed_stability_across_workers(self):
        spec = SweepSpec({"n": [8, 12], "algo": ["sswm", "ea"]}, trials=24, budget="50*n*ln(n)")
        out = []
        for w in (1, 4, 16):
            buf = io.StringIO()
            write_summary_json(sweep(spec, 21, workers=w), buf)
            out.append(buf.getvalue())
        assert out[0] == out[1] == out[2]
        data = json.loads(out[0])
        assert len(data) == 4 and data[0]["config"]["n"] == 8


class TestScaling:
    ns = np.array([16, 32, 64, 128, 256])

    def test_square(self):
        fit = scaling_fit(list(zip(self.ns, self.ns**2.0)), "n")
        assert fit.slope == pytest.approx(2.0) and fit.r2 == pytest.approx(1.0)

    def test_nlogn(self):
        fit = scaling_fit(list(zip(self.ns, 7 * self.ns * np.log(self.ns))), "nlogn")
        assert fit.slope == pytest.approx(1.0)

    def test_constant(self):
        fit = scaling_fit([(n, 3.0) for n in self.ns], "n")
        assert fit.slope == pytest.approx(0.0, abs=1e-12)

    def test_power_model(self):
        fit = scaling_fit([(n, n**3) for n in self.ns], "n^d", d=3)
        assert fit.slope == pytest.approx(1.0)

    @pytest.mark.parametrize("pts", [[(8, 1), (16, 0), (32, 1)], [(8, 1), (16, 2)]])
    def test_rejects(self, pts):
        with pytest.raises(ValueError):
            scaling_fit(pts, "n")


class TestScan:
    def test_trivial_n2(self):
        res = phase_transition_scan(2, 1.0, [1.0, 2.0, 4.0], budget=200, trials=20)
        assert all(p[1] == 1.0 for p in res.points) and res.threshold == 1.0

    def test_below_one_warned(self):
        with pytest.warns(UserWarning):
            res = phase_transition_scan(4, 1.0, [0.5, 2.0], budget=100, trials=5)
        assert [p[0] for p in res.points] == [2.0]

    def test_forced(self):
        res = phase_transition_scan(4, 0.1, [0.5], budget=100, trials=5, force=True)
        assert len(res.points) == 1


def test_csv_format():
    recs = run_trials(make_config("sswm", "cliff", 10, 3), 3, 50)
    buf = io.StringIO()
    write_trials_csv(recs, buf)
    text = buf.getvalue()
    assert "\r" not in text
    lines = text.splitlines()
    assert lines[0].split(",") == list(TRIAL_COLUMNS)
    assert len(lines) == 4
