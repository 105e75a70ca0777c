"""Exit criteria for the package, one test per criterion.

Each test records a PASS/FAIL line printed in pytest's terminal summary.
"""
import math
import time

import numpy as np
import pytest
from scipy import stats

from partsortlab.anova import Factor, FactorialDesign, Observation, anova_full_factorial
from partsortlab.cli import main
from partsortlab.distgen import NegBinomial, nb_sample
from partsortlab.fdist import f_pvalue, reg_inc_beta
from partsortlab.fixtures import table4_design, table_points
from partsortlab.harness import ExperimentPlan, run_cell, run_grid, trend_report
from partsortlab.sortcore import partition_sort
from partsortlab.statmodel import basis, least_squares_fit

PUBLISHED_SS = {"n": 0.1528421, "p": 0.0039854, "k": 0.0006386, "n*p": 0.0016832,
                "n*k": 0.0002823, "p*k": 0.0000188, "n*p*k": 0.0000517, "Total": 0.1595021}
PUBLISHED_DF = {"n": 2, "p": 2, "k": 2, "n*p": 4, "n*k": 4, "p*k": 4, "n*p*k": 8,
                "Error": 54, "Total": 80}

# golden values from independent oracles (50-digit closed form; exact rationals)
TABLE1_COEF = (-0.0028412055804585789515, 1.598649738120524782e-7)
TABLE1_R2 = 0.99963686419845330378
TABLE2_FITS = {"deg1-p": (0.99200570629718943, 0.99086366433964501),
               "deg2-p": (0.99225194356383384, 0.98966925808511175)}
TABLE3_FITS = {"deg1-k": (0.80058339860855565, 0.76070007833026676),
               "deg2-k": (0.92951964872735471, 0.89427947309103195),
               "deg3-k": (0.97924408396094131, 0.95848816792188252)}


def test_c1_anova_fixture(criterion):
    start = time.perf_counter()
    design, obs = table4_design(replicates=3)
    table = anova_full_factorial(design, obs)
    elapsed = time.perf_counter() - start
    worst = 0.0
    for source, expected in PUBLISHED_SS.items():
        got = table.row(source).seq_ss
        tol = max(1e-5, 0.02 * expected)
        worst = max(worst, abs(got - expected) / tol)
        assert abs(got - expected) <= tol, (source, got, expected)
    assert [r.df for r in table.rows] == [PUBLISHED_DF[r.source] for r in table.rows]
    assert [r.source for r in table.rows] == list(PUBLISHED_DF)
    assert elapsed < 1.0
    criterion["detail"] = f"max |dSS|/tol = {worst:.3f}, runtime {elapsed * 1e3:.1f} ms"


def test_c2_f_pvalue_fixture(criterion):
    p = f_pvalue(1.77367e8, 2, 54)
    assert p < 1e-15
    assert f"{p:.3f}" == "0.000"
    criterion["detail"] = f"P = {p:.3e}"


def test_c3_regression_fixture(criterion):
    fit = least_squares_fit(table_points("table1"), basis("nlogn", "1", "nlogn"))
    assert fit.r2 >= 0.995
    assert fit.coefficients == pytest.approx(TABLE1_COEF, rel=1e-8)
    assert fit.r2 == pytest.approx(TABLE1_R2, rel=1e-8)
    criterion["detail"] = f"R2 = {fit.r2:.10f}"


def _read_fits(path):
    rows = path.read_text().splitlines()[1:]
    out = {}
    for row in rows:
        cells = row.split(",")
        out[cells[0].split("[")[0]] = (float(cells[1]), float(cells[2]))
    return out


@pytest.mark.parametrize("target,golden,choice", [("table2", TABLE2_FITS, "deg2-p"),
                                                  ("table3", TABLE3_FITS, "deg3-k")])
def test_c4_model_reports(target, golden, choice, tmp_path, capsys, criterion):
    assert main(["repro", target, "--out", str(tmp_path)]) == 0
    text = capsys.readouterr().out
    assert choice in text
    assert f"published choice: {choice}" in text
    fits = _read_fits(tmp_path / f"{target}_fits.csv")
    assert set(fits) == set(golden)
    for name, (r2, adj) in golden.items():
        assert fits[name][0] == pytest.approx(r2, rel=1e-8)
        assert fits[name][1] == pytest.approx(adj, rel=1e-8)
    verdict = "concurs" if f"{choice} -> rule concurs" in text else "differs"
    criterion["detail"] = f"{len(fits)} candidates; selection rule {verdict} with {choice}"


def test_c5_sorting_correctness(criterion):
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    arrays = 10_000
    hooked = 0
    for i in range(arrays):
        n = int(rng.integers(0, 2049))
        if i % 2:
            data = rng.integers(0, max(1, n // 64) + 1, n)   # duplicate-heavy
        else:
            data = rng.permutation(4 * n + 1)[:n] - 2 * n    # distinct
        out, stats = partition_sort(data, verify_splits=True)
        assert np.array_equal(out, np.sort(data, kind="stable"))
        assert stats.partitions == max(n - 1, 0)
        if i % 100 == 0:
            def hook(arr, lo, mid, hi):
                assert mid - lo == (hi - lo) // 2
                assert arr[lo:mid].max() <= arr[mid:hi].min()
            slow, _ = partition_sort(data, on_split=hook)
            assert np.array_equal(slow, out)
            hooked += 1
    elapsed = time.perf_counter() - start
    assert elapsed < 60
    criterion["detail"] = f"{arrays} arrays ({hooked} re-checked split by split), {elapsed:.1f} s"


def test_c6_growth_property(criterion):
    start = time.perf_counter()
    spec = NegBinomial(1000, 0.5)
    ns = [2**e for e in range(12, 18)]
    points = []
    for i, n in enumerate(ns):
        summary, _ = run_cell(n, spec, trials=3, master_seed=606, measure="comparisons",
                              cell_index=i)
        points.append(({"n": n}, summary.mean_comparisons))
    fit = least_squares_fit(points, basis("nlogn", "1", "nlogn"))
    elapsed = time.perf_counter() - start
    assert fit.r2 >= 0.99
    assert elapsed < 300
    criterion["detail"] = f"R2 = {fit.r2:.6f}, runtime {elapsed:.1f} s"


def _var_se(k, p, draws):
    # standard error of the sample variance: sigma^2 * sqrt((2 + excess kurtosis) / N)
    var = k * (1 - p) / p**2
    excess = 6 / k + p**2 / (k * (1 - p))
    return var * math.sqrt((2 + excess) / draws)


def test_c7_generator_moments(criterion):
    draws = 100_000
    details = []
    for i, p in enumerate((0.1, 0.5, 0.9)):
        k = 1000
        x = nb_sample(k, p, 700 + i, size=draws).astype(float)
        mean, var = k / p, k * (1 - p) / p**2
        z_mean = abs(x.mean() - mean) / math.sqrt(var / draws)
        z_var = abs(x.var(ddof=1) - var) / _var_se(k, p, draws)
        assert z_mean <= 4 and z_var <= 4, (p, z_mean, z_var)
        details.append(f"p={p}: z_mean={z_mean:.2f} z_var={z_var:.2f}")

    a = nb_sample(3, 0.3, 11, method="geometric", size=draws)
    b = nb_sample(3, 0.3, 12, method="bernoulli", size=draws)
    top = 40
    table = np.array([[np.sum(v == t) for t in range(3, top)] + [np.sum(v >= top)] for v in (a, b)])
    pval = stats.chi2_contingency(table)[1]
    assert pval > 0.001
    criterion["detail"] = "; ".join(details) + f"; chi-square p = {pval:.3f}"


def test_c8_numerics(criterion):
    rng = np.random.default_rng(808)
    worst_ss = 0.0
    for _ in range(100):
        nf = int(rng.integers(2, 4))
        shape = tuple(int(v) for v in rng.integers(2, 5, nf))
        r = int(rng.integers(1, 4))
        design = FactorialDesign(tuple(Factor(f"f{i}", range(L)) for i, L in enumerate(shape)), r)
        ys = rng.normal(0, rng.uniform(0.01, 10), shape + (r,))
        obs = [Observation(idx[:-1], ys[idx]) for idx in np.ndindex(*ys.shape)]
        table = anova_full_factorial(design, obs)
        total = table.row("Total")
        parts = [row for row in table.rows if row.source != "Total"]
        rel = abs(sum(row.seq_ss for row in parts) - total.seq_ss) / total.seq_ss
        worst_ss = max(worst_ss, rel)
        assert rel <= 1e-12
        assert sum(row.df for row in parts) == total.df == design.total_runs - 1

    worst_beta = 0.0
    for _ in range(200):
        x = rng.random()
        a, b = np.exp(rng.uniform(-2, 5, 2))
        dev = abs(reg_inc_beta(x, a, b) + reg_inc_beta(1 - x, b, a) - 1)
        worst_beta = max(worst_beta, dev)
        assert dev <= 1e-10

    cubic = basis("cubic", "1", "n", "nlogn", "p")
    worst_orth = 0.0
    for _ in range(100):
        m = int(rng.integers(8, 40))
        pts = [({"n": float(rng.uniform(1, 100)), "p": float(rng.random())}, float(rng.normal()))
               for _ in range(m)]
        fit = least_squares_fit(pts, cubic)
        x = cubic.matrix([pt for pt, _ in pts])
        y = np.array([v for _, v in pts])
        for col in x.T:
            rel = abs(col @ fit.residuals) / (np.linalg.norm(col) * np.linalg.norm(y))
            worst_orth = max(worst_orth, rel)
            assert rel <= 1e-9
    criterion["detail"] = (f"SS additivity {worst_ss:.1e}, I_x symmetry {worst_beta:.1e}, "
                           f"orthogonality {worst_orth:.1e}")


def test_c9_trend_report(criterion):
    # qualitative: divergence from the published decreasing trend is reported, not failed
    plan = ExperimentPlan([50_000], [NegBinomial(1000, p / 10) for p in range(1, 10)],
                          trials=3, master_seed=909, measure="both")
    result = run_grid(plan)
    report = trend_report(result.summaries, "p")
    print(report.to_text())
    assert len(report.levels) == 9
    criterion["detail"] = (f"time decreasing in p: {report.time_decreasing}; "
                           f"comparisons decreasing in p: {report.comparisons_decreasing}")
