import math

import numpy as np
import pytest

from partsortlab.errors import ParameterError, RankError, SingularityError
from partsortlab.fixtures import table_points
from partsortlab.statmodel import (CANDIDATE_SETS, ModelFit, basis, least_squares_fit,
                                   polynomial, predict, select_model)

X = {"x": lambda pt: pt["x"], "x2": lambda pt: pt["x"] ** 2, "x3": lambda pt: pt["x"] ** 3,
     "2x": lambda pt: 2 * pt["x"]}
LINE = basis("line", "1", "x", custom=X)
QUAD = basis("quad", "1", "x", "x2", custom=X)

# closed-form simple regression on Table 1 in 50-digit arithmetic (mpmath)
TABLE1_INTERCEPT = -0.0028412055804585789515
TABLE1_SLOPE = 1.598649738120524782e-7
TABLE1_R2 = 0.99963686419845330378
TABLE1_ADJ_R2 = 0.99959147222325996675
TABLE1_PRED_50000 = 0.12193053270261118755


def _pts(xs, ys):
    return [({"x": float(x)}, float(y)) for x, y in zip(xs, ys)]


def test_exact_line():
    fit = least_squares_fit(_pts(range(6), [2 + 3 * x for x in range(6)]), LINE)
    assert fit.coefficients == pytest.approx([2, 3], rel=1e-12)
    assert fit.r2 == pytest.approx(1.0, abs=1e-12)


def test_table1_nlogn_fit_against_closed_form():
    fit = least_squares_fit(table_points("table1"), basis("nlogn", "1", "nlogn"))
    assert fit.r2 >= 0.995
    assert fit.coefficient("1") == pytest.approx(TABLE1_INTERCEPT, rel=1e-8)
    assert fit.coefficient("nlogn") == pytest.approx(TABLE1_SLOPE, rel=1e-8)
    assert fit.r2 == pytest.approx(TABLE1_R2, rel=1e-8)
    assert fit.adj_r2 == pytest.approx(TABLE1_ADJ_R2, rel=1e-8)


def test_underdetermined_is_rank_error():
    with pytest.raises(RankError):
        least_squares_fit(_pts([1, 2], [1, 2]), QUAD)


def test_dependent_columns_are_named():
    bad = basis("bad", "1", "x", "2x", custom=X)
    with pytest.raises(SingularityError) as info:
        least_squares_fit(_pts(range(5), range(5)), bad)
    assert info.value.dependent == ["2x"]


def test_zero_column_is_singular():
    with pytest.raises(SingularityError):
        least_squares_fit([({"n": 0}, 1.0), ({"n": 0}, 2.0)], basis("b", "1", "n"))


def test_basis_validation():
    with pytest.raises(ParameterError):
        basis("dup", "1", "1")
    with pytest.raises(ParameterError):
        basis("empty")
    with pytest.raises(ParameterError):
        basis("unknown", "q")


def test_predict():
    fit = least_squares_fit(_pts(range(6), [2 + 3 * x for x in range(6)]), LINE)
    assert predict(fit, {"x": 10}) == pytest.approx(32)
    zero = ModelFit(LINE, np.zeros(2), 1.0, 1.0, np.zeros(1), 0.0, 0.0)
    assert predict(zero, {"x": 123.0}) == 0.0


def test_predict_table1_at_50000():
    fit = least_squares_fit(table_points("table1"), basis("nlogn", "1", "nlogn"))
    value = predict(fit, {"n": 50000})
    assert value == pytest.approx(TABLE1_PRED_50000, rel=1e-8)
    assert abs(value - 0.11876) / 0.11876 < 0.05


def test_select_exact_quadratic():
    xs = np.linspace(-2, 3, 12)
    chosen, report = select_model(_pts(xs, 1 - xs + 0.5 * xs**2), [LINE, QUAD])
    assert chosen.name == "quad"
    assert report.fit_for("quad").r2 == pytest.approx(1.0)
    assert report.fit_for("line").r2 < 1.0


def test_select_tie_prefers_fewer_terms():
    xs = np.linspace(0, 1, 30)
    noise = np.random.default_rng(0).normal(0, 1e-3, xs.size)
    chosen, report = select_model(_pts(xs, 2 * xs + noise), [QUAD, LINE])
    assert abs(report.fit_for("quad").adj_r2 - report.fit_for("line").adj_r2) < 1e-3
    assert chosen.name == "line"


def test_select_rejects_empty():
    with pytest.raises(ParameterError):
        select_model(_pts([1, 2], [1, 2]), [])


# exact rational normal equations (fractions.Fraction) on Tables 2 and 3
TABLE2_FITS = {"deg1-p": (0.99200570629718943, 0.99086366433964501),
               "deg2-p": (0.99225194356383384, 0.98966925808511175)}
TABLE3_FITS = {"deg1-k": (0.80058339860855565, 0.76070007833026676),
               "deg2-k": (0.92951964872735471, 0.89427947309103195),
               "deg3-k": (0.97924408396094131, 0.95848816792188252)}


@pytest.mark.parametrize("table,axis,golden", [("table2", "p", TABLE2_FITS),
                                                ("table3", "k", TABLE3_FITS)])
def test_table_fit_reports(table, axis, golden):
    _, report = select_model(table_points(table), CANDIDATE_SETS[axis])
    assert {f.basis.name for f in report.fits} == set(golden)
    for name, (r2, adj) in golden.items():
        fit = report.fit_for(name)
        assert fit.r2 == pytest.approx(r2, rel=1e-8)
        assert fit.adj_r2 == pytest.approx(adj, rel=1e-8)


def test_table3_cubic_coefficients():
    fit = least_squares_fit(table_points("table3"), polynomial("k", 3))
    expected = [0.09943904540144431, 2.687995425253768e-05, -8.19587586122355e-09,
                8.400784269320975e-13]
    assert fit.coefficients == pytest.approx(expected, rel=1e-8)


def test_report_rendering():
    _, report = select_model(table_points("table2"), CANDIDATE_SETS["p"], paper_choice="deg2-p")
    text = report.to_text()
    assert "deg2-p" in text and "published choice: deg2-p" in text
    rows = report.to_csv_rows()
    assert rows[0][:4] == ["model", "r2", "adj_r2", "sse"]
    assert len(rows) == 3


# ---------------------------------------------------------------- properties


def _random_problem(rng):
    m = int(rng.integers(6, 40))
    xs = rng.uniform(-5, 5, m)
    ys = rng.normal(0, 1, m) + rng.uniform(-3, 3) * xs
    return _pts(xs, ys)


def test_residuals_orthogonal_to_columns():
    rng = np.random.default_rng(21)
    cubic = basis("cubic", "1", "x", "x2", "x3", custom=X)
    for _ in range(100):
        pts = _random_problem(rng)
        fit = least_squares_fit(pts, cubic)
        design = cubic.matrix([p for p, _ in pts])
        ys = np.array([y for _, y in pts])
        for col in design.T:
            scale = np.linalg.norm(col) * np.linalg.norm(ys)
            assert abs(col @ fit.residuals) <= 1e-9 * scale
        assert abs(fit.residuals.sum()) <= 1e-9 * np.abs(ys).sum()
        assert 0.0 <= fit.r2 <= 1.0


def test_adding_a_column_never_increases_sse():
    rng = np.random.default_rng(22)
    for _ in range(100):
        pts = _random_problem(rng)
        sse = [least_squares_fit(pts, b).sse for b in
               (basis("c", "1", custom=X), LINE, QUAD, basis("cubic", "1", "x", "x2", "x3", custom=X))]
        for a, b in zip(sse, sse[1:]):
            assert b <= a * (1 + 1e-12) + 1e-15


def test_two_parameter_fits_match_closed_form():
    rng = np.random.default_rng(23)
    for _ in range(100):
        pts = _random_problem(rng)
        xs = np.array([p["x"] for p, _ in pts])
        ys = np.array([y for _, y in pts])
        xbar, ybar = math.fsum(xs) / len(xs), math.fsum(ys) / len(ys)
        slope = math.fsum((xs - xbar) * (ys - ybar)) / math.fsum((xs - xbar) ** 2)
        intercept = ybar - slope * xbar
        fit = least_squares_fit(pts, LINE)
        assert fit.coefficients[1] == pytest.approx(slope, rel=1e-10)
        assert fit.coefficients[0] == pytest.approx(intercept, rel=1e-10, abs=1e-12)
