import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from newsflow.stats import (AttributeTable, RegressionFit, StatsError, betainc, correlation_matrix,
                            f_sf, fit_records, ols_fit, pearson, predict, render_fit,
                            significance_stars, t_cdf, t_ppf, t_sf_two_sided)

mpmath.mp.dps = 40


def mp_two_sided(t, df):
    x = mpmath.mpf(df) / (df + mpmath.mpf(t) ** 2)
    return float(mpmath.betainc(mpmath.mpf(df) / 2, mpmath.mpf(1) / 2, 0, x, regularized=True))


def test_pearson_examples():
    x = [1.0, 2.0, 3.0, 4.0, 5.0]
    assert pearson(x, [2 * v for v in x]) == pytest.approx(1.0)
    assert pearson(x, [-v for v in x]) == pytest.approx(-1.0)
    with pytest.raises(StatsError):
        pearson([3, 3, 3], [1, 2, 3])
    with pytest.raises(StatsError):
        pearson([1, 2], [1, 2])


def test_pearson_hand_five_points():
    # deviations x: -2,-1,0,1,2 ; y: -2,0,1,0,1 -> sxy=6, sxx=10, syy=6
    assert pearson([1, 2, 3, 4, 5], [2, 4, 5, 4, 5]) == pytest.approx(6 / math.sqrt(60), abs=1e-12)


finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@settings(max_examples=200)
@given(st.lists(st.tuples(finite, finite), min_size=3, max_size=30),
       st.floats(0.1, 10), st.floats(-100, 100))
def test_pearson_symmetric_and_affine_invariant(pairs, scale, shift):
    x = np.array([p[0] for p in pairs])
    y = np.array([p[1] for p in pairs])
    if np.ptp(x) < 1e-3 or np.ptp(y) < 1e-3:
        return
    r = pearson(x, y)
    assert r == pytest.approx(pearson(y, x), abs=1e-12)
    assert abs(pearson(scale * x + shift, y) - r) <= 1e-9
    assert -1.0 <= r <= 1.0


def table(cols):
    n = len(next(iter(cols.values())))
    return AttributeTable([f"a{i}" for i in range(n)], {k: np.asarray(v, float) for k, v in cols.items()})


def test_correlation_matrix_collinear_and_flagged():
    t = table({"a": [1, 2, 3, 4], "b": [2, 4, 6, 8], "c": [5, 5, 5, 5]})
    m = correlation_matrix(t)
    assert m.values[0][1] == pytest.approx(1.0)
    assert m.values[0][0] == 1.0
    assert m.values[2][2] is None and m.values[0][2] is None
    assert "a,1.000000,1.000000," in m.to_csv()


def test_correlation_matrix_symmetric():
    rng = np.random.default_rng(0)
    t = table({c: rng.normal(size=20) for c in "abcde"})
    vals = np.array(correlation_matrix(t).values, dtype=float)
    assert np.array_equal(vals, vals.T)


def test_correlation_needs_three_rows():
    with pytest.raises(StatsError):
        correlation_matrix(table({"a": [1, 2]}))


@pytest.mark.parametrize("t, df", [(0.5, 5), (1, 30), (2, 5), (2, 30), (3, 30), (-2.5, 7), (12.0, 3)])
def test_t_tail_matches_mpmath(t, df):
    assert t_sf_two_sided(t, df) == pytest.approx(mp_two_sided(t, df), abs=1e-12)


@pytest.mark.parametrize("a, b, x", [(0.5, 0.5, 0.3), (2.0, 3.0, 0.9), (10.0, 0.5, 0.99), (30, 40, 0.4)])
def test_betainc_matches_mpmath(a, b, x):
    ref = float(mpmath.betainc(a, b, 0, x, regularized=True))
    assert betainc(a, b, x) == pytest.approx(ref, abs=1e-12)


def test_f_tail_matches_mpmath():
    d1, d2, f = 3, 44, 4.2
    ref = float(mpmath.betainc(mpmath.mpf(d2) / 2, mpmath.mpf(d1) / 2, 0,
                               mpmath.mpf(d2) / (d2 + d1 * f), regularized=True))
    assert f_sf(f, d1, d2) == pytest.approx(ref, abs=1e-12)


def test_t_ppf_inverts_cdf():
    for df in (3, 10, 44):
        q = t_ppf(0.975, df)
        assert t_cdf(q, df) == pytest.approx(0.975, abs=1e-12)
    assert t_ppf(0.975, 44) == pytest.approx(2.0153675744437627, abs=1e-9)


def test_t_tail_monte_carlo():
    rng = np.random.default_rng(2024)
    for df in (5, 30):
        samples = np.abs(rng.standard_t(df, size=10_000_000))
        for t in (0.5, 1.0, 2.0, 3.0):
            assert abs(np.mean(samples > t) - t_sf_two_sided(t, df)) < 1e-3


def test_noiseless_fit():
    posts = np.arange(1.0, 11.0)
    fit = ols_fit({"posts": posts, "y": 3 + 2 * posts}, "y", ["posts"])
    assert fit.coef("(Intercept)").estimate == pytest.approx(3.0)
    assert fit.coef("posts").estimate == pytest.approx(2.0)
    assert abs(fit.r_squared - 1.0) <= 1e-9
    assert fit.sigma == pytest.approx(0.0, abs=1e-9)


def synthetic(seed, n=48, noise=40.0):
    rng = np.random.default_rng(seed)
    cols = {
        "posts": rng.integers(100, 10_000, n).astype(float),
        "followers": rng.integers(10_000, 5_000_000, n).astype(float),
        "in_total": rng.integers(0, 20_000, n).astype(float),
    }
    cols["retweets"] = (30 - 0.01 * cols["posts"] + 0.001 * cols["followers"]
                        + 0.012 * cols["in_total"] + rng.normal(0, noise, n))
    return cols


TRUTH = {"(Intercept)": 30, "posts": -0.01, "followers": 0.001, "in_total": 0.012}


def test_generate_then_fit_within_two_se():
    hits = {k: 0 for k in TRUTH}
    for seed in range(100):
        fit = ols_fit(synthetic(seed), "retweets")
        for c in fit.coefficients:
            hits[c.name] += abs(c.estimate - TRUTH[c.name]) <= 2 * c.std_error
    assert all(v >= 90 for v in hits.values()), hits


def test_residuals_orthogonal_and_r2():
    cols = synthetic(5)
    fit = ols_fit(cols, "retweets")
    X = np.column_stack([np.ones(48), cols["posts"], cols["followers"], cols["in_total"]])
    beta = np.array([c.estimate for c in fit.coefficients])
    resid = cols["retweets"] - X @ beta
    for j in range(X.shape[1]):
        assert abs(resid @ X[:, j]) <= 1e-6 * np.linalg.norm(resid) * np.linalg.norm(X[:, j])
    sst = np.sum((cols["retweets"] - cols["retweets"].mean()) ** 2)
    assert fit.r_squared == pytest.approx(1 - resid @ resid / sst, abs=1e-9)
    assert 0 <= fit.r_squared <= 1
    for c in fit.coefficients:
        assert c.t_value == pytest.approx(c.estimate / c.std_error)
        assert 0 <= c.p_value <= 1
    assert fit.df_resid == 44


def test_fit_matches_numpy_lstsq_reference():
    cols = synthetic(9)
    fit = ols_fit(cols, "retweets")
    X = np.column_stack([np.ones(48), cols["posts"], cols["followers"], cols["in_total"]])
    ref, *_ = np.linalg.lstsq(X, cols["retweets"], rcond=None)
    assert np.allclose([c.estimate for c in fit.coefficients], ref, rtol=1e-8, atol=1e-10)


def test_rank_deficiency_names_columns():
    cols = synthetic(1)
    cols["posts"] = np.full(48, 200.0)
    with pytest.raises(StatsError, match="posts"):
        ols_fit(cols, "retweets")
    cols = synthetic(1)
    cols["twice"] = 2 * cols["followers"]
    with pytest.raises(StatsError, match="twice"):
        ols_fit(cols, "retweets", ["posts", "followers", "twice"])


def test_too_few_rows():
    with pytest.raises(StatsError):
        ols_fit({"x": [1.0, 2.0], "y": [1.0, 3.0]}, "y", ["x"])


def test_render_layout_and_stars():
    fit = ols_fit(synthetic(3), "retweets")
    text = render_fit(fit, "re-tweet")
    lines = text.splitlines()
    assert lines[0] == "Model re-tweet"
    assert lines[1].split() == ["Estimate", "Std.", "Error", "t", "value", "Pr(>|t|)"]
    assert lines[-1] == "Signif. codes:  0 '***' 0.001 '**' 0.01 '*' 0.05 '.' 0.1 ' ' 1"
    assert lines[-2].startswith("R-squared: ")


def test_render_paper_row():
    from newsflow.stats import Coefficient
    fit = RegressionFit("retweets", (Coefficient("followers", 0.001, 0.0003545, 2.821, 0.0071),), 0.221, 0.011,
                        48, 44, 1.0, 4.1)
    row = render_fit(fit).splitlines()[2].split()
    assert row == ["followers", "0.001", "0.000", "2.821", "0.007**"]


@pytest.mark.parametrize("p, stars", [(0.0001, "***"), (0.007, "**"), (0.032, "*"), (0.08, "."), (0.284, "")])
def test_significance_stars(p, stars):
    assert significance_stars(p) == stars


def test_predict_examples():
    from newsflow.stats import Coefficient
    coefs = tuple(Coefficient(n, e, 1.0, e, 0.5) for n, e in
                  [("(Intercept)", 30.5), ("posts", -0.011), ("followers", 0.001), ("in_total", 0.012)])
    fit = RegressionFit("retweets", coefs, 0.221, 0.011, 48, 44, 1.0, 4.1)
    assert predict(fit, {"posts": 0, "followers": 0, "in_total": 0}) == 30.5
    assert predict(fit, {"posts": 1000, "followers": 1_000_000, "in_total": 5000}) == pytest.approx(1079.5)
    with pytest.raises(StatsError):
        predict(fit, {"posts": 1})


@given(st.tuples(finite, finite, finite))
def test_predict_affine(x):
    fit = ols_fit(synthetic(2), "retweets")
    feats = dict(zip(("posts", "followers", "in_total"), x))
    double = {k: 2 * v for k, v in feats.items()}
    zero = {k: 0.0 for k in feats}
    lhs = predict(fit, double) - predict(fit, feats)
    rhs = predict(fit, feats) - predict(fit, zero)
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-6)


def test_fit_json_round_trip():
    fit = ols_fit(synthetic(4), "retweets")
    assert RegressionFit.from_json(fit.to_json()) == fit
    assert [r["term"] for r in fit_records(fit)] == ["(Intercept)", "posts", "followers", "in_total"]
