"""Per-account attribute tables, Pearson correlation and OLS with inference."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .corpus import Corpus
from .graph import InteractionGraph

RESPONSES = ("retweets", "favorites", "likes", "shares")
PREDICTORS = ("posts", "followers", "in_total")
TABLE_COLUMNS = ("posts", "followers", "in_total", "w_self", "w_dispersed", "w_acquired") + RESPONSES
SIGNIF_LEGEND = "Signif. codes:  0 '***' 0.001 '**' 0.01 '*' 0.05 '.' 0.1 ' ' 1"


class StatsError(ValueError):
    pass


# ---------------------------------------------------------------------------
# special functions

def _betacf(a: float, b: float, x: float, tol: float = 1e-12, max_iter: int = 10_000) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < tol:
            return h
    raise StatsError("incomplete beta continued fraction did not converge")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta ``I_x(a, b)``."""
    if a <= 0 or b <= 0:
        raise StatsError("betainc needs a, b > 0")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_sf_two_sided(t: float, df: float) -> float:
    """``P(|T| > |t|)`` for Student's t with ``df`` degrees of freedom."""
    if df <= 0:
        raise StatsError("df must be positive")
    if math.isinf(t):
        return 0.0
    return betainc(df / 2.0, 0.5, df / (df + t * t))


def t_cdf(t: float, df: float) -> float:
    half = 0.5 * t_sf_two_sided(t, df)
    return 1.0 - half if t > 0 else half


def t_ppf(q: float, df: float) -> float:
    """Quantile of Student's t by bisection on :func:`t_cdf`."""
    if not 0.0 < q < 1.0:
        raise StatsError("quantile must be in (0, 1)")
    if q == 0.5:
        return 0.0
    lo, hi = -1.0, 1.0
    while t_cdf(lo, df) > q:
        lo *= 2.0
    while t_cdf(hi, df) < q:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if t_cdf(mid, df) < q:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * max(1.0, abs(mid)):
            break
    return 0.5 * (lo + hi)


def f_sf(f: float, d1: float, d2: float) -> float:
    """Upper tail ``P(F > f)`` of the F distribution."""
    if f <= 0:
        return 1.0
    return betainc(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f))


# ---------------------------------------------------------------------------
# correlation

def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise StatsError("pearson needs two 1-d sequences of equal length")
    if len(x) < 3:
        raise StatsError("pearson needs at least 3 observations")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise StatsError("pearson undefined for zero-variance input")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


@dataclass
class AttributeTable:
    accounts: list[str]
    columns: dict[str, np.ndarray]
    # (account, column) cells that had no data and hold a substituted 0
    substituted: set = field(default_factory=set)

    def __len__(self) -> int:
        return len(self.accounts)

    def column(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise StatsError(f"unknown column {name!r}")
        return self.columns[name]

    def has_data(self, name: str) -> bool:
        return bool(np.any(self.column(name) != 0))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        names = list(self.columns)
        writer.writerow(["account"] + names)
        for i, aid in enumerate(self.accounts):
            writer.writerow([aid] + [repr(float(self.columns[c][i])) for c in names])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, path) -> "AttributeTable":
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        if not rows or rows[0][0] != "account":
            raise StatsError(f"{path}: not an attribute table")
        names = rows[0][1:]
        accounts = [r[0] for r in rows[1:]]
        data = np.array([[float(v) for v in r[1:]] for r in rows[1:]], dtype=float).reshape(len(accounts), len(names))
        return cls(accounts, {n: data[:, i] for i, n in enumerate(names)})


def build_attribute_table(corpus: Corpus, graph: InteractionGraph) -> AttributeTable:
    grouped = corpus.posts_by_account()
    accounts = sorted(corpus.accounts)
    cols = {c: np.zeros(len(accounts)) for c in TABLE_COLUMNS}
    substituted = set()
    for i, aid in enumerate(accounts):
        posts = grouped[aid]
        prof = graph.profiles[aid]
        cols["posts"][i] = len(posts)
        cols["followers"][i] = corpus.accounts[aid].followers
        cols["in_total"][i] = prof.in_total
        cols["w_self"][i] = prof.w_self
        cols["w_dispersed"][i] = prof.w_dispersed
        cols["w_acquired"][i] = prof.w_acquired
        if prof.in_total == 0:
            substituted.update((aid, c) for c in ("w_self", "w_dispersed", "w_acquired"))
        for kind in RESPONSES:
            if posts:
                cols[kind][i] = sum(getattr(p.reactions, kind) for p in posts) / len(posts)
            else:
                substituted.add((aid, kind))
    return AttributeTable(accounts, cols, substituted)


@dataclass(frozen=True)
class CorrelationMatrix:
    names: tuple[str, ...]
    values: tuple[tuple[float | None, ...], ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([""] + list(self.names))
        for name, row in zip(self.names, self.values):
            writer.writerow([name] + ["" if v is None else f"{v:.6f}" for v in row])
        return buf.getvalue()


def correlation_matrix(table: AttributeTable, columns: Sequence[str] | None = None) -> CorrelationMatrix:
    """Pairwise Pearson matrix; cells involving a constant column are ``None``."""
    if len(table) < 3:
        raise StatsError("correlation needs at least 3 rows")
    names = tuple(columns or table.columns)
    data = [table.column(n) for n in names]
    constant = [bool(np.all(d == d[0])) for d in data]
    k = len(names)
    out = [[None] * k for _ in range(k)]
    for i in range(k):
        if not constant[i]:
            out[i][i] = 1.0
        for j in range(i + 1, k):
            if not (constant[i] or constant[j]):
                out[i][j] = out[j][i] = pearson(data[i], data[j])
    return CorrelationMatrix(names, tuple(tuple(r) for r in out))


# ---------------------------------------------------------------------------
# regression

@dataclass(frozen=True)
class Coefficient:
    name: str
    estimate: float
    std_error: float
    t_value: float
    p_value: float


@dataclass(frozen=True)
class RegressionFit:
    response_name: str
    coefficients: tuple[Coefficient, ...]
    r_squared: float
    model_p_value: float
    n: int
    df_resid: int
    sigma: float
    f_statistic: float

    def coef(self, name: str) -> Coefficient:
        for c in self.coefficients:
            if c.name == name:
                return c
        raise KeyError(name)

    def conf_int(self, level: float = 0.95) -> dict[str, tuple[float, float]]:
        q = t_ppf(0.5 + level / 2.0, self.df_resid)
        return {c.name: (c.estimate - q * c.std_error, c.estimate + q * c.std_error)
                for c in self.coefficients}

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RegressionFit":
        raw = json.loads(text)
        raw["coefficients"] = tuple(Coefficient(**c) for c in raw["coefficients"])
        return cls(**raw)


def significance_stars(p: float) -> str:
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    if p < 0.1:
        return "."
    return ""


def _collinear_columns(X: np.ndarray, names: Sequence[str]) -> list[str]:
    # greedy: a column is collinear if it adds no rank to the ones kept before it
    kept: list[int] = []
    bad = []
    scale = np.linalg.norm(X, axis=0)
    scale[scale == 0] = 1.0
    Xs = X / scale
    for j in range(X.shape[1]):
        trial = kept + [j]
        if np.linalg.matrix_rank(Xs[:, trial]) == len(trial):
            kept.append(j)
        else:
            bad.append(names[j])
    return bad


def ols_fit(table: AttributeTable | Mapping[str, Sequence[float]], response: str,
            predictors: Sequence[str] = PREDICTORS) -> RegressionFit:
    """Least squares of ``response`` on an intercept plus ``predictors``.

    Solved by QR; standard errors come from ``sigma^2 (X'X)^-1`` via the R
    factor, p-values from Student's t and the model F test.
    """
    get = table.column if isinstance(table, AttributeTable) else (lambda c: _get(table, c))
    y = np.asarray(get(response), dtype=float)
    names = ["(Intercept)"] + list(predictors)
    X = np.column_stack([np.ones(len(y))] + [np.asarray(get(p), dtype=float) for p in predictors])
    n, p = X.shape
    if n < p + 1:
        raise StatsError(f"need at least {p + 1} rows for {p} terms, got {n}")

    # column scaling keeps R well conditioned when predictors differ by orders of magnitude
    scale = np.linalg.norm(X, axis=0)
    scale[scale == 0] = 1.0
    Q, R = np.linalg.qr(X / scale)
    diag = np.abs(np.diag(R))
    if diag.min() <= 1e-10 * diag.max():
        raise StatsError(f"design matrix is rank deficient; collinear columns: {_collinear_columns(X, names)}")
    beta = np.linalg.solve(R, Q.T @ y) / scale
    resid = y - X @ beta
    df = n - p
    ssr = float(resid @ resid)
    sigma2 = ssr / df
    Rinv = np.linalg.solve(R, np.eye(p))
    cov = sigma2 * (Rinv @ Rinv.T) / np.outer(scale, scale)
    se = np.sqrt(np.diag(cov))

    coefs = []
    for name, b, s in zip(names, beta, se):
        if s > 0:
            t = float(b / s)
            pv = t_sf_two_sided(t, df)
        else:
            t = math.copysign(math.inf, b) if b != 0 else 0.0
            pv = 0.0 if b != 0 else 1.0
        coefs.append(Coefficient(name, float(b), float(s), t, pv))

    centered = y - y.mean()
    sst = float(centered @ centered)
    r2 = 1.0 - ssr / sst if sst > 0 else 1.0
    r2 = min(1.0, max(0.0, r2))
    k = p - 1
    if k == 0:
        fstat, model_p = 0.0, 1.0
    elif ssr == 0.0:
        fstat, model_p = math.inf, 0.0
    else:
        fstat = ((sst - ssr) / k) / sigma2
        model_p = f_sf(fstat, k, df)
    return RegressionFit(response, tuple(coefs), r2, model_p, n, df, math.sqrt(sigma2), fstat)


def _get(mapping, name):
    if name not in mapping:
        raise StatsError(f"unknown column {name!r}")
    return mapping[name]


def predict(fit: RegressionFit, features: Mapping[str, float]) -> float:
    total = 0.0
    for c in fit.coefficients:
        if c.name == "(Intercept)":
            total += c.estimate
            continue
        if c.name not in features:
            raise StatsError(f"missing feature {c.name!r}")
        total += c.estimate * float(features[c.name])
    return total


def _fmt(v: float) -> str:
    return f"{v:.3f}"


def render_fit(fit: RegressionFit, title: str | None = None) -> str:
    """Aligned text table: Estimate, Std. Error, t value, Pr(>|t|) plus stars."""
    head = ["", "Estimate", "Std. Error", "t value", "Pr(>|t|)"]
    rows = [[c.name, _fmt(c.estimate), _fmt(c.std_error), _fmt(c.t_value),
             _fmt(c.p_value) + significance_stars(c.p_value)] for c in fit.coefficients]
    widths = [max(len(r[i]) for r in [head] + rows) for i in range(len(head))]
    lines = [f"Model {title or fit.response_name}"]
    for r in [head] + rows:
        lines.append("  ".join([r[0].ljust(widths[0])] + [v.rjust(w) for v, w in zip(r[1:], widths[1:])]))
    lines.append(f"R-squared: {fit.r_squared:.3f} and P-value: {fit.model_p_value:.3f}"
                 f"  (n={fit.n}, df={fit.df_resid})")
    lines.append(SIGNIF_LEGEND)
    return "\n".join(lines) + "\n"


def fit_records(fit: RegressionFit) -> list[dict]:
    return [{"response": fit.response_name, "term": c.name, "estimate": c.estimate,
             "std_error": c.std_error, "t_value": c.t_value, "p_value": c.p_value,
             "signif": significance_stars(c.p_value)} for c in fit.coefficients]
