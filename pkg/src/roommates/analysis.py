"""Reference quantities for random roommates instances and power-law fits.

Holds the exact solvability probabilities for n <= 10, harmonic-number
asymptotics, the known lower bound and the n^(-1/4) conjecture for p_n,
the distribution of the best received proposal rank, the published
simulation table, and sliding-window least-squares fits of
``a * n**-delta`` (optionally with an offset) to (n, p, sigma) data.
"""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import optimize

EULER_GAMMA = 0.57721566490153286061

EXACT_P: dict[int, Fraction] = {
    4: Fraction(26, 27),
    6: Fraction(181431847, 194400000),
    8: Fraction(809419574956627, 889426440000000),
    10: Fraction(25365465754520943457921774207, 28460490127321448448000000000),
}

MODELS = ("two-param", "one-param", "offset")


class FitError(ValueError):
    pass


def exact_p(n: int) -> Fraction:
    """Exact probability that a random instance of size ``n`` is solvable."""
    try:
        return EXACT_P[n]
    except KeyError:
        raise ValueError(f"no exact value stored for n={n}; available: {sorted(EXACT_P)}") from None


def harmonic(n: int, exact: bool = False) -> float | Fraction:
    """H_n, summed from the smallest term up (``exact`` returns a Fraction)."""
    if n < 1:
        raise ValueError("n must be positive")
    if exact:
        return sum((Fraction(1, i) for i in range(n, 0, -1)), Fraction(0))
    total = 0.0
    for i in range(n, 0, -1):
        total += 1.0 / i
    return total


def harmonic_expansion(n: int) -> float:
    """Asymptotic H_n ~ (n log n + gamma n + 1/2) / n, error O(n^-2)."""
    if n < 1:
        raise ValueError("n must be positive")
    return (n * math.log(n) + EULER_GAMMA * n + 0.5) / n


def conjecture_p(n: float) -> float:
    """Conjectured asymptotics p_n ~ e sqrt(2/pi) n^(-1/4)."""
    return math.e * math.sqrt(2.0 / math.pi) * n ** -0.25


def pittel_lower_bound(n: float) -> float:
    """Asymptotic lower bound 2 e^(3/2) / sqrt(pi n) on p_n."""
    return 2.0 * math.exp(1.5) / math.sqrt(math.pi * n)


def ci(p_hat: float, M: int) -> float:
    """Binomial standard deviation of an estimated fraction from M samples."""
    if not 0.0 <= p_hat <= 1.0:
        raise ValueError("p_hat must lie in [0, 1]")
    if M < 1:
        raise ValueError("M must be positive")
    return math.sqrt(p_hat * (1.0 - p_hat) / M)


@dataclass(frozen=True)
class RankDistribution:
    """P(l) = C(n - l, k - 1) / C(n, k): law of the minimum of k distinct
    uniform draws from 1..n, i.e. the best rank among k received proposals."""

    n: int
    k: int
    pmf: np.ndarray  # pmf[l - 1] = P(l) for l = 1..n - k + 1

    @property
    def support(self) -> np.ndarray:
        return np.arange(1, len(self.pmf) + 1)

    @property
    def mean(self) -> float:
        return float(np.dot(self.support, self.pmf))

    @property
    def std(self) -> float:
        ell = self.support
        m = self.mean
        return float(np.sqrt(np.dot((ell - m) ** 2, self.pmf)))


EXACT_BINOMIAL_LIMIT = 1000


def rank_distribution(n: int, k: int) -> RankDistribution:
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in 1..n, got k={k}, n={n}")
    ell = np.arange(1, n - k + 2)
    if n <= EXACT_BINOMIAL_LIMIT:
        denom = math.comb(n, k)
        pmf = np.array([math.comb(n - int(l), k - 1) / denom for l in ell])
    else:
        # P(1) = k/n and P(l + 1) / P(l) = 1 - (k - 1) / (n - l)
        steps = np.log1p(-(k - 1) / (n - ell[:-1].astype(float)))
        logp = math.log(k / n) + np.concatenate(([0.0], np.cumsum(steps)))
        pmf = np.exp(logp)
    return RankDistribution(n, k, pmf)


# ---------------------------------------------------------------------------
# Published simulation table
# ---------------------------------------------------------------------------

_BRACKET = re.compile(r"^([0-9]*\.([0-9]+))\((\d+)\)$")


@dataclass(frozen=True)
class FitPoint:
    n: int
    p: float
    sigma: float


def parse_bracketed(value: str) -> tuple[float, float]:
    """``"0.910048(5)"`` -> (0.910048, 5e-6), the value and its last-digit bracket."""
    m = _BRACKET.match(value.strip())
    if not m:
        raise ValueError(f"not a bracketed value: {value!r}")
    digits = len(m.group(2))
    return float(m.group(1)), int(m.group(3)) * 10.0 ** -digits


def table1() -> list[FitPoint]:
    """The 64 published (n, p_n) estimates.

    Brackets are 95% half-widths (2 sigma), so ``sigma`` is half the bracket.
    """
    text = resources.files("roommates").joinpath("data/table1.csv").read_text()
    points = []
    for row in csv.DictReader(io.StringIO(text)):
        p, half = parse_bracketed(row["p_n"])
        points.append(FitPoint(int(row["n"]), p, half / 2.0))
    return points


def table1_lookup(n: int) -> FitPoint:
    for pt in table1():
        if pt.n == n:
            return pt
    raise KeyError(n)


# ---------------------------------------------------------------------------
# Power-law fits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FitResult:
    model: str
    a: float
    a_err: float
    delta: float
    delta_err: float
    b: Optional[float]
    b_err: Optional[float]
    chi2: float
    start: int
    stop: int
    n_geo: float

    def as_row(self) -> dict[str, float]:
        row = {
            "n_geo": self.n_geo,
            "a": self.a,
            "a_err": self.a_err,
            "delta": self.delta,
            "delta_err": self.delta_err,
        }
        if self.b is not None:
            row["b"] = self.b
            row["b_err"] = self.b_err
        row["chi2"] = self.chi2
        return row


def _arrays(points: Sequence[FitPoint]):
    n = np.array([pt.n for pt in points], dtype=float)
    p = np.array([pt.p for pt in points], dtype=float)
    s = np.array([pt.sigma for pt in points], dtype=float)
    return n, p, s


def _fit_loglog(n, p, s, fixed_delta=None):
    y = np.log(p)
    w = (p / s) ** 2  # delta method: var(log p) = (sigma / p)^2
    if fixed_delta is not None:
        z = y + fixed_delta * np.log(n)
        sw = w.sum()
        loga = float(np.dot(w, z) / sw)
        loga_err = math.sqrt(1.0 / sw)
        chi2 = float(np.dot(w, (z - loga) ** 2))
        return math.exp(loga), math.exp(loga) * loga_err, fixed_delta, 0.0, chi2
    X = np.column_stack([np.ones_like(n), -np.log(n)])
    A = X.T @ (w[:, None] * X)
    if abs(np.linalg.det(A)) < 1e-12 * max(1.0, abs(A).max()) ** 2:
        raise FitError("degenerate window: n values do not vary")
    cov = np.linalg.inv(A)
    beta = cov @ (X.T @ (w * y))
    resid = y - X @ beta
    chi2 = float(np.dot(w, resid**2))
    a = math.exp(beta[0])
    return a, a * math.sqrt(cov[0, 0]), float(beta[1]), math.sqrt(cov[1, 1]), chi2


def _offset_inner(n, p, w, delta):
    X = np.column_stack([n**-delta, np.ones_like(n)])
    A = X.T @ (w[:, None] * X)
    coef = np.linalg.solve(A, X.T @ (w * p))
    resid = p - X @ coef
    return coef, float(np.dot(w, resid**2))


DELTA_GRID = np.linspace(0.005, 3.0, 600)


def _fit_offset(n, p, s):
    if np.ptp(np.log(n)) == 0:
        raise FitError("degenerate window: n values do not vary")
    w = 1.0 / s**2

    def profile(delta):
        return _offset_inner(n, p, w, delta)[1]

    values = np.array([profile(d) for d in DELTA_GRID])
    i = int(np.argmin(values))
    if i == 0 or i == len(DELTA_GRID) - 1:
        raise FitError(f"chi2 minimum over delta not bracketed in [{DELTA_GRID[0]}, {DELTA_GRID[-1]}]")
    delta = optimize.golden(profile, brack=(DELTA_GRID[i - 1], DELTA_GRID[i], DELTA_GRID[i + 1]), tol=1e-12)
    (a, b), chi2 = _offset_inner(n, p, w, delta)
    # full three-parameter covariance from the Jacobian at the optimum
    f = n**-delta
    J = np.column_stack([f, -a * np.log(n) * f, np.ones_like(n)])
    cov = np.linalg.pinv(J.T @ (w[:, None] * J))
    err = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    return float(a), float(err[0]), float(delta), float(err[1]), float(b), float(err[2]), chi2


def fit_window(points: Sequence[FitPoint], model: str = "two-param", start: int = 0) -> FitResult:
    """Fit one model to all of ``points``."""
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}; choose from {MODELS}")
    n, p, s = _arrays(points)
    if np.any(p <= 0) or np.any(s <= 0):
        raise FitError("points need p > 0 and sigma > 0")
    n_geo = float(np.exp(np.mean(np.log(n))))
    stop = start + len(points)
    if model == "offset":
        a, a_err, d, d_err, b, b_err, chi2 = _fit_offset(n, p, s)
        return FitResult(model, a, a_err, d, d_err, b, b_err, chi2, start, stop, n_geo)
    fixed = 0.25 if model == "one-param" else None
    a, a_err, d, d_err, chi2 = _fit_loglog(n, p, s, fixed)
    return FitResult(model, a, a_err, d, d_err, None, None, chi2, start, stop, n_geo)


def fit_power_law(
    points: Sequence[FitPoint], w: int, model: str = "two-param", skip_failed: bool = False
) -> list[FitResult]:
    """One fit per window of ``w`` consecutive points (sorted by n).

    With ``skip_failed`` windows raising :class:`FitError` are left out
    instead of aborting the sweep.
    """
    points = list(points)
    if any(b.n < a.n for a, b in zip(points, points[1:])):
        raise ValueError("points must be sorted by n")
    min_w = 3 if model == "offset" else 2
    if not min_w <= w <= len(points):
        raise ValueError(f"window size {w} must lie in {min_w}..{len(points)} for model {model!r}")
    results = []
    for i in range(len(points) - w + 1):
        try:
            results.append(fit_window(points[i : i + w], model, start=i))
        except FitError:
            if not skip_failed:
                raise
    return results


def read_points_csv(text: str) -> list[FitPoint]:
    """Parse ``n,p,sigma`` CSV text (header required)."""
    reader = csv.DictReader(io.StringIO(text))
    missing = {"n", "p", "sigma"} - set(reader.fieldnames or [])
    if missing:
        raise ValueError(f"CSV lacks columns: {sorted(missing)}")
    points = []
    for lineno, row in enumerate(reader, start=2):
        try:
            points.append(FitPoint(int(row["n"]), float(row["p"]), float(row["sigma"])))
        except (TypeError, ValueError):
            raise ValueError(f"line {lineno}: malformed row {row}") from None
    return points


def select(points: Iterable[FitPoint], min_n: int = 0, max_n: Optional[int] = None) -> list[FitPoint]:
    return [pt for pt in points if pt.n >= min_n and (max_n is None or pt.n <= max_n)]
