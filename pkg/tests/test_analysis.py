import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from roommates.analysis import (
    FitError,
    FitPoint,
    ci,
    conjecture_p,
    exact_p,
    fit_power_law,
    fit_window,
    harmonic,
    harmonic_expansion,
    parse_bracketed,
    pittel_lower_bound,
    rank_distribution,
    read_points_csv,
    select,
    table1,
    table1_lookup,
)


def test_exact_values():
    assert exact_p(4) == Fraction(26, 27)
    # published decimals are truncated, not rounded
    assert math.floor(float(exact_p(6)) * 1e5) == 93329
    assert math.floor(float(exact_p(8)) * 1e6) == 910046
    assert math.floor(float(exact_p(10)) * 1e6) == 891251
    with pytest.raises(ValueError):
        exact_p(12)


def test_exact_values_decrease():
    vals = [exact_p(n) for n in (4, 6, 8, 10)]
    assert vals == sorted(vals, reverse=True)


def test_harmonic():
    assert harmonic(4, exact=True) == Fraction(25, 12)
    assert harmonic(1) == 1.0
    assert harmonic(100) == pytest.approx(float(harmonic(100, exact=True)), rel=1e-15)
    with pytest.raises(ValueError):
        harmonic(0)


@pytest.mark.parametrize("n", [10, 100, 10**4, 10**6])
def test_harmonic_expansion_error_is_second_order(n):
    err = abs(harmonic(n) - harmonic_expansion(n))
    # next term of the series is -1/(12 n^2)
    assert err == pytest.approx(1 / (12 * n * n), rel=0.05)


def test_harmonic_expansion_at_10000():
    assert abs(harmonic(10**4) - harmonic_expansion(10**4)) < 1e-3


def test_conjecture_and_bound():
    c = math.e * math.sqrt(2 / math.pi)
    assert conjecture_p(1) == pytest.approx(c, rel=1e-15)
    assert conjecture_p(1) == pytest.approx(2.16887, abs=1e-5)
    assert conjecture_p(16) == pytest.approx(c / 2, rel=1e-15)
    assert pittel_lower_bound(4) == pytest.approx(math.exp(1.5) / math.sqrt(math.pi), rel=1e-15)
    # the bound decays faster, so it sits below the conjecture for large n
    assert pittel_lower_bound(1e6) < conjecture_p(1e6)


def test_ci():
    assert ci(0.5, 100) == pytest.approx(0.05)
    assert ci(1.0, 10) == 0.0
    assert ci(0.0, 10) == 0.0
    with pytest.raises(ValueError):
        ci(1.2, 10)
    with pytest.raises(ValueError):
        ci(0.5, 0)


class TestRankDistribution:
    def test_k1_uniform(self):
        d = rank_distribution(10, 1)
        assert np.allclose(d.pmf, 0.1)

    def test_k_equals_n(self):
        d = rank_distribution(8, 8)
        assert d.pmf.tolist() == [1.0]

    @pytest.mark.parametrize("n", [10, 100, 1000, 1002, 5000, 20000, 10**5])
    @pytest.mark.parametrize("frac", [0.0, 0.001, 0.05, 0.3, 0.9, 1.0])
    def test_normalised_and_mean(self, n, frac):
        k = max(1, round(frac * n))
        d = rank_distribution(n, k)
        assert abs(d.pmf.sum() - 1.0) < 1e-12
        assert abs(d.mean / ((n + 1) / (k + 1)) - 1.0) < 1e-12
        assert np.all(np.diff(d.pmf) <= 0)

    def test_mean_example(self):
        assert rank_distribution(100, 9).mean == pytest.approx(10.1, rel=1e-12)

    def test_variance(self):
        n, k = 300, 7
        var = k * (n - k) * (n + 1) / ((k + 1) ** 2 * (k + 2))
        assert rank_distribution(n, k).std ** 2 == pytest.approx(var, rel=1e-10)

    def test_log_space_branch_matches_exact(self, monkeypatch):
        exact = rank_distribution(800, 12).pmf
        monkeypatch.setattr("roommates.analysis.EXACT_BINOMIAL_LIMIT", 10)
        approx = rank_distribution(800, 12).pmf
        assert np.allclose(approx, exact, rtol=1e-9, atol=1e-300)

    def test_simulation(self):
        rng = np.random.default_rng(3)
        n, k = 30, 4
        draws = np.array([rng.choice(n, k, replace=False).min() + 1 for _ in range(40000)])
        emp = np.bincount(draws, minlength=n + 1)[1 : n - k + 2] / len(draws)
        assert np.abs(emp - rank_distribution(n, k).pmf).max() < 0.01

    @pytest.mark.parametrize("n,k", [(10, 0), (10, 11)])
    def test_bad_k(self, n, k):
        with pytest.raises(ValueError):
            rank_distribution(n, k)


class TestTable:
    def test_parse(self):
        assert parse_bracketed("0.910048(5)") == (0.910048, pytest.approx(5e-6))
        assert parse_bracketed("0.0437(12)") == (0.0437, pytest.approx(1.2e-3))
        with pytest.raises(ValueError):
            parse_bracketed("0.91")

    def test_rows(self):
        pts = table1()
        assert len(pts) == 64
        ns = [p.n for p in pts]
        assert ns == sorted(ns) and len(set(ns)) == 64
        assert all(0 < p.p < 1 and p.sigma > 0 for p in pts)

    def test_sigma_is_half_bracket(self):
        pt = table1_lookup(8)
        assert pt.p == 0.910048
        assert pt.sigma == pytest.approx(2.5e-6)
        with pytest.raises(KeyError):
            table1_lookup(7)

    def test_small_n_agrees_with_exact(self):
        for n in (8, 10):
            pt = table1_lookup(n)
            assert abs(pt.p - float(exact_p(n))) < 4 * pt.sigma + 1e-6


def synthetic(a=2.2, delta=0.25, b=0.0, sigma=1e-6, ns=None):
    ns = ns or [2**k for k in range(5, 20)]
    return [FitPoint(n, a * n**-delta + b, sigma) for n in ns]


class TestFits:
    def test_two_param_recovers(self):
        r = fit_window(synthetic(), "two-param")
        assert r.a == pytest.approx(2.2, abs=1e-6)
        assert r.delta == pytest.approx(0.25, abs=1e-6)
        assert r.chi2 < 1e-12

    def test_one_param_recovers(self):
        r = fit_window(synthetic(), "one-param")
        assert r.a == pytest.approx(2.2, abs=1e-9)
        assert r.delta == 0.25 and r.delta_err == 0.0

    def test_offset_recovers(self):
        r = fit_window(synthetic(b=0.01), "offset")
        assert r.b == pytest.approx(0.01, abs=1e-4)
        assert r.delta == pytest.approx(0.25, abs=1e-4)
        assert r.a == pytest.approx(2.2, abs=1e-4)

    def test_two_param_error_matches_scatter(self):
        rng = np.random.default_rng(0)
        clean = synthetic(sigma=1e-3)
        deltas = []
        for _ in range(300):
            pts = [FitPoint(p.n, p.p + rng.normal(0, p.sigma), p.sigma) for p in clean]
            deltas.append(fit_window(pts, "two-param").delta)
        err = fit_window(clean, "two-param").delta_err
        assert np.std(deltas) == pytest.approx(err, rel=0.15)
        assert abs(np.mean(deltas) - 0.25) < 4 * err / math.sqrt(300)

    @settings(max_examples=30, deadline=None)
    @given(scale=st.floats(0.1, 0.9))
    def test_scale_equivariance(self, scale):
        pts = synthetic(sigma=1e-3)
        pts = [FitPoint(p.n, p.p * (1 + 0.01 * math.sin(p.n)), p.sigma) for p in pts]
        scaled = [FitPoint(p.n, p.p * scale, p.sigma * scale) for p in pts]
        a, b = fit_window(pts), fit_window(scaled)
        assert b.a == pytest.approx(a.a * scale, rel=1e-9)
        assert b.delta == pytest.approx(a.delta, abs=1e-9)
        assert b.chi2 == pytest.approx(a.chi2, rel=1e-7)

    def test_sliding_windows(self):
        pts = synthetic()
        fits = fit_power_law(pts, 5)
        assert len(fits) == len(pts) - 4
        assert [f.start for f in fits] == list(range(len(fits)))
        assert fits[0].n_geo == pytest.approx(2**7)

    def test_degenerate_window(self):
        pts = [FitPoint(64, 0.5, 0.01), FitPoint(64, 0.51, 0.01)]
        with pytest.raises(FitError):
            fit_window(pts)
        with pytest.raises(FitError):
            fit_window(pts + [FitPoint(64, 0.5, 0.01)], "offset")

    def test_window_size_checked(self):
        pts = synthetic()
        with pytest.raises(ValueError):
            fit_power_law(pts, 1)
        with pytest.raises(ValueError):
            fit_power_law(pts, 2, "offset")
        with pytest.raises(ValueError):
            fit_power_law(pts, len(pts) + 1)

    def test_unsorted_rejected(self):
        with pytest.raises(ValueError):
            fit_power_law(synthetic()[::-1], 3)

    def test_unknown_model(self):
        with pytest.raises(ValueError):
            fit_window(synthetic(), "cubic")

    def test_non_positive_input(self):
        with pytest.raises(FitError):
            fit_window([FitPoint(8, 0.0, 1e-3), FitPoint(16, 0.5, 1e-3)])

    def test_skip_failed(self):
        pts = synthetic()[:4] + [FitPoint(2**9, 0.5, 1e-3)] * 3
        with pytest.raises(FitError):
            fit_power_law(pts, 3)
        fits = fit_power_law(pts, 3, skip_failed=True)
        assert len(fits) == len(pts) - 3


def test_read_points_csv():
    pts = read_points_csv("n,p,sigma\n8,0.91,0.001\n16,0.87,0.002\n")
    assert pts == [FitPoint(8, 0.91, 0.001), FitPoint(16, 0.87, 0.002)]
    with pytest.raises(ValueError, match="columns"):
        read_points_csv("n,p\n8,0.9\n")
    with pytest.raises(ValueError, match="line 3"):
        read_points_csv("n,p,sigma\n8,0.91,0.001\nx,0.8,0.1\n")


def test_select():
    pts = synthetic()
    assert [p.n for p in select(pts, 1000, 5000)] == [1024, 2048, 4096]
    assert len(select(pts)) == len(pts)
