"""Acceptance checks, one test and one printed PASS/FAIL/SKIP line per criterion.

Criteria that need the public T-bill (DTB3) or S&P 500 daily series read them
from ``LOGFLUCT_DTB3_FILE`` / ``LOGFLUCT_SP500_FILE`` (quote CSVs, date and
value columns) or, for DTB3, from the ingest cache filled by an earlier
``logfluct ingest --url``.  Without the data those parts are reported as
UNVERIFIED.  Criteria 1 and 2 carry synthetic fallbacks that then apply
instead.

Run ``python3 tests/test_acceptance.py`` for the verdict lines alone.
"""

import math
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from scipy import special

from logfluct.corr import AcfCurve, acf, shuffle, significant_lags
from logfluct.dist import StableParams, fgn_sample, qgauss_sample, stable_pdf, stable_sample
from logfluct.fit import FitError, empirical_pdf, fit_qexponential_acf, fit_qgaussian, qexp_acf_model
from logfluct.ingest import IngestError, fetch_remote, parse_quotes, returns_from_quotes
from logfluct.pipeline import AnalysisConfig, analyze
from logfluct.scaling import (
    CollapseCurve,
    collapse,
    collapse_bins,
    default_tail_range,
    dfa,
    dfa_scales,
    hurst_fit,
    pooled_tail_fit,
    tail_slope,
)

ROOT = Path(__file__).resolve().parents[1]
DTB3_URL = "https://fred.stlouisfed.org/graph/fredgraph.csv?id=DTB3"
WINDOW = ("1954-01-04", "2007-02-26")
N_PAPER = 13865

LINES = {}


class Criterion:
    """Collects checks and turns them into a single verdict line."""

    def __init__(self, number, title):
        self.number, self.title = number, title
        self.checks, self.missing, self.notes = [], [], []

    def check(self, label, ok, detail):
        self.checks.append((label, bool(ok), detail))

    def unavailable(self, label):
        self.missing.append(label)

    def note(self, text):
        self.notes.append(text)

    def close(self):
        failed = [c for c in self.checks if not c[1]]
        status = "FAIL" if failed else "SKIP" if self.missing else "PASS"
        parts = [f"{label} {'ok' if ok else 'FAILED'} [{detail}]" for label, ok, detail in self.checks]
        if self.missing:
            parts.append("UNVERIFIED: data unavailable for " + ", ".join(self.missing))
        parts += self.notes
        line = f"criterion {self.number}: {status} - {self.title} - " + "; ".join(parts)
        LINES[self.number] = line
        print(line)
        if failed:
            pytest.fail(line, pytrace=False)
        if self.missing:
            pytest.skip(line)


def _load(name):
    raw = None
    path = os.environ.get(f"LOGFLUCT_{name}_FILE")
    if path and Path(path).is_file():
        raw = Path(path).read_bytes()
    elif name == "DTB3":
        try:
            raw = fetch_remote(DTB3_URL, offline=True)
        except IngestError:
            pass
    if raw is None:
        return None
    return returns_from_quotes(parse_quotes(raw).restrict(*WINDOW))


@pytest.fixture(scope="module")
def data():
    series = {name: _load(name) for name in ("DTB3", "SP500")}
    reports = {}
    for name, s in series.items():
        if s is not None:
            report, _, _ = analyze(s.values, AnalysisConfig(), {"name": name})
            reports[name] = report["analyses"]
    return series, reports


# ------------------------------------------------------------------------------------


def test_criterion_1_qgaussian_fit(data):
    c = Criterion(1, "q-Gaussian fit")
    series, reports = data
    if "DTB3" in reports:
        t0 = time.perf_counter()
        fit = fit_qgaussian(empirical_pdf(series["DTB3"].values))
        elapsed = time.perf_counter() - t0
        q, B = fit.params["q"], fit.params["B"]
        c.check("DTB3 q in [1.67,1.77]", 1.67 <= q <= 1.77, f"q={q:.4f}")
        c.check("DTB3 B in [4.9,6.9]", 4.9 <= B <= 6.9, f"B={B:.3f}")
        c.check("runtime < 10 s", elapsed < 10, f"{elapsed:.2f} s")
        c.note(f"DTB3 window holds {len(series['DTB3']) + 1} quotes")
    if "SP500" in reports:
        q = reports["SP500"]["pdf"]["fit"]["params"]["q"]
        c.check("SP500 q' in [1.44,1.54]", 1.44 <= q <= 1.54, f"q'={q:.4f}")
    if len(reports) < 2:
        # oracle fallback for the series that could not be read
        for q0, B0 in ((1.72, 5.9), (1.49, 2.23)):
            t0 = time.perf_counter()
            fit = fit_qgaussian(empirical_pdf(qgauss_sample(q0, B0, 200_000, seed=2024)))
            elapsed = time.perf_counter() - t0
            q, B = fit.params["q"], fit.params["B"]
            c.check(f"oracle q={q0} within 0.05", abs(q - q0) <= 0.05, f"q={q:.4f}")
            c.check(f"oracle B={B0} within 10%", abs(B - B0) <= 0.1 * B0, f"B={B:.3f}")
            c.check(f"oracle q={q0} runtime < 10 s", elapsed < 10, f"{elapsed:.2f} s")
        c.note("oracle fallback applied (public data not readable)")
    c.close()


def test_criterion_2_acf_fit(data):
    c = Criterion(2, "ACF q-exponential fit")
    series, reports = data
    if "DTB3" in reports:
        p = reports["DTB3"]["acf"]["qexp_fit"]["params"]
        c.check("DTB3 q_c in [4.3,5.1]", 4.3 <= p["q_c"] <= 5.1, f"q_c={p['q_c']:.3f}")
        c.check("DTB3 T in [0.30,0.60]", 0.30 <= p["T"] <= 0.60, f"T={p['T']:.3f}")
    if "SP500" in reports:
        p = reports["SP500"]["acf"]["qexp_fit"]["params"]
        c.check("SP500 q_c' in [3.9,4.7]", 3.9 <= p["q_c"] <= 4.7, f"q_c'={p['q_c']:.3f}")
    if len(reports) < 2:
        lags = np.arange(301)
        for q_c, T in ((4.7, 0.45), (4.3, 0.45)):
            exact = AcfCurve(lags, qexp_acf_model(lags, q_c, T), 10_000 - lags, 0.01)
            fit = fit_qexponential_acf(exact, (1, 300))
            err = max(abs(fit.params["q_c"] - q_c), abs(fit.params["T"] - T))
            c.check(f"exact curve q_c={q_c} to 1e-6", err <= 1e-6, f"max error {err:.1e}")
        rng = np.random.default_rng(77)
        base = qexp_acf_model(lags, 4.7, 0.45)
        noisy = AcfCurve(lags, base * np.exp(0.02 * rng.standard_normal(lags.size)), 10_000 - lags, 0.01)
        fit = fit_qexponential_acf(noisy, (1, 300))
        zq = abs(fit.params["q_c"] - 4.7) / fit.stderr["q_c"]
        zT = abs(fit.params["T"] - 0.45) / fit.stderr["T"]
        c.check("noisy recovery within 3 stderr", zq < 3 and zT < 3, f"|dq_c|/se={zq:.2f}, |dT|/se={zT:.2f}")
        c.note("oracle fallback applied (public data not readable)")
    c.close()


def test_criterion_3_lag_structure(data):
    c = Criterion(3, "significant lags")
    series, reports = data
    n = len(series["DTB3"]) if series["DTB3"] is not None else N_PAPER
    if series["DTB3"] is not None:
        lags = set(significant_lags(acf(series["DTB3"].values, 50), 3.0).tolist())
        c.check("DTB3 lags contain 1, 5, 10", {1, 5, 10} <= lags, f"significant={sorted(lags)[:15]}")
    else:
        c.unavailable("DTB3 lags 1, 5, 10")
    rng = np.random.default_rng(3)
    counts = [significant_lags(acf(rng.standard_normal(n), 50), 3.0).size for _ in range(100)]
    c.check("white-noise mean exceedances < 1", np.mean(counts) < 1, f"mean {np.mean(counts):.2f} over 100 x n={n}")
    c.close()


def test_criterion_4_attractor_discrimination():
    c = Criterion(4, "attractor discrimination")
    horizons = [1, 5, 20, 100]
    t0 = time.perf_counter()
    x = stable_sample(StableParams(1.7), N_PAPER, seed=0)
    r = (x - x.mean()) / x.std()
    curves = collapse(r, horizons, 1.7, collapse_bins(r))
    rng = default_tail_range(r)
    slopes = {}
    for curve in curves:
        try:
            slopes[curve.N] = tail_slope(curve, rng).slope
        except FitError:
            slopes[curve.N] = math.nan
    for N, s in slopes.items():
        c.check(f"stable N={N} slope -2.7+-0.15", abs(s + 2.7) <= 0.15, f"{s:.3f}")
    # the same fit applied to the exact law at the N=1 abscissae and counts
    one = curves[0]
    p = StableParams(1.7)
    exact = CollapseCurve(1, one.u, stable_pdf(p, one.u * x.std()) / stable_pdf(p, 0.0), one.counts, 1.7)
    c.note(f"exact law through the same N=1 fit gives {tail_slope(exact, rng).slope:.3f}")
    c.note(f"stable pooled slope {pooled_tail_fit(curves, rng).slope:.3f}")

    # the identical procedure (alpha = 1.7 rescaling) applied to Gaussian samples
    g = np.random.default_rng(0).standard_normal(N_PAPER)
    g_curves = collapse(g, horizons, 1.7, collapse_bins(g))
    pooled = pooled_tail_fit(g_curves, default_tail_range(g))
    c.check("Gaussian pooled tail r2 < 0.9", pooled.r2 < 0.9, f"r2={pooled.r2:.3f}, slope={pooled.slope:.2f}")
    own = pooled_tail_fit(collapse(g, horizons, 2.0, collapse_bins(g)), default_tail_range(g))
    c.note(f"with its own alpha=2 rescaling the Gaussian pooled r2 is {own.r2:.3f}")
    elapsed = time.perf_counter() - t0
    c.check("runtime < 60 s", elapsed < 60, f"{elapsed:.2f} s")
    c.close()


def test_criterion_5_tail_law(data):
    c = Criterion(5, "DTB3 tail slope")
    _, reports = data
    if "DTB3" in reports:
        (one,) = [t for t in reports["DTB3"]["collapse"]["tail_slopes"] if t["N"] == 1]
        s = one.get("slope", math.nan)
        c.check("N=1 slope -2.77+-0.3", abs(s + 2.77) <= 0.3, f"{s:.3f}")
    else:
        c.unavailable("DTB3 collapse")
    c.close()


def test_criterion_6_dfa(data):
    c = Criterion(6, "DFA calibration and persistence")
    n = 2**16
    scales = dfa_scales(n, 16, max_scale=1024)
    for hurst, tol in ((None, 0.03), (0.8, 0.05), (0.9, 0.05)):
        x = np.random.default_rng(0).standard_normal(n) if hurst is None else fgn_sample(hurst, n, 0)
        H = hurst_fit(dfa(x, scales)).params["H"]
        target = hurst or 0.5
        c.check(f"{'white noise' if hurst is None else f'fGn H={hurst}'}", abs(H - target) <= tol, f"H={H:.3f}")
    series, reports = data
    if "DTB3" in reports:
        d = reports["DTB3"]["dfa"]
        cross = d["crossover"]
        c.check("crossover in [25,60]", cross["found"] and 25 <= cross["N_cross"] <= 60,
                f"found={cross['found']}, N={cross['N_cross']}")
        above = d.get("H_above", {}).get("params", {}).get("H", math.nan)
        below = d.get("H_below", {}).get("params", {}).get("H", math.nan)
        c.check("H_above in [0.85,0.95]", 0.85 <= above <= 0.95, f"{above:.3f}")
        c.check("H_below in [0.40,0.60]", 0.40 <= below <= 0.60, f"{below:.3f}")
        Hs = d["H_shuffled"]["params"]["H"]
        c.check("DTB3 shuffled |r| H 0.5+-0.05", abs(Hs - 0.5) <= 0.05, f"{Hs:.3f}")
    else:
        c.unavailable("DTB3 |r| crossover, H_above, H_below")
        # shuffling a long-memory volatility series stands in for DTB3 |r|
        v = fgn_sample(0.9, N_PAPER, 5)
        a = np.abs(np.exp(0.5 * v) * np.random.default_rng(6).standard_normal(N_PAPER))
        Hs = hurst_fit(dfa(shuffle(a, 7), dfa_scales(N_PAPER))).params["H"]
        c.check("shuffled stand-in |r| H 0.5+-0.05", abs(Hs - 0.5) <= 0.05, f"{Hs:.3f}")
    c.close()


def test_criterion_7_stable_engine():
    c = Criterion(7, "stable pdf engine")
    x = np.linspace(-20, 20, 801)
    err2 = np.max(np.abs(stable_pdf(StableParams(2.0), x) - np.exp(-x * x / 4) / math.sqrt(4 * math.pi)))
    err1 = np.max(np.abs(stable_pdf(StableParams(1.0), x) - 1 / (math.pi * (1 + x * x))))
    c.check("alpha=2 vs Gaussian", err2 <= 1e-6, f"max abs error {err2:.1e}")
    c.check("alpha=1 vs Cauchy", err1 <= 1e-6, f"max abs error {err1:.1e}")
    for alpha in (1.2, 1.5, 1.77):
        for a in (1.0, 2.5):
            expected = special.gamma(1 + 1 / alpha) / (math.pi * a ** (1 / alpha))
            got = float(stable_pdf(StableParams(alpha, a), 0.0))
            c.check(f"peak alpha={alpha} a={a}", abs(got - expected) <= 1e-8, f"error {abs(got - expected):.1e}")
    c.close()


def test_criterion_8_leverage(data):
    c = Criterion(8, "leverage antisymmetry")
    _, reports = data
    if "DTB3" in reports:
        lev = reports["DTB3"]["leverage"]
        c.check("score > shuffle p95", lev["antisymmetry_score"] > lev["shuffle_score_p95"],
                f"score={lev['antisymmetry_score']:.3f}, p95={lev['shuffle_score_p95']:.3f}")
    else:
        c.unavailable("DTB3 leverage")
    c.close()


def test_criterion_9_property_suites():
    c = Criterion(9, "property suites")
    t0 = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", "--ignore", str(Path(__file__)), "tests"],
        cwd=ROOT, capture_output=True, text=True,
    )
    elapsed = time.perf_counter() - t0
    summary = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-200:]
    c.check("module suites pass", proc.returncode == 0, summary)
    c.check("runtime < 5 min", elapsed < 300, f"{elapsed:.1f} s")
    c.close()


if __name__ == "__main__":
    code = pytest.main([__file__, "-q", "-p", "no:cacheprovider", "--no-header", "-rN"])
    print()
    for n in sorted(LINES):
        print(LINES[n])
    sys.exit(code)
