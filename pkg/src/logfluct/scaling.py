"""Aggregation, scaling collapse and detrended fluctuation analysis.

For a stable attractor with index alpha the density of the N-day sum
R_N obeys ``P_N(R) = N^(-1/alpha) P_1(R N^(-1/alpha))``.  Plotting
``p = P_N(R) N^(1/alpha) / P_1(0)`` against ``u = R N^(-1/alpha)`` makes the
curves for different N coincide, with tails ``p ~ u^-(1 + alpha)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ._io import format_csv
from .fit import BinScheme, CurveFit, FitError, empirical_pdf

__all__ = [
    "AggregatedSeries",
    "CollapseCurve",
    "DfaCurve",
    "TailSlope",
    "Crossover",
    "COLLAPSE_BINS",
    "collapse_bins",
    "default_tail_range",
    "aggregate",
    "collapse",
    "tail_slope",
    "pooled_tail_fit",
    "dfa",
    "dfa_scales",
    "hurst_fit",
    "crossover_scan",
]

# central bin 0.2 wide, 10 logarithmic bins per decade beyond it
COLLAPSE_BINS = BinScheme(kind="log", width=0.2, relative=False, per_decade=10)


@dataclass(frozen=True)
class AggregatedSeries:
    N: int
    values: np.ndarray
    overlapping: bool = True


@dataclass(frozen=True)
class CollapseCurve:
    N: int
    u: np.ndarray
    p: np.ndarray
    counts: np.ndarray
    alpha_used: float

    def to_csv(self) -> str:
        return format_csv(["N", "u", "p", "count"], [np.full(self.u.size, self.N), self.u, self.p, self.counts])


@dataclass(frozen=True)
class DfaCurve:
    scales: np.ndarray
    F: np.ndarray
    detrend_order: int = 1

    def to_csv(self, with_logs=False) -> str:
        if with_logs:
            return format_csv(["N", "F", "log10_N", "log10_F"],
                              [self.scales, self.F, np.log10(self.scales), np.log10(self.F)])
        return format_csv(["N", "F"], [self.scales, self.F])


class TailSlope(NamedTuple):
    slope: float
    stderr: float
    r2: float
    n_points: int


class Crossover(NamedTuple):
    N_cross: float
    H_below: float
    H_above: float
    found: bool
    improvement: float


# --------------------------------------------------------------------------
# aggregation and collapse
# --------------------------------------------------------------------------


def aggregate(r, N, overlapping=True) -> AggregatedSeries:
    """N-day sums ``R_{N,t} = sum_{i<N} r_{t+i}``.

    Overlapping windows give ``len(r) - N + 1`` values; non-overlapping give
    ``len(r) // N``.
    """
    x = np.asarray(r, dtype=float)
    N = int(N)
    if N < 1:
        raise ValueError(f"aggregation horizon must be >= 1, got {N}")
    if N >= x.size / 10:
        raise ValueError(f"horizon N={N} too large for a series of length {x.size} (need N < n/10)")
    if N == 1:
        return AggregatedSeries(1, x.copy(), overlapping)
    if overlapping:
        sums = sliding_window_view(x, N).sum(axis=1)
    else:
        m = x.size // N
        sums = x[: m * N].reshape(m, N).sum(axis=1)
    return AggregatedSeries(N, sums, overlapping)


def collapse(r, horizons: Sequence[int], alpha, scheme: BinScheme = COLLAPSE_BINS,
             overlapping=True) -> list:
    """Rescaled densities of the aggregated sums for each horizon.

    Each ``R_N`` is rescaled to ``u = R_N N^(-1/alpha)`` and binned with
    ``scheme``; densities are divided by the central density of the ``N = 1``
    curve, so that ``p(0) = 1`` at ``N = 1`` and the curves coincide when the
    series is in the domain of attraction of the alpha-stable law.
    """
    horizons = sorted({int(n) for n in horizons})
    if 1 not in horizons:
        raise ValueError("horizons must include N = 1 (it fixes the P(0) normalization)")
    if not 0 < alpha <= 2:
        raise ValueError(f"alpha must lie in (0, 2], got {alpha}")
    base = None
    curves = []
    for N in horizons:
        u = aggregate(r, N, overlapping).values * N ** (-1.0 / alpha)
        pdf = empirical_pdf(u, scheme, min_nonempty=5)
        if base is None:
            base = pdf.central_density()
        elif not np.any((pdf.centers == 0) & (pdf.counts > 0)):
            raise FitError(f"central bin empty at N={N}")
        curves.append(CollapseCurve(N, pdf.centers, pdf.densities / base, pdf.counts, float(alpha)))
    return curves


def collapse_bins(r) -> BinScheme:
    """Logarithmic collapse bins with the central width scaled by the median ``|r|``."""
    s0 = float(np.median(np.abs(np.asarray(r, dtype=float))))
    if not s0 > 0:
        raise ValueError("median |r| is zero: cannot scale collapse bins")
    return BinScheme(kind="log", width=0.2 * s0, relative=False, per_decade=10)


def default_tail_range(r, quantile=0.9):
    """Tail range for collapse slopes: ``|u|`` beyond the ``quantile`` of ``|r|``."""
    return (float(np.quantile(np.abs(np.asarray(r, dtype=float)), quantile)), math.inf)


def _ols(x, y, w=None):
    """Weighted straight-line fit; returns slope, intercept, slope stderr, r2."""
    w = np.ones_like(x) if w is None else np.asarray(w, dtype=float)
    sw = w.sum()
    xm, ym = (w * x).sum() / sw, (w * y).sum() / sw
    sxx = (w * (x - xm) ** 2).sum()
    slope = (w * (x - xm) * (y - ym)).sum() / sxx
    icpt = ym - slope * xm
    res = y - icpt - slope * x
    n = x.size
    s2 = (w * res**2).sum() / max(n - 2, 1) * n / sw
    se = math.sqrt(s2 / (sxx * n / sw)) if n > 2 else math.nan
    ss_tot = (w * (y - ym) ** 2).sum()
    r2 = 1.0 - (w * res**2).sum() / ss_tot if ss_tot > 0 else math.nan
    return slope, icpt, se, r2


def _tail_points(curve, u_range, min_count):
    lo, hi = u_range
    au = np.abs(curve.u)
    sel = (au >= lo) & (au <= hi) & (curve.p > 0) & (curve.counts >= min_count)
    return au[sel], curve.p[sel], curve.counts[sel]


def tail_slope(c: CollapseCurve, u_range=(10.0, np.inf), min_count=1, weighted=True) -> TailSlope:
    """Slope of ``log p`` against ``log |u|`` over both tails within ``u_range``.

    With ``weighted`` each bin is weighted by its count (inverse Poisson
    variance of ``log p``).  Expected value ``-(1 + alpha)`` for a stable tail.
    """
    u, p, cnt = _tail_points(c, u_range, min_count)
    if u.size < 5:
        raise FitError(f"only {u.size} tail points in u range {u_range} (need 5)")
    slope, _, se, r2 = _ols(np.log(u), np.log(p), cnt if weighted else None)
    return TailSlope(float(slope), float(se), float(r2), int(u.size))


def pooled_tail_fit(curves, u_range=(10.0, np.inf), min_count=1, weighted=True) -> TailSlope:
    """One power law fitted to the tails of all collapse curves together.

    A common attractor makes the curves coincide, so the pooled fit is as
    good as the individual ones; a low ``r2`` signals that no common power
    law describes the horizons.
    """
    pts = [_tail_points(c, u_range, min_count) for c in curves]
    u = np.concatenate([p[0] for p in pts])
    p = np.concatenate([p[1] for p in pts])
    cnt = np.concatenate([p[2] for p in pts])
    if u.size < 5:
        raise FitError(f"only {u.size} pooled tail points in u range {u_range}")
    slope, _, se, r2 = _ols(np.log(u), np.log(p), cnt if weighted else None)
    return TailSlope(float(slope), float(se), float(r2), int(u.size))


# --------------------------------------------------------------------------
# DFA
# --------------------------------------------------------------------------


def dfa_scales(n, min_scale=4, per_decade=10, max_scale=None) -> np.ndarray:
    """Logarithmic integer box sizes from ``min_scale`` to ``n // 4``."""
    top = n // 4 if max_scale is None else min(max_scale, n // 4)
    if top < min_scale:
        raise ValueError(f"series of length {n} too short for DFA")
    k = int(math.floor(per_decade * math.log10(top / min_scale))) + 1
    grid = np.round(min_scale * 10.0 ** (np.arange(k) / per_decade)).astype(int)
    return np.unique(np.clip(grid, min_scale, top))


def dfa(x, scales=None, detrend_order=1) -> DfaCurve:
    """Detrended fluctuation function ``F(N)``.

    The profile ``Y(i) = sum_{k<=i} (x_k - mean)`` is cut into ``floor(n/N)``
    boxes from the start and as many from the end; a polynomial of degree
    ``detrend_order`` is removed from each box and ``F(N)`` is the root mean
    square of all residuals.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    scales = dfa_scales(n) if scales is None else np.asarray(sorted({int(s) for s in scales}))
    if scales.size == 0:
        raise ValueError("no scales given")
    if scales.min() < detrend_order + 2:
        raise ValueError(f"scales must be >= detrend_order + 2 = {detrend_order + 2}")
    if n < 4 * scales.max():
        raise ValueError(f"series length {n} < 4 x largest scale {scales.max()}")
    profile = np.cumsum(x - x.mean())
    F = np.empty(scales.size)
    for i, s in enumerate(scales):
        m = n // s
        boxes = np.concatenate([profile[: m * s].reshape(m, s), profile[n - m * s:].reshape(m, s)])
        t = np.arange(s, dtype=float) / s
        V = np.vander(t, detrend_order + 1)
        coef, *_ = np.linalg.lstsq(V, boxes.T, rcond=None)
        resid = boxes.T - V @ coef
        F[i] = math.sqrt(np.mean(resid * resid))
    if np.any(F <= 0):
        raise ValueError("zero fluctuation at some scale (constant or polynomial input)")
    return DfaCurve(scales, F, detrend_order)


def _select(d, scale_range):
    lo, hi = scale_range if scale_range is not None else (d.scales.min(), d.scales.max())
    sel = (d.scales >= lo) & (d.scales <= hi)
    return d.scales[sel].astype(float), d.F[sel]


def hurst_fit(d: DfaCurve, scale_range=None) -> CurveFit:
    """Hurst exponent as the slope of ``log F`` against ``log N``."""
    s, F = _select(d, scale_range)
    if s.size < 4:
        raise FitError(f"only {s.size} scales in range {scale_range} (need 4)")
    lx, ly = np.log(s), np.log(F)
    slope, icpt, se, r2 = _ols(lx, ly)
    resid = ly - (icpt + slope * lx)
    return CurveFit(
        params={"H": float(slope), "log_F1": float(icpt)},
        stderr={"H": float(se), "log_F1": math.nan},
        chi2_per_n=float(np.mean(resid**2)),
        r2=float(r2),
        n_points=int(s.size),
        fit_space="loglog",
        extra={"scale_range": [float(s.min()), float(s.max())]},
    )


def crossover_scan(d: DfaCurve, scale_range=None, min_points=3, grid_per_decade=50) -> Crossover:
    """Best continuous two-segment power law for ``F(N)``.

    The breakpoint is scanned on a fine logarithmic grid; for each candidate
    ``b`` the model ``log F = c + H1 log N + (H2 - H1) max(log N - log b, 0)``
    is fitted by least squares and the one with smallest residual kept.  If
    that beats a single power law by less than 5% the result carries
    ``found=False``.
    """
    s, F = _select(d, scale_range)
    if s.size < 8:
        raise FitError(f"crossover scan needs >= 8 scales, got {s.size}")
    if s.max() / s.min() < 10:
        raise FitError("crossover scan needs scales spanning at least one decade")
    lx, ly = np.log(s), np.log(F)
    one = np.polyfit(lx, ly, 1)
    ssr_one = float(np.sum((ly - np.polyval(one, lx)) ** 2))

    lo_b, hi_b = lx[min_points - 1], lx[-min_points]
    cands = np.linspace(lo_b, hi_b, max(int(grid_per_decade * (hi_b - lo_b) / math.log(10)), 2))
    best = None
    for b in cands:
        X = np.column_stack([np.ones_like(lx), lx, np.clip(lx - b, 0.0, None)])
        beta, *_ = np.linalg.lstsq(X, ly, rcond=None)
        ssr = float(np.sum((ly - X @ beta) ** 2))
        if best is None or ssr < best[0]:
            best = (ssr, b, beta)
    ssr_two, b, beta = best
    spread = float(np.sum((ly - ly.mean()) ** 2))
    improvement = 1.0 - ssr_two / ssr_one if ssr_one > 1e-20 * max(spread, 1e-300) else 0.0
    found = improvement > 0.05
    return Crossover(float(math.exp(b)), float(beta[1]), float(beta[1] + beta[2]), bool(found), float(improvement))
