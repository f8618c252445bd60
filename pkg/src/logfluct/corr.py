"""Linear and nonlinear correlation diagnostics of a return series.

* ``acf``: sample autocorrelation with global moments,
  ``C(tau) = <(x_t - m)(x_{t+tau} - m)> / var``, where the average runs over
  the ``n - tau`` valid pairs and ``m``, ``var`` come from the whole series.
* ``leverage``: ``L(tau) = <r_t r_{t+tau}^2> / <r^2>^2`` for positive and
  negative lags, with a noise band from shuffled surrogates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._io import format_csv

__all__ = [
    "AcfCurve",
    "LeverageCurve",
    "acf",
    "abs_acf",
    "significant_lags",
    "shuffle",
    "leverage",
    "antisymmetry_score",
    "shuffled_antisymmetry_scores",
]


@dataclass(frozen=True)
class AcfCurve:
    lags: np.ndarray
    values: np.ndarray
    n_eff: np.ndarray
    noise_level: float

    def to_csv(self, multiple=3.0) -> str:
        band = np.full(self.lags.size, multiple * self.noise_level)
        return format_csv(["lag", "value", "noise_bound"], [self.lags, self.values, band])


@dataclass(frozen=True)
class LeverageCurve:
    lags: np.ndarray
    values: np.ndarray
    noise_band: float

    def at(self, tau) -> float:
        return float(self.values[int(np.searchsorted(self.lags, tau))])

    def to_csv(self) -> str:
        band = np.full(self.lags.size, self.noise_band)
        return format_csv(["lag", "value", "noise_bound"], [self.lags, self.values, band])


def acf(x, max_lag=300) -> AcfCurve:
    """Autocorrelation for lags ``0..max_lag``; ``noise_level = 1/sqrt(n)``."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if n <= max_lag + 10:
        raise ValueError(f"series of length {n} too short for max_lag={max_lag}")
    xc = x - x.mean()
    var = float(np.dot(xc, xc)) / n
    if not var > 0:
        raise ValueError("zero variance: autocorrelation undefined")
    lags = np.arange(max_lag + 1)
    n_eff = n - lags
    vals = np.empty(max_lag + 1)
    vals[0] = 1.0
    for tau in range(1, max_lag + 1):
        vals[tau] = np.dot(xc[: n - tau], xc[tau:]) / n_eff[tau] / var
    return AcfCurve(lags, vals, n_eff, 1.0 / math.sqrt(n))


def abs_acf(r, max_lag=300) -> AcfCurve:
    """Autocorrelation of ``|r_t|`` (volatility clustering)."""
    return acf(np.abs(np.asarray(r, dtype=float)), max_lag)


def significant_lags(c: AcfCurve, multiple=3.0) -> np.ndarray:
    """Lags ``tau >= 1`` where ``|C(tau)|`` exceeds ``multiple`` noise levels."""
    mask = (c.lags >= 1) & (np.abs(c.values) > multiple * c.noise_level)
    return c.lags[mask]


def shuffle(x, seed=None) -> np.ndarray:
    """Random permutation of ``x``; deterministic for a given seed."""
    return np.random.default_rng(seed).permutation(np.asarray(x))


def _leverage_values(r, max_lag):
    n = r.size
    sq = r * r
    denom = (sq.sum() / n) ** 2
    out = np.empty(2 * max_lag + 1)
    for i, tau in enumerate(range(-max_lag, max_lag + 1)):
        if tau >= 0:
            num = np.dot(r[: n - tau], sq[tau:]) / (n - tau)
        else:
            num = np.dot(r[-tau:], sq[: n + tau]) / (n + tau)
        out[i] = num / denom
    return out


def leverage(r, max_lag=25, n_shuffles=20, seed=0, quantile=0.95) -> LeverageCurve:
    """Return/squared-return correlation ``L(tau)`` for ``tau`` in ``[-max_lag, max_lag]``.

    The noise band is the ``quantile`` of ``|L(tau)|``, ``tau != 0``, pooled
    over ``n_shuffles`` shuffled copies of the series.
    """
    r = np.asarray(r, dtype=float)
    if r.size <= 2 * max_lag + 10:
        raise ValueError(f"series of length {r.size} too short for max_lag={max_lag}")
    if not np.any(r != r[0]):
        raise ValueError("zero variance: leverage correlation undefined")
    lags = np.arange(-max_lag, max_lag + 1)
    values = _leverage_values(r, max_lag)
    band = math.nan
    if n_shuffles:
        rng = np.random.default_rng(seed)
        pooled = np.concatenate([
            np.abs(np.delete(_leverage_values(rng.permutation(r), max_lag), max_lag))
            for _ in range(n_shuffles)
        ])
        band = float(np.quantile(pooled, quantile))
    return LeverageCurve(lags, values, band)


def antisymmetry_score(l: LeverageCurve) -> float:
    """``-corr(L(tau), L(-tau))`` over ``tau = 1..max_lag``.

    +1 for a perfectly antisymmetric curve, -1 for a perfectly symmetric one.
    """
    lags = np.asarray(l.lags)
    pos = np.arange(1, int(lags.max()) + 1)
    pos = pos[np.isin(pos, lags) & np.isin(-pos, lags)]
    if pos.size < 5:
        raise ValueError(f"need at least 5 matched +/- lag pairs, got {pos.size}")
    index = {int(t): i for i, t in enumerate(lags)}
    plus = np.array([l.values[index[t]] for t in pos])
    minus = np.array([l.values[index[-t]] for t in pos])
    if plus.std() == 0 or minus.std() == 0:
        raise ValueError("constant leverage branch: correlation undefined")
    return float(-np.corrcoef(plus, minus)[0, 1])


def shuffled_antisymmetry_scores(r, max_lag=25, n_surrogates=100, seed=0) -> np.ndarray:
    """Antisymmetry scores of shuffled surrogates (the null distribution)."""
    rng = np.random.default_rng(seed)
    r = np.asarray(r, dtype=float)
    lags = np.arange(-max_lag, max_lag + 1)
    return np.array([
        antisymmetry_score(LeverageCurve(lags, _leverage_values(rng.permutation(r), max_lag), math.nan))
        for _ in range(n_surrogates)
    ])
