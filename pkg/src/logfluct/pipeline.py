"""End-to-end analysis of one normalized return series.

``analyze`` runs any subset of the five analyses (acf, pdf, collapse, dfa,
leverage) and returns a JSON-compatible report plus plot tables (CSV text)
named after the figure they correspond to.  Each block is independent: a
failing block is recorded with its error and the others still run.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import asdict, dataclass, fields
from typing import Optional

import numpy as np

from . import __version__
from ._io import format_csv
from .corr import abs_acf, acf, antisymmetry_score, leverage, shuffle, shuffled_antisymmetry_scores, significant_lags
from .dist import DomainError, alpha_from_q, qgauss_pdf, QGaussianParams
from .fit import BinScheme, empirical_pdf, fit_qexponential_acf, fit_qgaussian, hill_scan, qexp_acf_model
from .scaling import (
    collapse,
    collapse_bins,
    default_tail_range,
    crossover_scan,
    dfa,
    dfa_scales,
    hurst_fit,
    pooled_tail_fit,
    tail_slope,
)

__all__ = ["ANALYSES", "AnalysisConfig", "analyze"]

logger = logging.getLogger(__name__)

ANALYSES = ("acf", "pdf", "collapse", "dfa", "leverage")


@dataclass
class AnalysisConfig:
    analyses: tuple = ANALYSES
    max_lag: int = 300
    leverage_max_lag: int = 25
    bins: float = 0.1
    bin_spread: str = "robust"
    min_count: int = 5
    fix_q: tuple = (1.49, 5.0 / 3.0)
    hill_k: tuple = (50, 100, 200, 400)
    horizons: tuple = (1, 5, 20, 100)
    alpha: Optional[float] = None
    tail_quantile: float = 0.9
    scales: Optional[tuple] = None
    detrend_order: int = 1
    significance: float = 3.0
    shuffles: int = 20
    surrogates: int = 100
    seed: int = 0

    def to_dict(self):
        return asdict(self)

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]


def _seed(base, offset):
    return int(base) * 1000 + offset


def _acf_block(r, cfg, tables):
    c = acf(r, cfg.max_lag)
    ca = abs_acf(r, cfg.max_lag)
    fit = fit_qexponential_acf(ca, (1, cfg.max_lag))
    band = cfg.significance * c.noise_level
    tables["fig1_acf"] = format_csv(
        ["lag", "acf_r", "acf_abs_r", "qexp_fit_abs_r", "noise_bound"],
        [c.lags, c.values, ca.values,
         qexp_acf_model(c.lags.astype(float), fit.params["q_c"], fit.params["T"]),
         np.full(c.lags.size, band)],
    )
    return {
        "noise_level": c.noise_level,
        "significance_multiple": cfg.significance,
        "significant_lags": [int(t) for t in significant_lags(c, cfg.significance)],
        "significant_lags_abs": [int(t) for t in significant_lags(ca, cfg.significance)][:50],
        "acf_first_lags": [float(v) for v in c.values[1:11]],
        "qexp_fit": fit.to_dict(),
    }


def _pdf_block(r, cfg, tables):
    scheme = BinScheme(width=cfg.bins, spread=cfg.bin_spread)
    pdf = empirical_pdf(r, scheme)
    free = fit_qgaussian(pdf, min_count=cfg.min_count)
    fixed = [fit_qgaussian(pdf, fix_q=q, min_count=cfg.min_count) for q in cfg.fix_q]
    n = len(r)
    ks = [k for k in cfg.hill_k if k < n / 2]
    cols = [pdf.centers, pdf.densities, pdf.counts,
            qgauss_pdf(QGaussianParams(free.params["q"], free.params["B"]), pdf.centers)]
    header = ["x", "density", "count", "fit_free"]
    for f in fixed:
        header.append(f"fit_q{f.params['q']:.4g}")
        cols.append(qgauss_pdf(QGaussianParams(f.params["q"], f.params["B"]), pdf.centers))
    tables["fig2_pdf"] = format_csv(header, cols)
    q = free.params["q"]
    try:
        attractor = {"regime": "levy", "alpha": alpha_from_q(q)}
    except DomainError:
        attractor = {"regime": "gaussian", "alpha": 2.0}
    return {
        "bin_width": cfg.bins,
        "bin_spread": cfg.bin_spread,
        "n_bins": len(pdf),
        "fit": free.to_dict(),
        "fixed_q_fits": [f.to_dict() for f in fixed],
        "attractor": attractor,
        "hill": hill_scan(r, ks) if ks else [],
    }


def _collapse_block(r, cfg, tables, alpha, alpha_source):
    curves = collapse(r, cfg.horizons, alpha, collapse_bins(r))
    rng = default_tail_range(r, cfg.tail_quantile)
    tables["fig2_collapse"] = "".join(
        c.to_csv() if i == 0 else c.to_csv().split("\n", 1)[1] for i, c in enumerate(curves)
    )
    per_n = []
    for c in curves:
        try:
            ts = tail_slope(c, rng)
            per_n.append({"N": c.N, "slope": ts.slope, "stderr": ts.stderr, "r2": ts.r2, "n_points": ts.n_points})
        except Exception as exc:  # noqa: BLE001 - reported per horizon
            per_n.append({"N": c.N, "error": str(exc)})
    pooled = pooled_tail_fit(curves, rng)
    return {
        "alpha": alpha,
        "alpha_source": alpha_source,
        "expected_tail_slope": -(1.0 + alpha),
        "tail_range": [rng[0], None],
        "tail_slopes": per_n,
        "pooled": pooled._asdict(),
    }


def _dfa_block(r, cfg, tables):
    x = np.abs(np.asarray(r, dtype=float))
    scales = np.asarray(cfg.scales) if cfg.scales else dfa_scales(x.size)
    d = dfa(x, scales, cfg.detrend_order)
    seed = _seed(cfg.seed, 3)
    ds = dfa(shuffle(x, seed), scales, cfg.detrend_order)
    cross = crossover_scan(d)
    block = {
        "detrend_order": cfg.detrend_order,
        "scales": [int(s) for s in d.scales],
        "H_all": hurst_fit(d).to_dict(),
        "H_shuffled": hurst_fit(ds).to_dict(),
        "shuffle_seed": seed,
        "crossover": cross._asdict(),
    }
    if cross.found:
        lo = d.scales[d.scales < cross.N_cross]
        hi = d.scales[d.scales > cross.N_cross]
        if lo.size >= 4:
            block["H_below"] = hurst_fit(d, (lo.min(), lo.max())).to_dict()
        if hi.size >= 4:
            block["H_above"] = hurst_fit(d, (hi.min(), hi.max())).to_dict()
    tables["fig3_dfa"] = format_csv(["N", "F", "F_shuffled"], [d.scales, d.F, ds.F])
    return block


def _leverage_block(r, cfg, tables):
    seed_band, seed_null = _seed(cfg.seed, 4), _seed(cfg.seed, 5)
    lev = leverage(r, cfg.leverage_max_lag, cfg.shuffles, seed_band)
    score = antisymmetry_score(lev)
    null = shuffled_antisymmetry_scores(r, cfg.leverage_max_lag, cfg.surrogates, seed_null)
    p95 = float(np.quantile(null, 0.95))
    tables["fig4_leverage"] = lev.to_csv()
    return {
        "noise_band": lev.noise_band,
        "antisymmetry_score": score,
        "shuffle_score_mean": float(null.mean()),
        "shuffle_score_p95": p95,
        "antisymmetric": bool(score > p95),
        "seeds": {"noise_band": seed_band, "null": seed_null},
        "L_plus": [float(v) for v in lev.values[lev.lags > 0]],
        "L_minus": [float(v) for v in lev.values[lev.lags < 0][::-1]],
    }


def _clean(obj):
    """Replace non-finite floats by None and numpy scalars by Python ones."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def analyze(series, cfg: AnalysisConfig = AnalysisConfig(), dataset: Optional[dict] = None):
    """Run the selected analyses.

    Returns ``(report, tables, ok)`` where ``report`` is JSON-compatible,
    ``tables`` maps figure names to CSV text and ``ok`` is False if any
    block failed.
    """
    r = np.asarray(series, dtype=float)
    unknown = set(cfg.analyses) - set(ANALYSES)
    if unknown:
        raise ValueError(f"unknown analyses {sorted(unknown)}")
    tables = {}
    blocks = {}
    ok = True

    def run(name, fn, *args):
        nonlocal ok
        try:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                block = {"status": "ok", **fn(*args)}
            notes = sorted({str(w.message) for w in caught})
            for note in notes:
                logger.info("%s: %s", name, note)
            if notes:
                block["warnings"] = notes
            blocks[name] = block
        except Exception as exc:  # noqa: BLE001 - block-level isolation
            logger.warning("%s analysis failed: %s", name, exc)
            blocks[name] = {"status": "failed", "error": f"{type(exc).__name__}: {exc}"}
            ok = False

    order = [a for a in ANALYSES if a in cfg.analyses]
    for name in order:
        if name == "acf":
            run(name, _acf_block, r, cfg, tables)
        elif name == "pdf":
            run(name, _pdf_block, r, cfg, tables)
        elif name == "dfa":
            run(name, _dfa_block, r, cfg, tables)
        elif name == "leverage":
            run(name, _leverage_block, r, cfg, tables)
        elif name == "collapse":
            if cfg.alpha is not None:
                alpha, source = float(cfg.alpha), "flag"
            elif blocks.get("pdf", {}).get("status") == "ok":
                alpha, source = float(blocks["pdf"]["attractor"]["alpha"]), "pdf_fit"
            else:
                alpha, source = 2.0, "default"
            run(name, _collapse_block, r, cfg, tables, alpha, source)
    report = {
        "tool": {"name": "logfluct", "version": __version__},
        "dataset": dict(dataset or {}, n_returns=int(r.size)),
        "parameters": cfg.to_dict(),
        "analyses": blocks,
    }
    return _clean(report), tables, ok
