"""Statistical characterization of daily log-fluctuations of a security.

Submodules
----------
ingest
    Quote files (local or fetched) to normalized return series.
dist
    q-Gaussian and symmetric stable densities and samplers, fGn generator.
fit
    Binned empirical densities, q-Gaussian and q-exponential fits, Hill.
corr
    Autocorrelation and leverage correlation with shuffle baselines.
scaling
    Aggregation, scaling collapse, DFA and crossover detection.
pipeline
    All of the above run on one series into a JSON report.
"""

__version__ = "0.1.0"

from .corr import abs_acf, acf, antisymmetry_score, leverage, significant_lags  # noqa: E402
from .dist import (  # noqa: E402
    DomainError,
    QGaussianParams,
    StableConvergenceError,
    StableParams,
    alpha_from_q,
    fgn_sample,
    q_from_alpha,
    qgauss_pdf,
    qgauss_sample,
    stable_pdf,
    stable_sample,
)
from .fit import BinScheme, CurveFit, FitError, empirical_pdf, fit_qexponential_acf, fit_qgaussian, hill_estimate  # noqa: E402
from .ingest import IngestError, ReturnSeries, normalize, parse_quotes, returns_from_quotes  # noqa: E402
from .scaling import collapse, crossover_scan, dfa, hurst_fit, tail_slope  # noqa: E402

__all__ = [
    "__version__",
    "DomainError",
    "StableConvergenceError",
    "FitError",
    "IngestError",
    "QGaussianParams",
    "StableParams",
    "qgauss_pdf",
    "qgauss_sample",
    "stable_pdf",
    "stable_sample",
    "fgn_sample",
    "alpha_from_q",
    "q_from_alpha",
    "BinScheme",
    "CurveFit",
    "empirical_pdf",
    "fit_qgaussian",
    "fit_qexponential_acf",
    "hill_estimate",
    "acf",
    "abs_acf",
    "significant_lags",
    "leverage",
    "antisymmetry_score",
    "collapse",
    "tail_slope",
    "dfa",
    "hurst_fit",
    "crossover_scan",
    "ReturnSeries",
    "parse_quotes",
    "normalize",
    "returns_from_quotes",
]
