"""q-Gaussian and symmetric alpha-stable distributions.

The q-Gaussian is

    G_q(x) = A [1 - (1 - q) B x^2]^(1 / (1 - q)),    q < 3,

and the symmetric stable law with characteristic function exp(-a |k|^alpha)
has density

    L_alpha(x) = (1 / pi) * int_0^inf cos(k x) exp(-a k^alpha) dk.

For 5/3 < q < 3 the q-Gaussian has infinite variance and sums of i.i.d.
copies are attracted to the stable law with alpha = (3 - q) / (q - 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import integrate, special

__all__ = [
    "DomainError",
    "StableConvergenceError",
    "QGaussianParams",
    "StableParams",
    "qgauss_normalization",
    "qgauss_pdf",
    "qgauss_cdf",
    "qgauss_B_from_sigma",
    "qgauss_sample",
    "stable_pdf",
    "stable_peak",
    "stable_sample",
    "alpha_from_q",
    "q_from_alpha",
    "fgn_sample",
]

SeedLike = Union[int, np.random.Generator, None]

_Q_ONE_TOL = 1e-12


class DomainError(ValueError):
    """Parameter outside the domain where a formula is defined."""


class StableConvergenceError(RuntimeError):
    """Stable density quadrature failed to reach the requested tolerance."""

    def __init__(self, message, achieved):
        super().__init__(f"{message} (achieved relative tolerance {achieved:.3g})")
        self.achieved = achieved


@dataclass(frozen=True)
class QGaussianParams:
    """Entropic index ``q`` and inverse width ``B``; ``A`` is derived."""

    q: float
    B: float

    def __post_init__(self):
        if not (np.isfinite(self.q) and self.q < 3):
            raise DomainError(f"q-Gaussian needs q < 3, got q={self.q}")
        if not (np.isfinite(self.B) and self.B > 0):
            raise DomainError(f"q-Gaussian needs B > 0, got B={self.B}")

    @property
    def A(self) -> float:
        return qgauss_normalization(self.q, self.B)

    @property
    def variance(self) -> float:
        """Variance, finite only for q < 5/3."""
        if self.q >= 5.0 / 3.0:
            return math.inf
        return 1.0 / (self.B * (5.0 - 3.0 * self.q))


@dataclass(frozen=True)
class StableParams:
    """Symmetric, zero-location stable law with CF ``exp(-a |k|^alpha)``."""

    alpha: float
    a: float = 1.0

    def __post_init__(self):
        if not (0 < self.alpha <= 2):
            raise DomainError(f"stable law needs 0 < alpha <= 2, got {self.alpha}")
        if not (np.isfinite(self.a) and self.a > 0):
            raise DomainError(f"stable law needs a > 0, got {self.a}")

    @property
    def scale(self) -> float:
        """Length scale ``a^(1/alpha)``."""
        return self.a ** (1.0 / self.alpha)


# --------------------------------------------------------------------------
# q-Gaussian
# --------------------------------------------------------------------------


def qgauss_normalization(q, B):
    """Normalization constant ``A(q, B)`` of the q-Gaussian.

    Uses ``A = sqrt(B) / C_q`` with the Gamma-function closed form of ``C_q``.
    With ``z = 1 / |q - 1|`` both branches reduce to Pochhammer ratios,
    which stay accurate as ``q -> 1``:

    * ``1 < q < 3``: ``C_q = sqrt(pi) sqrt(z) Gamma(z - 1/2) / Gamma(z)``
    * ``q < 1``:     ``C_q = 2 sqrt(pi) sqrt(z) Gamma(z) / ((3 - q) Gamma(z + 1/2))``
    * ``q = 1``:     ``C_q = sqrt(pi)``
    """
    q = float(q)
    B = float(B)
    if q >= 3:
        raise DomainError(f"q-Gaussian is not normalizable for q >= 3 (q={q})")
    if not B > 0:
        raise DomainError(f"B must be positive, got {B}")
    if abs(q - 1.0) <= _Q_ONE_TOL:
        cq = math.sqrt(math.pi)
    elif q > 1:
        z = 1.0 / (q - 1.0)
        cq = math.sqrt(math.pi) * math.sqrt(z) * special.poch(z, -0.5)
    else:
        z = 1.0 / (1.0 - q)
        cq = 2.0 * math.sqrt(math.pi) * math.sqrt(z) / ((3.0 - q) * special.poch(z, 0.5))
    return math.sqrt(B) / cq


def _qexp_neg(u, q):
    """q-exponential ``e_q(-u) = [1 - (1 - q) u]^(1/(1-q))`` for ``u >= 0``."""
    u = np.asarray(u, dtype=float)
    if abs(q - 1.0) <= _Q_ONE_TOL:
        return np.exp(-u)
    base = -(1.0 - q) * u
    out = np.zeros_like(u)
    inside = base > -1.0
    out[inside] = np.exp(np.log1p(base[inside]) / (1.0 - q))
    return out


def qgauss_pdf(params: QGaussianParams, x):
    """q-Gaussian density at ``x`` (scalar or array).

    For ``q < 1`` the density vanishes outside the compact support
    ``|x| < 1 / sqrt((1 - q) B)``.
    """
    x = np.asarray(x, dtype=float)
    out = params.A * _qexp_neg(params.B * x * x, params.q)
    return out if out.ndim else float(out)


def qgauss_cdf(params: QGaussianParams, x):
    """Cumulative distribution by adaptive quadrature of :func:`qgauss_pdf`."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(xs)
    for i, xi in enumerate(xs):
        half, _ = integrate.quad(
            lambda t: qgauss_pdf(params, t), 0.0, abs(xi), epsabs=1e-13, epsrel=1e-12, limit=200
        )
        out[i] = 0.5 + math.copysign(half, xi)
    return out if np.ndim(x) else float(out[0])


def qgauss_B_from_sigma(q, sigma_sq, generalized=False):
    """Width parameter ``B`` from a second moment.

    With ``generalized=False`` ``sigma_sq`` is the ordinary variance and
    ``B = 1 / (sigma^2 (5 - 3q))`` (valid for q < 5/3).  With
    ``generalized=True`` it is the escort (q-generalised) second moment and
    ``B = 1 / (sigma_q^2 (3q - 1))`` (valid for q > 1/3).
    """
    if not sigma_sq > 0:
        raise DomainError(f"second moment must be positive, got {sigma_sq}")
    if generalized:
        if not q > 1.0 / 3.0:
            raise DomainError(f"generalized-moment relation needs q > 1/3, got {q}")
        return 1.0 / (sigma_sq * (3.0 * q - 1.0))
    if not q < 5.0 / 3.0:
        raise DomainError(f"variance relation needs q < 5/3 (finite variance), got {q}")
    return 1.0 / (sigma_sq * (5.0 - 3.0 * q))


def _q_log(x, q):
    if abs(q - 1.0) <= _Q_ONE_TOL:
        return np.log(x)
    return (x ** (1.0 - q) - 1.0) / (1.0 - q)


def qgauss_sample(q, B, n, seed: SeedLike = None):
    """Draw ``n`` q-Gaussian variates with the generalized Box-Muller method.

    ``sqrt(-2 ln_{q'} U1) cos(2 pi U2)`` with ``q' = (1 + q) / (3 - q)`` is a
    q-Gaussian with ``B = 1 / (3 - q)``; the result is rescaled to ``B``.
    Only ``1 <= q < 3`` is supported.
    """
    QGaussianParams(q, B)
    if q < 1:
        raise DomainError("sampling q < 1 (compact support) is not supported")
    rng = np.random.default_rng(seed)
    u1 = 1.0 - rng.random(n)  # (0, 1]
    u2 = rng.random(n)
    q_dual = (1.0 + q) / (3.0 - q)
    radius = np.sqrt(-2.0 * _q_log(u1, q_dual))
    z = radius * np.cos(2.0 * np.pi * u2)
    return z / math.sqrt((3.0 - q) * B)


def alpha_from_q(q):
    """Stable index of the attractor of q-Gaussian sums, ``(3 - q) / (q - 1)``."""
    if q >= 3:
        raise DomainError(f"q-Gaussian is not normalizable for q >= 3 (q={q})")
    if q <= 5.0 / 3.0:
        raise DomainError(
            f"q={q} <= 5/3 has finite variance: Gaussian attractor regime, no stable index"
        )
    return (3.0 - q) / (q - 1.0)


def q_from_alpha(alpha):
    """Inverse of :func:`alpha_from_q`: ``q = (3 + alpha) / (1 + alpha)``."""
    if not 0 < alpha < 2:
        raise DomainError(f"need 0 < alpha < 2, got {alpha}")
    return (3.0 + alpha) / (1.0 + alpha)


# --------------------------------------------------------------------------
# symmetric stable law
# --------------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)
_GL_NODES_LO, _GL_WEIGHTS_LO = np.polynomial.legendre.leggauss(16)
_BATCH = 64
_MAX_SEGMENTS = 200_000


def stable_peak(params: StableParams) -> float:
    """Closed-form density at the origin, ``Gamma(1 + 1/alpha) / (pi a^(1/alpha))``."""
    return math.gamma(1.0 + 1.0 / params.alpha) / (math.pi * params.scale)


def _wynn_epsilon(sums):
    """Wynn epsilon extrapolation of a sequence of partial sums.

    Returns ``(limit, error)`` where ``error`` is the difference between the
    last two even-column estimates.
    """
    col_prev = np.zeros(len(sums) + 1)
    col = np.asarray(sums, dtype=float)
    estimates = [col[-1]]
    k = 0
    while len(col) > 1:
        diff = np.diff(col)
        if np.any(diff == 0) or not np.all(np.isfinite(diff)):
            break
        nxt = col_prev[1 : len(col)] + 1.0 / diff
        if not np.all(np.isfinite(nxt)):
            break
        col_prev, col = col, nxt
        k += 1
        if k % 2 == 0:
            estimates.append(col[-1])
    if len(estimates) == 1:
        return estimates[0], math.inf
    return estimates[-1], abs(estimates[-1] - estimates[-2])


def _segment_integrals(lo, hi, x, alpha):
    """Integrals of cos(kx) exp(-k^alpha) over [lo_i, hi_i] (vectorized Gauss-Legendre).

    Returns the 24-point values and the largest disagreement with 16 points.
    """
    half = 0.5 * (hi - lo)[:, None]
    mid = 0.5 * (hi + lo)[:, None]
    k = mid + half * _GL_NODES
    k_lo = mid + half * _GL_NODES_LO
    hi_val = half[:, 0] * ((np.cos(k * x) * np.exp(-(k**alpha))) @ _GL_WEIGHTS)
    lo_val = half[:, 0] * ((np.cos(k_lo * x) * np.exp(-(k_lo**alpha))) @ _GL_WEIGHTS_LO)
    return hi_val, np.abs(hi_val - lo_val)


def _stable_pdf_unit(x, alpha, tol):
    """Density of the unit-scale law (a = 1) at x >= 0."""
    if x == 0.0:
        val, err = integrate.quad(lambda k: math.exp(-(k**alpha)), 0.0, math.inf,
                                  epsabs=0.0, epsrel=min(tol, 1e-10), limit=200)
        return val / math.pi

    peak = math.gamma(1.0 + 1.0 / alpha) / math.pi
    floor = 1e-3 * tol * peak
    # exp(-k^alpha) is below 1e-17 of its peak beyond this point
    k_cut = 40.0 ** (1.0 / alpha)
    first_zero = 0.5 * math.pi / x
    if first_zero >= k_cut:
        val, err = integrate.quad(lambda k: math.cos(k * x) * math.exp(-(k**alpha)), 0.0, math.inf,
                                  epsabs=floor * math.pi, epsrel=tol, limit=400)
        return val / math.pi

    # Half-period [0, first zero] holds the k^alpha cusp at the origin.
    head, _ = integrate.quad(lambda k: math.cos(k * x) * math.exp(-(k**alpha)), 0.0, first_zero,
                             epsabs=0.0, epsrel=1e-13, limit=200)
    partial = [head]
    total = head
    prev_estimate = None
    j = 0
    period = math.pi / x
    achieved = math.inf
    while j < _MAX_SEGMENTS:
        lo = first_zero + period * np.arange(j, j + _BATCH)
        terms, quad_err = _segment_integrals(lo, lo + period, x, alpha)
        bad = quad_err > 1e-2 * tol * np.maximum(np.abs(terms), floor * math.pi)
        for i in np.flatnonzero(bad):
            terms[i], _ = integrate.quad(lambda k: math.cos(k * x) * math.exp(-(k**alpha)),
                                         lo[i], lo[i] + period, epsabs=0.0, epsrel=1e-13)
        sums = total + np.cumsum(terms)
        total = sums[-1]
        partial.extend(sums.tolist())
        j += _BATCH

        k_end = first_zero + period * j
        if math.exp(-(k_end**alpha)) * period <= floor * math.pi * 1e-3:
            return total / math.pi

        window = partial[-(2 * 12 + 1):]
        estimate, eps_err = _wynn_epsilon(window)
        scale = max(abs(estimate), floor * math.pi)
        achieved = min(eps_err, abs(estimate - prev_estimate) if prev_estimate is not None else math.inf)
        achieved /= scale
        if prev_estimate is not None and abs(estimate - prev_estimate) <= tol * scale and eps_err <= tol * scale:
            return estimate / math.pi
        prev_estimate = estimate
    raise StableConvergenceError(f"stable density at x={x} did not converge", achieved)


def stable_pdf(params: StableParams, x, tol=1e-10):
    """Symmetric stable density by inverting the characteristic function.

    The cosine transform is split at the zeros of ``cos(k x)``; each
    half-period is integrated by Gauss-Legendre with an embedded lower-order
    check (adaptive fallback to QUADPACK), and the alternating series of
    half-period integrals is accelerated with Wynn's epsilon algorithm.

    Parameters
    ----------
    params : StableParams
    x : float or array_like
    tol : float
        Requested relative tolerance, in (1e-12, 1e-3).

    Raises
    ------
    StableConvergenceError
        If the series does not converge to ``tol``.
    """
    if not 1e-12 < tol < 1e-3:
        raise DomainError(f"tol must lie in (1e-12, 1e-3), got {tol}")
    scale = params.scale
    xs = np.abs(np.asarray(x, dtype=float)).ravel() / scale
    out = np.array([_stable_pdf_unit(float(xi), params.alpha, tol) for xi in xs]) / scale
    return out.reshape(np.shape(x)) if np.ndim(x) else float(out[0])


def stable_sample(params: StableParams, n, seed: SeedLike = None):
    """Symmetric stable variates by the Chambers-Mallows-Stuck transform.

    With ``V ~ U(-pi/2, pi/2)`` and ``W ~ Exp(1)``,
    ``sin(alpha V) / cos(V)^(1/alpha) * (cos((1 - alpha) V) / W)^((1 - alpha)/alpha)``
    has characteristic function ``exp(-|k|^alpha)``.
    """
    rng = np.random.default_rng(seed)
    alpha = params.alpha
    v = np.pi * (rng.random(n) - 0.5)
    w = rng.standard_exponential(n)
    if alpha == 1.0:
        x = np.tan(v)
    else:
        x = (np.sin(alpha * v) / np.cos(v) ** (1.0 / alpha)
             * (np.cos((1.0 - alpha) * v) / w) ** ((1.0 - alpha) / alpha))
    return params.scale * x


# --------------------------------------------------------------------------
# fractional Gaussian noise (oracle for persistence estimators)
# --------------------------------------------------------------------------


def fgn_autocovariance(hurst, lags):
    """Autocovariance of unit-variance fractional Gaussian noise."""
    k = np.abs(np.asarray(lags, dtype=float))
    h2 = 2.0 * hurst
    return 0.5 * (np.abs(k + 1) ** h2 - 2.0 * k**h2 + np.abs(k - 1) ** h2)


def fgn_sample(hurst, n, seed: SeedLike = None):
    """Exact fractional Gaussian noise by circulant embedding (Davies-Harte).

    Returns ``n`` unit-variance increments of fractional Brownian motion
    with Hurst exponent ``hurst`` in (0, 1).
    """
    if not 0 < hurst < 1:
        raise DomainError(f"Hurst exponent must lie in (0, 1), got {hurst}")
    rng = np.random.default_rng(seed)
    gamma = fgn_autocovariance(hurst, np.arange(n + 1))
    row = np.concatenate([gamma, gamma[-2:0:-1]])  # length 2n
    eig = np.fft.fft(row).real
    if np.any(eig < -1e-10 * eig.max()):
        raise DomainError("circulant embedding is not nonnegative definite")
    eig = np.clip(eig, 0.0, None)
    m = len(row)
    z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    y = np.fft.fft(np.sqrt(eig / m) * z)
    return y.real[:n]
