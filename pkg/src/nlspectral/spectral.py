"""Fourier transforms, periodograms, and lag-window spectral estimation.

Conventions (all sums over k = 1..n, frequencies in radians):

    S_n(theta) = sum_k X_k e^{ik theta}
    I_n(theta) = |S_n(theta)|^2 / (2 pi n)
    rhat(k)    = (1/n) sum_{j=1}^{n-|k|} X_j X_{j+|k|}
    f_n(lam)   = (1/2pi) sum_{|k| <= B} rhat(k) a(k/B) e^{-ik lam}

with a(.) an even Lipschitz lag window supported on [-1, 1], a(0) = 1,
and B the truncation lag (bandwidth b = 1/B).

A note on inversion: on the n-point Fourier grid w_j = 2 pi j / n the
ordinates determine only the circularly folded covariances
rhat(k) + rhat(n - |k|); recovering the straight rhat(k) exactly requires
the transform on a (>= 2n)-point grid.  ``periodogram`` therefore carries
the exact sample autocovariances (computed from the zero-padded transform)
alongside the grid ordinates, and ``estimate_from_periodogram`` uses them
when present, so the two estimator routes agree to rounding.  Synthetic
ordinates (the bootstrap's) have no underlying series; for them the
literal double-sum route over the n-grid is used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .errors import BandwidthError, LagRangeError, WindowConditionError
from .models import TimeSeries

TWO_PI = 2.0 * math.pi
IDENTITY_RTOL = 1e-9


def default_grid(points: int = 257) -> np.ndarray:
    """Equispaced frequency grid on [0, pi] including both endpoints."""
    return np.linspace(0.0, math.pi, points)


# ---------------------------------------------------------------------------
# lag windows
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Window:
    """Lag-window profile a(.) with its asymptotic constants.

    ``c2`` is the local quadratic constant lim x^-2 (1 - a(x)); None when
    the limit does not exist (bartlett).  ``sq_integral`` is the exact
    value of the integral of a^2 over [-1, 1].  ``nonneg_spectral_window``
    marks windows whose spectral window is nonnegative, hence nonnegative
    density estimates.
    """

    kind: str
    fn: Callable[[np.ndarray], np.ndarray]
    c2: Optional[float]
    sq_integral: float
    nonneg_spectral_window: bool

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(np.abs(x) <= 1.0, self.fn(np.abs(x)), 0.0)
        return float(out) if out.ndim == 0 else out


def _parzen(x):
    return np.where(
        x <= 0.5, 1.0 - 6.0 * x ** 2 + 6.0 * x ** 3, 2.0 * (1.0 - x) ** 3
    )


def _tukey_hanning(x):
    return 0.5 * (1.0 + np.cos(math.pi * x))


def _bartlett(x):
    return 1.0 - x


_WINDOWS = {
    # parzen: cubic B-spline profile; spectral window >= 0; 1-a(x) ~ 6x^2
    "parzen": Window("parzen", _parzen, 6.0, 151.0 / 280.0, True),
    # tukey-hanning: (1+cos pi x)/2; c2 = pi^2/4; sidelobes go negative
    "tukey_hanning": Window(
        "tukey_hanning", _tukey_hanning, math.pi ** 2 / 4.0, 0.75, False
    ),
    # bartlett: triangular; Fejer (nonnegative) window but 1-a(x) = |x|
    # is not quadratic at 0, so c2 is undefined
    "bartlett": Window("bartlett", _bartlett, None, 2.0 / 3.0, True),
}


def window_profile(kind: str) -> Window:
    """Look up a lag window by name (hyphens and underscores both accepted)."""
    key = kind.strip().lower().replace("-", "_")
    if key not in _WINDOWS:
        raise ValueError(
            f"unknown window {kind!r}; choose from {sorted(_WINDOWS)}"
        )
    return _WINDOWS[key]


# ---------------------------------------------------------------------------
# transforms and periodograms
# ---------------------------------------------------------------------------


def fourier_transform(series: TimeSeries, theta: float) -> complex:
    """S_n(theta) = sum_{k=1}^n X_k e^{ik theta}, by compensated direct
    summation (exact conjugate symmetry S_n(-theta) = conj S_n(theta))."""
    x = series.values
    k = np.arange(1, x.size + 1, dtype=float)
    re = math.fsum(x * np.cos(k * theta))
    im = math.fsum(x * np.sin(k * theta))
    return complex(re, im)


@dataclass(frozen=True)
class Periodogram:
    """Ordinates I(w_j), w_j = 2 pi j / n, stored for j = 0..floor(n/2);
    negative j follow from I_{-j} = I_j.

    ``acov`` holds the exact sample autocovariances rhat(0..n-1) when the
    object was computed from a series (see the module docstring); it is
    None for synthetic ordinates such as bootstrap resamples.
    """

    n: int
    ordinates: np.ndarray
    acov: Optional[np.ndarray] = None

    def __post_init__(self):
        ords = np.array(self.ordinates, dtype=float)
        if ords.ndim != 1 or ords.size != self.n // 2 + 1:
            raise ValueError("need floor(n/2)+1 stored ordinates")
        if np.any(ords < 0) or not np.all(np.isfinite(ords)):
            raise ValueError("ordinates must be finite and >= 0")
        ords.setflags(write=False)
        object.__setattr__(self, "ordinates", ords)
        if self.acov is not None:
            ac = np.array(self.acov, dtype=float)
            ac.setflags(write=False)
            object.__setattr__(self, "acov", ac)

    @property
    def frequencies(self) -> np.ndarray:
        return TWO_PI * np.arange(self.n // 2 + 1) / self.n

    @property
    def multiplicities(self) -> np.ndarray:
        """How often each stored ordinate occurs in the full grid
        F_n = {-floor((n-1)/2), ..., floor(n/2)}."""
        m = np.full(self.n // 2 + 1, 2.0)
        m[0] = 1.0
        if self.n % 2 == 0:
            m[-1] = 1.0
        return m

    def folded_acov(self, max_lag: int) -> np.ndarray:
        """c(k) = (2pi/n) sum_{j in F_n} I_j cos(k w_j) for k = 0..max_lag.

        Exact inversion of the grid ordinates; equals
        rhat(k) + rhat(n-|k|) for a series-backed periodogram.
        """
        k = np.arange(max_lag + 1)
        cosmat = np.cos(np.outer(k, self.frequencies))
        return (TWO_PI / self.n) * cosmat @ (self.multiplicities * self.ordinates)


def periodogram(series: TimeSeries) -> Periodogram:
    """Periodogram at the Fourier frequencies.

    |S_n(w_j)| equals the length-n DFT modulus; the exact sample
    autocovariances come from the 2n zero-padded transform and ride along
    for lossless inversion.
    """
    x = series.values
    n = x.size
    dft = np.fft.rfft(x)
    ords = np.abs(dft) ** 2 / (TWO_PI * n)
    padded = np.fft.rfft(x, 2 * n)
    acov = np.fft.irfft(np.abs(padded) ** 2)[:n] / n
    return Periodogram(n=n, ordinates=ords, acov=acov)


def sample_acov(series: TimeSeries, k: int) -> float:
    """rhat(k) = (1/n) sum_{j=1}^{n-|k|} X_j X_{j+|k|}; symmetric in k."""
    x = series.values
    k = abs(int(k))
    if k >= x.size:
        raise LagRangeError(f"lag {k} out of range for n = {x.size}")
    return float(x[: x.size - k] @ x[k:] / x.size)


def _acov_upto(x: np.ndarray, max_lag: int) -> np.ndarray:
    """rhat(0..max_lag) via the zero-padded FFT (exact to rounding)."""
    n = x.shape[-1]
    if max_lag >= n:
        raise LagRangeError(f"lag {max_lag} out of range for n = {n}")
    padded = np.fft.rfft(x, 2 * n, axis=-1)
    full = np.fft.irfft(np.abs(padded) ** 2, axis=-1)[..., : max_lag + 1]
    return full / n


# ---------------------------------------------------------------------------
# lag-window estimation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectralEstimate:
    lambdas: np.ndarray
    values: np.ndarray
    B_n: int
    window: Window
    n: int


def _check_bandwidth(B_n: int, n: int):
    if not 1 <= B_n < n:
        raise BandwidthError(f"need 1 <= B_n < n, got B_n = {B_n}, n = {n}")


def _cosine_form(acov_head, weights, lambdas):
    """(1/2pi) [w_0 r_0 + 2 sum_k w_k r_k cos(k lam)] on a lambda grid."""
    lambdas = np.asarray(lambdas, dtype=float)
    wr = weights * acov_head
    k = np.arange(1, wr.size)
    vals = (wr[0] + 2.0 * np.cos(np.outer(lambdas, k)) @ wr[1:]) / TWO_PI
    return vals


def lag_window_estimate(series: TimeSeries, window: Window, B_n: int,
                        lambdas=None) -> SpectralEstimate:
    """Lag-window density estimate on a frequency grid (default: 257
    points on [0, pi]).

    f_n(lam) = (1/2pi) [rhat(0) + 2 sum_{k=1}^{B} rhat(k) a(k/B) cos(k lam)]
    """
    _check_bandwidth(B_n, series.n)
    if lambdas is None:
        lambdas = default_grid()
    lambdas = np.atleast_1d(np.asarray(lambdas, dtype=float))
    acov = _acov_upto(series.values, B_n)
    weights = window(np.arange(B_n + 1) / B_n)
    vals = _cosine_form(acov, weights, lambdas)
    return SpectralEstimate(lambdas=lambdas, values=vals, B_n=B_n,
                            window=window, n=series.n)


def estimate_from_periodogram(pgram: Periodogram, window: Window, B_n: int,
                              lam) -> Union[float, np.ndarray]:
    """Evaluate the estimator from periodogram ordinates,

    f_n(lam) = (1/n) sum_{j in F_n} I_j sum_{|k| <= B} a(k/B) e^{-ik(lam - w_j)}.

    For a series-backed periodogram the exact carried autocovariances are
    used, which makes this numerically identical to
    :func:`lag_window_estimate` (the estimator identity).  For synthetic
    ordinates the literal grid double sum is evaluated (in its equivalent
    folded-coefficient form).
    """
    _check_bandwidth(B_n, pgram.n)
    lam = np.asarray(lam, dtype=float)
    scalar = lam.ndim == 0
    weights = window(np.arange(B_n + 1) / B_n)
    if pgram.acov is not None:
        head = pgram.acov[: B_n + 1]
    else:
        head = pgram.folded_acov(B_n)
    vals = _cosine_form(head, weights, np.atleast_1d(lam))
    return float(vals[0]) if scalar else vals


# ---------------------------------------------------------------------------
# asymptotic constants
# ---------------------------------------------------------------------------


def _eta2(lam: float) -> float:
    """1 if 2*lam is a multiple of 2*pi (i.e. lam = 0 mod pi), else 0."""
    rem = math.fmod(lam, math.pi)
    return 1.0 if min(abs(rem), math.pi - abs(rem)) < 1e-12 else 0.0


def asymptotic_variance(f_val: float, lam: float, window: Window) -> float:
    """sigma^2(lam) = (1 + eta(2 lam)) f(lam)^2 integral(a^2); the factor
    doubles exactly at lam = 0 and lam = pi."""
    if not f_val > 0:
        raise ValueError("need f(lam) > 0")
    return (1.0 + _eta2(lam)) * f_val ** 2 * window.sq_integral


def spectral_second_derivative(acov, lam) -> Union[float, np.ndarray]:
    """f''(lam) = -(1/2pi) sum_k r(k) k^2 e^{-ik lam} from a truncated
    covariance sequence r(0..K); the caller picks K so the |r(k)| k^2
    tail is negligible."""
    acov = np.asarray(acov, dtype=float)
    lam = np.asarray(lam, dtype=float)
    k = np.arange(1, acov.size)
    out = -(np.cos(np.multiply.outer(lam, k)) @ (k * k * acov[1:])) / math.pi
    return float(out) if out.ndim == 0 else out


def asymptotic_bias(f_dd: float, B_n: int, window: Window) -> float:
    """Leading estimator bias c2 f''(lam) / B_n^2; requires a window with a
    defined quadratic constant."""
    if window.c2 is None:
        raise WindowConditionError(
            f"window {window.kind!r} violates the quadratic-constant "
            "condition (1 - a(x)) / x^2 -> c2"
        )
    if B_n < 1:
        raise BandwidthError("need B_n >= 1")
    return window.c2 * f_dd / B_n ** 2


# ---------------------------------------------------------------------------
# normalized-ordinate goodness of fit
# ---------------------------------------------------------------------------


def ks_distance(sample, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """sup_x |F_hat(x) - F(x)| for an i.i.d.-style sample against a
    continuous reference cdf."""
    x = np.sort(np.asarray(sample, dtype=float))
    if x.size == 0:
        raise ValueError("empty sample")
    f = np.asarray(cdf(x), dtype=float)
    grid = np.arange(1, x.size + 1) / x.size
    return float(np.max(np.maximum(grid - f, f - (grid - 1.0 / x.size))))


def exponential_cdf(x):
    return 1.0 - np.exp(-np.asarray(x, dtype=float))


def normalized_periodogram_ks(series: TimeSeries, f_ref) -> float:
    """KS distance between the empirical law of I(theta_j)/f_ref(theta_j),
    j = 1..floor((n-1)/2), and the standard exponential.

    ``f_ref`` is a callable or an array of reference density values at
    theta_1..theta_m; it must be strictly positive there.
    """
    n = series.n
    m = (n - 1) // 2
    if m < 1:
        raise ValueError(f"no interior Fourier ordinates at n = {n}")
    theta = TWO_PI * np.arange(1, m + 1) / n
    ref = np.asarray(f_ref(theta) if callable(f_ref) else f_ref, dtype=float)
    if ref.shape != theta.shape:
        raise ValueError("f_ref must provide one value per ordinate")
    if np.any(ref <= 0):
        raise ValueError("reference spectrum must be strictly positive")
    ords = periodogram(series).ordinates[1 : m + 1]
    return ks_distance(ords / ref, exponential_cdf)
