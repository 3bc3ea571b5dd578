"""Frequency-domain bootstrap for lag-window spectral estimates.

Pipeline, given a series X_1..X_n:

    1. periodogram ordinates I_j, j = 1..N, N = floor(n/2);
    2. pilot estimate ftilde, a lag-window estimate with an oversmoothed
       bandwidth (pilot truncation lag smaller than the estimation lag);
    3. residuals eps~_j = I_j / ftilde_j, rescaled to mean one:
       eps^_j = eps~_j / mean(eps~) (kills resampling-stage bias);
    4. draw eps*_j i.i.d. from the rescaled residuals -- or, in the
       exponential variant, from the standard exponential law;
    5. rebuild ordinates I*_j = ftilde_j eps*_j, with I*_{-j} = I*_j and
       I*_0 = 0.

The bootstrap statistic is g*(lam) = sqrt(n b) {f*(lam) - ftilde(lam)}
with f* the estimator applied to the resampled ordinates, mirroring
g(lam) = sqrt(n b) {f_n(lam) - f(lam)}.  Closeness of the two laws is
measured with the Mallows d2 metric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    BandwidthError,
    ConfigError,
    DegeneratePilotError,
    WindowConditionError,
)
from .models import TimeSeries
from .rng import stream
from .spectral import (
    TWO_PI,
    Periodogram,
    Window,
    _acov_upto,
    _cosine_form,
    periodogram,
)

PILOT_FLOOR_REL = 1e-12


@dataclass(frozen=True)
class BootstrapConfig:
    """Window and bandwidth settings for one bootstrap run.

    The pilot must be smoother than the estimate: 1 <= B_pilot < B_n
    (checked against n when the series is known).  The window needs a
    defined quadratic constant and a nonnegative spectral window, which
    of the built-ins only parzen provides.
    """

    window: Window
    B_n: int
    B_pilot: int
    variant: str = "residual"
    n_boot: int = 400
    seed: int = 0

    def __post_init__(self):
        if self.window.c2 is None:
            raise WindowConditionError(
                f"bootstrap window {self.window.kind!r} has no quadratic constant"
            )
        if not self.window.nonneg_spectral_window:
            raise WindowConditionError(
                f"bootstrap pilot would go negative with window {self.window.kind!r}"
            )
        if not 1 <= self.B_pilot < self.B_n:
            raise ConfigError(
                f"pilot must be smoother: need 1 <= B_pilot < B_n, "
                f"got B_pilot = {self.B_pilot}, B_n = {self.B_n}"
            )
        if self.variant not in ("residual", "exponential"):
            raise ConfigError(f"unknown bootstrap variant {self.variant!r}")
        if self.n_boot < 1:
            raise ConfigError("need n_boot >= 1")


@dataclass(frozen=True)
class PilotSpectrum:
    """Oversmoothed pilot: values on the stored Fourier grid plus an
    evaluator at arbitrary frequencies (same lag-window formula)."""

    n: int
    B_pilot: int
    window: Window
    weighted_acov: np.ndarray  # a(k / B_pilot) * rhat(k), k = 0..B_pilot

    @property
    def values(self) -> np.ndarray:
        return self.at(TWO_PI * np.arange(self.n // 2 + 1) / self.n)

    def at(self, lam):
        lam = np.asarray(lam, dtype=float)
        vals = _cosine_form(self.weighted_acov, np.ones(self.B_pilot + 1),
                            np.atleast_1d(lam))
        return float(vals[0]) if lam.ndim == 0 else vals


@dataclass(frozen=True)
class ResidualSet:
    """Periodogram-to-pilot ratios; ``rescaled`` has mean exactly one."""

    raw: np.ndarray
    rescaled: np.ndarray


@dataclass(frozen=True)
class BootstrapDistribution:
    """Samples of g*(lam) with the pilot value and residual diagnostics."""

    samples: np.ndarray
    lam: float
    pilot_value: float
    config: BootstrapConfig
    n: int
    diagnostics: dict = field(default_factory=dict)


def pilot_estimate(series: TimeSeries, window: Window, B_pilot: int) -> PilotSpectrum:
    """Nonnegative oversmoothed pilot spectrum (lag-window estimate at
    truncation lag ``B_pilot``)."""
    if not 1 <= B_pilot < series.n:
        raise BandwidthError(
            f"need 1 <= B_pilot < n, got B_pilot = {B_pilot}, n = {series.n}"
        )
    if not window.nonneg_spectral_window:
        raise WindowConditionError(
            f"pilot estimates can go negative with window {window.kind!r}"
        )
    acov = _acov_upto(series.values, B_pilot)
    weights = window(np.arange(B_pilot + 1) / B_pilot)
    return PilotSpectrum(n=series.n, B_pilot=B_pilot, window=window,
                         weighted_acov=weights * acov)


def rescaled_residuals(pgram: Periodogram, pilot_values) -> ResidualSet:
    """eps^_j = (I_j / ftilde_j) / mean over j = 1..N, N = floor(n/2)."""
    pilot_values = np.asarray(pilot_values, dtype=float)
    n = pgram.n
    N = n // 2
    if pilot_values.size != N + 1:
        raise ValueError("pilot grid must cover j = 0..floor(n/2)")
    ftil = pilot_values[1 : N + 1]
    floor = PILOT_FLOOR_REL * float(np.max(pilot_values))
    if np.any(ftil <= floor):
        j = int(np.argmax(ftil <= floor)) + 1
        raise DegeneratePilotError(
            f"pilot spectrum at ordinate j = {j} is below the relative floor"
        )
    raw = pgram.ordinates[1 : N + 1] / ftil
    mean = float(np.mean(raw))
    if mean <= 0:
        raise DegeneratePilotError("residuals have nonpositive mean")
    return ResidualSet(raw=raw, rescaled=raw / mean)


def resample_periodogram(pilot_values, residuals: Optional[ResidualSet],
                         variant: str, rng) -> np.ndarray:
    """One set of bootstrap ordinates I*_j (stored half, I*_0 = 0).

    residual variant: eps*_j drawn with replacement from the rescaled
    residual pool; exponential variant: eps*_j ~ exp(1).
    """
    pilot_values = np.asarray(pilot_values, dtype=float)
    N = pilot_values.size - 1
    if variant == "residual":
        if residuals is None or residuals.rescaled.size == 0:
            raise ValueError("residual variant needs a nonempty residual set")
        eps_star = rng.choice(residuals.rescaled, size=N, replace=True)
    elif variant == "exponential":
        eps_star = rng.standard_exponential(N)
    else:
        raise ConfigError(f"unknown bootstrap variant {variant!r}")
    out = np.empty(N + 1)
    out[0] = 0.0
    out[1:] = pilot_values[1:] * eps_star
    return out


def bootstrap_distribution(series: TimeSeries, config: BootstrapConfig,
                           lam: float) -> BootstrapDistribution:
    """n_boot replicates of g*(lam) = sqrt(n b) {f*(lam) - ftilde(lam)}.

    Replicate r draws from the stream (config.seed, r), so replicates are
    independent, order-free, and reproducible.
    """
    n = series.n
    if not config.B_pilot < config.B_n < n:
        raise ConfigError(
            f"need B_pilot < B_n < n, got ({config.B_pilot}, {config.B_n}, {n})"
        )
    lam = float(lam)
    if not 0.0 <= lam <= math.pi:
        raise ValueError("need lam in [0, pi]")

    pgram = periodogram(series)
    pilot = pilot_estimate(series, config.window, config.B_pilot)
    pilot_grid = pilot.values
    residuals = rescaled_residuals(pgram, pilot_grid)

    N = n // 2
    # kernel K(lam - w_j) + K(lam + w_j) collapsed into folded cosines:
    # f*(lam) = (1/2pi) sum_k a(k/B) c*(k) cos(k lam), with
    # c*(k) = (2pi/n) sum_{j in F_n} I*_j cos(k w_j).
    weights = config.window(np.arange(config.B_n + 1) / config.B_n)
    omega = TWO_PI * np.arange(N + 1) / n
    mult = np.full(N + 1, 2.0)
    mult[0] = 1.0
    if n % 2 == 0:
        mult[-1] = 1.0
    cosmat = np.cos(np.outer(np.arange(config.B_n + 1), omega)) * mult  # (B+1, N+1)

    scale = math.sqrt(n / config.B_n)
    pilot_at_lam = pilot.at(lam)
    coslam = np.cos(np.arange(config.B_n + 1) * lam)
    coslam[1:] *= 2.0

    samples = np.empty(config.n_boot)
    for r in range(config.n_boot):
        ords = resample_periodogram(pilot_grid, residuals, config.variant,
                                    stream(config.seed, r))
        cstar = (TWO_PI / n) * (cosmat @ ords)
        fstar = float((weights * cstar) @ coslam) / TWO_PI
        samples[r] = scale * (fstar - pilot_at_lam)

    res = residuals.rescaled
    diagnostics = {
        "residual_mean": float(np.mean(res)),
        "residual_var": float(np.var(res)),
        "residual_m4": float(np.mean((res - np.mean(res)) ** 4)),
    }
    return BootstrapDistribution(samples=samples, lam=lam,
                                 pilot_value=pilot_at_lam, config=config,
                                 n=n, diagnostics=diagnostics)


def mallows_d2(a, b) -> float:
    """Mallows / L2-Wasserstein distance between two empirical laws.

    Equal sizes: root mean square of sorted differences (the optimal
    one-dimensional coupling).  Unequal sizes: L2 distance between the
    piecewise-constant quantile functions on the common refinement of
    their probability breakpoints.
    """
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise ValueError("empty sample")
    if a.size == b.size:
        return float(np.sqrt(np.mean((a - b) ** 2)))
    cuts = np.union1d(np.arange(1, a.size + 1) / a.size,
                      np.arange(1, b.size + 1) / b.size)
    lo = np.concatenate([[0.0], cuts[:-1]])
    width = cuts - lo
    mid = 0.5 * (cuts + lo)
    qa = a[np.minimum((np.ceil(mid * a.size) - 1).astype(int), a.size - 1)]
    qb = b[np.minimum((np.ceil(mid * b.size) - 1).astype(int), b.size - 1)]
    return float(np.sqrt(np.sum(width * (qa - qb) ** 2)))


def default_bandwidths(n: int) -> tuple:
    """(B_n, B_pilot) from the rate-optimal orders: B_n = round(n^{1/5}),
    B_pilot = round(n^{0.15}), nudged apart when rounding collides."""
    if n < 32:
        raise ValueError("need n >= 32 to separate the two bandwidths")
    B_n = int(math.floor(n ** 0.2 + 0.5))
    B_pilot = int(math.floor(n ** 0.15 + 0.5))
    if B_pilot >= B_n:
        B_pilot = B_n - 1
    if B_pilot < 1:
        raise ValueError(f"cannot separate bandwidths at n = {n}")
    return B_n, B_pilot
