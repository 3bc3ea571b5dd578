"""Geometric-moment-contraction diagnostics.

A process forgets its past geometrically when coupled trajectories that
share innovations from time 1 on but differ in their pre-sample states
satisfy E|X_k - X'_k|^alpha <= C rho^k.  ``estimate_decay`` measures the
left side by Monte Carlo over independent coupled pairs and fits
(C, rho) on the log scale; ``garch_moment_matrix`` evaluates the matrix
moment condition Delta{E(A^(x)m)} < 1 governing existence of moments (and
contraction) for the asymmetric power GARCH family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ExplosionError, UnsupportedFamilyError
from .models import (
    DEFAULT_BURN_IN,
    EXPLOSION_LIMIT,
    AsymGARCH,
    ContractionReport,
    ModelSpec,
    SignedVol,
    _engine,
    contraction_coefficients,
)
from .rng import stream

TRACE_FLOOR = 1e-30


@dataclass(frozen=True)
class GmcFitReport:
    """Monte Carlo decay trace and the fitted geometric envelope
    E|X_k - X'_k|^alpha ~= C rho^k."""

    alpha: float
    lags: np.ndarray
    trace: np.ndarray
    stderr: np.ndarray
    rho_hat: float
    c_hat: float
    r2: float
    floor_hit: bool


@dataclass(frozen=True)
class MomentConditionReport:
    """Kronecker moment condition for asym_garch: both the largest
    singular value Delta (the literal condition) and the spectral radius
    of E(A^(x)m) are reported; they can disagree near the boundary."""

    m: int
    mean_matrix: np.ndarray
    spectral_radius: float
    delta: float
    method: str  # "analytic" | "monte-carlo"
    reps: Optional[int] = None
    stderr_delta: Optional[float] = None
    stderr_radius: Optional[float] = None

    @property
    def satisfied_delta(self) -> bool:
        return self.delta < 1.0

    @property
    def satisfied_rho(self) -> bool:
        return self.spectral_radius < 1.0

    @property
    def verdicts_disagree(self) -> bool:
        return self.satisfied_delta != self.satisfied_rho


def pair_moment_trace(pair, alpha: float) -> np.ndarray:
    """|X_k - X'_k|^alpha along one coupled pair; stored on the pair."""
    if alpha <= 0:
        raise ValueError("need alpha > 0")
    trace = np.abs(pair.primary.values - pair.coupled.values) ** alpha
    pair.trace = trace
    return trace


def estimate_decay(spec: ModelSpec, alpha: float, lags, reps: int = 2000,
                   seed: int = 0, burn_in: int = DEFAULT_BURN_IN) -> GmcFitReport:
    """Estimate the coupled moment trace over independent pairs and fit
    log E|X_k - X'_k|^alpha against k by least squares.

    Pair r draws its shared / primary-past / coupled-past innovations
    from the streams (seed, r, 0..2).  The fit uses strictly positive
    trace entries and stops at the first value below 1e-30; a trace that
    is zero beyond lag 0 reports rho_hat = 0 with the floor flag set.
    """
    if alpha <= 0:
        raise ValueError("need alpha > 0")
    if reps < 30:
        raise ValueError("need reps >= 30")
    lags = np.asarray(lags, dtype=int)
    if lags.size == 0 or np.any(lags < 1) or np.any(np.diff(lags) <= 0):
        raise ValueError("lags must be increasing and >= 1")
    n = int(lags[-1])

    innov = spec.innovation
    shared = np.empty((reps, n))
    pre_p = np.empty((reps, burn_in))
    pre_c = np.empty((reps, burn_in))
    for r in range(reps):
        shared[r] = innov.draw(stream(seed, r, 0), n)
        pre_p[r] = innov.draw(stream(seed, r, 1), burn_in)
        pre_c[r] = innov.draw(stream(seed, r, 2), burn_in)

    dim, step = _engine(spec)

    def warm(pre):
        state = np.zeros((reps, dim))
        for t in range(burn_in):
            state, x = step(state, pre[:, t])
            if not np.all(np.isfinite(x)) or np.any(np.abs(x) > EXPLOSION_LIMIT):
                raise ExplosionError(t + 1)
        return state

    sp = warm(pre_p)
    sc = warm(pre_c)
    gaps = np.empty((reps, n))
    for t in range(n):
        sp, xp = step(sp, shared[:, t])
        sc, xc = step(sc, shared[:, t])
        bad = ~np.isfinite(xp) | ~np.isfinite(xc)
        if bad.any() or max(np.max(np.abs(xp)), np.max(np.abs(xc))) > EXPLOSION_LIMIT:
            raise ExplosionError(burn_in + t + 1)
        gaps[:, t] = np.abs(xp - xc)

    moments = gaps[:, lags - 1] ** alpha
    trace = moments.mean(axis=0)
    stderr = moments.std(axis=0, ddof=1) / math.sqrt(reps)

    keep = trace > TRACE_FLOOR
    if not keep.all():
        keep[int(np.argmin(keep)):] = False  # cut at first floored entry
    floor_hit = bool((~keep).any())

    kept = int(keep.sum())
    if kept < 2:
        return GmcFitReport(alpha, lags, trace, stderr, rho_hat=0.0,
                            c_hat=0.0, r2=math.nan, floor_hit=True)

    x = lags[keep].astype(float)
    y = np.log(trace[keep])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return GmcFitReport(alpha, lags, trace, stderr,
                        rho_hat=float(np.exp(slope)),
                        c_hat=float(np.exp(intercept)), r2=r2,
                        floor_hit=floor_hit)


# ---------------------------------------------------------------------------
# GARCH matrix moment condition
# ---------------------------------------------------------------------------

KRONECKER_DIM_LIMIT = 10_000


def garch_companion(spec: AsymGARCH, z) -> np.ndarray:
    """Volatility companion matrix A(z) of size (r+s) x (r+s), affine in
    z = (|eps| - gamma eps)^varsigma.

    Row 1 carries (alpha_1 z .. alpha_r z, beta_1 z .. beta_s z); row r+1
    the same loadings without z; the remaining rows shift the state.
    """
    r, s = spec.r, spec.s
    base = np.zeros((r + s, r + s))
    rand = np.zeros((r + s, r + s))
    load = np.concatenate([spec.alpha, spec.beta])
    rand[0, :] = load
    base[r, :] = load
    for i in range(1, r):
        base[i, i - 1] = 1.0
    for i in range(1, s):
        base[r + i, r + i - 1] = 1.0
    return base + np.asarray(z) * rand


def _garch_parts(spec: AsymGARCH):
    base = garch_companion(spec, 0.0)
    rand = garch_companion(spec, 1.0) - base
    return base, rand


def _mean_kron_power(base, rand, z_moments, m):
    """E[(base + Z rand)^(x)m] given moments E[Z^i], i = 0..m."""
    dim = base.shape[0] ** m
    out = np.zeros((dim, dim))
    for pattern in range(2 ** m):
        power = bin(pattern).count("1")
        term = np.array([[1.0]])
        for bit in range(m):
            term = np.kron(term, rand if (pattern >> bit) & 1 else base)
        out += z_moments[power] * term
    return out


def _z_mean_analytic(spec: AsymGARCH) -> float:
    """E(|eps| - gamma eps)^varsigma for the symmetric closed-form kinds."""
    innov = spec.innovation
    half = 0.5 * ((1 - spec.gamma) ** spec.varsigma + (1 + spec.gamma) ** spec.varsigma)
    if innov.kind in ("gaussian", "rademacher"):
        return innov.abs_moment(spec.varsigma) * half
    raise UnsupportedFamilyError(
        "analytic moment matrix supports gaussian or rademacher innovations"
    )


def garch_moment_matrix(spec: AsymGARCH, m: int, mode: str = "analytic",
                        reps: int = 100_000, seed: int = 0) -> MomentConditionReport:
    """Moment condition Delta{E(A^(x)m)} < 1 for the asymmetric GARCH.

    ``mode`` is "analytic" (m = 1 with gaussian/rademacher innovations)
    or "monte-carlo" (sample moments of Z over ``reps`` innovation draws;
    batch-means standard errors for both scalar outputs).
    """
    if m < 1:
        raise ValueError("need m >= 1")
    dim = (spec.r + spec.s) ** m
    if dim > KRONECKER_DIM_LIMIT:
        raise ValueError(
            f"Kronecker power dimension {dim} exceeds the {KRONECKER_DIM_LIMIT} limit"
        )
    base, rand = _garch_parts(spec)

    def summarize(mat):
        sr = float(np.max(np.abs(np.linalg.eigvals(mat))))
        delta = float(np.linalg.norm(mat, ord=2))
        return sr, delta

    if mode == "analytic":
        if m != 1:
            raise UnsupportedFamilyError("analytic mode covers m = 1 only")
        mean = base + _z_mean_analytic(spec) * rand
        sr, delta = summarize(mean)
        return MomentConditionReport(m=m, mean_matrix=mean, spectral_radius=sr,
                                     delta=delta, method="analytic")
    if mode not in ("monte-carlo", "mc"):
        raise ValueError(f"unknown mode {mode!r}")

    eps = spec.innovation.draw(stream(seed), reps)
    z = (np.abs(eps) - spec.gamma * eps) ** spec.varsigma
    powers = np.vstack([z ** i for i in range(m + 1)])

    n_batches = 25
    batches = np.array_split(powers, n_batches, axis=1)
    srs = np.empty(n_batches)
    deltas = np.empty(n_batches)
    for i, chunk in enumerate(batches):
        srs[i], deltas[i] = summarize(
            _mean_kron_power(base, rand, chunk.mean(axis=1), m)
        )
    mean = _mean_kron_power(base, rand, powers.mean(axis=1), m)
    sr, delta = summarize(mean)
    return MomentConditionReport(
        m=m, mean_matrix=mean, spectral_radius=sr, delta=delta,
        method="monte-carlo", reps=reps,
        stderr_delta=float(np.std(deltas, ddof=1) / math.sqrt(n_batches)),
        stderr_radius=float(np.std(srs, ddof=1) / math.sqrt(n_batches)),
    )


# ---------------------------------------------------------------------------
# sufficient-condition wrappers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ContractionCheck:
    """Contraction verdict plus the implied range of moment orders: a
    process with moments of order alpha that contracts at some order is
    geometrically contracting at every order in (0, alpha]."""

    contraction: ContractionReport
    implied_upper: Optional[float]

    @property
    def satisfied(self) -> bool:
        return self.contraction.satisfied


def check_contraction(spec: ModelSpec, alpha: float, seed: int = 0) -> ContractionCheck:
    """Evaluate the sufficient condition sum_j a_j < 1 at moment order
    alpha and report the implied contraction orders (0, alpha]."""
    rep = contraction_coefficients(spec, alpha, seed=seed)
    return ContractionCheck(contraction=rep,
                            implied_upper=alpha if rep.satisfied else None)


@dataclass(frozen=True)
class SignedVolConditions:
    """Direct hypothesis checks for the signed volatility model:
    E|eps|^{alpha varsigma} < 1 and E|c(eps)|^alpha < 1 (plus finiteness
    of E|g(eps)|^alpha) imply contraction of order alpha*varsigma."""

    alpha: float
    eps_moment: float
    c_moment: float
    g_moment: float

    @property
    def satisfied(self) -> bool:
        return self.eps_moment < 1.0 and self.c_moment < 1.0 and math.isfinite(self.g_moment)


def signed_vol_conditions(spec: SignedVol, alpha: float, reps: int = 200_000,
                          seed: int = 0) -> SignedVolConditions:
    if alpha <= 0:
        raise ValueError("need alpha > 0")
    eps_m = spec.innovation.abs_moment(alpha * spec.varsigma)
    rng = stream(seed)
    draws = spec.innovation.draw(rng, reps)
    c_m = float(np.mean(np.abs(spec.c(draws)) ** alpha))
    g_m = float(np.mean(np.abs(spec.g(draws)) ** alpha))
    return SignedVolConditions(alpha=alpha, eps_moment=eps_m, c_moment=c_m,
                               g_moment=g_m)
