"""Nonlinear time-series model families and their simulators.

Every family is a stochastic recursion driven by i.i.d. innovations
(eps_t), with a deterministic one-step transition: two trajectories fed
identical innovations from identical states are identical.  Families:

    iid         X_t = eps_t
    ar          X_t = sum_j phi_j X_{t-j} + eps_t
    arma        X_t = sum_j theta_j X_{t-j} + eta_t - sum_k phiMA_k eta_{t-k}
                (eta_t the innovation draw, or a nested model, e.g. ARMA-GARCH)
    expar       X_t = [a1 + b1 exp(-a X_{t-1}^2)] X_{t-1} + eps_t
    ar_arch     X_t = th1 X_{t-1} + th2 X_{t-2}
                      + eps_t sqrt(th3^2 + th4^2 X_{t-1}^2 + th5^2 X_{t-2}^2)
    bilinear    X_t = sum a_j X_{t-j} + sum_{j>=0} c_j eps_{t-j}
                      + sum_{j,k} b_{jk} X_{t-j-k} eps_{t-k}
    asym_garch  X_t = eps_t sqrt(h_t),
                h_t^{vs/2} = a0 + sum a_j (|X_{t-j}| - gamma X_{t-j})^vs
                                + sum b_j h_{t-j}^{vs/2}
    signed_vol  X_t = eps_t |s_t|^{1/vs},  s_t = g(eps_{t-1}) + c(eps_{t-1}) s_{t-1}
    rc_ar       X_{t+1} = (A0 + eps_{t+1} A1) X_t + (b0 + eps_{t+1} b1),
                observable = first coordinate

Simulations start from the zero state and discard ``burn_in`` warm-up
steps (default 1000) to approximate the stationary law.  Any value with
|x| > 1e12 or non-finite aborts with an ExplosionError naming the step.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy import signal, special

from .errors import (
    ExplosionError,
    StabilityError,
    UnsupportedFamilyError,
)
from .rng import child_seed, stream

EXPLOSION_LIMIT = 1e12
DEFAULT_BURN_IN = 1000

_SQRT3 = math.sqrt(3.0)


# ---------------------------------------------------------------------------
# innovations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InnovationSpec:
    """Distribution of the i.i.d. innovations eps_t.

    Kinds (all mean zero):
        gaussian    N(0, variance)
        rademacher  +-1 equiprobable (unit variance)
        student_t   t(df) scaled to unit variance (df > 2 required)
        uniform     U(-sqrt(3), sqrt(3)) (unit variance)
    """

    kind: str = "gaussian"
    variance: float = 1.0
    df: float = 0.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "rademacher", "student_t", "uniform"):
            raise ValueError(f"unknown innovation kind {self.kind!r}")
        if self.kind == "gaussian":
            if not (self.variance > 0 and math.isfinite(self.variance)):
                raise ValueError("gaussian innovation needs variance > 0")
        elif self.variance != 1.0:
            raise ValueError(f"{self.kind} innovations have unit variance")
        if self.kind == "student_t" and not self.df > 2:
            raise ValueError("student_t innovation needs df > 2 for unit variance")

    @property
    def var(self) -> float:
        return self.variance if self.kind == "gaussian" else 1.0

    @property
    def has_eighth_moment(self) -> bool:
        return self.kind != "student_t" or self.df > 8

    def draw(self, rng, size):
        if self.kind == "gaussian":
            return rng.standard_normal(size) * math.sqrt(self.variance)
        if self.kind == "rademacher":
            return rng.integers(0, 2, size) * 2.0 - 1.0
        if self.kind == "student_t":
            return rng.standard_t(self.df, size) * math.sqrt((self.df - 2) / self.df)
        return rng.uniform(-_SQRT3, _SQRT3, size)

    def abs_moment(self, q: float) -> float:
        """E|eps|^q (closed form; inf when the moment does not exist)."""
        if q == 0:
            return 1.0
        if q < 0:
            raise ValueError("moment order must be >= 0")
        if self.kind == "gaussian":
            return self.variance ** (q / 2) * 2 ** (q / 2) * math.exp(
                special.gammaln((q + 1) / 2)
            ) / math.sqrt(math.pi)
        if self.kind == "rademacher":
            return 1.0
        if self.kind == "uniform":
            return _SQRT3 ** q / (q + 1)
        # unit-variance student t
        if q >= self.df:
            return math.inf
        ln = (
            0.5 * q * math.log(self.df)
            + special.gammaln((q + 1) / 2)
            + special.gammaln((self.df - q) / 2)
            - 0.5 * math.log(math.pi)
            - special.gammaln(self.df / 2)
        )
        return ((self.df - 2) / self.df) ** (q / 2) * math.exp(ln)


def _check_moments(innovation: InnovationSpec):
    if not innovation.has_eighth_moment:
        warnings.warn(
            "student_t innovation with df <= 8 lacks an eighth moment; "
            "bootstrap and fourth-order gates may not apply",
            UserWarning,
            stacklevel=3,
        )


# ---------------------------------------------------------------------------
# volatility-response functions for the signed volatility model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VolFunction:
    """Scalar response u -> f(u) used for g and c in the signed volatility
    model.  kinds: constant c0 | affine_abs c0 + c1|u| | quadratic
    c0 + c1 u + c2 u^2."""

    kind: str
    coeffs: tuple = (0.0,)

    def __post_init__(self):
        want = {"constant": 1, "affine_abs": 2, "quadratic": 3}
        if self.kind not in want:
            raise ValueError(f"unknown volatility function kind {self.kind!r}")
        if len(self.coeffs) != want[self.kind]:
            raise ValueError(
                f"{self.kind} needs {want[self.kind]} coefficients, "
                f"got {len(self.coeffs)}"
            )
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    def __call__(self, u):
        c = self.coeffs
        if self.kind == "constant":
            return np.full_like(np.asarray(u, dtype=float), c[0])
        if self.kind == "affine_abs":
            return c[0] + c[1] * np.abs(u)
        return c[0] + c[1] * np.asarray(u) + c[2] * np.asarray(u) ** 2

    @property
    def nonnegative(self) -> bool:
        """Structurally nonnegative for every real argument."""
        c = self.coeffs
        if self.kind == "constant":
            return c[0] >= 0
        if self.kind == "affine_abs":
            return c[0] >= 0 and c[1] >= 0
        c0, c1, c2 = c
        if c2 == 0:
            return c1 == 0 and c0 >= 0
        return c2 > 0 and c1 * c1 <= 4 * c0 * c2

    def mean_under(self, innovation: InnovationSpec) -> float:
        """E f(eps) for the symmetric innovation laws used here."""
        c = self.coeffs
        if self.kind == "constant":
            return c[0]
        if self.kind == "affine_abs":
            return c[0] + c[1] * innovation.abs_moment(1)
        return c[0] + c[2] * innovation.var  # odd term integrates to zero


# ---------------------------------------------------------------------------
# model specs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IID:
    innovation: InnovationSpec = InnovationSpec()

    def __post_init__(self):
        _check_moments(self.innovation)


@dataclass(frozen=True)
class AR:
    coeffs: tuple
    innovation: InnovationSpec = InnovationSpec()

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        _check_moments(self.innovation)


@dataclass(frozen=True)
class ARMA:
    """theta(B) X = phi(B) eta with theta_j the AR and phi_k the MA weights:
    X_t = sum theta_j X_{t-j} + eta_t - sum phi_k eta_{t-k}.

    ``eta`` is either an InnovationSpec or a nested model spec whose output
    drives the filter (ARMA-GARCH and friends).  The AR polynomial must be
    stable (companion spectral radius < 1).
    """

    ar: tuple
    ma: tuple
    eta: Union[InnovationSpec, "ModelSpec"] = InnovationSpec()

    def __post_init__(self):
        object.__setattr__(self, "ar", tuple(float(c) for c in self.ar))
        object.__setattr__(self, "ma", tuple(float(c) for c in self.ma))
        rad = ar_spectral_radius(self.ar)
        if rad >= 1:
            raise StabilityError(rad)
        if isinstance(self.eta, InnovationSpec):
            _check_moments(self.eta)

    @property
    def innovation(self) -> InnovationSpec:
        return self.eta if isinstance(self.eta, InnovationSpec) else self.eta.innovation


@dataclass(frozen=True)
class EXPAR:
    """Amplitude-dependent exponential AR(1):
    X_t = [alpha1 + beta1 exp(-a X_{t-1}^2)] X_{t-1} + eps_t, a > 0."""

    alpha1: float
    beta1: float
    a: float = 1.0
    innovation: InnovationSpec = InnovationSpec()

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("expar needs a > 0")
        _check_moments(self.innovation)


@dataclass(frozen=True)
class ARARCH:
    """AR(2) with ARCH(2) errors, parameters theta = (th1..th5):
    X_t = th1 X_{t-1} + th2 X_{t-2}
          + eps_t sqrt(th3^2 + th4^2 X_{t-1}^2 + th5^2 X_{t-2}^2)."""

    theta: tuple
    innovation: InnovationSpec = InnovationSpec()

    def __post_init__(self):
        if len(self.theta) != 5:
            raise ValueError("ar_arch needs exactly five theta parameters")
        object.__setattr__(self, "theta", tuple(float(c) for c in self.theta))
        _check_moments(self.innovation)


@dataclass(frozen=True)
class Bilinear:
    """Subdiagonal bilinear model:
    X_t = sum_{j=1}^{p} a_j X_{t-j} + sum_{j=0}^{q} c_j eps_{t-j}
          + sum_{j=0}^{P} sum_{k=1}^{Q} b_{jk} X_{t-j-k} eps_{t-k}.

    ``a`` has length p, ``c`` length q+1 (c[0] multiplies eps_t), and ``b``
    is a (P+1) x Q array with b[j, k-1] the coefficient of X_{t-j-k} eps_{t-k}.
    """

    a: tuple = ()
    c: tuple = (1.0,)
    b: tuple = ((),)  # rows j = 0..P, columns k = 1..Q

    innovation: InnovationSpec = InnovationSpec()

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(v) for v in self.a))
        object.__setattr__(self, "c", tuple(float(v) for v in self.c))
        rows = tuple(tuple(float(v) for v in row) for row in self.b)
        if len(self.c) < 1:
            raise ValueError("bilinear needs c[0] (the eps_t coefficient)")
        ncols = {len(row) for row in rows}
        if len(ncols) > 1:
            raise ValueError("bilinear b rows must have equal length")
        object.__setattr__(self, "b", rows)
        _check_moments(self.innovation)

    @property
    def p(self):
        return len(self.a)

    @property
    def q(self):
        return len(self.c) - 1

    @property
    def P(self):
        return len(self.b) - 1

    @property
    def Q(self):
        return len(self.b[0]) if self.b else 0


@dataclass(frozen=True)
class AsymGARCH:
    """Asymmetric power GARCH(r, s):
    X_t = eps_t sqrt(h_t),
    h_t^{vs/2} = alpha0 + sum_j alpha_j (|X_{t-j}| - gamma X_{t-j})^vs
                        + sum_j beta_j h_{t-j}^{vs/2},
    with alpha0 > 0, alpha_j, beta_j >= 0, vs >= 1, |gamma| < 1.
    vs = 2, gamma = 0 is linear GARCH(r, s)."""

    alpha0: float
    alpha: tuple
    beta: tuple
    gamma: float = 0.0
    varsigma: float = 2.0
    innovation: InnovationSpec = InnovationSpec()

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(float(v) for v in self.alpha))
        object.__setattr__(self, "beta", tuple(float(v) for v in self.beta))
        if not self.alpha0 > 0:
            raise ValueError("asym_garch needs alpha0 > 0")
        if any(v < 0 for v in self.alpha) or any(v < 0 for v in self.beta):
            raise ValueError("asym_garch needs alpha_j, beta_j >= 0")
        if not self.varsigma >= 1:
            raise ValueError("asym_garch needs varsigma >= 1")
        if not abs(self.gamma) < 1:
            raise ValueError("asym_garch needs |gamma| < 1")
        if len(self.alpha) < 1 or len(self.beta) < 1:
            raise ValueError("asym_garch needs r >= 1 and s >= 1")
        _check_moments(self.innovation)

    @property
    def r(self):
        return len(self.alpha)

    @property
    def s(self):
        return len(self.beta)


@dataclass(frozen=True)
class SignedVol:
    """Signed volatility model:
    X_t = eps_t |s_t|^{1/vs},  s_t = g(eps_{t-1}) + c(eps_{t-1}) s_{t-1}."""

    g: VolFunction
    c: VolFunction
    varsigma: float = 2.0
    innovation: InnovationSpec = InnovationSpec()

    def __post_init__(self):
        if not self.varsigma >= 1:
            raise ValueError("signed_vol needs varsigma >= 1")
        _check_moments(self.innovation)


@dataclass(frozen=True)
class RCAR:
    """Generalized random-coefficient autoregression
    X_{t+1} = A_{t+1} X_t + B_{t+1} with (A_t, B_t) = (A0 + eps_t A1,
    b0 + eps_t b1) jointly i.i.d.; the observable is the first coordinate."""

    a0: tuple
    a1: tuple
    b0: tuple
    b1: tuple
    innovation: InnovationSpec = InnovationSpec()

    def __post_init__(self):
        a0 = np.atleast_2d(np.asarray(self.a0, dtype=float))
        a1 = np.atleast_2d(np.asarray(self.a1, dtype=float))
        b0 = np.atleast_1d(np.asarray(self.b0, dtype=float))
        b1 = np.atleast_1d(np.asarray(self.b1, dtype=float))
        d = a0.shape[0]
        if a0.shape != (d, d) or a1.shape != (d, d):
            raise ValueError("rc_ar coefficient matrices must be square, equal size")
        if b0.shape != (d,) or b1.shape != (d,):
            raise ValueError("rc_ar intercept vectors must match the matrix size")
        object.__setattr__(self, "a0", tuple(map(tuple, a0)))
        object.__setattr__(self, "a1", tuple(map(tuple, a1)))
        object.__setattr__(self, "b0", tuple(b0))
        object.__setattr__(self, "b1", tuple(b1))
        _check_moments(self.innovation)

    @property
    def dim(self):
        return len(self.b0)


ModelSpec = Union[IID, AR, ARMA, EXPAR, ARARCH, Bilinear, AsymGARCH, SignedVol, RCAR]


# ---------------------------------------------------------------------------
# series containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TimeSeries:
    """A finite realization X_1..X_n with provenance."""

    values: np.ndarray
    spec: Optional[ModelSpec] = None
    seed: Optional[int] = None
    burn_in: int = 0

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 1 or vals.size < 2:
            raise ValueError("a series needs at least two values")
        if not np.all(np.isfinite(vals)):
            raise ValueError("series values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.size


@dataclass
class CoupledPair:
    """Trajectories (X_k, X'_k) sharing innovations eps_1..eps_n but built
    from independent pre-sample pasts; ``state0_*`` are the states at the
    moment the shared innovations start (the coupled "X_0")."""

    primary: TimeSeries
    coupled: TimeSeries
    state0_primary: np.ndarray
    state0_coupled: np.ndarray
    trace: Optional[np.ndarray] = None  # filled by gmc.estimate_decay


@dataclass(frozen=True)
class ContractionReport:
    """Per-lag coefficients a_j of the sufficient contraction condition
    sum_j a_j < 1 (a_j = ||H_j(eps)||_alpha^min(1, alpha))."""

    alpha: float
    a: tuple
    method: str  # "analytic" | "monte-carlo"
    stderr: Optional[tuple] = None

    @property
    def total(self) -> float:
        return float(sum(self.a))

    @property
    def satisfied(self) -> bool:
        return self.total < 1.0


# ---------------------------------------------------------------------------
# stepping engine
# ---------------------------------------------------------------------------


def _engine(spec):
    """Return (state_dim, step) with step(state, eps) -> (state', x).

    ``state`` has shape (batch, state_dim); ``eps`` shape (batch,).  The
    transition is deterministic given (state, eps).
    """
    if isinstance(spec, IID):
        def step(state, eps):
            return state, eps
        return 0, step

    if isinstance(spec, AR):
        phi = np.asarray(spec.coeffs, dtype=float)
        p = phi.size

        def step(state, eps):
            x = state @ phi + eps if p else eps.copy()
            if p:
                state = np.concatenate([x[:, None], state[:, : p - 1]], axis=1)
            return state, x
        return p, step

    if isinstance(spec, ARMA):
        theta = np.asarray(spec.ar, dtype=float)
        phi = np.asarray(spec.ma, dtype=float)
        p, q = theta.size, phi.size
        if isinstance(spec.eta, InnovationSpec):
            inner_dim, inner_step = 0, None
        else:
            inner_dim, inner_step = _engine(spec.eta)
        dim = p + q + inner_dim

        def step(state, eps):
            xl = state[:, :p]
            el = state[:, p : p + q]
            if inner_step is None:
                eta = eps
                inner = state[:, p + q :]
            else:
                inner, eta = inner_step(state[:, p + q :], eps)
            x = eta
            if p:
                x = x + xl @ theta
            if q:
                x = x - el @ phi
            parts = []
            if p:
                parts.append(np.concatenate([x[:, None], xl[:, : p - 1]], axis=1))
            if q:
                parts.append(np.concatenate([eta[:, None], el[:, : q - 1]], axis=1))
            parts.append(inner)
            return np.concatenate(parts, axis=1), x
        return dim, step

    if isinstance(spec, EXPAR):
        a1, b1, a = spec.alpha1, spec.beta1, spec.a

        def step(state, eps):
            s = state[:, 0]
            x = (a1 + b1 * np.exp(-a * s * s)) * s + eps
            return x[:, None], x
        return 1, step

    if isinstance(spec, ARARCH):
        t1, t2, t3, t4, t5 = spec.theta

        def step(state, eps):
            s1, s2 = state[:, 0], state[:, 1]
            vol = np.sqrt(t3 * t3 + t4 * t4 * s1 * s1 + t5 * t5 * s2 * s2)
            x = t1 * s1 + t2 * s2 + eps * vol
            return np.stack([x, s1], axis=1), x
        return 2, step

    if isinstance(spec, Bilinear):
        a = np.asarray(spec.a, dtype=float)
        c = np.asarray(spec.c, dtype=float)
        b = np.asarray(spec.b, dtype=float).reshape(spec.P + 1, spec.Q)
        p, q, P, Q = spec.p, spec.q, spec.P, spec.Q
        lx = max(p, P + Q, 1)
        le = max(q, Q, 1)

        def step(state, eps):
            xl = state[:, :lx]  # X_{t-1}, X_{t-2}, ...
            el = state[:, lx:]  # eps_{t-1}, eps_{t-2}, ...
            x = c[0] * eps
            if p:
                x = x + xl[:, :p] @ a
            for j in range(1, q + 1):
                x = x + c[j] * el[:, j - 1]
            for j in range(P + 1):
                for k in range(1, Q + 1):
                    x = x + b[j, k - 1] * xl[:, j + k - 1] * el[:, k - 1]
            state = np.concatenate(
                [x[:, None], xl[:, : lx - 1], eps[:, None], el[:, : le - 1]], axis=1
            )
            return state, x
        return lx + le, step

    if isinstance(spec, AsymGARCH):
        alpha = np.asarray(spec.alpha, dtype=float)
        beta = np.asarray(spec.beta, dtype=float)
        a0, gamma, vs = spec.alpha0, spec.gamma, spec.varsigma
        r, s = spec.r, spec.s

        def step(state, eps):
            xl = state[:, :r]
            vl = state[:, r:]  # h^{vs/2} lags
            v = a0 + (np.abs(xl) - gamma * xl) ** vs @ alpha + vl @ beta
            x = eps * v ** (1.0 / vs)
            state = np.concatenate(
                [x[:, None], xl[:, : r - 1], v[:, None], vl[:, : s - 1]], axis=1
            )
            return state, x
        return r + s, step

    if isinstance(spec, SignedVol):
        g, c, vs = spec.g, spec.c, spec.varsigma

        def step(state, eps):
            s_prev, e_prev = state[:, 0], state[:, 1]
            s = g(e_prev) + c(e_prev) * s_prev
            x = eps * np.abs(s) ** (1.0 / vs)
            return np.stack([s, eps], axis=1), x
        return 2, step

    if isinstance(spec, RCAR):
        a0 = np.asarray(spec.a0, dtype=float)
        a1 = np.asarray(spec.a1, dtype=float)
        b0 = np.asarray(spec.b0, dtype=float)
        b1 = np.asarray(spec.b1, dtype=float)

        def step(state, eps):
            drift = state @ a0.T + b0
            shock = state @ a1.T + b1
            state = drift + eps[:, None] * shock
            return state, state[:, 0].copy()
        return spec.dim, step

    raise TypeError(f"not a model spec: {spec!r}")


def _run_engine(spec, eps, check_from=0):
    """Run the stepping engine over an innovations matrix (batch, total),
    returning the output matrix.  Raises ExplosionError (1-based step index)
    on non-finite or |x| > 1e12 values."""
    eps = np.atleast_2d(np.asarray(eps, dtype=float))
    batch, total = eps.shape
    dim, step = _engine(spec)
    state = np.zeros((batch, dim))
    out = np.empty((batch, total))
    for t in range(total):
        state, x = step(state, eps[:, t])
        if not np.all(np.isfinite(x)) or np.any(np.abs(x) > EXPLOSION_LIMIT):
            bad = x[~np.isfinite(x) | (np.abs(x) > EXPLOSION_LIMIT)]
            raise ExplosionError(t + 1, bad.flat[0])
        out[:, t] = x
    return out


def ar_spectral_radius(ar_coeffs) -> float:
    """Spectral radius of the companion matrix of 1 - sum theta_j z^j."""
    theta = np.asarray(ar_coeffs, dtype=float)
    p = theta.size
    if p == 0:
        return 0.0
    comp = np.zeros((p, p))
    comp[0, :] = theta
    if p > 1:
        comp[1:, :-1] = np.eye(p - 1)
    return float(np.max(np.abs(np.linalg.eigvals(comp))))


def _lfilter_checked(b, a, eps, axis=-1):
    out = signal.lfilter(b, a, eps, axis=axis)
    bad = ~np.isfinite(out) | (np.abs(out) > EXPLOSION_LIMIT)
    if bad.any():
        t = int(np.argmax(bad.any(axis=0))) if out.ndim == 2 else int(np.argmax(bad))
        raise ExplosionError(t + 1)
    return out


def _linear_path(spec):
    """(b, a) filter coefficients for families simulated via lfilter."""
    if isinstance(spec, AR):
        return [1.0], np.r_[1.0, -np.asarray(spec.coeffs)]
    if isinstance(spec, ARMA) and isinstance(spec.eta, InnovationSpec):
        return np.r_[1.0, -np.asarray(spec.ma)], np.r_[1.0, -np.asarray(spec.ar)]
    return None


# ---------------------------------------------------------------------------
# simulation operations
# ---------------------------------------------------------------------------


def simulate(spec: ModelSpec, n: int, burn_in: int = DEFAULT_BURN_IN,
             seed: int = 0) -> TimeSeries:
    """Simulate n values of the model after discarding ``burn_in`` warm-up
    steps from the zero initial state.

    Identical (spec, n, burn_in, seed) give bit-identical output.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    if burn_in < 0:
        raise ValueError("need burn_in >= 0")
    rng = stream(seed)
    total = burn_in + n
    eps = spec.innovation.draw(rng, total)
    x = _simulate_from(spec, eps[None, :])[0]
    return TimeSeries(x[burn_in:], spec=spec, seed=seed, burn_in=burn_in)


def simulate_many(spec: ModelSpec, n: int, burn_in: int, seed: int,
                  reps: int) -> np.ndarray:
    """Simulate ``reps`` independent replications, row r driven by the
    stream (seed, r).  Returns a (reps, n) array (burn-in discarded)."""
    if n < 2 or reps < 1:
        raise ValueError("need n >= 2 and reps >= 1")
    total = burn_in + n
    eps = np.empty((reps, total))
    for r in range(reps):
        eps[r] = spec.innovation.draw(stream(seed, r), total)
    return _simulate_from(spec, eps)[:, burn_in:]


def _simulate_from(spec, eps):
    if isinstance(spec, IID):
        bad = ~np.isfinite(eps)
        if bad.any():
            raise ExplosionError(int(np.argmax(bad.any(axis=0))) + 1)
        return eps
    lin = _linear_path(spec)
    if lin is not None:
        return _lfilter_checked(lin[0], lin[1], eps, axis=-1)
    if isinstance(spec, ARMA):
        eta = _run_engine(spec.eta, eps)
        return _lfilter_checked(
            np.r_[1.0, -np.asarray(spec.ma)], np.r_[1.0, -np.asarray(spec.ar)],
            eta, axis=-1,
        )
    return _run_engine(spec, eps)


def simulate_coupled(spec: ModelSpec, n: int, seed: int = 0,
                     burn_in: int = DEFAULT_BURN_IN) -> CoupledPair:
    """Simulate a coupled pair: both trajectories share innovations
    eps_1..eps_n but reach their time-0 states through independent
    pre-sample innovation streams (an i.i.d. copy of the past)."""
    if n < 2:
        raise ValueError("need n >= 2")
    shared = spec.innovation.draw(stream(seed, 0), n)
    pre_p = spec.innovation.draw(stream(seed, 1), burn_in)
    pre_c = spec.innovation.draw(stream(seed, 2), burn_in)

    dim, step = _engine(spec)

    def warm(pre):
        state = np.zeros((1, dim))
        for t in range(burn_in):
            state, x = step(state, pre[t : t + 1])
            if not np.all(np.isfinite(x)) or np.any(np.abs(x) > EXPLOSION_LIMIT):
                raise ExplosionError(t + 1)
        return state

    sp, sc = warm(pre_p), warm(pre_c)
    state = np.concatenate([sp, sc], axis=0)
    out = np.empty((2, n))
    for t in range(n):
        state, x = step(state, np.repeat(shared[t : t + 1], 2))
        if not np.all(np.isfinite(x)) or np.any(np.abs(x) > EXPLOSION_LIMIT):
            raise ExplosionError(burn_in + t + 1)
        out[:, t] = x
    primary = TimeSeries(out[0], spec=spec, seed=seed, burn_in=burn_in)
    coupled = TimeSeries(out[1], spec=spec, seed=seed, burn_in=burn_in)
    return CoupledPair(primary, coupled, sp[0].copy(), sc[0].copy())


def arma_filter(innovations: TimeSeries, ar, ma, burn_in: int = 0) -> TimeSeries:
    """Apply the ARMA recursion theta(B) X = phi(B) eta to an arbitrary
    innovation series (zero initial state, optional burn-in discard).

    Feeding e.g. a GARCH realization through this gives ARMA-GARCH.
    """
    rad = ar_spectral_radius(ar)
    if rad >= 1:
        raise StabilityError(rad)
    if burn_in < 0 or burn_in > innovations.n - 2:
        raise ValueError("burn_in must leave at least two output values")
    b = np.r_[1.0, -np.asarray(ma, dtype=float)]
    a = np.r_[1.0, -np.asarray(ar, dtype=float)]
    out = _lfilter_checked(b, a, innovations.values[None, :])[0]
    return TimeSeries(out[burn_in:], spec=None, seed=innovations.seed,
                      burn_in=burn_in)


# ---------------------------------------------------------------------------
# closed-form second-order structure
# ---------------------------------------------------------------------------


def _arma_acov(theta, ma_minus, v, max_lag):
    """Exact autocovariance of theta(B) X = phi(B) eta, white eta with
    variance v.  ``ma_minus`` are the phi_k of X_t = ... + eta_t - sum
    phi_k eta_{t-k}."""
    theta = np.asarray(theta, dtype=float)
    p = theta.size
    ma_full = np.r_[1.0, -np.asarray(ma_minus, dtype=float)]
    q = ma_full.size - 1

    # MA(inf) weights psi_0..psi_q (only these enter the equations)
    psi = np.zeros(q + 1)
    psi[0] = 1.0
    for k in range(1, q + 1):
        psi[k] = ma_full[k] + sum(
            theta[i - 1] * psi[k - i] for i in range(1, min(k, p) + 1)
        )

    def rhs(k):
        return v * sum(ma_full[j] * psi[j - k] for j in range(k, q + 1))

    if p == 0:
        r = np.zeros(max_lag + 1)
        for k in range(min(max_lag, q) + 1):
            r[k] = rhs(k)
        return r

    # solve for r(0..p) using symmetry r(-k) = r(k)
    m = np.zeros((p + 1, p + 1))
    b = np.zeros(p + 1)
    for k in range(p + 1):
        m[k, k] += 1.0
        for i in range(1, p + 1):
            m[k, abs(k - i)] -= theta[i - 1]
        b[k] = rhs(k)
    r_head = np.linalg.solve(m, b)

    r = np.zeros(max(max_lag, p) + 1)
    r[: p + 1] = r_head
    for k in range(p + 1, max_lag + 1):
        r[k] = sum(theta[i - 1] * r[k - i] for i in range(1, p + 1)) + (
            rhs(k) if k <= q else 0.0
        )
    return r[: max_lag + 1]


def _flat_variance(spec) -> float:
    """r(0) for the martingale-difference families with tractable moments."""
    v = spec.innovation.var
    if isinstance(spec, AsymGARCH):
        if spec.varsigma != 2:
            raise UnsupportedFamilyError(
                "closed-form variance for asym_garch exists only for varsigma = 2"
            )
        load = (1 + spec.gamma ** 2) * v * sum(spec.alpha) + sum(spec.beta)
        if load >= 1:
            raise ValueError(
                f"asym_garch second moment does not exist (load {load:.4g} >= 1)"
            )
        return v * spec.alpha0 / (1 - load)
    if isinstance(spec, SignedVol):
        if spec.varsigma != 2:
            raise UnsupportedFamilyError(
                "closed-form variance for signed_vol exists only for varsigma = 2"
            )
        if not (spec.g.nonnegative and spec.c.nonnegative):
            raise UnsupportedFamilyError(
                "signed_vol closed form needs structurally nonnegative g and c"
            )
        ec = spec.c.mean_under(spec.innovation)
        if ec >= 1:
            raise ValueError(f"signed_vol second moment does not exist (Ec {ec:.4g} >= 1)")
        return v * spec.g.mean_under(spec.innovation) / (1 - ec)
    raise UnsupportedFamilyError(f"no closed-form variance for {type(spec).__name__}")


def _ararch_reduced(spec):
    """(r0, th1) when ar_arch degenerates to AR(1)-ARCH(1) (th2 = th5 = 0)."""
    t1, t2, t3, t4, t5 = spec.theta
    if t2 != 0 or t5 != 0:
        raise UnsupportedFamilyError(
            "ar_arch covariances are closed-form only when theta2 = theta5 = 0"
        )
    v = spec.innovation.var
    denom = 1 - t1 * t1 - v * t4 * t4
    if denom <= 0:
        raise ValueError("ar_arch second moment does not exist")
    return v * t3 * t3 / denom, t1


def theoretical_acov(spec: ModelSpec, max_lag: int) -> np.ndarray:
    """Exact autocovariance r(0..max_lag) for families with tractable
    second-order structure; UnsupportedFamilyError otherwise."""
    if max_lag < 0:
        raise ValueError("need max_lag >= 0")
    r = np.zeros(max_lag + 1)
    if isinstance(spec, IID):
        r[0] = spec.innovation.var
        return r
    if isinstance(spec, AR):
        return _arma_acov(spec.coeffs, [], spec.innovation.var, max_lag)
    if isinstance(spec, ARMA):
        if not isinstance(spec.eta, InnovationSpec):
            raise UnsupportedFamilyError(
                "closed-form ARMA covariances need white-noise innovations"
            )
        return _arma_acov(spec.ar, spec.ma, spec.eta.var, max_lag)
    if isinstance(spec, ARARCH):
        r0, t1 = _ararch_reduced(spec)
        return r0 * t1 ** np.arange(max_lag + 1)
    if isinstance(spec, (AsymGARCH, SignedVol)):
        r[0] = _flat_variance(spec)
        return r
    raise UnsupportedFamilyError(
        f"no closed-form covariances for {type(spec).__name__}; "
        "use the Monte Carlo spectrum oracle"
    )


def theoretical_spectrum(spec: ModelSpec, lam) -> Union[float, np.ndarray]:
    """Exact spectral density f(lambda) = (1/2pi) sum_k r(k) e^{ik lambda}
    for the families supported by :func:`theoretical_acov`."""
    lam = np.asarray(lam, dtype=float)
    two_pi = 2 * math.pi

    def _const(c):
        out = np.full(lam.shape, c)
        return float(out) if out.ndim == 0 else out

    if isinstance(spec, IID):
        return _const(spec.innovation.var / two_pi)
    if isinstance(spec, (AR, ARMA)):
        if isinstance(spec, AR):
            theta, ma, v = spec.coeffs, (), spec.innovation.var
        else:
            if not isinstance(spec.eta, InnovationSpec):
                raise UnsupportedFamilyError(
                    "closed-form ARMA spectrum needs white-noise innovations"
                )
            theta, ma, v = spec.ar, spec.ma, spec.eta.var
        z = np.exp(-1j * lam)
        num = np.ones_like(z) - sum(
            m * z ** (k + 1) for k, m in enumerate(ma)
        )
        den = np.ones_like(z) - sum(
            t * z ** (k + 1) for k, t in enumerate(theta)
        )
        out = v / two_pi * np.abs(num) ** 2 / np.abs(den) ** 2
        return float(out) if out.ndim == 0 else out
    if isinstance(spec, ARARCH):
        r0, t1 = _ararch_reduced(spec)
        z = np.exp(-1j * lam)
        out = r0 / two_pi * (1 - t1 * t1) / np.abs(1 - t1 * z) ** 2
        return float(out) if out.ndim == 0 else out
    if isinstance(spec, (AsymGARCH, SignedVol)):
        return _const(_flat_variance(spec) / two_pi)
    raise UnsupportedFamilyError(
        f"no closed-form spectrum for {type(spec).__name__}; "
        "use the Monte Carlo spectrum oracle"
    )


# ---------------------------------------------------------------------------
# contraction coefficients (sufficient condition sum_j a_j < 1)
# ---------------------------------------------------------------------------

_MC_NORM_DRAWS = 200_000
_MC_BATCHES = 25


def _norm_alpha(samples, alpha):
    """||X||_alpha^min(1, alpha) from draws of |X|."""
    m = np.mean(samples ** alpha)
    if alpha <= 1:
        return m
    return m ** (1.0 / alpha)


def _mc_norm(draw_abs, alpha, seed):
    """Monte Carlo ||H(eps)||_alpha^alpha' with a batch-means stderr."""
    rng = stream(seed)
    vals = np.empty(_MC_BATCHES)
    per = _MC_NORM_DRAWS // _MC_BATCHES
    for b in range(_MC_BATCHES):
        vals[b] = _norm_alpha(draw_abs(rng, per), alpha)
    return float(np.mean(vals)), float(np.std(vals, ddof=1) / math.sqrt(_MC_BATCHES))


def _abs_affine_moment(innov, const, slope, alpha):
    """E (const + slope |eps|)^alpha for integer alpha, else nan."""
    if alpha == int(alpha) and alpha >= 1:
        k = int(alpha)
        return sum(
            math.comb(k, i) * const ** (k - i) * slope ** i * innov.abs_moment(i)
            for i in range(k + 1)
        )
    return math.nan


def contraction_coefficients(spec: ModelSpec, alpha: float,
                             seed: int = 0) -> ContractionReport:
    """Per-lag Lipschitz coefficients a_j for the stationarity/GMC
    sufficient condition sum_j a_j < 1.

    a_j = ||H_j(eps)||_alpha^min(1, alpha) where |R(y; eps) - R(y'; eps)|
    <= sum_j H_j(eps) |x_j - x'_j|.  For constant H_j (ar, expar) the
    coefficient H_j itself is reported for every alpha: the verdict is
    unchanged and matches the familiar |alpha1| + |beta1| < 1 form.
    Random H_j norms are closed-form for integer alpha and Monte Carlo
    (with a batch-means stderr) otherwise.
    """
    if alpha <= 0:
        raise ValueError("need alpha > 0")

    if isinstance(spec, IID):
        return ContractionReport(alpha, (), "analytic")
    if isinstance(spec, AR):
        return ContractionReport(alpha, tuple(abs(c) for c in spec.coeffs), "analytic")
    if isinstance(spec, EXPAR):
        return ContractionReport(alpha, (abs(spec.alpha1) + abs(spec.beta1),), "analytic")

    if isinstance(spec, ARARCH):
        t1, t2, _, t4, t5 = spec.theta
        pairs = [(abs(t1), abs(t4)), (abs(t2), abs(t5))]
        a, se = [], []
        analytic = True
        for const, slope in pairs:
            m = _abs_affine_moment(spec.innovation, const, slope, alpha)
            if math.isnan(m):
                analytic = False
                break
            a.append(m if alpha <= 1 else m ** (1.0 / alpha))
        if analytic:
            return ContractionReport(alpha, tuple(a), "analytic")
        a, se = [], []
        for j, (const, slope) in enumerate(pairs):
            est, err = _mc_norm(
                lambda rng, k, c=const, s=slope: c + s * np.abs(spec.innovation.draw(rng, k)),
                alpha, child_seed(seed, j),
            )
            a.append(est)
            se.append(err)
        return ContractionReport(alpha, tuple(a), "monte-carlo", tuple(se))

    if isinstance(spec, SignedVol):
        # contraction of the volatility recursion s_t: H_1(eps) = |c(eps)|
        est, err = _mc_norm(
            lambda rng, k: np.abs(spec.c(spec.innovation.draw(rng, k))),
            alpha, seed,
        )
        return ContractionReport(alpha, (est,), "monte-carlo", (err,))

    if isinstance(spec, Bilinear):
        mats = bilinear_markov(spec)  # raises unless first-order
        a1, b1 = mats["A"][0, 0], mats["B"][0, 0]
        est, err = _mc_norm(
            lambda rng, k: np.abs(a1 + b1 * spec.innovation.draw(rng, k)),
            alpha, seed,
        )
        return ContractionReport(alpha, (est,), "monte-carlo", (err,))

    if isinstance(spec, RCAR):
        if alpha not in (1.0, 2.0):
            raise UnsupportedFamilyError(
                "rc_ar contraction implemented for the induced 1- and 2-norms only"
            )
        a0 = np.asarray(spec.a0)
        a1 = np.asarray(spec.a1)

        def draw_abs(rng, k):
            eps = spec.innovation.draw(rng, k)
            mats = a0[None, :, :] + eps[:, None, None] * a1[None, :, :]
            if alpha == 1.0:
                return np.abs(mats).sum(axis=1).max(axis=1)
            return np.linalg.norm(mats, ord=2, axis=(1, 2))

        est, err = _mc_norm(draw_abs, alpha, seed)
        return ContractionReport(alpha, (est,), "monte-carlo", (err,))

    if isinstance(spec, ARMA):
        raise UnsupportedFamilyError(
            "ARMA inherits contraction from its innovations when the AR "
            "polynomial is stable; check ar_spectral_radius instead"
        )
    raise UnsupportedFamilyError(
        "asym_garch contraction is a matrix moment condition; "
        "use gmc.garch_moment_matrix"
    )


def bilinear_markov(spec: Bilinear) -> dict:
    """Markovian state-space form X_t = H Z_{t-1} + eps_t,
    Z_t = (A + B eps_t) Z_{t-1} + c eps_t + d eps_t^2.

    Implemented for the first-order subdiagonal case
    X_t = a1 X_{t-1} + eps_t + b X_{t-1} eps_{t-1} (p <= 1, q = 0, P = 0,
    Q = 1, c0 = 1), where Z_t = (a1 + b eps_t) X_t gives
    A = [a1], B = [b], c = [a1], d = [b], H = [1].
    """
    ok = (
        spec.p <= 1
        and spec.q == 0
        and spec.P == 0
        and spec.Q == 1
        and spec.c[0] == 1.0
    )
    if not ok:
        raise UnsupportedFamilyError(
            "markov form implemented for the first-order subdiagonal model "
            "(p <= 1, q = 0, P = 0, Q = 1, c0 = 1)"
        )
    a1 = spec.a[0] if spec.p else 0.0
    b = spec.b[0][0]
    one = np.array([[1.0]])
    return {
        "H": one.copy(),
        "A": np.array([[a1]]),
        "B": np.array([[b]]),
        "c": np.array([a1]),
        "d": np.array([b]),
    }
