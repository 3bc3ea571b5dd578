"""Command-line front end.

Subcommands: simulate | spectrum | bootstrap | gmc | verify | rerun.
Every command writes its outputs plus a ``manifest.json`` echoing the
fully resolved configuration; ``nlspectral rerun manifest.json --out DIR``
re-executes the run and reproduces hash-identical output files.

Configuration files are TOML: run parameters at the top level, the model
in a ``[model]`` table (see README for the grammar).  Command-line flags
override file values.  The seed resolves as flag > file > NLS_SEED env
var > 0.  Exit codes: 0 success/pass, 1 runtime failure, 2 usage or
configuration error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import datetime
import hashlib
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from . import __version__, bootstrap as fdb, experiments, gmc, models, spectral
from .errors import ConfigError, NlspectralError

FMT = "%.17g"


# ---------------------------------------------------------------------------
# model (de)serialization
# ---------------------------------------------------------------------------


def innovation_from_dict(d) -> models.InnovationSpec:
    d = dict(d or {})
    kind = d.pop("kind", "gaussian").replace("-", "_")
    spec = models.InnovationSpec(
        kind=kind,
        variance=float(d.pop("variance", 1.0)),
        df=float(d.pop("df", 0.0)),
    )
    if d:
        raise ConfigError(f"unknown innovation keys: {sorted(d)}")
    return spec


def innovation_to_dict(innov: models.InnovationSpec) -> dict:
    out = {"kind": innov.kind}
    if innov.kind == "gaussian":
        out["variance"] = innov.variance
    if innov.kind == "student_t":
        out["df"] = innov.df
    return out


def _volfn(d) -> models.VolFunction:
    return models.VolFunction(kind=d["kind"], coeffs=tuple(d["coeffs"]))


def spec_from_dict(d) -> models.ModelSpec:
    """Build a model spec from a plain dict (the [model] table)."""
    if not d or "family" not in d:
        raise ConfigError("model needs a 'family' key (or --model flag)")
    d = dict(d)
    family = str(d.pop("family")).replace("-", "_")
    innov = innovation_from_dict(d.pop("innovation", None))
    try:
        if family == "iid":
            return models.IID(innov)
        if family == "ar":
            return models.AR(tuple(d.pop("phi")), innov)
        if family == "arma":
            eta = d.pop("eta", None)
            return models.ARMA(
                tuple(d.pop("ar", ())), tuple(d.pop("ma", ())),
                spec_from_dict(eta) if eta else innov,
            )
        if family == "expar":
            return models.EXPAR(float(d.pop("alpha1")), float(d.pop("beta1")),
                                float(d.pop("a", 1.0)), innov)
        if family == "ar_arch":
            return models.ARARCH(tuple(d.pop("theta")), innov)
        if family == "bilinear":
            return models.Bilinear(
                a=tuple(d.pop("a", ())), c=tuple(d.pop("c", (1.0,))),
                b=tuple(tuple(row) for row in d.pop("b", ((),))),
                innovation=innov,
            )
        if family == "asym_garch":
            return models.AsymGARCH(
                alpha0=float(d.pop("alpha0")), alpha=tuple(d.pop("alpha")),
                beta=tuple(d.pop("beta")), gamma=float(d.pop("gamma", 0.0)),
                varsigma=float(d.pop("varsigma", 2.0)), innovation=innov,
            )
        if family == "signed_vol":
            return models.SignedVol(
                g=_volfn(d.pop("g")), c=_volfn(d.pop("c")),
                varsigma=float(d.pop("varsigma", 2.0)), innovation=innov,
            )
        if family == "rc_ar":
            return models.RCAR(
                a0=tuple(map(tuple, d.pop("a0"))), a1=tuple(map(tuple, d.pop("a1"))),
                b0=tuple(d.pop("b0")), b1=tuple(d.pop("b1")), innovation=innov,
            )
    except KeyError as exc:
        raise ConfigError(f"model family {family!r} is missing key {exc}") from exc
    raise ConfigError(f"unknown model family {family!r}; "
                      f"choose from {', '.join(sorted(_FAMILY_NAMES))}")


_FAMILY_NAMES = {
    models.IID: "iid", models.AR: "ar", models.ARMA: "arma",
    models.EXPAR: "expar", models.ARARCH: "ar_arch",
    models.Bilinear: "bilinear", models.AsymGARCH: "asym_garch",
    models.SignedVol: "signed_vol", models.RCAR: "rc_ar",
}


def spec_to_dict(spec: models.ModelSpec) -> dict:
    out = {"family": _FAMILY_NAMES[type(spec)],
           "innovation": innovation_to_dict(spec.innovation)}
    if isinstance(spec, models.AR):
        out["phi"] = list(spec.coeffs)
    elif isinstance(spec, models.ARMA):
        out["ar"] = list(spec.ar)
        out["ma"] = list(spec.ma)
        if not isinstance(spec.eta, models.InnovationSpec):
            out["eta"] = spec_to_dict(spec.eta)
            del out["innovation"]
    elif isinstance(spec, models.EXPAR):
        out.update(alpha1=spec.alpha1, beta1=spec.beta1, a=spec.a)
    elif isinstance(spec, models.ARARCH):
        out["theta"] = list(spec.theta)
    elif isinstance(spec, models.Bilinear):
        out.update(a=list(spec.a), c=list(spec.c), b=[list(r) for r in spec.b])
    elif isinstance(spec, models.AsymGARCH):
        out.update(alpha0=spec.alpha0, alpha=list(spec.alpha),
                   beta=list(spec.beta), gamma=spec.gamma,
                   varsigma=spec.varsigma)
    elif isinstance(spec, models.SignedVol):
        out.update(g={"kind": spec.g.kind, "coeffs": list(spec.g.coeffs)},
                   c={"kind": spec.c.kind, "coeffs": list(spec.c.coeffs)},
                   varsigma=spec.varsigma)
    elif isinstance(spec, models.RCAR):
        out.update(a0=[list(r) for r in spec.a0], a1=[list(r) for r in spec.a1],
                   b0=list(spec.b0), b1=list(spec.b1))
    return out


# ---------------------------------------------------------------------------
# files
# ---------------------------------------------------------------------------


def write_csv(path: Path, header, columns):
    columns = [np.asarray(c) for c in columns]
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(
                str(int(v)) if isinstance(v, (int, np.integer)) else FMT % v
                for v in row
            ) + "\n")


def read_series_csv(path) -> models.TimeSeries:
    try:
        data = np.genfromtxt(path, delimiter=",", names=True)
    except OSError as exc:
        raise NlspectralError(f"cannot read series file {path}: {exc}") from exc
    if data.dtype.names is None or "x" not in data.dtype.names:
        raise NlspectralError(f"series file {path} needs a header with an 'x' column")
    return models.TimeSeries(np.asarray(data["x"], dtype=float))


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _utcnow() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def write_manifest(out_dir: Path, command: str, config: dict, outputs,
                   started: str) -> Path:
    manifest = {
        "tool": "nlspectral",
        "version": __version__,
        "command": command,
        "seed": config.get("seed"),
        "config": config,
        "started_utc": started,
        "finished_utc": _utcnow(),
        "outputs": {
            name: {"path": p.name, "sha256": _sha256(p)} for name, p in outputs.items()
        },
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


# ---------------------------------------------------------------------------
# command executors (resolved config dict -> output files)
# ---------------------------------------------------------------------------


def run_simulate(cfg: dict, out_dir: Path) -> dict:
    spec = spec_from_dict(cfg["model"])
    if cfg.get("require_gmc"):
        _require_gmc(spec)
    series = models.simulate(spec, cfg["n"], cfg.get("burn_in", 1000), cfg["seed"])
    path = out_dir / "series.csv"
    write_csv(path, ["t", "x"], [np.arange(1, series.n + 1), series.values])
    return {"series_csv": path}


def _require_gmc(spec):
    if isinstance(spec, models.AsymGARCH):
        try:
            rep = gmc.garch_moment_matrix(spec, 1, mode="analytic")
        except NlspectralError:
            rep = gmc.garch_moment_matrix(spec, 1, mode="monte-carlo", seed=0)
        if not rep.satisfied_rho:
            raise ConfigError(
                "model violates the moment condition: spectral radius "
                f"{rep.spectral_radius:.4g} >= 1 for the volatility companion matrix"
            )
        return
    report = models.contraction_coefficients(spec, alpha=1.0)
    if not report.satisfied:
        detail = ""
        if isinstance(spec, models.EXPAR):
            detail = (f" (|alpha1| + |beta1| = {report.total:.4g} must be < 1 "
                      "for geometric contraction)")
        raise ConfigError(
            f"model violates the contraction condition: sum of per-lag "
            f"coefficients {report.total:.4g} >= 1{detail}"
        )


def _load_input_series(cfg) -> models.TimeSeries:
    if cfg.get("input"):
        series = read_series_csv(cfg["input"])
    else:
        if not cfg.get("model"):
            raise ConfigError("need either --input FILE or a model")
        if not cfg.get("n") or cfg["n"] < 2:
            raise ConfigError("simulating the input needs --n >= 2")
        spec = spec_from_dict(cfg["model"])
        series = models.simulate(spec, cfg["n"], cfg.get("burn_in", 1000),
                                 cfg["seed"])
    if cfg.get("subtract_mean"):
        series = models.TimeSeries(series.values - series.values.mean())
    return series


def run_spectrum(cfg: dict, out_dir: Path) -> dict:
    series = _load_input_series(cfg)
    window = spectral.window_profile(cfg.get("window", "parzen"))
    B_n = cfg.get("B_n") or fdb.default_bandwidths(series.n)[0]
    grid = spectral.default_grid(cfg.get("grid", 257))
    est = spectral.lag_window_estimate(series, window, B_n, grid)

    if cfg.get("check_identity"):
        pg = spectral.periodogram(series)
        other = spectral.estimate_from_periodogram(pg, window, B_n, grid)
        scale = float(np.max(np.abs(est.values))) or 1.0
        gap = float(np.max(np.abs(other - est.values))) / scale
        if gap > spectral.IDENTITY_RTOL:
            raise VerificationFailure(
                f"estimator identity violated: relative gap {gap:.3e} > 1e-9"
            )

    outputs = {}
    spath = out_dir / "spectrum.csv"
    write_csv(spath, ["lambda", "f_n"], [est.lambdas, est.values])
    outputs["spectrum_csv"] = spath
    if cfg.get("periodogram"):
        pg = spectral.periodogram(series)
        ppath = out_dir / "periodogram.csv"
        write_csv(ppath, ["omega", "I"], [pg.frequencies, pg.ordinates])
        outputs["periodogram_csv"] = ppath
    return outputs


def run_bootstrap(cfg: dict, out_dir: Path) -> dict:
    series = _load_input_series(cfg)
    window = spectral.window_profile(cfg.get("window", "parzen"))
    B_def, Bp_def = fdb.default_bandwidths(series.n)
    config = fdb.BootstrapConfig(
        window=window,
        B_n=cfg.get("B_n") or B_def,
        B_pilot=cfg.get("B_pilot") or Bp_def,
        variant=cfg.get("variant", "residual"),
        n_boot=cfg.get("n_boot", 400),
        seed=cfg["seed"],
    )
    lam = cfg.get("lam", math.pi / 2)
    dist = fdb.bootstrap_distribution(series, config, lam)

    bpath = out_dir / "bootstrap.csv"
    write_csv(bpath, ["replicate", "g_star"],
              [np.arange(dist.samples.size), dist.samples])
    g = dist.samples
    quantiles = {f"q{int(100 * q):02d}": float(np.quantile(g, q))
                 for q in (0.05, 0.25, 0.5, 0.75, 0.95)}
    summary = {
        "lambda": lam,
        "n": series.n,
        "B_n": config.B_n,
        "B_pilot": config.B_pilot,
        "variant": config.variant,
        "n_boot": config.n_boot,
        "pilot_value": dist.pilot_value,
        "mean": float(g.mean()),
        "variance": float(g.var(ddof=1)),
        "quantiles": quantiles,
        "normalized": {  # g* / pilot, the studentized form
            "mean": float(g.mean() / dist.pilot_value),
            "variance": float(g.var(ddof=1) / dist.pilot_value ** 2),
        },
        "residual_diagnostics": dist.diagnostics,
    }
    if cfg.get("reference"):
        ref = np.genfromtxt(cfg["reference"], delimiter=",", names=True)
        name = ref.dtype.names[-1]
        summary["d2_vs_reference"] = float(
            fdb.mallows_d2(g, np.asarray(ref[name], dtype=float))
        )
    jpath = out_dir / "summary.json"
    jpath.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return {"bootstrap_csv": bpath, "summary_json": jpath}


def run_gmc(cfg: dict, out_dir: Path) -> dict:
    spec = spec_from_dict(cfg["model"])
    mode = cfg.get("mode", "decay")
    if mode == "decay":
        alpha = cfg.get("alpha", 2.0)
        if alpha <= 0:
            raise ConfigError("need alpha > 0")
        lags = cfg.get("lags") or list(range(1, 21))
        report = gmc.estimate_decay(spec, alpha, lags, cfg.get("reps", 2000),
                                    cfg["seed"], cfg.get("burn_in", 1000))
        tpath = out_dir / "gmc_trace.csv"
        write_csv(tpath, ["lag", "moment", "stderr"],
                  [report.lags, report.trace, report.stderr])
        fit = {
            "alpha": alpha,
            "rho_hat": report.rho_hat,
            "C_hat": report.c_hat,
            "r2": None if math.isnan(report.r2) else report.r2,
            "floor_hit": report.floor_hit,
        }
        jpath = out_dir / "gmc_fit.json"
        jpath.write_text(json.dumps(fit, indent=2, sort_keys=True) + "\n")
        return {"trace_csv": tpath, "fit_json": jpath}
    if mode == "garch-condition":
        if not isinstance(spec, models.AsymGARCH):
            raise ConfigError("garch-condition needs an asym_garch model")
        m = cfg.get("m", 1)
        est_mode = cfg.get("estimation", "analytic")
        rep = gmc.garch_moment_matrix(spec, m, mode=est_mode,
                                      reps=cfg.get("reps", 100_000),
                                      seed=cfg["seed"])
        payload = {
            "m": rep.m,
            "delta": rep.delta,
            "spectral_radius": rep.spectral_radius,
            "satisfied_delta": rep.satisfied_delta,
            "satisfied_rho": rep.satisfied_rho,
            "verdicts_disagree": rep.verdicts_disagree,
            "method": rep.method,
            "stderr_delta": rep.stderr_delta,
            "stderr_radius": rep.stderr_radius,
        }
        jpath = out_dir / "gmc_condition.json"
        jpath.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        return {"condition_json": jpath}
    raise ConfigError(f"unknown gmc mode {mode!r} (decay | garch-condition)")


def run_verify(cfg: dict, out_dir: Path) -> dict:
    kind = cfg.get("kind")
    if kind not in experiments.KINDS:
        raise ConfigError(
            f"unknown experiment kind {kind!r}; valid kinds: "
            + ", ".join(experiments.KINDS)
        )
    spec = spec_from_dict(cfg["model"])
    config = experiments.ExperimentConfig(
        kind=kind,
        spec=spec,
        n=cfg.get("n"),
        n_list=tuple(cfg["n_list"]) if cfg.get("n_list") else None,
        reps=cfg.get("reps", 400),
        window_kind=cfg.get("window", "parzen"),
        B_n=cfg.get("B_n"),
        B_pilot=cfg.get("B_pilot"),
        lambdas=tuple(cfg["lambdas"]) if cfg.get("lambdas") else None,
        p=cfg.get("p", 2),
        jc_draws=cfg.get("jc_draws", 5),
        n_boot=cfg.get("n_boot", 400),
        variant=cfg.get("variant", "residual"),
        repetitions=cfg.get("repetitions", 10),
        B_list=tuple(cfg["B_list"]) if cfg.get("B_list") else None,
        Bp_list=tuple(cfg["Bp_list"]) if cfg.get("Bp_list") else None,
        bandwidth_exponent=cfg.get("bandwidth_exponent", 0.3),
        burn_in=cfg.get("burn_in", 1000),
        thresholds=dict(cfg.get("thresholds", {})),
        oracle=cfg.get("oracle"),
        seed=cfg["seed"],
    )
    report = experiments.run_experiment(config)
    outputs = {}
    rpath = out_dir / "report.json"
    rpath.write_text(json.dumps(report.to_jsonable(), indent=2, sort_keys=True) + "\n")
    outputs["report_json"] = rpath
    for name, arr in report.samples.items():
        arr = np.asarray(arr)
        path = out_dir / f"samples_{name.replace('_', '-')}.csv"
        if arr.ndim == 1:
            write_csv(path, ["index", name], [np.arange(arr.size), arr])
        else:
            cols = [arr[:, j] for j in range(arr.shape[1])]
            write_csv(path, [f"c{j}" for j in range(arr.shape[1])], cols)
        outputs[f"samples_{name}"] = path
    if not report.passed:
        raise VerificationFailure(
            f"experiment {kind} failed its thresholds "
            f"(see {rpath.name})", outputs=outputs)
    return outputs


class VerificationFailure(Exception):
    """Raised when a verification gate fails (exit code 3)."""

    def __init__(self, message, outputs=None):
        super().__init__(message)
        self.outputs = outputs or {}


_EXECUTORS = {
    "simulate": run_simulate,
    "spectrum": run_spectrum,
    "bootstrap": run_bootstrap,
    "gmc": run_gmc,
    "verify": run_verify,
}


def execute(command: str, cfg: dict, out_dir) -> int:
    """Run a command from a resolved config dict, writing a manifest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = _utcnow()
    try:
        outputs = _EXECUTORS[command](cfg, out_dir)
    except VerificationFailure as exc:
        write_manifest(out_dir, command, cfg, exc.outputs, started)
        print(f"FAIL: {exc}", file=sys.stderr)
        return 3
    write_manifest(out_dir, command, cfg, outputs, started)
    for path in outputs.values():
        print(path)
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _add_common(p):
    p.add_argument("--config", help="TOML configuration file")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=None,
                   help="worker cap (recorded; execution is vectorized)")


def _add_model_flags(p):
    g = p.add_argument_group("model")
    g.add_argument("--model", choices=["iid", "ar", "arma", "expar", "ar-arch",
                                       "asym-garch"],
                   help="model family (bilinear, signed_vol and rc_ar are "
                        "config-file only)")
    g.add_argument("--innovation", choices=["gaussian", "rademacher",
                                            "student-t", "uniform"])
    g.add_argument("--variance", type=float)
    g.add_argument("--df", type=float)
    g.add_argument("--phi", type=_floats, help="AR coefficients (comma list)")
    g.add_argument("--ar", type=_floats, help="ARMA autoregressive coefficients")
    g.add_argument("--ma", type=_floats, help="ARMA moving-average coefficients")
    g.add_argument("--alpha1", type=float)
    g.add_argument("--beta1", type=float)
    g.add_argument("--a", type=float)
    g.add_argument("--theta", type=_floats, help="ar-arch parameters (5 values)")
    g.add_argument("--alpha0", type=float)
    g.add_argument("--alpha", type=_floats)
    g.add_argument("--beta", type=_floats)
    g.add_argument("--gamma", type=float)
    g.add_argument("--varsigma", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlspectral",
        description="spectral analysis of nonlinear time series",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a model to CSV")
    _add_common(p)
    _add_model_flags(p)
    p.add_argument("--n", type=int)
    p.add_argument("--burn-in", type=int, default=None)
    p.add_argument("--require-gmc", action="store_true",
                   help="reject parameters that violate the contraction "
                        "or moment condition")

    p = sub.add_parser("spectrum", help="periodogram and lag-window estimate")
    _add_common(p)
    _add_model_flags(p)
    p.add_argument("--input", help="series CSV (header t,x)")
    p.add_argument("--n", type=int)
    p.add_argument("--burn-in", type=int, default=None)
    p.add_argument("--window", choices=["parzen", "tukey-hanning", "bartlett"])
    p.add_argument("--Bn", type=int, dest="B_n")
    p.add_argument("--grid", type=int, help="number of frequency grid points")
    p.add_argument("--subtract-mean", action="store_true")
    p.add_argument("--periodogram", action="store_true",
                   help="also emit periodogram.csv")
    p.add_argument("--check-identity", action="store_true",
                   help="fail (exit 3) if the covariance and periodogram "
                        "routes disagree beyond 1e-9")

    p = sub.add_parser("bootstrap", help="frequency-domain bootstrap")
    _add_common(p)
    _add_model_flags(p)
    p.add_argument("--input")
    p.add_argument("--n", type=int)
    p.add_argument("--burn-in", type=int, default=None)
    p.add_argument("--window", choices=["parzen", "tukey-hanning", "bartlett"])
    p.add_argument("--Bn", type=int, dest="B_n")
    p.add_argument("--Bn-pilot", type=int, dest="B_pilot")
    p.add_argument("--lambda", type=float, dest="lam")
    p.add_argument("--variant", choices=["residual", "exponential"])
    p.add_argument("--n-boot", type=int)
    p.add_argument("--subtract-mean", action="store_true")
    p.add_argument("--reference", help="CSV of reference samples for d2")

    p = sub.add_parser("gmc", help="contraction decay and moment conditions")
    _add_common(p)
    _add_model_flags(p)
    p.add_argument("mode", nargs="?", default="decay",
                   choices=["decay", "garch-condition"])
    p.add_argument("--alpha-order", type=float, dest="alpha_order",
                   help="moment order alpha (default 2)")
    p.add_argument("--lags", type=_ints, help="lag list (default 1..20)")
    p.add_argument("--reps", type=int)
    p.add_argument("--burn-in", type=int, default=None)
    p.add_argument("--m", type=int, help="Kronecker power for garch-condition")
    p.add_argument("--estimation", choices=["analytic", "monte-carlo"])

    p = sub.add_parser("verify", help="run a Monte Carlo verification experiment")
    _add_common(p)
    _add_model_flags(p)
    p.add_argument("kind", nargs="?", help="experiment kind")
    p.add_argument("--n", type=int)
    p.add_argument("--n-list", type=_ints)
    p.add_argument("--reps", type=int)
    p.add_argument("--window", choices=["parzen", "tukey-hanning", "bartlett"])
    p.add_argument("--Bn", type=int, dest="B_n")
    p.add_argument("--Bn-pilot", type=int, dest="B_pilot")
    p.add_argument("--lambda", type=float, dest="lam")
    p.add_argument("--variant", choices=["residual", "exponential"])
    p.add_argument("--n-boot", type=int)
    p.add_argument("--burn-in", type=int, default=None)

    p = sub.add_parser("rerun", help="re-execute a run from its manifest")
    p.add_argument("manifest")
    p.add_argument("--out", default=".", help="output directory")

    return parser


def _load_config_file(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise NlspectralError(f"cannot read config file {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path}: {exc}") from exc


def _model_from_flags(args) -> dict:
    if not getattr(args, "model", None):
        return {}
    family = args.model.replace("-", "_")
    model: dict = {"family": family}
    innov = {}
    if args.innovation:
        innov["kind"] = args.innovation.replace("-", "_")
    if args.variance is not None:
        innov["variance"] = args.variance
    if args.df is not None:
        innov["df"] = args.df
    if innov:
        model["innovation"] = innov
    flag_map = {
        "ar": [("phi", "phi")],
        "arma": [("ar", "ar"), ("ma", "ma")],
        "expar": [("alpha1", "alpha1"), ("beta1", "beta1"), ("a", "a")],
        "ar_arch": [("theta", "theta")],
        "asym_garch": [("alpha0", "alpha0"), ("alpha", "alpha"),
                       ("beta", "beta"), ("gamma", "gamma"),
                       ("varsigma", "varsigma")],
    }
    for key, attr in flag_map.get(family, []):
        val = getattr(args, attr, None)
        if val is not None:
            model[key] = val
    return model


def _resolve(args, extra_keys) -> dict:
    """Merge defaults < config file < flags into one plain config dict."""
    file_cfg = _load_config_file(args.config) if getattr(args, "config", None) else {}
    cfg = {k: v for k, v in file_cfg.items() if k != "model"}

    model = dict(file_cfg.get("model", {}))
    flag_model = _model_from_flags(args)
    if flag_model:
        if flag_model.get("family", model.get("family")) != model.get("family", flag_model.get("family")):
            model = flag_model  # switching family: flags win wholesale
        else:
            inn = {**model.get("innovation", {}), **flag_model.pop("innovation", {})}
            model.update(flag_model)
            if inn:
                model["innovation"] = inn
    if model:
        cfg["model"] = model

    for key in extra_keys:
        val = getattr(args, key, None)
        if val is not None and val is not False:  # store_true flags override only when set
            cfg[key] = val

    seed = getattr(args, "seed", None)
    if seed is None:
        seed = cfg.get("seed")
    if seed is None:
        seed = int(os.environ.get("NLS_SEED", "0"))
    cfg["seed"] = int(seed)
    if getattr(args, "threads", None) is not None:
        cfg["threads"] = args.threads
    return cfg


_EXTRA_KEYS = {
    "simulate": ["n", "burn_in", "require_gmc"],
    "spectrum": ["input", "n", "burn_in", "window", "B_n", "grid",
                 "subtract_mean", "periodogram", "check_identity"],
    "bootstrap": ["input", "n", "burn_in", "window", "B_n", "B_pilot",
                  "lam", "variant", "n_boot", "subtract_mean", "reference"],
    "gmc": ["mode", "lags", "reps", "burn_in", "m", "estimation"],
    "verify": ["kind", "n", "n_list", "reps", "window", "B_n", "B_pilot",
               "lam", "variant", "n_boot", "burn_in"],
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "rerun":
            manifest = json.loads(Path(args.manifest).read_text())
            return execute(manifest["command"], manifest["config"], args.out)
        cfg = _resolve(args, _EXTRA_KEYS[args.command])
        if args.command == "simulate":
            if not cfg.get("n") or cfg["n"] < 2:
                parser.error("simulate needs --n >= 2")
        if args.command == "gmc":
            if getattr(args, "alpha_order", None) is not None:
                cfg["alpha"] = args.alpha_order
            if cfg.get("alpha", 2.0) <= 0:
                parser.error("gmc needs a moment order alpha > 0")
        if args.command == "verify":
            if not cfg.get("kind"):
                parser.error("verify needs an experiment kind "
                             f"({', '.join(experiments.KINDS)})")
            if cfg["kind"] not in experiments.KINDS:
                parser.error(f"unknown experiment kind {cfg['kind']!r}; "
                             f"valid kinds: {', '.join(experiments.KINDS)}")
            if cfg.get("lam") is not None:
                cfg["lambdas"] = [cfg.pop("lam")]
        return execute(args.command, cfg, args.out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NlspectralError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
