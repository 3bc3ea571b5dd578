"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines; the whole suite is seeded and finishes in a few minutes on a laptop.
"""

import hashlib
import json
import math
from pathlib import Path

import numpy as np
import pytest

import nlspectral as nl
from nlspectral.cli import main as cli_main
from nlspectral.experiments import ExperimentConfig, run_experiment
from nlspectral.spectral import TWO_PI

GAUSS = nl.InnovationSpec("gaussian", 1.0)
IID = nl.IID(GAUSS)
AR05 = nl.AR((0.5,), GAUSS)
EXPAR = nl.EXPAR(0.5, 0.3, 1.0, GAUSS)
GARCH11 = nl.AsymGARCH(0.1, (0.1,), (0.8,), 0.0, 2.0, GAUSS)
PARZEN = nl.window_profile("parzen")

ORACLE = dict(n=2 ** 15, reps=64, B=128)


def report(num, name, passed, detail):
    line = f"[acceptance {num:02d}] {'PASS' if passed else 'FAIL'} {name}: {detail}"
    print(line)
    assert passed, line


def test_criterion_01_estimator_identity():
    mixed = [IID, AR05, nl.ARMA((0.5,), (0.2,), GAUSS), EXPAR, GARCH11]
    grid = nl.default_grid(257)
    worst = 0.0
    for i in range(50):
        spec = mixed[i % len(mixed)]
        ts = nl.simulate(spec, 512, 500, seed=9000 + i)
        direct = nl.lag_window_estimate(ts, PARZEN, 16, grid).values
        via_pg = nl.estimate_from_periodogram(nl.periodogram(ts), PARZEN, 16, grid)
        worst = max(worst, np.max(np.abs(via_pg - direct)) / np.max(np.abs(direct)))
    report(1, "estimator identity", worst < 1e-9,
           f"max relative gap {worst:.2e} over 50 series (tol 1e-9)")


def test_criterion_02_orthogonality_identity():
    n = 128
    m = (n - 1) // 2  # 63
    k = np.arange(1, n + 1)
    theta = TWO_PI * np.arange(1, m + 1) / n
    C = np.cos(np.outer(theta, k))
    worst = 0.0
    for h in range(0, 33):
        prods = C @ np.cos(np.outer(theta, k + h)).T
        expect = np.diag(n / 2 * np.cos(h * theta))
        worst = max(worst, float(np.max(np.abs(prods - expect))))
    report(2, "cosine orthogonality", worst < 1e-8,
           f"max abs error {worst:.2e} over j,j'<=63, h<=32 (tol 1e-8)")


def test_criterion_03_normalized_ordinates_exponential():
    cfg = ExperimentConfig(kind="ecdf-exp", spec=EXPAR, n=4096, reps=20,
                           seed=105, oracle=ORACLE)
    rep = run_experiment(cfg)
    med = rep.stats["ks_median"]
    report(3, "normalized ordinates vs exp(1)", rep.passed,
           f"median KS {med:.4f} over 20 replications (tol 0.05)")


def test_criterion_04_fourier_projections_normal():
    results = []
    for spec, oracle in ((IID, None), (EXPAR, ORACLE)):
        cfg = ExperimentConfig(kind="fourier-clt", spec=spec, n=1024,
                               reps=1000, p=2, jc_draws=5, seed=3,
                               oracle=oracle)
        rep = run_experiment(cfg)
        results.append(rep.stats["worst_ks"])
    ok = all(v < 0.06 for v in results)
    report(4, "Fourier projection normality", ok,
           f"worst KS iid {results[0]:.4f}, expar {results[1]:.4f} (tol 0.06)")


def test_criterion_05_density_clt():
    cfg = ExperimentConfig(kind="density-clt", spec=IID, n=2 ** 14, B_n=32,
                           reps=400, lambdas=(math.pi / 2, 0.0), seed=2)
    rep = run_experiment(cfg)
    per = rep.stats["per_lambda"]
    detail = ", ".join(
        f"lam={e['lambda']:.3f}: var ratio {e['variance_ratio']:.3f}, "
        f"KS {e['ks_fitted_normal']:.3f}" for e in per)
    report(5, "lag-window CLT", rep.passed, detail + " (tols 25%/30%, KS 0.07)")


def test_criterion_06_joint_independence():
    cfg = ExperimentConfig(kind="joint-indep", spec=IID, n=2 ** 14, B_n=32,
                           reps=400, lambdas=(math.pi / 4, 3 * math.pi / 4),
                           seed=2)
    rep = run_experiment(cfg)
    report(6, "cross-frequency decorrelation", rep.passed,
           f"|corr| {rep.stats['max_abs_corr']:.4f} (tol 0.15)")


def test_criterion_07_max_deviation_growth():
    cfg = ExperimentConfig(kind="max-dev", spec=IID,
                           n_list=(2 ** 12, 2 ** 14, 2 ** 16), reps=100,
                           bandwidth_exponent=0.3, seed=4)
    rep = run_experiment(cfg)
    vals = rep.stats["normalized_max_dev"]
    report(7, "max deviation ~ sqrt(log n)", rep.passed,
           f"normalized stats {[round(v, 4) for v in vals]}, "
           f"ratio {rep.stats['ratio_last_to_first']:.3f} (tol < 1.3)")


def test_criterion_08_exact_bias():
    cfg = ExperimentConfig(kind="bias-exact", spec=AR05, n=2 ** 15,
                           B_list=(8, 16, 32), lambdas=(math.pi / 3,), seed=0)
    rep = run_experiment(cfg)
    ratios = [round(v, 4) for v in rep.stats["ratios"]]
    report(8, "exact bias -> c2 f''", rep.passed,
           f"B^2(Ef_n - f)/(c2 f'') = {ratios} (final gap tol 0.15, decreasing)")


@pytest.mark.parametrize("variant", ["residual", "exponential"])
def test_criterion_09_bootstrap_consistency(variant):
    cfg = ExperimentConfig(kind="bootstrap-consistency", spec=AR05,
                           n_list=(512, 2048), B_list=(8, 16), Bp_list=(4, 6),
                           reps=400, n_boot=400, repetitions=10,
                           variant=variant, seed=6)
    rep = run_experiment(cfg)
    d2 = np.asarray(rep.stats["d2"])
    report(9, f"bootstrap consistency ({variant})", rep.passed,
           f"d2 {d2.mean(axis=0).round(3).tolist()} over n {rep.stats['n_list']}, "
           f"wins {rep.stats['wins']}/10 (need 8), "
           f"var ratio {rep.stats['variance_ratio_mean']:.3f} (tol 30%)")


def test_criterion_10_gmc_decay_rates():
    lags = list(range(1, 21))
    details = []
    ok = True
    for phi in (0.3, 0.5, 0.8):
        fit = nl.estimate_decay(nl.AR((phi,), GAUSS), 2.0, lags, reps=2000,
                                seed=7)
        ok = ok and abs(fit.rho_hat - phi * phi) <= 0.05
        details.append(f"phi={phi}: rho {fit.rho_hat:.4f} (true {phi * phi:.2f})")
    fit = nl.estimate_decay(EXPAR, 2.0, lags, reps=2000, seed=7)
    ok = ok and fit.rho_hat <= 0.64 * 1.1
    details.append(f"expar rho {fit.rho_hat:.4f} (bound 0.704)")
    report(10, "geometric decay rates", ok, "; ".join(details))


def test_criterion_11_garch_moment_arithmetic():
    ana = nl.garch_moment_matrix(GARCH11, 1, mode="analytic")
    exact = (abs(ana.spectral_radius - 0.9) < 1e-12
             and abs(ana.delta - math.sqrt(1.3)) < 1e-12)
    mc = nl.garch_moment_matrix(GARCH11, 1, mode="monte-carlo",
                                reps=100_000, seed=8)
    close = (abs(mc.spectral_radius - ana.spectral_radius) <= 3 * mc.stderr_radius
             and abs(mc.delta - ana.delta) <= 3 * mc.stderr_delta)
    report(11, "moment-matrix arithmetic", exact and close,
           f"analytic radius {ana.spectral_radius:.12f}, delta {ana.delta:.12f}; "
           f"MC radius {mc.spectral_radius:.4f}+-{mc.stderr_radius:.4f}")


def test_criterion_12_flat_spectrum_sanity():
    target = nl.theoretical_acov(GARCH11, 0)[0] / TWO_PI
    B = nl.default_bandwidths(2 ** 14)[0]
    grid = nl.default_grid()
    hits = 0
    worst = 0.0
    for seed in range(20):
        ts = nl.simulate(GARCH11, 2 ** 14, 1000, seed=1000 + seed)
        est = nl.lag_window_estimate(ts, PARZEN, B, grid)
        rel = float(np.max(np.abs(est.values - target)) / target)
        worst = max(worst, rel)
        hits += rel <= 0.15
    report(12, "flat GARCH spectrum", hits >= 18,
           f"{hits}/20 seeds within 15% of r(0)/2pi (worst dev {worst:.3f})")


def test_criterion_13_manifest_reproducibility(tmp_path):
    verify_cfg = tmp_path / "bias.toml"
    verify_cfg.write_text(
        'kind = "bias-exact"\nn = 8192\nB_list = [8, 16, 32]\nseed = 1\n'
        '[model]\nfamily = "ar"\nphi = [0.5]\n'
    )
    series = tmp_path / "sim" / "series.csv"
    commands = {
        "simulate": ["simulate", "--model", "expar", "--alpha1", "0.5",
                     "--beta1", "0.3", "--n", "1024", "--seed", "5",
                     "--out", str(tmp_path / "sim")],
        "spectrum": ["spectrum", "--input", str(series), "--Bn", "12",
                     "--periodogram", "--out", str(tmp_path / "spec")],
        "bootstrap": ["bootstrap", "--input", str(series), "--Bn", "12",
                      "--Bn-pilot", "4", "--n-boot", "50", "--seed", "6",
                      "--out", str(tmp_path / "boot")],
        "gmc": ["gmc", "decay", "--model", "ar", "--phi", "0.5", "--reps",
                "100", "--seed", "7", "--out", str(tmp_path / "gmc")],
        "verify": ["verify", "bias-exact", "--config", str(verify_cfg),
                   "--out", str(tmp_path / "ver")],
    }
    all_ok = True
    for name, argv in commands.items():
        assert cli_main(argv) == 0, name
        src = Path(argv[-1])
        manifest = json.loads((src / "manifest.json").read_text())
        redo = tmp_path / f"redo_{name}"
        assert cli_main(["rerun", str(src / "manifest.json"),
                         "--out", str(redo)]) == 0
        for entry in manifest["outputs"].values():
            got = hashlib.sha256((redo / entry["path"]).read_bytes()).hexdigest()
            all_ok = all_ok and got == entry["sha256"]
    report(13, "manifest reproducibility", all_ok,
           "all five commands re-ran hash-identical from their manifests")
