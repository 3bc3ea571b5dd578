import hashlib
import json
import math
from pathlib import Path

import numpy as np
import pytest

import nlspectral as nl
from nlspectral.cli import main, read_series_csv, spec_from_dict, spec_to_dict

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def sha(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def run(*argv):
    return main([str(a) for a in argv])


def test_simulate_writes_series_and_manifest(tmp_path):
    out = tmp_path / "run"
    rc = run("simulate", "--model", "expar", "--alpha1", 0.5, "--beta1", 0.3,
             "--a", 1, "--n", 4096, "--seed", 7, "--out", out)
    assert rc == 0
    rows = (out / "series.csv").read_text().strip().splitlines()
    assert rows[0] == "t,x"
    assert len(rows) == 4097
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "simulate"
    assert manifest["seed"] == 7
    assert manifest["config"]["model"]["family"] == "expar"
    assert "sha256" in manifest["outputs"]["series_csv"]


def test_series_csv_round_trips_exactly(tmp_path):
    out = tmp_path / "run"
    run("simulate", "--model", "ar", "--phi", "0.5", "--n", 256, "--seed", 3,
        "--out", out)
    back = read_series_csv(out / "series.csv")
    direct = nl.simulate(nl.AR((0.5,), nl.InnovationSpec()), 256, 1000, seed=3)
    assert np.array_equal(back.values, direct.values)


def test_simulate_require_gmc_rejects(tmp_path):
    rc = run("simulate", "--model", "expar", "--alpha1", 0.5, "--beta1", 0.6,
             "--n", 128, "--require-gmc", "--out", tmp_path)
    assert rc == 2


def test_simulate_usage_error_n(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        run("simulate", "--model", "iid", "--n", 1, "--out", tmp_path)
    assert exc.value.code == 2


def test_spectrum_and_identity_check(tmp_path):
    series_dir = tmp_path / "s"
    run("simulate", "--model", "iid", "--n", 512, "--seed", 1, "--out", series_dir)
    out = tmp_path / "spec"
    rc = run("spectrum", "--input", series_dir / "series.csv", "--window",
             "parzen", "--Bn", 16, "--check-identity", "--periodogram",
             "--out", out)
    assert rc == 0
    head = (out / "spectrum.csv").read_text().splitlines()
    assert head[0] == "lambda,f_n"
    assert len(head) == 258
    assert (out / "periodogram.csv").read_text().splitlines()[0] == "omega,I"


def test_spectrum_missing_file(tmp_path):
    rc = run("spectrum", "--input", tmp_path / "nope.csv", "--out", tmp_path)
    assert rc == 1


def test_bootstrap_outputs(tmp_path):
    series_dir = tmp_path / "s"
    run("simulate", "--model", "ar", "--phi", "0.5", "--n", 2048, "--seed", 5,
        "--out", series_dir)
    out = tmp_path / "b"
    rc = run("bootstrap", "--input", series_dir / "series.csv",
             "--variant", "exponential", "--n-boot", 100, "--seed", 9,
             "--Bn", 16, "--Bn-pilot", 6, "--out", out)
    assert rc == 0
    rows = (out / "bootstrap.csv").read_text().strip().splitlines()
    assert rows[0] == "replicate,g_star"
    assert len(rows) == 101
    summary = json.loads((out / "summary.json").read_text())
    assert summary["variant"] == "exponential"
    assert "variance" in summary and "q50" in summary["quantiles"]
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["variant"] == "exponential"


def test_bootstrap_pilot_ordering_error(tmp_path):
    series_dir = tmp_path / "s"
    run("simulate", "--model", "iid", "--n", 512, "--seed", 1, "--out", series_dir)
    rc = run("bootstrap", "--input", series_dir / "series.csv",
             "--Bn", 4, "--Bn-pilot", 8, "--out", tmp_path)
    assert rc == 2


def test_gmc_decay_and_alpha_guard(tmp_path):
    out = tmp_path / "g"
    rc = run("gmc", "decay", "--model", "ar", "--phi", "0.5", "--reps", 100,
             "--seed", 4, "--out", out)
    assert rc == 0
    fit = json.loads((out / "gmc_fit.json").read_text())
    assert 0.2 <= fit["rho_hat"] <= 0.3
    trace = (out / "gmc_trace.csv").read_text().splitlines()
    assert trace[0] == "lag,moment,stderr"

    with pytest.raises(SystemExit) as exc:
        run("gmc", "decay", "--model", "ar", "--phi", "0.5",
            "--alpha-order", -1, "--out", tmp_path)
    assert exc.value.code == 2


def test_gmc_garch_condition(tmp_path):
    out = tmp_path / "g2"
    rc = run("gmc", "garch-condition", "--model", "asym-garch",
             "--alpha0", 0.1, "--alpha", "0.1", "--beta", "0.8",
             "--m", 1, "--out", out)
    assert rc == 0
    payload = json.loads((out / "gmc_condition.json").read_text())
    assert payload["spectral_radius"] == pytest.approx(0.9, abs=1e-12)
    assert payload["delta"] == pytest.approx(math.sqrt(1.3), abs=1e-12)


def test_verify_unknown_kind(tmp_path):
    with pytest.raises(SystemExit) as exc:
        run("verify", "entropy", "--out", tmp_path)
    assert exc.value.code == 2


def test_verify_ecdf_from_config(tmp_path):
    out = tmp_path / "v"
    rc = run("verify", "ecdf-exp", "--config", CONFIGS / "expar_ecdf.toml",
             "--n", 2048, "--reps", 8, "--out", out)
    assert rc == 0
    report = json.loads((out / "report.json").read_text())
    assert report["pass"] is True
    assert "ks_median" in report["stats"]
    assert (out / "samples_ks.csv").exists()


def test_verify_failure_exits_3(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text(
        'kind = "ecdf-exp"\nn = 2048\nreps = 4\nseed = 1\n'
        '[thresholds]\nks_median = 1e-6\n[model]\nfamily = "iid"\n'
    )
    out = tmp_path / "v"
    rc = run("verify", "ecdf-exp", "--config", cfg, "--out", out)
    assert rc == 3
    report = json.loads((out / "report.json").read_text())
    assert report["pass"] is False


def test_verify_bias_exact_table(tmp_path):
    out = tmp_path / "v2"
    rc = run("verify", "bias-exact", "--config", CONFIGS / "ar_bias_exact.toml",
             "--out", out)
    assert rc == 0
    report = json.loads((out / "report.json").read_text())
    assert len(report["stats"]["ratios"]) == 3


def test_env_seed_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv("NLS_SEED", "123")
    out = tmp_path / "r"
    run("simulate", "--model", "iid", "--n", 64, "--out", out)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 123


@pytest.mark.parametrize("build", [
    lambda t: ("simulate", "--model", "expar", "--alpha1", 0.5, "--beta1", 0.3,
               "--n", 512, "--seed", 2, "--out", t / "a"),
    lambda t: ("gmc", "decay", "--model", "ar", "--phi", "0.6", "--reps", 60,
               "--seed", 3, "--out", t / "a"),
])
def test_rerun_reproduces_hashes(tmp_path, build):
    argv = build(tmp_path)
    assert run(*argv) == 0
    manifest_path = tmp_path / "a" / "manifest.json"
    assert run("rerun", manifest_path, "--out", tmp_path / "b") == 0
    first = json.loads(manifest_path.read_text())["outputs"]
    for name, entry in first.items():
        assert sha(tmp_path / "b" / entry["path"]) == entry["sha256"], name


def test_spec_dict_round_trip():
    specs = [
        nl.IID(nl.InnovationSpec("student_t", df=9.0)),
        nl.ARMA((0.5,), (0.2,), nl.AsymGARCH(0.1, (0.1,), (0.8,), 0.0, 2.0,
                                             nl.InnovationSpec())),
        nl.Bilinear(a=(0.4,), c=(1.0,), b=((0.25,),)),
        nl.SignedVol(nl.VolFunction("constant", (0.1,)),
                     nl.VolFunction("quadratic", (0.8, 0.0, 0.1))),
        nl.RCAR(((0.5,),), ((0.1,),), (0.0,), (1.0,)),
    ]
    for spec in specs:
        assert spec_from_dict(spec_to_dict(spec)) == spec


def test_spectrum_from_model_with_mean_subtraction(tmp_path):
    out = tmp_path / "m"
    rc = run("spectrum", "--model", "ar", "--phi", "0.6", "--n", 1024,
             "--seed", 4, "--Bn", 8, "--subtract-mean", "--periodogram",
             "--out", out)
    assert rc == 0
    pg = np.genfromtxt(out / "periodogram.csv", delimiter=",", names=True)
    assert pg["I"][0] < 1e-25  # mean-corrected series has I(0) = 0


def test_spectrum_model_without_n_is_config_error(tmp_path):
    rc = run("spectrum", "--model", "ar", "--phi", "0.6", "--out", tmp_path)
    assert rc == 2
