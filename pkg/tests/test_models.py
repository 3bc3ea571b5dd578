import math

import numpy as np
import pytest
from scipy import integrate, stats

import nlspectral as nl
from nlspectral.errors import (
    ExplosionError,
    StabilityError,
    UnsupportedFamilyError,
)

GAUSS = nl.InnovationSpec("gaussian", 1.0)

ALL_SPECS = {
    "iid": nl.IID(GAUSS),
    "ar": nl.AR((0.5,), GAUSS),
    "arma": nl.ARMA((0.5,), (0.2,), GAUSS),
    "arma_nested": nl.ARMA((0.5,), (0.2,),
                           nl.AsymGARCH(0.1, (0.1,), (0.8,), 0.0, 2.0, GAUSS)),
    "expar": nl.EXPAR(0.5, 0.3, 1.0, GAUSS),
    "ar_arch": nl.ARARCH((0.3, 0.2, 1.0, 0.3, 0.2), GAUSS),
    "bilinear": nl.Bilinear(a=(0.5,), c=(1.0,), b=((0.3,),), innovation=GAUSS),
    "asym_garch": nl.AsymGARCH(0.1, (0.1,), (0.8,), 0.0, 2.0, GAUSS),
    "signed_vol": nl.SignedVol(nl.VolFunction("constant", (0.1,)),
                               nl.VolFunction("quadratic", (0.8, 0.0, 0.1)),
                               2.0, GAUSS),
    "rc_ar": nl.RCAR(((0.5,),), ((0.1,),), (0.0,), (1.0,), GAUSS),
}


# ---------------------------------------------------------------------------
# innovations
# ---------------------------------------------------------------------------


def test_innovation_validation():
    with pytest.raises(ValueError):
        nl.InnovationSpec("cauchy")
    with pytest.raises(ValueError):
        nl.InnovationSpec("gaussian", variance=0.0)
    with pytest.raises(ValueError):
        nl.InnovationSpec("student_t", df=2.0)
    with pytest.raises(ValueError):
        nl.InnovationSpec("uniform", variance=2.0)


def test_student_t_without_eighth_moment_is_flagged():
    with pytest.warns(UserWarning, match="eighth moment"):
        nl.IID(nl.InnovationSpec("student_t", df=5.0))
    # df > 8 passes silently
    nl.IID(nl.InnovationSpec("student_t", df=9.0))


@pytest.mark.parametrize("innov", [
    nl.InnovationSpec("gaussian", 1.0),
    nl.InnovationSpec("gaussian", 4.0),
    nl.InnovationSpec("rademacher"),
    nl.InnovationSpec("uniform"),
    nl.InnovationSpec("student_t", df=9.0),
])
def test_innovation_moments_match_draws(innov):
    rng = nl.stream(11)
    x = innov.draw(rng, 400_000)
    assert abs(x.mean()) < 0.01 * math.sqrt(innov.var) + 1e-3
    assert x.var() == pytest.approx(innov.var, rel=0.05)
    assert np.mean(np.abs(x)) == pytest.approx(innov.abs_moment(1), rel=0.02)


@pytest.mark.parametrize("q", [1.0, 2.0, 3.0, 2.5])
def test_abs_moment_against_quadrature(q):
    # gaussian, variance 2
    innov = nl.InnovationSpec("gaussian", 2.0)
    val, _ = integrate.quad(
        lambda x: abs(x) ** q * stats.norm.pdf(x, scale=math.sqrt(2.0)),
        -np.inf, np.inf)
    assert innov.abs_moment(q) == pytest.approx(val, rel=1e-9)
    # unit-variance student t, df = 9
    tin = nl.InnovationSpec("student_t", df=9.0)
    scale = math.sqrt(7.0 / 9.0)
    val, _ = integrate.quad(
        lambda x: abs(x) ** q * stats.t.pdf(x, 9.0, scale=scale) , -np.inf, np.inf)
    assert tin.abs_moment(q) == pytest.approx(val, rel=1e-8)


def test_abs_moment_known_values():
    assert GAUSS.abs_moment(1) == pytest.approx(math.sqrt(2 / math.pi), rel=1e-12)
    assert nl.InnovationSpec("uniform").abs_moment(1) == pytest.approx(
        math.sqrt(3) / 2, rel=1e-12)
    assert nl.InnovationSpec("rademacher").abs_moment(7.3) == 1.0
    assert nl.InnovationSpec("student_t", df=9.0).abs_moment(9.0) == math.inf


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(ALL_SPECS))
def test_simulate_deterministic(name):
    spec = ALL_SPECS[name]
    a = nl.simulate(spec, 500, 100, seed=42)
    b = nl.simulate(spec, 500, 100, seed=42)
    assert a.values.tobytes() == b.values.tobytes()
    c = nl.simulate(spec, 500, 100, seed=43)
    assert a.values.tobytes() != c.values.tobytes()


def test_simulate_validates_arguments():
    with pytest.raises(ValueError):
        nl.simulate(ALL_SPECS["iid"], 1)
    with pytest.raises(ValueError):
        nl.simulate(ALL_SPECS["iid"], 10, burn_in=-1)


def test_degenerate_expar_is_white_noise():
    spec = nl.EXPAR(0.0, 0.0, 1.0, GAUSS)
    ts = nl.simulate(spec, 10_000, 100, seed=3)
    r1 = nl.sample_acov(ts, 1)
    assert abs(r1) < 0.05


def test_ar_stationary_variance():
    ts = nl.simulate(nl.AR((0.5,), GAUSS), 100_000, 1000, seed=1)
    assert ts.values.var() == pytest.approx(4.0 / 3.0, rel=0.05)


def test_garch_stationary_variance():
    spec = nl.AsymGARCH(0.1, (0.1,), (0.8,), 0.0, 2.0, GAUSS)
    ts = nl.simulate(spec, 100_000, 1000, seed=2)
    assert ts.values.var() == pytest.approx(1.0, rel=0.10)


def test_explosive_ar_raises_with_step_index():
    with pytest.raises(ExplosionError) as err:
        nl.simulate(nl.AR((1.5,), GAUSS), 100, burn_in=1000, seed=0)
    assert err.value.step >= 1


def test_simulate_many_rows_match_streams():
    spec = ALL_SPECS["expar"]
    mat = nl.simulate_many(spec, 200, 50, seed=9, reps=4)
    assert mat.shape == (4, 200)
    # replications differ
    assert not np.allclose(mat[0], mat[1])
    # and are reproducible
    again = nl.simulate_many(spec, 200, 50, seed=9, reps=4)
    assert np.array_equal(mat, again)


# ---------------------------------------------------------------------------
# coupled trajectories
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(ALL_SPECS))
def test_coupled_rerun_is_identical(name):
    spec = ALL_SPECS[name]
    a = nl.simulate_coupled(spec, 50, seed=5, burn_in=100)
    b = nl.simulate_coupled(spec, 50, seed=5, burn_in=100)
    assert np.array_equal(a.primary.values, b.primary.values)
    assert np.array_equal(a.coupled.values, b.coupled.values)
    assert np.array_equal(a.state0_primary, b.state0_primary)


def test_coupled_iid_is_exactly_equal():
    pair = nl.simulate_coupled(ALL_SPECS["iid"], 100, seed=1, burn_in=50)
    assert np.array_equal(pair.primary.values, pair.coupled.values)


def test_coupled_ar_gap_is_geometric():
    pair = nl.simulate_coupled(nl.AR((0.5,), GAUSS), 30, seed=8, burn_in=200)
    gap0 = abs(pair.state0_primary[0] - pair.state0_coupled[0])
    gaps = np.abs(pair.primary.values - pair.coupled.values)
    expected = gap0 * 0.5 ** np.arange(1, 31)
    assert np.allclose(gaps, expected, rtol=1e-9)


def test_coupled_expar_pathwise_bound():
    spec = nl.EXPAR(0.6, 0.3, 1.0, GAUSS)  # |a1| + |b1| = 0.9
    pair = nl.simulate_coupled(spec, 40, seed=12, burn_in=300)
    gap0 = abs(pair.state0_primary[0] - pair.state0_coupled[0])
    gaps = np.abs(pair.primary.values - pair.coupled.values)
    bound = gap0 * 0.9 ** np.arange(1, 41)
    assert np.all(gaps <= bound * (1 + 1e-12))


# ---------------------------------------------------------------------------
# arma_filter
# ---------------------------------------------------------------------------


def test_arma_filter_identity():
    ts = nl.simulate(ALL_SPECS["iid"], 64, 0, seed=2)
    out = nl.arma_filter(ts, [], [])
    assert np.array_equal(out.values, ts.values)


def test_arma_filter_impulse_response():
    impulse = nl.TimeSeries(np.r_[1.0, np.zeros(19)])
    out = nl.arma_filter(impulse, [0.5], [])
    assert np.allclose(out.values, 0.5 ** np.arange(20), rtol=1e-12)


def test_arma_filter_unstable_reports_radius():
    ts = nl.simulate(ALL_SPECS["iid"], 16, 0, seed=2)
    with pytest.raises(StabilityError) as err:
        nl.arma_filter(ts, [1.5], [])
    assert err.value.spectral_radius == pytest.approx(1.5, rel=1e-12)


def test_arma_spec_requires_stability():
    with pytest.raises(StabilityError):
        nl.ARMA((1.01,), (), GAUSS)


def test_arma_filter_matches_simulate():
    # simulate(ARMA) is lfilter over the same innovations
    eps = nl.simulate(ALL_SPECS["iid"], 300, 0, seed=6)
    via_filter = nl.arma_filter(eps, [0.5], [0.2])
    naive = np.zeros(300)
    e = eps.values
    for t in range(300):
        naive[t] = e[t]
        if t >= 1:
            naive[t] += 0.5 * naive[t - 1] - 0.2 * e[t - 1]
    assert np.allclose(via_filter.values, naive, atol=1e-12)


# ---------------------------------------------------------------------------
# closed-form covariances and spectra
# ---------------------------------------------------------------------------


def test_acov_iid():
    assert np.allclose(nl.theoretical_acov(ALL_SPECS["iid"], 3), [1, 0, 0, 0])


def test_acov_ar():
    r = nl.theoretical_acov(nl.AR((0.5,), GAUSS), 2)
    assert np.allclose(r, [4 / 3, 2 / 3, 1 / 3], rtol=1e-12)


def test_acov_garch_martingale():
    spec = nl.AsymGARCH(0.1, (0.1,), (0.8,), 0.0, 2.0, GAUSS)
    r = nl.theoretical_acov(spec, 2)
    assert np.allclose(r, [1.0, 0.0, 0.0], atol=1e-14)


def test_acov_arma_matches_spectrum_quadrature():
    spec = nl.ARMA((0.5, -0.2), (0.3,), nl.InnovationSpec("gaussian", 1.7))
    r = nl.theoretical_acov(spec, 4)
    for k in range(5):
        val, _ = integrate.quad(
            lambda lam, k=k: 2.0 * nl.theoretical_spectrum(spec, lam) * math.cos(k * lam),
            0.0, math.pi, limit=200)
        assert r[k] == pytest.approx(val, rel=1e-9, abs=1e-12)


def test_acov_consistent_with_simulation():
    # lag 0..5 of a long ARMA run within 3 Bartlett standard errors
    spec = nl.ARMA((0.5,), (0.2,), GAUSS)
    n = 100_000
    ts = nl.simulate(spec, n, 1000, seed=21)
    r_true = nl.theoretical_acov(spec, 200)
    full = np.concatenate([r_true[::-1], r_true[1:]])
    for k in range(6):
        rhat = nl.sample_acov(ts, k)
        # Bartlett: var rhat(k) ~ (1/n) sum_h [r(h)^2 + r(h+k) r(h-k)]
        h = np.arange(-150, 151)
        rh = full[h + 200]
        var = np.sum(rh ** 2 + full[h + k + 200] * full[h - k + 200]) / n
        assert abs(rhat - r_true[k]) < 3 * math.sqrt(var)


@pytest.mark.parametrize("name", ["asym_garch", "signed_vol"])
def test_martingale_difference_sample_acov(name):
    spec = ALL_SPECS[name]
    ts = nl.simulate(spec, 100_000, 1000, seed=31)
    x = ts.values
    for k in range(1, 6):
        prods = x[:-k] * x[k:]
        se = math.sqrt(np.sum(prods ** 2)) / x.size
        assert abs(nl.sample_acov(ts, k)) < 3 * se


def test_ararch_reduced_acov():
    spec = nl.ARARCH((0.3, 0.0, 1.0, 0.4, 0.0), GAUSS)
    r = nl.theoretical_acov(spec, 2)
    r0 = 1.0 / (1 - 0.09 - 0.16)
    assert np.allclose(r, [r0, 0.3 * r0, 0.09 * r0], rtol=1e-12)
    with pytest.raises(UnsupportedFamilyError):
        nl.theoretical_acov(ALL_SPECS["ar_arch"], 2)  # theta2, theta5 != 0


def test_spectrum_values():
    assert nl.theoretical_spectrum(ALL_SPECS["iid"], 1.234) == pytest.approx(
        1 / (2 * math.pi), rel=1e-12)
    assert nl.theoretical_spectrum(nl.AR((0.5,), GAUSS), 0.0) == pytest.approx(
        2 / math.pi, rel=1e-12)
    spec = nl.AsymGARCH(0.1, (0.1,), (0.8,), 0.0, 2.0, GAUSS)
    assert nl.theoretical_spectrum(spec, 2.5) == pytest.approx(
        1 / (2 * math.pi), rel=1e-12)


def test_spectrum_integrates_to_variance():
    spec = nl.ARMA((0.4,), (0.1,), nl.InnovationSpec("gaussian", 2.0))
    val, _ = integrate.quad(lambda lam: 2 * nl.theoretical_spectrum(spec, lam),
                            0, math.pi, limit=200)
    assert val == pytest.approx(nl.theoretical_acov(spec, 0)[0], rel=1e-9)


def test_unsupported_families_error():
    with pytest.raises(UnsupportedFamilyError):
        nl.theoretical_acov(ALL_SPECS["expar"], 2)
    with pytest.raises(UnsupportedFamilyError):
        nl.theoretical_spectrum(ALL_SPECS["bilinear"], 0.5)
    with pytest.raises(UnsupportedFamilyError):
        nl.theoretical_acov(ALL_SPECS["arma_nested"], 2)
    with pytest.raises(UnsupportedFamilyError):
        nl.theoretical_acov(nl.AsymGARCH(0.1, (0.1,), (0.3,), 0.0, 3.0, GAUSS), 1)


# ---------------------------------------------------------------------------
# contraction coefficients
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("alpha", [0.7, 1.0, 2.0, 4.0])
def test_expar_coefficient_any_order(alpha):
    rep = nl.contraction_coefficients(nl.EXPAR(0.5, 0.3, 1.0, GAUSS), alpha)
    assert rep.a == (0.8,)
    assert rep.satisfied and rep.method == "analytic"


def test_expar_verdict_invariant_under_innovation_scale():
    big = nl.InnovationSpec("gaussian", 100.0)
    a = nl.contraction_coefficients(nl.EXPAR(0.5, 0.3, 1.0, GAUSS), 2.0)
    b = nl.contraction_coefficients(nl.EXPAR(0.5, 0.3, 1.0, big), 2.0)
    assert a.a == b.a and a.satisfied == b.satisfied


def test_ararch_coefficients_alpha1():
    spec = nl.ARARCH((0.3, 0.2, 1.0, 0.3, 0.2), GAUSS)
    rep = nl.contraction_coefficients(spec, 1.0)
    e_abs = math.sqrt(2 / math.pi)
    assert rep.a[0] == pytest.approx(0.3 + 0.3 * e_abs, rel=1e-12)
    assert rep.a[1] == pytest.approx(0.2 + 0.2 * e_abs, rel=1e-12)
    assert rep.satisfied == (rep.total < 1)
    assert rep.method == "analytic"


def test_ararch_coefficients_scale_with_innovation():
    # E|eps| doubles when the std doubles, and the coefficients follow
    spec4 = nl.ARARCH((0.3, 0.2, 1.0, 0.3, 0.2), nl.InnovationSpec("gaussian", 4.0))
    rep = nl.contraction_coefficients(spec4, 1.0)
    e_abs = 2 * math.sqrt(2 / math.pi)
    assert rep.a[0] == pytest.approx(0.3 + 0.3 * e_abs, rel=1e-12)


def test_ararch_alpha2_analytic_vs_mc():
    spec = nl.ARARCH((0.3, 0.2, 1.0, 0.3, 0.2), GAUSS)
    rep = nl.contraction_coefficients(spec, 2.0)
    assert rep.method == "analytic"
    mc = nl.contraction_coefficients(spec, 2.5, seed=3)
    assert mc.method == "monte-carlo"
    # alpha = 2.5 sits between the alpha = 2 and alpha = 3 closed forms
    lo = nl.contraction_coefficients(spec, 2.0).a[0]
    hi = nl.contraction_coefficients(spec, 3.0).a[0]
    assert lo < mc.a[0] < hi


def test_ar_zero_coefficient():
    rep = nl.contraction_coefficients(nl.AR((0.0,), GAUSS), 2.0)
    assert rep.a == (0.0,) and rep.satisfied


def test_alpha_must_be_positive():
    with pytest.raises(ValueError):
        nl.contraction_coefficients(ALL_SPECS["expar"], 0.0)


def test_rcar_contraction_mc():
    spec = nl.RCAR(((0.5,),), ((0.0,),), (0.0,), (1.0,), GAUSS)
    rep = nl.contraction_coefficients(spec, 2.0, seed=1)
    assert rep.a[0] == pytest.approx(0.5, abs=1e-6)
    with pytest.raises(UnsupportedFamilyError):
        nl.contraction_coefficients(spec, 3.0)


def test_arma_and_garch_point_elsewhere():
    with pytest.raises(UnsupportedFamilyError):
        nl.contraction_coefficients(ALL_SPECS["arma"], 2.0)
    with pytest.raises(UnsupportedFamilyError):
        nl.contraction_coefficients(ALL_SPECS["asym_garch"], 2.0)


# ---------------------------------------------------------------------------
# bilinear state-space form
# ---------------------------------------------------------------------------


def test_bilinear_markov_matches_direct_recursion():
    spec = nl.Bilinear(a=(0.4,), c=(1.0,), b=((0.25,),), innovation=GAUSS)
    mats = nl.bilinear_markov(spec)
    rng = nl.stream(17)
    eps = GAUSS.draw(rng, 300)

    # direct recursion X_t = a X_{t-1} + eps_t + b X_{t-1} eps_{t-1}
    x = np.zeros(300)
    for t in range(300):
        prev_x = x[t - 1] if t else 0.0
        prev_e = eps[t - 1] if t else 0.0
        x[t] = 0.4 * prev_x + eps[t] + 0.25 * prev_x * prev_e

    # state-space evolution with the same innovations
    z = 0.0
    y = np.zeros(300)
    A, B = mats["A"][0, 0], mats["B"][0, 0]
    c, d = mats["c"][0], mats["d"][0]
    for t in range(300):
        y[t] = mats["H"][0, 0] * z + eps[t]
        z = (A + B * eps[t]) * z + c * eps[t] + d * eps[t] ** 2
    assert np.allclose(x, y, atol=1e-12)


def test_bilinear_markov_rejects_general_case():
    spec = nl.Bilinear(a=(0.4, 0.1), c=(1.0, 0.2), b=((0.25,),), innovation=GAUSS)
    with pytest.raises(UnsupportedFamilyError):
        nl.bilinear_markov(spec)


# ---------------------------------------------------------------------------
# spec validation
# ---------------------------------------------------------------------------


def test_spec_validation_errors():
    with pytest.raises(ValueError):
        nl.EXPAR(0.5, 0.3, 0.0, GAUSS)  # a must be positive
    with pytest.raises(ValueError):
        nl.ARARCH((0.1, 0.2, 0.3), GAUSS)  # needs five parameters
    with pytest.raises(ValueError):
        nl.AsymGARCH(0.0, (0.1,), (0.8,), 0.0, 2.0, GAUSS)  # alpha0 > 0
    with pytest.raises(ValueError):
        nl.AsymGARCH(0.1, (0.1,), (0.8,), 1.0, 2.0, GAUSS)  # |gamma| < 1
    with pytest.raises(ValueError):
        nl.AsymGARCH(0.1, (0.1,), (0.8,), 0.0, 0.5, GAUSS)  # varsigma >= 1
    with pytest.raises(ValueError):
        nl.VolFunction("constant", (0.1, 0.2))
    with pytest.raises(ValueError):
        nl.RCAR(((0.5, 0.1),), ((0.1,),), (0.0,), (1.0,), GAUSS)


def test_timeseries_validation():
    with pytest.raises(ValueError):
        nl.TimeSeries(np.array([1.0]))
    with pytest.raises(ValueError):
        nl.TimeSeries(np.array([1.0, np.nan]))
    ts = nl.TimeSeries(np.array([1.0, 2.0]))
    assert ts.n == 2
    with pytest.raises(ValueError):
        ts.values[0] = 3.0  # frozen buffer
