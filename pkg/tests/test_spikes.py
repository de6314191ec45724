import math

import numpy as np
import pytest

from rmt.errors import ParameterError, RegimeError, SingularityError
from rmt.linalg import RngStream, complex_gaussian, hermitian_eig, sample_covariance
from rmt.spikes import (
    FailureHypothesis,
    calibrate_fluctuations,
    condition_number_statistic,
    default_tw_table,
    downward_spike_limits,
    failure_hypotheses,
    glrt_statistic,
    glrt_test,
    localize_failure,
    spike_limits,
    spike_outlier_root,
    tracy_widom,
    tw_quantile,
    tw_standardize,
    tw_standardize_smallest,
)

TABLE = default_tw_table()


# --- first-order limits -----------------------------------------------------


def test_spike_limits_fig3_values():
    lim = spike_limits(2.0, 1.25)
    assert lim.detectable
    assert np.isclose(lim.rho, 4.875)
    assert np.isclose(lim.xi, 0.6875 / 1.625)
    weak = spike_limits(1.0, 1.25)
    assert not weak.detectable
    assert np.isclose(weak.rho, (1 + math.sqrt(1.25)) ** 2)
    assert weak.xi == 0.0


def test_spike_limits_boundary_continuity():
    c = 0.7
    sq = math.sqrt(c)
    at = spike_limits(sq, c)
    assert np.isclose(at.rho, (1 + sq) ** 2) and at.xi == 0.0
    just_above = spike_limits(sq * (1 + 1e-9), c)
    assert abs(just_above.rho - (1 + sq) ** 2) < 1e-6
    assert just_above.xi < 1e-6


def test_spike_limits_monotone_and_xi_range():
    c = 0.5
    omegas = np.linspace(math.sqrt(c) + 1e-3, 50, 200)
    rhos = [spike_limits(w, c).rho for w in omegas]
    xis = [spike_limits(w, c).xi for w in omegas]
    assert np.all(np.diff(rhos) > 0)
    assert all(0 < x < 1 for x in xis)
    assert spike_limits(1e4, c).xi > 0.999


def test_spike_limits_rejects_nonpositive():
    with pytest.raises(ParameterError):
        spike_limits(-1.0, 0.5)
    with pytest.raises(ParameterError):
        spike_limits(1.0, 0.0)


def test_downward_spike_limits():
    lim = downward_spike_limits(-0.9, 0.1)
    assert lim.detectable
    assert np.isclose(lim.rho, 1 - 0.9 + 0.1 * 0.1 / -0.9)
    assert 0 < lim.xi < 1
    assert np.isclose(downward_spike_limits(-1.0, 0.5).rho, 0.0)
    weak = downward_spike_limits(-0.2, 0.3)
    assert not weak.detectable and np.isclose(weak.rho, (1 - math.sqrt(0.3)) ** 2)
    with pytest.raises(RegimeError):
        downward_spike_limits(-0.5, 1.5)


# --- root-condition cross-validation -----------------------------------------


def test_outlier_root_examples():
    assert abs(spike_outlier_root(2.0, 1.25) - 4.875) < 1e-8
    assert abs(spike_outlier_root(10.0, 0.1) - 11.11) < 1e-8


def test_outlier_root_matches_rho_on_grid():
    for c in np.geomspace(0.05, 4.0, 8):
        for w in np.geomspace(math.sqrt(c) * 1.05, math.sqrt(c) * 30, 8):
            assert abs(spike_outlier_root(w, c) - spike_limits(w, c).rho) < 1e-8


def test_outlier_root_refuses_subcritical():
    with pytest.raises(RegimeError):
        spike_outlier_root(0.5, 0.5)
    with pytest.raises(RegimeError):
        spike_outlier_root(math.sqrt(0.5), 0.5)


# --- Tracy-Widom table ---------------------------------------------------------


def test_table_bounds():
    assert tracy_widom(TABLE, -10.0) < 1e-6
    assert tracy_widom(TABLE, 6.0) > 1 - 1e-6
    assert TABLE.s[0] <= -10 and TABLE.s[-1] >= 6


def test_table_mean_matches_painleve_oracle():
    # E[S] via integration by parts over the tabulated CDF
    s, cdf = TABLE.s, TABLE.cdf
    mean = s[-1] * cdf[-1] - s[0] * cdf[0] - np.trapezoid(cdf, s)
    assert abs(mean - (-1.7711)) < 2e-3


def test_table_median_negative():
    assert tw_quantile(TABLE, 0.5) < 0


def test_quantile_roundtrip():
    for s in np.linspace(-4.5, 3.5, 30):
        p = tracy_widom(TABLE, s)
        assert abs(tw_quantile(TABLE, p) - s) < 1e-6


def test_quantile_rejects_bad_p():
    for p in (0.0, 1.0, -0.5, 2.0):
        with pytest.raises(ParameterError):
            tw_quantile(TABLE, p)


def test_tw_standardize_values():
    c = 1.0 / 3.0
    edge = (1 + math.sqrt(c)) ** 2
    assert tw_standardize(edge, 100, c) == 0.0
    # center/scale frozen from an independent arbitrary-precision evaluation
    assert abs(edge - 2.4880338717125849) < 1e-12
    scale = (1 + math.sqrt(c)) ** (4.0 / 3.0) * math.sqrt(c)
    assert abs(scale - 1.0600920191521393) < 1e-12
    assert np.isclose(tw_standardize(edge + 1.0, 8, c), 4 / scale)


def test_tw_standardize_smallest_sign():
    c = 0.25
    edge = (1 - math.sqrt(c)) ** 2
    assert tw_standardize_smallest(edge, 100, c) == 0.0
    assert tw_standardize_smallest(edge - 0.1, 100, c) > 0
    with pytest.raises(ParameterError):
        tw_standardize_smallest(0.5, 100, 1.5)


# --- detectors -------------------------------------------------------------------


def test_glrt_statistic_flat_spectrum():
    eigs = np.full(64, 3.7)
    assert abs(glrt_statistic(eigs) - 1.0) < 1e-12
    decision = glrt_test(eigs, 64, 192, far=0.05)
    assert decision.standardized < -5
    assert not decision.signal


def test_glrt_scale_invariance():
    rng = RngStream(5).generator()
    eigs = np.sort(rng.uniform(0.1, 3.0, 32))
    a, b = glrt_statistic(eigs), glrt_statistic(1e7 * eigs)
    assert abs(a - b) <= 1e-12 * a


def test_glrt_null_calibration():
    # empirical false-alarm rate at nominal 0.05 within +-0.02 over 5000 trials
    n_dim, n_samples, far, trials = 64, 192, 0.05, 5000
    thr = tw_quantile(TABLE, 1 - far)
    c = n_dim / n_samples
    hits = 0
    for t in range(trials):
        y = complex_gaussian(n_dim, n_samples, RngStream(2024, t))
        eigs = np.linalg.eigvalsh(sample_covariance(y))
        hits += tw_standardize(glrt_statistic(eigs), n_dim, c) > thr
    rate = hits / trials
    assert 0.03 <= rate <= 0.07, f"empirical FAR {rate:.4f}"


def test_glrt_rejects_degenerate():
    with pytest.raises(SingularityError):
        glrt_statistic(np.zeros(4))
    with pytest.raises(ParameterError):
        glrt_test(np.ones(4), 4, 8, far=0.0)


def test_condition_number_basics():
    assert condition_number_statistic(np.ones(5)) == 1.0
    assert condition_number_statistic([1.0, 4.0]) == 4.0
    with pytest.raises(SingularityError):
        condition_number_statistic([0.0, 1.0])


# --- fluctuation calibration ------------------------------------------------------


def test_calibrate_guards():
    with pytest.raises(ParameterError):
        calibrate_fluctuations(3.0, 0.5, 32, trials=10, rng=RngStream(0))
    with pytest.raises(RegimeError):
        calibrate_fluctuations(0.3, 0.5, 32, trials=1000, rng=RngStream(0))


def test_calibrate_seed_stability_and_centering():
    omega, c, n_dim, trials = 50.0, 0.5, 60, 1000
    stats_a = calibrate_fluctuations(omega, c, n_dim, trials, RngStream(7))
    stats_b = calibrate_fluctuations(omega, c, n_dim, trials, RngStream(8))
    corr = []
    for st in (stats_a, stats_b):
        ev = np.linalg.eigvalsh(st.sigma)
        assert ev[0] > 0
        corr.append(st.sigma[0, 1] / math.sqrt(st.sigma[0, 0] * st.sigma[1, 1]))
    assert abs(corr[0] - corr[1]) < 0.05
    # standardized pair is centered up to 3 sd / sqrt(trials) plus finite-N drift
    pairs = _spike_pairs(omega, c, n_dim, trials, seed=123)
    for j in range(2):
        bound = 3 * np.std(pairs[:, j], ddof=1) / math.sqrt(trials) + 0.5
        assert abs(np.mean(pairs[:, j])) < bound


def _spike_pairs(omega, c, n_dim, trials, seed):
    lim = spike_limits(omega, c) if omega > 0 else downward_spike_limits(omega, c)
    n_samples = int(round(n_dim / c))
    out = np.empty((trials, 2))
    for t in range(trials):
        x = complex_gaussian(n_dim, n_samples, RngStream(seed, t))
        x[0, :] *= math.sqrt(1 + omega)
        eig = hermitian_eig(x @ x.conj().T / n_samples)
        idx = -1 if omega > 0 else 0
        out[t] = (
            abs(eig.eigenvectors[0, idx]) ** 2 - lim.xi,
            eig.eigenvalues[idx] - lim.rho,
        )
    return math.sqrt(n_dim) * out


# --- failure hypotheses and localization --------------------------------------------


def test_failure_hypotheses_no_change():
    h = complex_gaussian(6, 3, RngStream(11))
    t_cov = h @ h.conj().T + np.eye(6)
    hyps = failure_hypotheses(h, t_cov, [0.0, 0.0, 0.0])
    assert all(hyp.omega == 0.0 for hyp in hyps)
    for hyp in hyps:
        assert np.isclose(np.linalg.norm(hyp.u), 1.0, atol=1e-10)
        nz = np.flatnonzero(np.abs(hyp.u) > 1e-12)[0]
        assert hyp.u[nz].imag == pytest.approx(0.0, abs=1e-12)
        assert hyp.u[nz].real > 0


def test_failure_hypotheses_hand_case():
    # H = I, T = (1+s2) I, alpha_1 = 1  =>  omega_1 = 3/(1+s2)
    s2 = 0.5
    n = 4
    hyps = failure_hypotheses(np.eye(n), (1 + s2) * np.eye(n), [1.0, 0.0, 0.0, 0.0])
    assert np.isclose(hyps[0].omega, 3.0 / (1 + s2))


def test_failure_hypotheses_total_collapse_negative():
    h = complex_gaussian(5, 5, RngStream(13))
    t_cov = h @ h.conj().T + 0.25 * np.eye(5)
    hyps = failure_hypotheses(h, t_cov, [-1.0] * 5)
    for hyp in hyps:
        v2 = -hyp.omega
        assert 0 < v2 < 1  # ||v||^2 = norm of whitened column, strictly below 1


def test_failure_hypotheses_guards():
    with pytest.raises(ParameterError):
        failure_hypotheses(np.eye(3), np.eye(3), [0.0])
    with pytest.raises(ParameterError):
        failure_hypotheses(np.eye(3), np.eye(3), [-2.0, 0.0, 0.0])
    with pytest.raises(SingularityError):
        failure_hypotheses(np.eye(3), np.zeros((3, 3)), [0.0] * 3)


def _unit(n, k):
    u = np.zeros(n, dtype=complex)
    u[k] = 1.0
    return u


def test_localize_single_hypothesis():
    hyp = FailureHypothesis(0, 2.0, _unit(8, 0), 1.0)
    st = calibrate_fluctuations(2.0, 0.5, 8, 1000, RngStream(21))
    k, scores = localize_failure(3.0, _unit(8, 0), [hyp], [st])
    assert k == 0 and scores.size == 1


def test_localize_tie_breaks_low_index():
    hyp = FailureHypothesis(0, 2.0, _unit(8, 0), 1.0)
    st = calibrate_fluctuations(2.0, 0.5, 8, 1000, RngStream(22))
    k, scores = localize_failure(3.0, _unit(8, 0), [hyp, hyp], [st, st])
    assert k == 0
    assert scores[0] == scores[1]


def test_localize_requires_calibration():
    hyp = FailureHypothesis(0, 2.0, _unit(4, 0), 1.0)
    with pytest.raises(ParameterError):
        localize_failure(3.0, _unit(4, 0), [hyp], [None])


def test_exact_separation_three_mass_scenario():
    # each limiting support interval captures exactly its population
    # multiplicity of sample eigenvalues in >= 99% of trials
    from rmt.simulate import ScenarioSpec, generate_trial
    from rmt.stieltjes import SpectralModel, density_from_stieltjes, support_clusters

    model = SpectralModel.from_multiplicities((1.0, 3.0, 7.0), (1, 1, 1), 0.1)
    dens = density_from_stieltjes(model, np.arange(0.05, 11.0, 0.01), eps=1e-4)
    intervals = support_clusters(dens).intervals
    assert len(intervals) == 3
    spec = ScenarioSpec("masses", 300, 3000, 100, 57, {"atoms": [(1.0, 100), (3.0, 100), (7.0, 100)]})
    good = 0
    for t in range(spec.trials):
        y, _ = generate_trial(spec, t)
        eigs = np.linalg.eigvalsh(sample_covariance(y))
        counts = [
            int(np.sum((eigs > lo - 0.05) & (eigs < hi + 0.05))) for lo, hi in intervals
        ]
        good += counts == [100, 100, 100]
    assert good >= 99, f"exact separation held in {good}/100 trials"


def test_localization_rate_well_separated():
    # orthogonal directions, omega gap > 1, data from hypothesis index 0
    n_dim, c = 50, 0.25
    n_samples = int(n_dim / c)
    om_a, om_b = 3.0, 1.2
    hyps = [
        FailureHypothesis(0, om_a, _unit(n_dim, 0), 0.0),
        FailureHypothesis(1, om_b, _unit(n_dim, 1), 0.0),
    ]
    stats = [
        calibrate_fluctuations(om_a, c, n_dim, 1000, RngStream(31)),
        calibrate_fluctuations(om_b, c, n_dim, 1000, RngStream(32)),
    ]
    hits = 0
    trials = 100
    scale = np.ones(n_dim)
    scale[0] = math.sqrt(1 + om_a)
    for t in range(trials):
        x = complex_gaussian(n_dim, n_samples, RngStream(33, t))
        eig = hermitian_eig(sample_covariance(scale[:, None] * x))
        k, _ = localize_failure(eig.eigenvalues[-1], eig.eigenvectors[:, -1], hyps, stats)
        hits += k == 0
    assert hits / trials > 0.9
