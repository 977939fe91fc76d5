"""Detection chain: counters, interferometer scans, signal-ratio inversion."""

import numpy as np
import pytest

from photonstat.errors import InvalidArgumentError, OutOfModelError
from photonstat.instruments import (
    DetectionChain,
    InterferogramScan,
    extract_g2,
    fluorescence_counts,
    hbt_scan,
    photon_counter,
)
from photonstat.sources import SourceSpec, make_trace, nominal_coherence_time
from photonstat.tpa import AbsorberSpec

BW = 5.0e12
TAU_C = nominal_coherence_time("gaussian", BW)


def chain(**overrides):
    kw = dict(
        collection_efficiency=0.2,
        quantum_efficiency=0.9,
        dark_rate=0.0,
        integration_time=1.0,
        power_correction_eta=1.0,
    )
    kw.update(overrides)
    return DetectionChain(**kw)


def thermal_trace(n_tauc=20_000, per_tauc=8, seed=1):
    spec = SourceSpec(
        statistics="thermal-gaussian",
        center_wavelength=976e-9,
        bandwidth_fwhm=BW,
        spectral_shape="gaussian",
        mean_power=1e-3,
    )
    return make_trace(spec, n_tauc * TAU_C, TAU_C / per_tauc, seed)


def test_counter_expectation_noise_off():
    c = chain(dark_rate=25.0, integration_time=2.0)
    out = photon_counter(1000.0, c, seed=1, noise=False)
    assert isinstance(out, float)
    assert out == pytest.approx(1000.0 * 0.18 * 2.0 + 50.0, rel=1e-12)


def test_counter_poisson_statistics():
    c = chain()
    expectation = photon_counter(500.0, c, seed=0, noise=False)
    draws = np.array(
        [photon_counter(500.0, c, seed=k, noise=True) for k in range(20_000)]
    )
    assert draws.dtype.kind == "i" or isinstance(draws[0], (int, np.integer))
    se_mean = np.sqrt(expectation / draws.size)
    assert abs(draws.mean() - expectation) < 4 * se_mean
    # Poisson: variance equals the mean; var(s^2) ~ 2 mu^2 / N for the check
    se_var = expectation * np.sqrt(2.0 / draws.size) * 1.5
    assert abs(draws.var(ddof=1) - expectation) < 4 * se_var


def test_counter_dark_only():
    c = chain(dark_rate=100.0, integration_time=2.0)
    assert photon_counter(0.0, c, seed=3, noise=False) == pytest.approx(200.0)


def test_chain_validation():
    with pytest.raises(InvalidArgumentError):
        chain(collection_efficiency=1.5)
    with pytest.raises(InvalidArgumentError):
        chain(quantum_efficiency=-0.1)
    with pytest.raises(InvalidArgumentError):
        chain(integration_time=0.0)


def test_scan_zero_delay_equals_intensity_square():
    trace = thermal_trace(n_tauc=2_000, seed=2)
    scan = hbt_scan(trace, [0.0, 5 * TAU_C])
    intensity = trace.intensity()
    assert scan.raw_signal[0] == pytest.approx(np.mean(intensity**2), rel=1e-12)


def test_fringe_filter_numeric_matches_analytic():
    # Boxcar averaging over one carrier fringe must agree with the
    # closed-form phase average when the delay grid resolves the fringes.
    trace = thermal_trace(n_tauc=2_000, per_tauc=8, seed=3)
    fringe = 2 * np.pi / trace.carrier_freq
    delays = np.arange(0.0, 2.2 * TAU_C, fringe / 8.0)
    analytic = hbt_scan(trace, delays, filter_mode="analytic")
    numeric = hbt_scan(trace, delays, filter_mode="numeric")
    probe = [
        int(np.argmin(np.abs(delays - 0.2 * TAU_C))),
        int(np.argmin(np.abs(delays - 2.0 * TAU_C))),
    ]
    for i in probe:
        assert numeric.filtered_signal[i] == pytest.approx(
            analytic.filtered_signal[i], rel=0.01
        )


def test_numeric_filter_needs_dense_grid():
    trace = thermal_trace(n_tauc=500, seed=4)
    sparse = np.linspace(0.0, 2 * TAU_C, 20)
    with pytest.raises(InvalidArgumentError):
        hbt_scan(trace, sparse, filter_mode="numeric")


def test_scan_rejects_negative_delay():
    trace = thermal_trace(n_tauc=500, seed=4)
    with pytest.raises(InvalidArgumentError):
        hbt_scan(trace, [-TAU_C, 0.0])


def synthetic_scan(g_zero, n=200, tail_start=100):
    # Filtered signal built directly from the stationary-field relation:
    # S(tau) proportional to 2 g(0) + 4 g(tau), normalized mean power 1.
    taus = np.linspace(0.0, 20.0, n)
    g_curve = 1.0 + (g_zero - 1.0) * np.exp(-((taus / 2.0) ** 2))
    g_curve[tail_start:] = 1.0
    filtered = (2.0 * g_zero + 4.0 * g_curve) / 16.0
    return InterferogramScan(
        delays=taus,
        raw_signal=filtered * 1.5,
        filtered_signal=filtered,
        fringe_period=0.01,
    ), g_curve


def test_extract_recovers_known_curve():
    scan, g_curve = synthetic_scan(2.0)
    est = extract_g2(scan, tail_window=(15.0, 20.0))
    assert est.values[0] == pytest.approx(2.0, rel=1e-9)
    assert np.allclose(est.values, g_curve, rtol=1e-9)


def test_extract_identity_for_flat_scan():
    scan, _ = synthetic_scan(1.0)
    est = extract_g2(scan, tail_window=(15.0, 20.0))
    assert est.values[0] == pytest.approx(1.0, rel=1e-9)


def test_extract_ratio_inversion_points():
    # r = 6 g0 / (2 g0 + 4): check the inverse 2r/(3-r) at r = 1 and 1.5.
    for g_zero, r_expected in ((1.0, 1.0), (2.0, 1.5)):
        scan, _ = synthetic_scan(g_zero)
        r = scan.filtered_signal[0] / np.mean(scan.filtered_signal[150:])
        assert r == pytest.approx(r_expected, rel=1e-9)
        est = extract_g2(scan, tail_window=(15.0, 20.0))
        assert est.values[0] == pytest.approx(2 * r / (3 - r), rel=1e-9)


def test_extract_out_of_model_ratio():
    taus = np.linspace(0.0, 20.0, 100)
    filtered = np.full(100, 0.1)
    filtered[0] = 0.35  # r = 3.5 cannot come from a classical field
    scan = InterferogramScan(taus, filtered, filtered, 0.01)
    with pytest.raises(OutOfModelError):
        extract_g2(scan, tail_window=(15.0, 20.0))


def test_extract_tail_must_clear_coherence():
    scan, _ = synthetic_scan(2.0)
    with pytest.raises(InvalidArgumentError):
        extract_g2(scan, tail_window=(15.0, 20.0), coherence_time=4.0)
    est = extract_g2(scan, tail_window=(15.0, 20.0), coherence_time=2.0)
    assert est.values[0] == pytest.approx(2.0, rel=1e-9)


def test_extract_needs_zero_delay_point():
    taus = np.linspace(1.0, 20.0, 100)
    sig = np.full(100, 0.375)
    scan = InterferogramScan(taus, sig, sig, 0.01)
    with pytest.raises(InvalidArgumentError):
        extract_g2(scan, tail_window=(15.0, 20.0))


def test_fluorescence_scalar_vs_trace_consistency():
    absorber = AbsorberSpec(3.86e15, 5.0e14, 1e-20, 0.5, "dye")
    c = chain()
    trace = thermal_trace(n_tauc=50_000, seed=5)
    from_trace = fluorescence_counts(1e-3, trace, absorber, c, seed=1, noise=False)
    from_scalar = fluorescence_counts(1e-3, 2.0, absorber, c, seed=1, noise=False)
    assert from_trace == pytest.approx(from_scalar, rel=0.05)


def test_fluorescence_power_correction_quadratic():
    absorber = AbsorberSpec(3.86e15, 5.0e14, 1e-20, 0.5, "dye")
    c_full = chain()
    c_corr = chain(power_correction_eta=0.5)
    full = fluorescence_counts(1e-3, 1.0, absorber, c_full, seed=1, noise=False)
    corr = fluorescence_counts(1e-3, 1.0, absorber, c_corr, seed=1, noise=False)
    assert corr == pytest.approx(full / 4.0, rel=1e-12)
    double = fluorescence_counts(2e-3, 1.0, absorber, c_full, seed=1, noise=False)
    assert double == pytest.approx(4.0 * full, rel=1e-12)


def test_scan_csv(tmp_path):
    trace = thermal_trace(n_tauc=500, seed=6)
    scan = hbt_scan(trace, [0.0, TAU_C])
    path = tmp_path / "scan.csv"
    scan.to_csv(path, metadata="seed=6")
    lines = path.read_text().splitlines()
    assert lines[0] == "# seed=6"
    assert lines[1] == "tau_s,raw,filtered"
    assert len(lines) == 4
