"""Measurement-chain models: photon counting, the two-photon-detector
Michelson interferometer, and the fluorescence collection path.

The interferometer splits the field into two balanced arms, delays one by
tau, recombines, and reads the result with an ideal quadratic (two-photon)
detector:

    raw(tau) = < |E(t) + exp(-i omega tau) E(t + tau)|^4 > / 16

The carrier phase omega*tau produces fringes at the optical period.
Averaging them out (analytically over the phase, or numerically with a
boxcar spanning one fringe period) leaves the envelope

    S(tau) = ( <I(t)^2> + <I(t+tau)^2> + 4 <I(t) I(t+tau)> ) / 16

so the zero-delay to large-delay ratio r = S(0)/S(inf) determines
g2(0) = 2 r / (3 - r), and the relation inverts pointwise to a full
g2(tau) curve.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .correlation import CorrelationEstimate
from .errors import (
    DegenerateInputError,
    InvalidArgumentError,
    OutOfModelError,
)
from .seeding import rng_for
from .sources import FieldTrace
from .tpa import AbsorberSpec, mollow_rate

__all__ = [
    "DetectionChain",
    "InterferogramScan",
    "photon_counter",
    "hbt_scan",
    "extract_g2",
    "fluorescence_counts",
]


@dataclass
class DetectionChain:
    """Efficiencies and timing of one photon-counting detection path.

    power_correction_eta rescales measured powers to powers at the sample
    (P_exc = eta * P_meas). The overall efficiency is the product of
    collection and quantum efficiencies.
    """

    collection_efficiency: float
    quantum_efficiency: float
    dark_rate: float = 0.0
    integration_time: float = 1.0
    power_correction_eta: float = 1.0

    def __post_init__(self) -> None:
        for name in ("collection_efficiency", "quantum_efficiency"):
            value = getattr(self, name)
            if not 0 <= value <= 1:
                raise InvalidArgumentError(f"{name} must be in [0, 1]")
        if self.dark_rate < 0:
            raise InvalidArgumentError("dark_rate must be >= 0")
        if self.integration_time <= 0:
            raise InvalidArgumentError("integration_time must be positive")
        if not 0 < self.power_correction_eta <= 1:
            raise InvalidArgumentError("power_correction_eta must be in (0, 1]")

    @property
    def overall_efficiency(self) -> float:
        return self.collection_efficiency * self.quantum_efficiency


@dataclass
class InterferogramScan:
    """One interferometer scan: fringe-resolved and fringe-averaged signals."""

    delays: np.ndarray
    raw_signal: np.ndarray
    filtered_signal: np.ndarray
    fringe_period: float

    def __post_init__(self) -> None:
        self.delays = np.asarray(self.delays, dtype=float)
        self.raw_signal = np.asarray(self.raw_signal, dtype=float)
        self.filtered_signal = np.asarray(self.filtered_signal, dtype=float)
        if np.any(self.raw_signal < 0):
            raise InvalidArgumentError("raw_signal must be >= 0")
        if self.filtered_signal.shape != self.delays.shape:
            raise InvalidArgumentError("filtered_signal length must match delays")
        if self.raw_signal.shape != self.delays.shape:
            raise InvalidArgumentError("raw_signal length must match delays")
        if self.fringe_period <= 0:
            raise InvalidArgumentError("fringe_period must be positive")

    def to_csv(self, path, metadata: str | None = None) -> None:
        with open(path, "w", newline="") as fh:
            if metadata:
                fh.write(f"# {metadata}\n")
            writer = csv.writer(fh)
            writer.writerow(["tau_s", "raw", "filtered"])
            for tau, raw, filt in zip(self.delays, self.raw_signal, self.filtered_signal):
                writer.writerow([repr(float(tau)), repr(float(raw)), repr(float(filt))])


def photon_counter(
    mean_rate: float, chain: DetectionChain, seed: int, noise: bool = True
):
    """Detected counts over one integration window.

    The expected count is mean_rate * overall_efficiency * T plus
    dark_rate * T. With noise enabled the return value is one Poisson draw
    (an int); with noise disabled it is the exact expectation (a float).
    """
    if mean_rate < 0:
        raise InvalidArgumentError("mean_rate must be >= 0")
    expected = (
        mean_rate * chain.overall_efficiency + chain.dark_rate
    ) * chain.integration_time
    if not noise:
        return float(expected)
    rng = rng_for(seed)
    return int(rng.poisson(expected))


def hbt_scan(
    trace: FieldTrace, delays, filter_mode: str = "analytic"
) -> InterferogramScan:
    """Scan the two-photon Michelson over the given delays.

    For each delay the envelope is shifted by the nearest sample while the
    carrier phase omega*tau is applied exactly, so fringe structure does
    not require sampling the envelope at the optical period.
    filter_mode "analytic" computes the fringe-averaged signal in closed
    form from the intensity moments; "numeric" applies a boxcar of one
    fringe period to the raw signal and requires a uniform delay grid with
    at least 6 points per fringe.
    """
    e = trace.samples
    n = e.size
    delays = np.atleast_1d(np.asarray(delays, dtype=float))
    if delays.size == 0:
        raise InvalidArgumentError("delays must be non-empty")
    if np.any(delays < 0):
        raise InvalidArgumentError("delays must be >= 0")
    lags = np.round(delays / trace.dt).astype(int)
    if lags.max() >= n // 2:
        raise InvalidArgumentError("largest delay exceeds half the trace duration")
    omega = trace.carrier_freq
    fringe_period = 2.0 * np.pi / omega
    raw = np.empty(delays.size)
    filtered = np.empty(delays.size)
    for j, (tau, lag) in enumerate(zip(delays, lags)):
        a = e[: n - lag] if lag else e
        b = e[lag:] if lag else e
        combined = a + np.exp(-1j * omega * tau) * b
        raw[j] = np.mean(np.abs(combined) ** 4) / 16.0
        ia = np.abs(a) ** 2
        ib = np.abs(b) ** 2
        filtered[j] = np.mean(ia**2 + ib**2 + 4.0 * ia * ib) / 16.0
    if filter_mode == "numeric":
        filtered = _boxcar_filter(delays, raw, fringe_period)
    elif filter_mode != "analytic":
        raise InvalidArgumentError(
            f"filter_mode must be 'analytic' or 'numeric', got {filter_mode!r}"
        )
    return InterferogramScan(delays, raw, filtered, fringe_period)


def _boxcar_filter(
    delays: np.ndarray, raw: np.ndarray, fringe_period: float
) -> np.ndarray:
    """Moving average over one fringe period on a uniform delay grid."""
    if delays.size < 2:
        raise InvalidArgumentError("numeric filtering needs at least 2 delays")
    steps = np.diff(delays)
    step = steps[0]
    if step <= 0 or np.any(np.abs(steps - step) > 1e-6 * step):
        raise InvalidArgumentError("numeric filtering needs a uniform delay grid")
    window = int(round(fringe_period / step))
    if window < 6:
        raise InvalidArgumentError(
            "delay grid too coarse for numeric fringe filtering; "
            "need >= 6 points per fringe period"
        )
    kernel = np.ones(window)
    summed = np.convolve(raw, kernel, mode="same")
    norm = np.convolve(np.ones_like(raw), kernel, mode="same")
    return summed / norm


def extract_g2(
    scan: InterferogramScan,
    tail_window: tuple[float, float],
    coherence_time: float | None = None,
) -> CorrelationEstimate:
    """Invert a filtered interferogram scan into g2 values.

    tail_window = (lo, hi) in seconds selects delays where the field is
    decorrelated; the window mean fixes the large-delay floor. When
    coherence_time is given, lo must sit at or beyond 5 coherence times.
    Returns the full inverted g2(tau) curve; its first point (tau = 0) is
    g2(0) = 2 r / (3 - r). Standard errors carry the tail scatter through
    the inversion; the ratio r >= 3 is outside the classical model.
    """
    lo, hi = tail_window
    if not lo < hi:
        raise InvalidArgumentError("tail_window must satisfy lo < hi")
    if coherence_time is not None and lo < 5.0 * coherence_time:
        raise InvalidArgumentError(
            "tail window starts inside the correlation decay "
            f"(lo = {lo:.3e} s < 5 tau_c = {5.0 * coherence_time:.3e} s)"
        )
    delays = scan.delays
    if delays[0] != 0.0:
        raise InvalidArgumentError("scan must include tau = 0 as its first delay")
    signal = scan.filtered_signal
    mask = (delays >= lo) & (delays <= hi)
    n_tail = int(np.count_nonzero(mask))
    if n_tail < 2:
        raise InvalidArgumentError("tail window contains fewer than 2 scan points")
    tail = signal[mask]
    tail_mean = float(np.mean(tail))
    if tail_mean <= 0:
        raise DegenerateInputError("tail signal is not positive")
    tail_se = float(np.std(tail, ddof=1) / np.sqrt(n_tail))
    r = float(signal[0] / tail_mean)
    if r >= 3.0:
        raise OutOfModelError(
            f"signal ratio r = {r:.3f} >= 3: outside the classical "
            "two-photon interferogram model (extrabunched or corrupted input)"
        )
    if r <= 0:
        raise DegenerateInputError("zero-delay signal is not positive")
    g2_zero = 2.0 * r / (3.0 - r)
    rel_tail = tail_se / tail_mean
    se_zero = (6.0 / (3.0 - r) ** 2) * r * rel_tail
    ratio_curve = signal / tail_mean
    values = (ratio_curve * (2.0 * g2_zero + 4.0) - 2.0 * g2_zero) / 4.0
    errors = (2.0 * g2_zero + 4.0) / 4.0 * ratio_curve * rel_tail
    values[0] = g2_zero
    errors[0] = se_zero
    return CorrelationEstimate(
        2, delays, np.maximum(values, 0.0), errors, n_tail
    )


def fluorescence_counts(
    excitation_power_measured: float,
    source_g2_or_trace,
    absorber: AbsorberSpec,
    chain: DetectionChain,
    seed: int,
    noise: bool = True,
):
    """Detected fluorescence counts for one excitation power setting.

    The measured power is first corrected to the power at the sample,
    P_exc = eta * P_meas. The absorption rate follows from the two-photon
    model with the source's g2(0): either passed directly as a number or
    computed from the moments of a FieldTrace (whose carrier then sets the
    lineshape detuning; a bare g2 value is taken to be on resonance).
    The fluorescence rate is the absorption rate times the quantum yield,
    detected by photon_counter.
    """
    if excitation_power_measured < 0:
        raise InvalidArgumentError("excitation power must be >= 0")
    p_exc = chain.power_correction_eta * excitation_power_measured
    if isinstance(source_g2_or_trace, FieldTrace):
        trace = source_g2_or_trace
        intensity = trace.intensity()
        mean_i = float(np.mean(intensity))
        if mean_i <= 0:
            raise DegenerateInputError("trace has zero mean power")
        g2_zero = float(np.mean(intensity**2)) / mean_i**2
        omega = trace.carrier_freq
    else:
        g2_zero = float(source_g2_or_trace)
        omega = absorber.omega_f / 2.0
    rate = mollow_rate(absorber, g2_zero, p_exc, omega)
    return photon_counter(rate * absorber.quantum_yield, chain, seed, noise=noise)
