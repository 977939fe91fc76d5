"""Two- and multi-photon absorption rates from field statistics.

The central model: for a weak stationary field of intensity I and a
two-photon transition at omega_f with final-state FWHM delta_omega_f
(both rad/s), the absorption rate is

    R = g2(0) * |D|^2 * L(2 omega) * I^2
    L(x) = 2 * (delta_omega_f / 2) / ((delta_omega_f / 2)^2 + (x - omega_f)^2)

so R is linear in g2(0) and quadratic in intensity. When the field
bandwidth is small against delta_omega_f the same rate follows directly
from the intensity trace as R = C * <I^2> with C = |D|^2 * L(2 omega);
higher orders generalize to R_n = const * <I^n>. Rates are in arbitrary
units fixed by the dipole constant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DivisionDomainError, InvalidArgumentError, ModelDomainError
from .sources import FieldTrace, estimate_bandwidth_hz

__all__ = [
    "AbsorberSpec",
    "RatioEstimate",
    "lineshape",
    "mollow_rate",
    "tpa_rate_timedomain",
    "mpa_rate_timedomain",
    "rate_ratio",
    "BROADBAND_MIN_RATIO",
]

# Minimum delta_omega_f / field-bandwidth ratio for the <I^2> reduction to
# hold to a few percent.
BROADBAND_MIN_RATIO = 10.0


@dataclass
class AbsorberSpec:
    """Two-photon transition parameters of one absorber.

    omega_f and delta_omega_f are angular frequencies (rad/s); dipole_sq is
    |D|^2, an arbitrary-units calibration constant; quantum_yield is the
    fluorescence photons emitted per absorption event. label is free-form
    metadata (e.g. solvent and concentration).
    """

    omega_f: float
    delta_omega_f: float
    dipole_sq: float
    quantum_yield: float
    label: str = ""

    def __post_init__(self) -> None:
        if self.omega_f <= 0:
            raise InvalidArgumentError("omega_f must be positive")
        if self.delta_omega_f <= 0:
            raise InvalidArgumentError("delta_omega_f must be positive")
        if self.dipole_sq <= 0:
            raise InvalidArgumentError("dipole_sq must be positive")
        if not 0 < self.quantum_yield <= 1:
            raise InvalidArgumentError("quantum_yield must be in (0, 1]")

    def with_dipole_sq(self, dipole_sq: float) -> "AbsorberSpec":
        return AbsorberSpec(
            self.omega_f, self.delta_omega_f, dipole_sq, self.quantum_yield, self.label
        )


@dataclass
class RatioEstimate:
    """A dimensionless ratio with a first-order propagated standard error."""

    value: float
    stderr: float


def lineshape(omega_two: float, absorber: AbsorberSpec) -> float:
    """Final-state Lorentzian factor evaluated at the two-photon frequency.

    Normalized so the integral over omega_two is exactly 2 pi. On
    resonance (omega_two = omega_f) it equals 4 / delta_omega_f.
    """
    half = absorber.delta_omega_f / 2.0
    return 2.0 * half / (half**2 + (omega_two - absorber.omega_f) ** 2)


def mollow_rate(
    absorber: AbsorberSpec, g2_zero: float, intensity: float, omega: float
) -> float:
    """Two-photon absorption rate for a field of given g2(0) and intensity.

    omega is the optical carrier (rad/s); the lineshape is evaluated at
    2 omega. Exactly linear in g2_zero and dipole_sq, quadratic in
    intensity.
    """
    if intensity < 0:
        raise InvalidArgumentError("intensity must be >= 0")
    # Tolerance absorbs float noise in estimator-fed values.
    if g2_zero < 1.0 - 1e-9:
        raise InvalidArgumentError(
            "g2_zero < 1 is outside the classical model domain"
        )
    return g2_zero * absorber.dipole_sq * lineshape(2.0 * omega, absorber) * intensity**2


def _check_broadband(trace: FieldTrace, absorber: AbsorberSpec, force: bool) -> None:
    field_width = 2.0 * np.pi * estimate_bandwidth_hz(trace)
    ratio = absorber.delta_omega_f / field_width
    if ratio < BROADBAND_MIN_RATIO and not force:
        raise ModelDomainError(
            f"final-state width / field bandwidth = {ratio:.2f} < "
            f"{BROADBAND_MIN_RATIO}; the <I^2> reduction of the rate is "
            "invalid here (pass force=True to override)"
        )


def tpa_rate_timedomain(
    trace: FieldTrace, absorber: AbsorberSpec, force: bool = False
) -> float:
    """Two-photon absorption rate directly from an intensity trace.

    Valid in the broadband-final-state regime: the absorber linewidth must
    exceed the field bandwidth by at least BROADBAND_MIN_RATIO, otherwise
    ModelDomainError is raised (force=True overrides). The returned rate is
    C * <I^2> with C = dipole_sq * lineshape(2 * carrier), which equals
    mollow_rate evaluated with this trace's own g2(0) and mean power.
    """
    _check_broadband(trace, absorber, force)
    scale = absorber.dipole_sq * lineshape(2.0 * trace.carrier_freq, absorber)
    intensity = trace.intensity()
    return float(scale * np.mean(intensity**2))


def mpa_rate_timedomain(trace: FieldTrace, n: int, scale_const: float) -> float:
    """n-photon absorption rate scale_const * <I^n>, 2 <= n <= 6."""
    if not 2 <= n <= 6:
        raise InvalidArgumentError("order must satisfy 2 <= n <= 6")
    if scale_const <= 0:
        raise InvalidArgumentError("scale_const must be positive")
    intensity = trace.intensity()
    return float(scale_const * np.mean(intensity**n))


def rate_ratio(
    rate_a: float, rate_b: float, stderr_a: float = 0.0, stderr_b: float = 0.0
) -> RatioEstimate:
    """rate_a / rate_b with first-order error propagation."""
    if rate_b <= 0:
        raise DivisionDomainError("denominator rate must be positive")
    if stderr_a < 0 or stderr_b < 0:
        raise InvalidArgumentError("standard errors must be >= 0")
    value = rate_a / rate_b
    variance = (stderr_a / rate_b) ** 2 + (rate_a * stderr_b / rate_b**2) ** 2
    return RatioEstimate(float(value), float(np.sqrt(variance)))
