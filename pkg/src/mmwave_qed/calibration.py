"""Drive-power calibration and transition-search statistics.

The AC-Stark shift of the qubit is linear in the effective drive photon
number (shift = nbar_d * chi_1) and the photon number is quadratic in the
drive amplitude; fitting that quadratic against calibrated low-power points
anchors the extrapolation to the strong-drive regime.
"""

from dataclasses import dataclass
import math
import warnings

import numpy as np
from scipy.stats import binom

from .errors import CalibrationWarning, ConfigurationError, DomainError, FitError, RangeError

__all__ = [
    "CalibrationCurve",
    "QuadraticCalibration",
    "stark_to_photons",
    "fit_quadratic_calibration",
    "detection_threshold",
    "decay_survival",
]


@dataclass(frozen=True)
class CalibrationCurve:
    """Measured AC-Stark shifts vs drive amplitude, with per-point uncertainty.

    amplitudes : arbitrary drive units, >= 0. stark_shifts, sigmas : GHz.
    chi1 : per-photon qubit shift (GHz) anchoring shift -> photon conversion.
    """

    amplitudes: np.ndarray
    stark_shifts: np.ndarray
    sigmas: np.ndarray
    chi1: float

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=float)
        shifts = np.asarray(self.stark_shifts, dtype=float)
        sig = np.asarray(self.sigmas, dtype=float)
        if not (amps.shape == shifts.shape == sig.shape) or amps.ndim != 1:
            raise ConfigurationError("amplitudes, stark_shifts, sigmas must be equal-length 1D")
        if np.any(amps < 0):
            raise ConfigurationError("amplitudes must be non-negative")
        if np.any(sig <= 0):
            raise ConfigurationError("per-point uncertainties must be positive")
        if self.chi1 == 0:
            raise ConfigurationError("chi1 must be non-zero")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "stark_shifts", shifts)
        object.__setattr__(self, "sigmas", sig)

    @property
    def photons(self) -> np.ndarray:
        return self.stark_shifts / self.chi1


def stark_to_photons(shift: float, chi1: float) -> float:
    """Effective drive photon number shift/chi1 (linear in the shift)."""
    if chi1 == 0:
        raise DomainError("chi1 must be non-zero")
    n = shift / chi1
    if n < 0:
        warnings.warn(
            f"negative inferred photon number {n:.3g}; shift and chi1 signs disagree",
            CalibrationWarning,
        )
    return n


@dataclass(frozen=True)
class QuadraticCalibration:
    """Fitted nbar_d = a * amplitude^2 with 1-sigma coefficient uncertainty."""

    a: float
    sigma_a: float
    amp_max: float

    def photons(self, amplitude: float) -> float:
        return self.a * amplitude**2

    def extrapolation_factor(self, amplitude: float) -> float:
        """(amplitude / largest fitted amplitude)^2 -- how far beyond the data this is."""
        return (amplitude / self.amp_max) ** 2


def fit_quadratic_calibration(c: CalibrationCurve) -> QuadraticCalibration:
    """Weighted least squares of nbar_d against amplitude^2 through the origin."""
    if c.amplitudes.size < 3:
        raise ConfigurationError(f"need >= 3 calibration points, got {c.amplitudes.size}")
    x = c.amplitudes**2
    y = c.photons
    w = (abs(c.chi1) / c.sigmas) ** 2  # photon-number weights from shift uncertainties
    s_xx = float(np.sum(w * x * x))
    if s_xx == 0.0:
        raise FitError("rank-deficient calibration (all amplitudes zero)")
    a = float(np.sum(w * x * y) / s_xx)
    sigma_a = math.sqrt(1.0 / s_xx)
    if a <= 0:
        warnings.warn(f"fitted coefficient a = {a:.3g} is not positive", CalibrationWarning)
    return QuadraticCalibration(a=a, sigma_a=sigma_a, amp_max=float(c.amplitudes.max()))


def detection_threshold(n_shots: int, p_baseline: float, confidence: float) -> float:
    """Minimum detectable drop in a survival probability, per drive point.

    One-tailed exact binomial test: the critical count k* is the largest k
    with CDF(k; n, p_baseline) <= 1 - confidence (test size at most
    1 - confidence), and the returned delta is the smallest decrease such
    that a true probability p_baseline - delta is rejected with probability
    >= confidence. Monotone decreasing in n_shots and increasing in
    confidence; scales as 1/sqrt(n) deep in the Gaussian regime.
    """
    if n_shots < 100:
        raise RangeError(f"n_shots must be >= 100, got {n_shots}")
    if not 0 < p_baseline < 1:
        raise RangeError(f"p_baseline must be in (0, 1), got {p_baseline}")
    if not 0 < confidence < 1:
        raise RangeError(f"confidence must be in (0, 1), got {confidence}")
    alpha = 1.0 - confidence
    k = int(binom.ppf(alpha, n_shots, p_baseline))
    while k >= 0 and binom.cdf(k, n_shots, p_baseline) > alpha:
        k -= 1
    if k < 0:
        # even zero successes would not reject; only a full drop is detectable
        return p_baseline

    def power(delta):
        return float(binom.cdf(k, n_shots, p_baseline - delta))

    lo, hi = 0.0, p_baseline - 1e-15
    if power(hi) < confidence:
        return p_baseline
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if power(mid) >= confidence:
            hi = mid
        else:
            lo = mid
    return hi


def decay_survival(tau_total: float, t1: float) -> float:
    """exp(-tau_total/t1): probability an excited state survives the whole sequence."""
    if tau_total < 0 or not t1 > 0:
        raise RangeError("times must be positive")
    if math.isinf(t1):
        return 1.0
    return math.exp(-tau_total / t1)
