import math

import numpy as np
import pytest
from scipy.stats import binom

from mmwave_qed import (
    CalibrationCurve,
    CalibrationWarning,
    ConfigurationError,
    DomainError,
    FitError,
    RangeError,
    decay_survival,
    detection_threshold,
    fit_quadratic_calibration,
    stark_to_photons,
)


def _curve(amps, a=650.0, chi1=-1.515e-3, jitter=None, sigmas=None):
    amps = np.asarray(amps, dtype=float)
    shifts = a * amps**2 * chi1
    if jitter is not None:
        shifts = shifts + np.asarray(jitter, dtype=float)
    if sigmas is None:
        sigmas = np.full(amps.size, 1e-4)
    return CalibrationCurve(amplitudes=amps, stark_shifts=shifts, sigmas=sigmas, chi1=chi1)


def test_curve_validation():
    with pytest.raises(ConfigurationError):
        CalibrationCurve(amplitudes=[0.1, 0.2], stark_shifts=[0.0], sigmas=[1e-4, 1e-4], chi1=-1e-3)
    with pytest.raises(ConfigurationError):
        CalibrationCurve(amplitudes=[-0.1, 0.2], stark_shifts=[0.0, 0.0], sigmas=[1e-4, 1e-4], chi1=-1e-3)
    with pytest.raises(ConfigurationError):
        CalibrationCurve(amplitudes=[0.1, 0.2], stark_shifts=[0.0, 0.0], sigmas=[0.0, 1e-4], chi1=-1e-3)
    with pytest.raises(ConfigurationError):
        CalibrationCurve(amplitudes=[0.1, 0.2], stark_shifts=[0.0, 0.0], sigmas=[1e-4, 1e-4], chi1=0.0)


def test_stark_to_photons():
    assert stark_to_photons(-3.03e-3, -1.515e-3) == pytest.approx(2.0)
    with pytest.raises(DomainError):
        stark_to_photons(1e-3, 0.0)
    with pytest.warns(CalibrationWarning):
        n = stark_to_photons(+1e-3, -1.515e-3)
    assert n < 0


def test_quadratic_fit_recovers_exact_law():
    fit = fit_quadratic_calibration(_curve([0.05, 0.1, 0.2, 0.3, 0.4], a=654.0))
    assert fit.a == pytest.approx(654.0, rel=1e-9)
    assert fit.amp_max == pytest.approx(0.4)
    assert fit.photons(0.2) == pytest.approx(654.0 * 0.04, rel=1e-9)
    assert fit.extrapolation_factor(0.6) == pytest.approx((0.6 / 0.4) ** 2)


def test_quadratic_fit_weights_by_uncertainty():
    # one wildly-off point with a huge error bar must barely move the answer
    amps = np.array([0.05, 0.1, 0.2, 0.3, 0.4])
    jit = np.zeros(5)
    jit[2] = -5e-3  # large bias on the 0.2 point
    sig = np.full(5, 1e-5)
    sig[2] = 1.0
    fit = fit_quadratic_calibration(_curve(amps, a=650.0, jitter=jit, sigmas=sig))
    assert fit.a == pytest.approx(650.0, rel=1e-4)
    # with equal weights the same bias visibly drags the slope
    fit_eq = fit_quadratic_calibration(_curve(amps, a=650.0, jitter=jit))
    assert abs(fit_eq.a - 650.0) > 50 * abs(fit.a - 650.0)


def test_quadratic_fit_sigma_scales_with_noise():
    amps = np.array([0.05, 0.1, 0.2, 0.3, 0.4])
    tight = fit_quadratic_calibration(_curve(amps, sigmas=np.full(5, 1e-5)))
    loose = fit_quadratic_calibration(_curve(amps, sigmas=np.full(5, 1e-3)))
    assert loose.sigma_a == pytest.approx(100 * tight.sigma_a, rel=1e-6)
    assert tight.sigma_a > 0


def test_quadratic_fit_guards():
    with pytest.raises(ConfigurationError):
        fit_quadratic_calibration(_curve([0.1, 0.2]))  # fewer than 3 points
    with pytest.raises(FitError):
        fit_quadratic_calibration(_curve([0.0, 0.0, 0.0]))
    with pytest.warns(CalibrationWarning):
        fit_quadratic_calibration(
            CalibrationCurve(
                amplitudes=[0.1, 0.2, 0.3],
                stark_shifts=[+1e-4, +4e-4, +9e-4],  # wrong sign vs chi1 < 0
                sigmas=[1e-4] * 3,
                chi1=-1.515e-3,
            )
        )


def test_detection_threshold_frozen_point():
    delta = detection_threshold(20000, 0.998, 0.95)
    assert delta == pytest.approx(0.0012190, abs=2e-6)
    # semantics: with the one-tailed exact binomial test at the implied
    # critical count, a drop of delta is detected with >= 95% probability
    # while the no-drop test stays below the 5% false-positive budget
    n, p, conf = 20000, 0.998, 0.95
    k_star = int(binom.ppf(1 - conf, n, p))
    while binom.cdf(k_star, n, p) > 1 - conf:
        k_star -= 1
    assert binom.cdf(k_star, n, p) <= 1 - conf  # size control
    assert binom.cdf(k_star, n, p - delta) >= conf  # power at delta
    assert binom.cdf(k_star, n, p - 0.9 * delta) < conf  # minimality


def test_detection_threshold_scales_like_sqrt_n():
    d1 = detection_threshold(20000, 0.998, 0.95)
    d4 = detection_threshold(80000, 0.998, 0.95)
    assert d4 / d1 == pytest.approx(0.5, rel=0.15)


def test_detection_threshold_monte_carlo():
    n, p, conf = 5000, 0.99, 0.9
    delta = detection_threshold(n, p, conf)
    k_star = int(binom.ppf(1 - conf, n, p))
    while binom.cdf(k_star, n, p) > 1 - conf:
        k_star -= 1
    rng = np.random.default_rng(17)
    detected = rng.binomial(n, p - delta, size=4000) <= k_star
    assert detected.mean() > conf - 0.02


def test_detection_threshold_guards():
    with pytest.raises(RangeError):
        detection_threshold(0, 0.998, 0.95)
    with pytest.raises(RangeError):
        detection_threshold(1000, 1.2, 0.95)
    with pytest.raises(RangeError):
        detection_threshold(1000, 0.998, 1.0)
    with pytest.raises(RangeError):
        detection_threshold(50, 0.998, 0.95)  # too few shots for a binomial test
    # when even zero successes would not be surprising, nothing smaller than
    # the baseline itself is detectable
    assert detection_threshold(100, 0.01, 0.95) == pytest.approx(0.01)


def test_decay_survival():
    assert decay_survival(21e-6, 110e-6) == pytest.approx(math.exp(-21.0 / 110.0), rel=1e-12)
    assert decay_survival(0.0, 110e-6) == 1.0
    with pytest.raises(RangeError):
        decay_survival(-1e-6, 110e-6)
    with pytest.raises(RangeError):
        decay_survival(1e-6, 0.0)
