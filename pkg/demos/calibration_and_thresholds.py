"""Drive-power calibration and two small statistics helpers for sequence design.

Fits the quadratic photon-number law nbar_d = a * amplitude^2 to AC-Stark
shift measurements, extrapolates to amplitudes beyond the fitted range, and
computes the smallest fidelity drop a repeated binary test can resolve plus
the plain T1 survival over a measurement sequence.
"""

from pathlib import Path

import numpy as np

from mmwave_qed import (
    CalibrationCurve,
    decay_survival,
    detection_threshold,
    fit_quadratic_calibration,
    stark_to_photons,
)
from mmwave_qed.plots import calibration_svg

OUT = Path(__file__).resolve().parent / "out"
OUT.mkdir(exist_ok=True)

chi1 = -1.515e-3
amps = np.array([0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40])
shifts = np.array([-0.00249, -0.00988, -0.02236, -0.03959,
                   -0.06211, -0.08905, -0.12169, -0.15867])
sigmas = np.array([4e-4, 4e-4, 5e-4, 6e-4, 8e-4, 1.0e-3, 1.3e-3, 1.6e-3])

curve = CalibrationCurve(amplitudes=amps, stark_shifts=shifts, sigmas=sigmas, chi1=chi1)
fit = fit_quadratic_calibration(curve)
print(f"nbar_d = a * amp^2 with a = {fit.a:.1f} +/- {fit.sigma_a:.1f}")
for amp in (0.2, 0.6, 1.0):
    tag = "" if amp <= fit.amp_max else f"  (extrapolation x{fit.extrapolation_factor(amp):.1f})"
    print(f"  amp = {amp:.1f}: nbar_d = {fit.photons(amp):8.1f}{tag}")

photons = np.array([stark_to_photons(s, chi1) for s in shifts])
path = OUT / "calibration.svg"
calibration_svg(path, amps, photons, fit, title="drive-power calibration")
print("wrote", path)

n, p0, conf = 20000, 0.998, 0.95
delta = detection_threshold(n, p0, conf)
print(f"\nsmallest detectable drop from p = {p0} with {n} shots "
      f"at {conf:.0%} confidence: {delta:.2e}")
surv = decay_survival(21e-6, 110e-6)
print(f"T1 survival over a 21 us sequence with T1 = 110 us: {surv:.3f}")
