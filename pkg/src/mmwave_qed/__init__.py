"""Numerical toolkit for strongly driven transmons and millimeter-wave readout.

Charge-basis transmon spectra, Floquet branch tracking under strong drives,
joint transmon + linear-mode dressing, single-shot dispersive readout with
decay, and the calibration statistics that tie them to measured devices.

Units: energies and frequencies are linear (h = 1) in GHz, times in seconds;
factors of 2*pi appear only inside time evolution and explicit rate formulas.
"""

from .calibration import (
    CalibrationCurve,
    QuadraticCalibration,
    decay_survival,
    detection_threshold,
    fit_quadratic_calibration,
    stark_to_photons,
)
from .config import ExperimentConfig, load_config, parse_time
from .coupled import (
    DressedSystem,
    JointSystemParams,
    build_joint_hamiltonian,
    coupled_scar_map,
    cross_kerr,
    dress_and_truncate,
    fit_joint,
    g_from_chi,
    resonance_conditions,
)
from .errors import (
    CalibrationWarning,
    ConfigurationError,
    DomainError,
    FitError,
    NumericError,
    RangeError,
    ToolkitError,
)
from .floquet import (
    DriveSpec,
    FloquetScan,
    QuantumClassicalScan,
    branch_population,
    floquet_modes,
    fold_quasienergy,
    hybridization,
    ideal_displaced_state,
    one_period_propagator,
    period_propagator,
    quantum_classical_scan,
    scar_map,
    stark_shift_from_xi,
    track_branches,
    xi_to_drive_energy,
)
from .readout import (
    ReadoutModel,
    Separatrix,
    ShotSet,
    bayes_credence,
    dephasing_rate,
    efficiency_and_noise,
    empty_cavity_frequency,
    lorentzian_drive_correction,
    measurement_rate,
    multi_state_assign,
    optimize_separatrix,
    simulate_shots,
    snr,
    steady_state_field,
    stream_shot_chunks,
)
from .runners import run_experiment
from .transmon import (
    TransmonParams,
    TransmonSpectrum,
    build_hamiltonian,
    charge_dispersion,
    charge_numbers,
    diagonalize,
    fit_ej_ec,
    n_bound,
    n_zpf,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # transmon
    "TransmonParams",
    "TransmonSpectrum",
    "build_hamiltonian",
    "charge_numbers",
    "charge_dispersion",
    "diagonalize",
    "fit_ej_ec",
    "n_bound",
    "n_zpf",
    # floquet
    "DriveSpec",
    "FloquetScan",
    "QuantumClassicalScan",
    "branch_population",
    "floquet_modes",
    "fold_quasienergy",
    "hybridization",
    "ideal_displaced_state",
    "one_period_propagator",
    "period_propagator",
    "quantum_classical_scan",
    "scar_map",
    "stark_shift_from_xi",
    "track_branches",
    "xi_to_drive_energy",
    # coupled
    "DressedSystem",
    "JointSystemParams",
    "build_joint_hamiltonian",
    "coupled_scar_map",
    "cross_kerr",
    "dress_and_truncate",
    "fit_joint",
    "g_from_chi",
    "resonance_conditions",
    # readout
    "ReadoutModel",
    "Separatrix",
    "ShotSet",
    "bayes_credence",
    "dephasing_rate",
    "efficiency_and_noise",
    "empty_cavity_frequency",
    "lorentzian_drive_correction",
    "measurement_rate",
    "multi_state_assign",
    "optimize_separatrix",
    "simulate_shots",
    "snr",
    "steady_state_field",
    "stream_shot_chunks",
    # calibration
    "CalibrationCurve",
    "QuadraticCalibration",
    "decay_survival",
    "detection_threshold",
    "fit_quadratic_calibration",
    "stark_to_photons",
    # config / execution
    "ExperimentConfig",
    "load_config",
    "parse_time",
    "run_experiment",
    # errors
    "ToolkitError",
    "ConfigurationError",
    "RangeError",
    "DomainError",
    "NumericError",
    "FitError",
    "CalibrationWarning",
]
