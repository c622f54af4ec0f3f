"""Shared fixtures: the measured-device parameter set used across the suite."""

import pytest

from mmwave_qed import ReadoutModel, fit_ej_ec, fit_joint

# measured device (linear GHz)
W01 = 3.083
ALPHA = -0.141
OMEGA_R = 34.670
KAPPA = 1.997e-3
CHI = (0.0, -1.515e-3, -3.029e-3, -4.556e-3)
TAU_R = 780e-9
T1 = 110e-6
ETA = 0.0174


@pytest.fixture(scope="session")
def device():
    """Transmon fitted to the measured qubit frequency and anharmonicity."""
    return fit_ej_ec(W01, ALPHA)


@pytest.fixture(scope="session")
def readout_model():
    """Readout chain at the measured operating point, probe between the pulled peaks."""
    return ReadoutModel(
        omega_r=OMEGA_R,
        kappa=KAPPA,
        chi=CHI,
        probe_detuning=CHI[1] / 2,
        nbar_r=10.0,
        tau_r=TAU_R,
        t1=T1,
        eta=ETA,
        thermal_pop=0.012,
    )


@pytest.fixture(scope="session")
def joint_fit():
    """Joint system fitted to the dressed observables (computed once, ~0.5 s)."""
    return fit_joint(W01, ALPHA, OMEGA_R, CHI[1])
