import numpy as np
import pytest

from conftest import ALPHA, W01
from mmwave_qed import (
    ConfigurationError,
    RangeError,
    TransmonParams,
    build_hamiltonian,
    charge_dispersion,
    charge_numbers,
    diagonalize,
    fit_ej_ec,
    n_bound,
    n_zpf,
)


def test_params_validation():
    with pytest.raises(ConfigurationError):
        TransmonParams(ej=-1.0, ec=0.2)
    with pytest.raises(ConfigurationError):
        TransmonParams(ej=10.0, ec=-0.2)
    with pytest.raises(ConfigurationError):
        TransmonParams(ej=0.1, ec=0.2)  # ej/ec <= 1: not a transmon
    with pytest.raises(ConfigurationError):
        TransmonParams(ej=10.0, ec=0.2, charge_cutoff=5)
    with pytest.raises(ConfigurationError):
        TransmonParams(ej=10.0, ec=0.2, ng=float("nan"))
    assert TransmonParams(ej=10.0, ec=0.2, charge_cutoff=25).dimension == 51


def test_hamiltonian_structure():
    p = TransmonParams(ej=12.0, ec=0.25, ng=0.3, charge_cutoff=10)
    h = build_hamiltonian(p)
    k = charge_numbers(p)
    assert h.shape == (21, 21)
    assert np.allclose(np.diag(h), 4.0 * p.ec * (k - p.ng) ** 2)
    off = np.diag(h, 1)
    assert np.allclose(off, -p.ej / 2.0)
    # nothing beyond the tridiagonal
    assert np.count_nonzero(h - np.diag(np.diag(h)) - np.diag(off, 1) - np.diag(off, -1)) == 0


def test_measured_device_spectrum(device):
    s = diagonalize(device)
    assert abs(s.omega01 - W01) < 1e-4
    assert abs(s.anharmonicity - ALPHA) < 1e-4
    # ladder properties
    assert np.all(np.diff(s.energies) > 0)
    assert abs(s.transition(0, 2) - (s.transition(0, 1) + s.transition(1, 2))) < 1e-12


def test_spectrum_charge_periodicity_and_parity(device):
    from dataclasses import replace

    for ng in (0.13, 0.4):
        e0 = diagonalize(replace(device, ng=ng)).energies
        e1 = diagonalize(replace(device, ng=ng + 1.0)).energies
        e2 = diagonalize(replace(device, ng=-ng)).energies
        # ng -> ng+1 shifts the truncation window, so only levels well below
        # the cutoff band are invariant; ng -> -ng is exact (symmetric window)
        assert np.max(np.abs(e0[:15] - e1[:15])) < 1e-9
        assert np.max(np.abs(e0 - e2)) < 1e-9


def test_charge_matrix_elements(device):
    s = diagonalize(device)
    assert np.allclose(s.charge_elements, s.charge_elements.T)
    assert np.all(s.charge_elements >= 0)
    # nearest-neighbor elements dominate deep in the transmon regime
    assert s.charge_elements[0, 1] > 10 * s.charge_elements[0, 2]
    # harmonic estimate is good to a few percent at ej/ec = 80
    assert abs(s.charge_elements[0, 1] - n_zpf(device)) / n_zpf(device) < 0.05


def test_charge_dispersion_grows_with_level(device):
    d = [charge_dispersion(device, k) for k in range(6)]
    assert all(b > a for a, b in zip(d, d[1:]))
    assert d[0] < 1e-8  # ground level is flat at ej/ec = 80
    with pytest.raises(RangeError):
        charge_dispersion(device, device.dimension - 1)


def test_n_bound_and_n_zpf(device):
    assert n_bound(device) == 8
    expected = (device.ej / (32.0 * device.ec)) ** 0.25
    assert abs(n_zpf(device) - expected) < 1e-12


def test_fit_roundtrip():
    for ej, ec in ((10.17, 0.127), (24.0, 0.3), (60.0, 0.25)):
        p = TransmonParams(ej=ej, ec=ec)
        s = diagonalize(p)
        fit = fit_ej_ec(s.omega01, s.anharmonicity)
        assert abs(fit.ej - ej) / ej < 1e-3
        assert abs(fit.ec - ec) / ec < 1e-3


def test_fit_seed_quality_and_convergence():
    # The asymptotic seed (ec0 = -alpha, ej0 = (w01+ec0)^2/(8 ec0)) is off by
    # up to ~30% in parameter space at ej/ec = 30 and tightens as the ratio
    # grows; the damped Newton converges from it across the whole range.
    for ratio in (30.0, 80.0, 200.0):
        ec = 0.2
        p = TransmonParams(ej=ratio * ec, ec=ec)
        s = diagonalize(p)
        ec0 = -s.anharmonicity
        ej0 = (s.omega01 + ec0) ** 2 / (8.0 * ec0)
        seed_err = max(abs(ej0 - p.ej) / p.ej, abs(ec0 - p.ec) / p.ec)
        assert seed_err < 0.30
        fit = fit_ej_ec(s.omega01, s.anharmonicity)
        sf = diagonalize(fit)
        assert abs(sf.omega01 - s.omega01) < 1e-4
        assert abs(sf.anharmonicity - s.anharmonicity) < 1e-4


def test_fit_input_validation():
    with pytest.raises(RangeError):
        fit_ej_ec(-3.0, -0.14)
    with pytest.raises(RangeError):
        fit_ej_ec(3.0, 0.14)  # positive anharmonicity
    with pytest.raises(RangeError):
        fit_ej_ec(0.1, -0.14)  # |alpha| >= omega01
