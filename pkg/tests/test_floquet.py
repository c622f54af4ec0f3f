import numpy as np
import pytest
import scipy.linalg

from mmwave_qed import (
    ConfigurationError,
    DriveSpec,
    FloquetScan,
    NumericError,
    branch_population,
    build_hamiltonian,
    charge_numbers,
    diagonalize,
    floquet_modes,
    fold_quasienergy,
    ideal_displaced_state,
    n_zpf,
    quantum_classical_scan,
    scar_map,
    stark_shift_from_xi,
    track_branches,
)
from mmwave_qed.floquet import period_propagator, xi_to_drive_energy


def _literal_product(h0, drive_op, omega_d, ed, m):
    """Reference propagator: ordered product of midpoint-sampled expm steps."""
    t_period = 1.0 / omega_d
    dt = t_period / m
    u = np.eye(h0.shape[0], dtype=complex)
    for j in range(m):
        t_mid = (j + 0.5) * dt
        h = h0 + ed * np.cos(2.0 * np.pi * omega_d * t_mid) * drive_op
        u = scipy.linalg.expm(-2.0j * np.pi * h * dt) @ u
    return u


@pytest.mark.parametrize("m", [64, 65, 128])
def test_propagator_matches_ordered_product_real(m):
    rng = np.random.default_rng(3)
    h0 = rng.normal(size=(5, 5))
    h0 = (h0 + h0.T) / 2.0
    drive = np.diag(np.arange(-2.0, 3.0))
    u = period_propagator(h0, drive, omega_d=4.3, ed=0.7, time_steps=m)
    ref = _literal_product(h0, drive, 4.3, 0.7, m)
    assert np.max(np.abs(u - ref)) < 1e-12


def test_propagator_matches_ordered_product_complex():
    rng = np.random.default_rng(4)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    h0 = (a + a.conj().T) / 2.0
    b = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    drive = (b + b.conj().T) / 2.0
    u = period_propagator(h0, drive, omega_d=2.1, ed=0.4, time_steps=96)
    ref = _literal_product(h0, drive, 2.1, 0.4, 96)
    assert np.max(np.abs(u - ref)) < 1e-12


def test_propagator_unitarity(device):
    h0 = build_hamiltonian(device)
    n_op = np.diag(charge_numbers(device))
    u = period_propagator(h0, n_op, omega_d=33.5, ed=5.0, time_steps=256)
    err = np.max(np.abs(u.conj().T @ u - np.eye(device.dimension)))
    assert err < 1e-12


def test_propagator_step_doubling(device):
    # Midpoint sampling is second order in the step: doubling M shrinks the
    # defect by ~4x. Converged well below any tolerance used downstream.
    h0 = build_hamiltonian(device)
    n_op = np.diag(charge_numbers(device))
    args = (h0, n_op, 33.5, 3.0)
    u_fine = period_propagator(*args, time_steps=4096)
    d256 = np.max(np.abs(period_propagator(*args, time_steps=256) - u_fine))
    d512 = np.max(np.abs(period_propagator(*args, time_steps=512) - u_fine))
    assert d256 < 5e-4
    assert 2.5 < d256 / d512 < 6.0


def test_fold_quasienergy_window():
    wd = 4.0
    assert fold_quasienergy(0.0, wd) == 0.0
    assert fold_quasienergy(2.0, wd) == pytest.approx(2.0)  # right edge kept
    assert fold_quasienergy(-2.0, wd) == pytest.approx(2.0)  # left edge folds up
    assert fold_quasienergy(3.0, wd) == pytest.approx(-1.0)
    assert fold_quasienergy(-4.7, wd) == pytest.approx(-0.7)
    arr = fold_quasienergy(np.array([0.1, 6.1, -6.1]), wd)
    assert np.allclose(arr, [0.1, -1.9, 1.9])
    assert np.all(arr > -wd / 2) and np.all(arr <= wd / 2)


def test_floquet_modes_eigenrelation():
    rng = np.random.default_rng(7)
    h = rng.normal(size=(6, 6))
    h = (h + h.T) / 2.0
    wd = 3.7
    u = scipy.linalg.expm(-2.0j * np.pi * h / wd)
    eps, q = floquet_modes(u, wd)
    assert np.all(eps > -wd / 2) and np.all(eps <= wd / 2)
    lam = np.exp(-2.0j * np.pi * eps / wd)
    assert np.max(np.abs(u @ q - q * lam[None, :])) < 1e-10
    # columns orthonormal
    assert np.max(np.abs(q.conj().T @ q - np.eye(6))) < 1e-10


def test_floquet_modes_rejects_defective_input():
    # a Jordan block has no orthonormal eigenbasis; the Schur form stays
    # triangular and the decomposition must be refused
    with pytest.raises(NumericError):
        floquet_modes(np.array([[1.0, 1.0], [0.0, 1.0]]), 1.0)


def test_track_branches_unscrambles_rotation_family():
    # Smooth frame, columns shuffled and rephased at every step: tracking must
    # restore the ordering and the smooth gauge.
    n, steps = 4, 30
    thetas = np.linspace(0.0, 0.4, steps)
    rng = np.random.default_rng(11)
    frames, ideal = [], []
    for i, th in enumerate(thetas):
        rot = np.eye(n, dtype=complex)
        c, s = np.cos(th), np.sin(th)
        rot[0, 0], rot[0, 1], rot[1, 0], rot[1, 1] = c, -s, s, c
        ideal.append(rot)
        perm = rng.permutation(n) if i else np.arange(n)
        phases = np.exp(2j * np.pi * rng.random(n)) if i else np.ones(n)
        frames.append(rot[:, perm] * phases[None, :])
    tracked, eps, amb = track_branches(frames)
    assert eps is None
    assert not amb.any()
    for i in range(steps):
        ov = np.abs(np.sum(np.conj(ideal[i]) * tracked[i], axis=0))
        assert np.allclose(ov, 1.0, atol=1e-12)
    # phase alignment: overlap with the previous step is real positive
    for i in range(1, steps):
        ph = np.sum(np.conj(tracked[i - 1]) * tracked[i], axis=0)
        assert np.all(ph.real > 0)
        assert np.max(np.abs(ph.imag)) < 1e-12


def test_track_branches_flags_ambiguity():
    e = np.eye(2, dtype=complex)
    had = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    tracked, eps, amb = track_branches([e, had], quasienergies_by_xi=[[0.0, 1.0], [0.5, 0.7]])
    assert amb[1].all()  # both overlaps 1/2: genuinely ambiguous
    assert not amb[0].any()
    assert eps.shape == (2, 2)


def test_ideal_displaced_state_flags_resonant_points():
    xi = np.linspace(0.0, 1.0, 24)
    dim = 5
    coeffs = np.zeros((xi.size, dim), dtype=complex)
    coeffs[:, 0] = 1.0
    coeffs[:, 1] = (0.3 + 0.1j) * xi + 0.05 * xi**2
    coeffs[:, 2] = -0.04 * xi**3
    coeffs /= np.linalg.norm(coeffs, axis=1)[:, None]
    clean = coeffs.copy()
    coeffs[10] = np.array([0.1, 0.1, 0.9, 0.3, 0.2]) / np.linalg.norm([0.1, 0.1, 0.9, 0.3, 0.2])

    fit, flagged, failed = ideal_displaced_state(xi, coeffs)
    assert not failed
    assert flagged[10]
    assert not flagged[0]
    assert flagged.sum() == 1
    # the fit recovers the smooth family, not the corrupted row
    ov = np.abs(np.sum(np.conj(clean) * fit, axis=1))
    assert np.min(ov) > 0.999


def test_ideal_displaced_state_fit_failed_when_mostly_resonant():
    rng = np.random.default_rng(5)
    xi = np.linspace(0.0, 1.0, 16)
    coeffs = rng.normal(size=(16, 4)) + 1j * rng.normal(size=(16, 4))
    coeffs /= np.linalg.norm(coeffs, axis=1)[:, None]
    fit, flagged, failed = ideal_displaced_state(xi, coeffs, outlier_factor=0.1)
    assert failed
    assert not flagged[0]
    assert fit.shape == coeffs.shape
    with pytest.raises(ConfigurationError):
        ideal_displaced_state(xi[:5], coeffs[:5])


def test_xi_drive_energy_roundtrip(device):
    s = diagonalize(device)
    nz = n_zpf(device)
    for wd in (7.0, 33.5):
        ed = xi_to_drive_energy(1.3, wd, s.omega01, nz)
        xi_back = 2.0 * nz * wd * ed / (wd**2 - s.omega01**2)
        assert abs(xi_back - 1.3) < 1e-12


def test_stark_shift_formula():
    assert stark_shift_from_xi(0.8, -0.141) == pytest.approx(0.8**2 * -0.141 / 2.0)
    assert stark_shift_from_xi(0.0, -0.141) == 0.0


def test_drive_spec_validation():
    with pytest.raises(ConfigurationError):
        DriveSpec(omega_d=5.0, xi_grid=(0.1, 0.2))  # must start at 0
    with pytest.raises(ConfigurationError):
        DriveSpec(omega_d=5.0, xi_grid=(0.0, 0.2, 0.1))  # must increase
    with pytest.raises(ConfigurationError):
        DriveSpec(omega_d=5.0, xi_grid=(0.0, 0.5), time_steps=32)
    DriveSpec(omega_d=5.0, xi_grid=(0.0, 0.5), time_steps=64)


def test_floquet_scan_guards():
    ng = np.array([0.25])
    wd = np.array([5.0])
    xi = np.array([0.0, 0.5])
    ok = dict(
        gate_charges=ng,
        omega_d_grid=wd,
        xi_grid=xi,
        initial_states=(0,),
        quasienergies=np.zeros((1, 1, 1, 2)),
        branch_populations=np.zeros((1, 1, 1, 2)),
        resonant_flags=np.zeros((1, 1, 1, 2), dtype=bool),
    )
    FloquetScan(theta=np.zeros((1, 1, 1, 2)), **ok)
    with pytest.raises(NumericError):
        FloquetScan(theta=np.full((1, 1, 1, 2), 1.5), **ok)
    with pytest.raises(NumericError):
        FloquetScan(theta=np.array([[[[0.1, 0.2]]]]), **ok)  # theta(0) != 0
    bad = dict(ok, quasienergies=np.full((1, 1, 1, 2), 3.0))  # outside fold window
    with pytest.raises(NumericError):
        FloquetScan(theta=np.zeros((1, 1, 1, 2)), **bad)


@pytest.fixture(scope="module")
def small_scan(device):
    xi = np.linspace(0.0, 2.0, 9)
    return scar_map(device, [7.0, 33.5], xi, [0.25], initial_states=(0, 1), time_steps=128)


def test_scar_map_shapes_and_invariants(device, small_scan):
    scan = small_scan
    assert scan.theta.shape == (2, 1, 2, 9)
    assert np.all(scan.theta >= 0) and np.all(scan.theta <= 1)
    assert np.all(scan.theta[..., 0] == 0)
    assert np.all(np.abs(scan.quasienergies) <= scan.omega_d_grid[None, None, :, None] / 2 + 1e-12)
    # strong hybridization at a low drive frequency, near-none in the
    # far-detuned regime above the spectrum
    assert scan.theta[0, 0, 0, :].max() > 0.05
    assert scan.theta[0, 0, 1, :].max() < 1e-3
    s = scan.summary()
    assert s["states"][0]["max_theta"] == pytest.approx(scan.theta[0].max())
    assert scan.theta_charge_mean.shape == (2, 2, 9)


def test_scar_map_workers_bit_identical(device, small_scan):
    xi = np.linspace(0.0, 2.0, 9)
    again = scar_map(device, [7.0, 33.5], xi, [0.25], initial_states=(0, 1), time_steps=128, workers=2)
    assert np.array_equal(small_scan.theta, again.theta)
    assert np.array_equal(small_scan.quasienergies, again.quasienergies)


def test_scan_csv_and_json_roundtrip(small_scan, tmp_path):
    import csv
    import json

    p = tmp_path / "scan.csv"
    small_scan.write_csv(p)
    with open(p, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == small_scan.theta.size
    assert {"ng", "omega_d_GHz", "xi", "initial_state", "theta"} <= set(rows[0])
    got = float(rows[-1]["theta"])
    assert got == pytest.approx(small_scan.theta[-1, -1, -1, -1], rel=1e-9)

    j = tmp_path / "scan.json"
    small_scan.write_json(j)
    data = json.loads(j.read_text())
    assert data["kind"] == "floquet-scan"
    want = small_scan.summary()["states"][0]["max_theta"]
    assert data["states"][0]["max_theta"] == pytest.approx(want)


def test_branch_population_basis_state():
    mode = np.zeros(6, dtype=complex)
    mode[3] = 1.0
    assert branch_population(mode) == pytest.approx(3.0)
    w = np.arange(6.0) * 2.0
    assert branch_population(mode, weights=w) == pytest.approx(6.0)


def test_quantum_classical_scan_structure(device):
    xi = np.linspace(0.0, 7.0, 29)
    qc = quantum_classical_scan(device, 34.67, xi, initial_states=(0, 1), time_steps=128)
    assert qc.max_overlap.shape == (2, 29)
    assert np.all(qc.max_overlap <= 1.0 + 1e-12)
    assert np.allclose(qc.max_overlap[:, 0], 1.0)
    # both branches eventually leave the bare basis; the excited one first
    assert np.isfinite(qc.onset_xi).all()
    assert qc.onset_xi[1] <= qc.onset_xi[0]
