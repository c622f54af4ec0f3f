import numpy as np
import pytest

from conftest import ALPHA, CHI, OMEGA_R, W01
from mmwave_qed import (
    ConfigurationError,
    DomainError,
    FitError,
    JointSystemParams,
    RangeError,
    build_joint_hamiltonian,
    coupled_scar_map,
    cross_kerr,
    diagonalize,
    dress_and_truncate,
    fit_joint,
    g_from_chi,
    resonance_conditions,
)

MHZ = 1e-3


def _dressed(jp):
    return dress_and_truncate(build_joint_hamiltonian(jp), jp)


def test_params_validation(device):
    with pytest.raises(ConfigurationError):
        JointSystemParams(transmon=device, mode_freq=40.0, coupling=-0.1)
    with pytest.raises(ConfigurationError):
        JointSystemParams(transmon=device, mode_freq=0.0, coupling=0.5)
    with pytest.raises(ConfigurationError):
        JointSystemParams(transmon=device, mode_freq=40.0, coupling=0.5, keep_dressed=300)
    with pytest.raises(ConfigurationError):
        JointSystemParams(transmon=device, mode_freq=40.0, coupling=0.5, transmon_levels=99)


def test_joint_hamiltonian_hermitian(device):
    jp = JointSystemParams(transmon=device, mode_freq=40.0, coupling=0.5,
                           transmon_levels=8, mode_levels=3, keep_dressed=20)
    h = build_joint_hamiltonian(jp)
    assert h.shape == (24, 24)
    assert np.max(np.abs(h - h.conj().T)) < 1e-12


def test_zero_coupling_is_separable(device):
    jp = JointSystemParams(transmon=device, mode_freq=40.0, coupling=0.0,
                           transmon_levels=10, mode_levels=4, keep_dressed=30)
    d = _dressed(jp)
    s = diagonalize(device)
    e0 = s.energies[:10] - s.energies[0]
    for k, (t, r) in enumerate(d.labels):
        want = e0[t] + r * 40.0
        assert abs((d.energies[k] - d.energies[d.index_of(0, 0)]) - want) < 1e-9
    assert not d.hybridized.any()
    assert all(cross_kerr(d, n) == pytest.approx(0.0, abs=1e-9) for n in range(3))


def test_dressed_labels_and_lookup(device):
    jp = JointSystemParams(transmon=device, mode_freq=40.0, coupling=0.5,
                           transmon_levels=12, mode_levels=3, keep_dressed=30)
    d = _dressed(jp)
    assert len({tuple(l) for l in d.labels}) == 30  # injective labelling
    i10 = d.index_of(1, 0)
    assert d.labels[i10] == (1, 0)
    assert d.transition((0, 0), (1, 0)) > 0
    with pytest.raises(RangeError):
        d.index_of(25, 0)
    with pytest.raises(RangeError):
        d.energy_of(0, 9)


def test_cross_kerr_monotone_negative(joint_fit):
    d = _dressed(joint_fit)
    chi = [cross_kerr(d, n) for n in range(4)]
    assert chi[0] == 0.0
    assert all(c < 0 for c in chi[1:])
    assert chi[1] > chi[2] > chi[3]  # grows in magnitude with qubit level


def test_g_from_chi_value_and_guard():
    g = g_from_chi(OMEGA_R, W01, CHI[1], ALPHA)
    assert g == pytest.approx(1.26054, abs=2e-4)
    with pytest.raises(DomainError):
        g_from_chi(OMEGA_R, W01, +1.5e-3, ALPHA)
    with pytest.raises(DomainError):
        g_from_chi(OMEGA_R, W01, CHI[1], 0.0)


def test_fit_joint_reproduces_dressed_observables(joint_fit):
    d = _dressed(joint_fit)
    assert abs(d.transition((0, 0), (1, 0)) - W01) < 1e-4
    alpha = d.transition((1, 0), (2, 0)) - d.transition((0, 0), (1, 0))
    assert abs(alpha - ALPHA) < 1e-4
    assert abs(d.transition((0, 0), (0, 1)) - OMEGA_R) < 1e-4
    assert abs(cross_kerr(d, 1) - CHI[1]) < 1e-4  # fit tolerance, GHz
    # fitted coupling agrees with the closed-form estimate to the accuracy
    # that formula carries
    assert abs(joint_fit.coupling - 1.26) / 1.26 < 0.25
    # higher shifts come out without being fitted
    assert cross_kerr(d, 2) / MHZ == pytest.approx(CHI[2] / MHZ, abs=0.35)
    assert cross_kerr(d, 3) / MHZ == pytest.approx(CHI[3] / MHZ, abs=0.45)


def test_fit_joint_edge_targets():
    # chi1 = 0 has the exact solution g = 0 and must converge to it
    jp = fit_joint(W01, ALPHA, OMEGA_R, 0.0)
    assert jp.coupling == pytest.approx(0.0, abs=1e-6)
    # a wrong-sign shift is unreachable for a mode far above the qubit:
    # the coupling direction drops out of the Jacobian
    with pytest.raises(FitError):
        fit_joint(W01, ALPHA, OMEGA_R, +abs(CHI[1]))


def test_resonance_conditions_signs(joint_fit):
    d = _dressed(joint_fit)
    base = dict(resonance_conditions(d))
    assert set(base) == {"exchange", "pair_01", "pair_12", "deexcite_20", "deexcite_31"}
    ds = 0.02
    hi = dict(resonance_conditions(d, stark=+ds))
    lo = dict(resonance_conditions(d, stark=-ds))
    slope = {k: (hi[k] - lo[k]) / (2 * ds) for k in base}
    assert slope["exchange"] == pytest.approx(-0.5)
    assert slope["pair_01"] == pytest.approx(+0.5)
    assert slope["pair_12"] == pytest.approx(+0.5)
    assert slope["deexcite_20"] == pytest.approx(-1.0)
    assert slope["deexcite_31"] == pytest.approx(-1.0)
    # the two-photon pair creation and exchange conditions bracket the mode
    w_mode = d.transition((0, 0), (0, 1))
    assert base["exchange"] + base["pair_01"] == pytest.approx(w_mode)
    # ordering around the mode frequency for a qubit far below it
    assert base["exchange"] < w_mode / 2 < base["pair_01"]


def test_coupled_map_guard_near_mode(joint_fit):
    wd_bad = joint_fit.mode_freq + 0.003  # inside the default 10 MHz guard
    with pytest.raises(RangeError):
        coupled_scar_map(joint_fit, [wd_bad], np.linspace(0.0, 0.5, 9), time_steps=64)


def test_coupled_map_population_channels(device):
    jp = JointSystemParams(transmon=device, mode_freq=40.0, coupling=0.5,
                           transmon_levels=12, mode_levels=3, keep_dressed=25)
    xi = np.linspace(0.0, 1.0, 9)
    scan = coupled_scar_map(jp, [34.674], xi, initial_labels=((0, 0), (1, 0)), time_steps=128)
    assert scan.theta.shape == (2, 1, 1, 9)
    assert scan.transmon_populations is not None
    assert scan.mode_populations is not None
    total = scan.transmon_populations + scan.mode_populations
    assert np.allclose(total, scan.branch_populations, atol=1e-9)
    # undriven start: populations are the bare labels
    assert scan.transmon_populations[0, 0, 0, 0] == pytest.approx(0.0, abs=0.02)
    assert scan.transmon_populations[1, 0, 0, 0] == pytest.approx(1.0, abs=0.02)
    assert np.all(scan.mode_populations[:, :, :, 0] < 0.02)
