"""Transmon coupled to a single far-detuned mode: fit, shifts, resonances.

Fits (ej, ec, mode frequency, coupling) so the dressed system reproduces the
measured qubit frequency, anharmonicity, readout-mode frequency and chi_1,
then prints the dispersive ladder and the drive frequencies at which the
cavity-mediated scar processes are predicted, with and without the AC-Stark
shift at finite drive strength.
"""

from mmwave_qed import (
    build_joint_hamiltonian,
    cross_kerr,
    dress_and_truncate,
    fit_joint,
    g_from_chi,
    resonance_conditions,
    stark_shift_from_xi,
)

W01, ALPHA = 3.083, -0.141
OMEGA_R, CHI1 = 34.670, -1.515e-3

jp = fit_joint(W01, ALPHA, OMEGA_R, CHI1)
d = dress_and_truncate(build_joint_hamiltonian(jp), jp)

print(f"bare fit: ej = {jp.transmon.ej:.5f}, ec = {jp.transmon.ec:.6f}, "
      f"mode = {jp.mode_freq:.5f} GHz, g = {jp.coupling:.4f} GHz")
print(f"closed-form g estimate from chi_1: {g_from_chi(OMEGA_R, W01, CHI1, ALPHA):.4f} GHz")
print()
print("dressed observables:")
print(f"  w01 = {d.transition((0, 0), (1, 0)):.4f} GHz")
print(f"  w_r = {d.transition((0, 0), (0, 1)):.4f} GHz")
for n in range(1, 4):
    print(f"  chi_{n} = {cross_kerr(d, n) * 1e6:.1f} kHz")

alpha_d = d.transition((1, 0), (2, 0)) - d.transition((0, 0), (1, 0))
print("\nresonance conditions (GHz):")
print(f"{'process':>12}   xi = 0     xi = 0.8")
stark = stark_shift_from_xi(0.8, alpha_d)
cold = dict(resonance_conditions(d))
warm = dict(resonance_conditions(d, stark))
for name in cold:
    print(f"{name:>12}   {cold[name]:8.4f}   {warm[name]:8.4f}")
print(f"\nAC-Stark shift at xi = 0.8: {stark * 1e3:.1f} MHz")
