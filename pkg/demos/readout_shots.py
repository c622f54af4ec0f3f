"""Single-shot dispersive readout at three probe powers.

Simulates heterodyne I/Q records with decay during the readout window and a
small thermal population, finds the equal-fidelity circular separatrix, and
reports assignment fidelities and SNR per power.
"""

import dataclasses
from pathlib import Path

from mmwave_qed import ReadoutModel, optimize_separatrix, simulate_shots, snr
from mmwave_qed.plots import iq_scatter_svg

OUT = Path(__file__).resolve().parent / "out"
OUT.mkdir(exist_ok=True)

base = ReadoutModel(
    omega_r=34.670,
    kappa=1.997e-3,
    chi=(0.0, -1.515e-3, -3.029e-3, -4.556e-3),
    probe_detuning=-1.515e-3 / 2,   # halfway between the |0> and |1> pulls
    nbar_r=10.0,
    tau_r=780e-9,
    eta=0.0174,
    t1=110e-6,
    thermal_pop=0.012,
)

SHOTS = 20000
print(f"{SHOTS} shots per state, eta = {base.eta}, tau_r = {base.tau_r * 1e9:.0f} ns")
print(f"{'nbar_r':>7} {'SNR':>6} {'F0':>7} {'F1':>7} {'F':>7}")
for k, nbar in enumerate((1.0, 10.0, 109.0)):
    m = dataclasses.replace(base, nbar_r=nbar)
    s0 = simulate_shots(m, 0, SHOTS, seed=(1, k, 0))
    s1 = simulate_shots(m, 1, SHOTS, seed=(1, k, 1))
    sep, f0, f1 = optimize_separatrix(s0, s1)
    print(f"{nbar:7.0f} {snr(s0, s1):6.2f} {f0:7.4f} {f1:7.4f} {0.5 * (f0 + f1):7.4f}")
    path = OUT / f"iq_nbar_{int(nbar)}.svg"
    iq_scatter_svg(
        path,
        [(s0.i, s0.q, "|0>"), (s1.i, s1.q, "|1>")],
        separatrix=sep,
        title=f"nbar_r = {nbar:.0f}",
    )
    print("        wrote", path)
