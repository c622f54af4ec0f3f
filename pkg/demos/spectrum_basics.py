"""Charge-basis transmon spectroscopy from two measured frequencies.

Fits (ej, ec) to the measured qubit frequency and anharmonicity, then prints
the level ladder, the charge dispersion of each level, and the charge extent
of the bound-state region.
"""

import numpy as np

from mmwave_qed import (
    charge_dispersion,
    diagonalize,
    fit_ej_ec,
    n_bound,
    n_zpf,
)

W01 = 3.083     # GHz
ALPHA = -0.141  # GHz

p = fit_ej_ec(W01, ALPHA)
s = diagonalize(p)

print(f"fitted ej = {p.ej:.5f} GHz, ec = {p.ec * 1e3:.2f} MHz  (ej/ec = {p.ej / p.ec:.1f})")
print(f"omega01 = {s.omega01:.4f} GHz, alpha = {s.anharmonicity * 1e3:.1f} MHz")
print(f"n_zpf = {n_zpf(p):.3f}, bound levels up to |{n_bound(p)}>")
print()
print(" k   E_k (GHz)   w_0k (GHz)   dispersion (MHz)")
e0 = s.energies - s.energies[0]
for k in range(8):
    disp = charge_dispersion(p, k) * 1e3
    print(f"{k:2d}  {e0[k]:9.4f}   {s.transition(0, k):9.4f}   {disp:12.6f}")

# the dispersion grows roughly exponentially with level: the top of the
# ladder is charge-sensitive long before the bound region ends
d = np.array([charge_dispersion(p, k) for k in range(1, 8)])
growth = d[1:] / d[:-1]
print(f"\nper-level dispersion growth factors: {np.array2string(growth, precision=1)}")
