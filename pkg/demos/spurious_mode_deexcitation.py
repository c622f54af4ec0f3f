"""Drive-induced de-excitation of upper transmon levels into a spurious mode.

A weakly coupled package mode at 40 GHz sits above the readout drive. Under a
strong drive near 34.7 GHz the branches starting in |2,0> and |3,0> hit
single-photon two-quanta de-excitation resonances: the transmon drops two
levels while the mode gains a photon. The computational branches stay clean
over the same ramp.
"""

import numpy as np

from mmwave_qed import JointSystemParams, coupled_scar_map, fit_ej_ec

p = fit_ej_ec(3.083, -0.141)
jp = JointSystemParams(transmon=p, mode_freq=40.0, coupling=0.5)

labels = ((0, 0), (1, 0), (2, 0), (3, 0))
# the |2,0> crossing is narrow in xi -- keep the ramp step at 0.05 or finer
xi = np.linspace(0.0, 3.4, 69)
scan = coupled_scar_map(jp, [34.674], xi, initial_labels=labels)

print("drive at 34.674 GHz, xi ramp to 3.4")
print(f"{'branch':>8} {'max theta':>10} {'transmon drop':>14} {'mode rise':>10}")
for row, (t, r) in enumerate(labels):
    tpop = scan.transmon_populations[row, 0, 0]
    mpop = scan.mode_populations[row, 0, 0]
    drop = tpop[0] - tpop.min()
    rise = mpop.max() - mpop[0]
    print(f"  |{t},{r}> {scan.theta[row, 0, 0].max():10.3f} {drop:14.2f} {rise:10.2f}")

for row in (2, 3):
    tpop = scan.transmon_populations[row, 0, 0]
    hit = np.nonzero(tpop < tpop[0] - 1.0)[0]
    where = f"xi = {xi[hit[0]]:.2f}" if hit.size else "not crossed"
    print(f"branch |{labels[row][0]},0> de-excites at {where}")
