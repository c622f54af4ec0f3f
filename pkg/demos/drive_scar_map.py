"""Hybridization map of a driven transmon over drive frequency and strength.

Small desk-scale grid (a couple of minutes): drive frequencies from just above
the qubit up through the mm-wave band, drive strength xi up to 2. The map
shows dense scarring when the drive sits among the transmon harmonics and a
clean window far above the spectrum.
"""

from pathlib import Path

import numpy as np

from mmwave_qed import fit_ej_ec, scar_map
from mmwave_qed.plots import theta_heatmap_svg

OUT = Path(__file__).resolve().parent / "out"
OUT.mkdir(exist_ok=True)

p = fit_ej_ec(3.083, -0.141)
wd = np.linspace(5.0, 35.0, 31)
xi = np.linspace(0.0, 2.0, 16)

scan = scar_map(p, wd, xi, [0.25], initial_states=(0, 1), time_steps=256)

for row in scan.summary()["states"]:
    print(
        f"branch {row['initial_state']}: max theta = {row['max_theta']:.3f}, "
        f"flagged fraction = {row['flagged_fraction']:.3f}"
    )

low = (wd >= 5.0) & (wd <= 10.0)
high = (wd >= 30.0) & (wd <= 35.0)
for s, label in enumerate(("|0>", "|1>")):
    t = scan.theta[s, 0]
    print(
        f"{label}: fraction theta > 0.1  low band {np.mean(t[low] > 0.1):.3f}, "
        f"mm band {np.mean(t[high] > 0.1):.4f}"
    )

for s, label in enumerate(("0", "1")):
    path = OUT / f"theta_state_{label}.svg"
    theta_heatmap_svg(path, wd, xi, scan.theta[s, 0], title=f"hybridization, branch |{label}>")
    print("wrote", path)
