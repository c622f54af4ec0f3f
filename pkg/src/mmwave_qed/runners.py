"""Experiment execution: one function per config kind, plus the manifest.

Every run writes its machine-readable result JSON unconditionally; CSV and
SVG artifacts are gated by the config's `formats` list. A manifest.json with
the config hash, seed, library versions, and wall time accompanies every
output directory so results stay traceable to their inputs.
"""

import csv
import json
import math
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import scipy

from .calibration import (
    CalibrationCurve,
    decay_survival,
    detection_threshold,
    fit_quadratic_calibration,
)
from .config import ExperimentConfig, parse_time
from .coupled import (
    build_joint_hamiltonian,
    coupled_scar_map,
    cross_kerr,
    dress_and_truncate,
    g_from_chi,
    resonance_conditions,
)
from .errors import ConfigurationError, RangeError
from .floquet import scar_map
from .readout import (
    dephasing_rate,
    efficiency_and_noise,
    empty_cavity_frequency,
    measurement_rate,
    optimize_separatrix,
    simulate_shots,
    snr,
)
from .transmon import TransmonParams, charge_dispersion, diagonalize, n_bound, n_zpf

__all__ = ["run_experiment"]


def _jsonable(obj):
    """Recursively convert numpy scalars/arrays; NaN becomes null."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return None if math.isnan(f) else f
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(_jsonable(obj), f, indent=2, sort_keys=True)
        f.write("\n")


def _label_file(label) -> str:
    """Filesystem-safe state tag: 2 -> '2', (2, 0) -> '2-0'."""
    if isinstance(label, tuple):
        return "-".join(str(v) for v in label)
    return str(label)


def _scan_svgs(scan, out, cfg, prefix):
    names = []
    if not cfg.wants("svg"):
        return names
    from .plots import theta_heatmap_svg

    for s, label in enumerate(scan.initial_states):
        name = f"{prefix}_state_{_label_file(label)}.svg"
        theta_heatmap_svg(
            out / name,
            scan.omega_d_grid,
            scan.xi_grid,
            scan.theta_charge_mean[s],
            title=f"initial state {label}",
        )
        names.append(name)
    return names


# ---------------------------------------------------------------------------
# kind runners; each returns the list of files it wrote (names relative to out)


def _run_spectrum(job, cfg, out, workers):
    p = job.source.materialize()
    spec = diagonalize(p)
    levels = min(job.levels, p.dimension - 3)
    rows = []
    for k in range(levels):
        rows.append(
            {
                "level": k,
                "energy_GHz": spec.energies[k] - spec.energies[0],
                "transition_GHz": spec.transition(k - 1, k) if k else 0.0,
                "dispersion_GHz": charge_dispersion(p, k),
            }
        )
    result = {
        "ej_GHz": p.ej,
        "ec_GHz": p.ec,
        "ej_over_ec": p.ej / p.ec,
        "ng": p.ng,
        "charge_cutoff": p.charge_cutoff,
        "omega01_GHz": spec.omega01,
        "alpha_GHz": spec.anharmonicity,
        "n_bound": n_bound(p),
        "n_zpf": n_zpf(p),
        "levels": rows,
    }
    names = ["spectrum.json"]
    _write_json(out / "spectrum.json", result)
    if cfg.wants("csv"):
        with open(out / "spectrum.csv", "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow(["level", "energy_GHz", "transition_GHz", "dispersion_GHz"])
            for r in rows:
                w.writerow(
                    [
                        r["level"],
                        f"{r['energy_GHz']:.12g}",
                        f"{r['transition_GHz']:.12g}",
                        f"{r['dispersion_GHz']:.12g}",
                    ]
                )
        names.append("spectrum.csv")
    if cfg.wants("svg"):
        from .plots import lines_svg

        disp = [max(r["dispersion_GHz"], 1e-18) for r in rows]
        lines_svg(
            out / "dispersion.svg",
            [r["level"] for r in rows],
            [(disp, "charge dispersion")],
            xlabel="level",
            ylabel="dispersion (GHz)",
            logy=True,
        )
        names.append("dispersion.svg")
    return names


def _run_scar_map(job, cfg, out, workers):
    p = job.source.materialize()
    scan = scar_map(
        p,
        job.omega_d,
        job.xi,
        job.gate_charges,
        initial_states=job.initial_states,
        time_steps=job.time_steps,
        workers=workers,
    )
    names = ["scan.json"]
    summary = scan.summary()
    summary["device"] = {"ej_GHz": p.ej, "ec_GHz": p.ec, "omega01_GHz": diagonalize(p).omega01}
    _write_json(out / "scan.json", summary)
    if cfg.wants("csv"):
        scan.write_csv(out / "scan.csv")
        names.append("scan.csv")
    names += _scan_svgs(scan, out, cfg, "theta")
    return names


def _run_coupled_map(job, cfg, out, workers):
    p = job.source.materialize()
    d = dress_and_truncate(build_joint_hamiltonian(p), p)
    chi = []
    for n in range(min(4, p.transmon_levels)):
        try:
            chi.append(cross_kerr(d, n))
        except RangeError:  # level not inside the kept dressed set
            break
    resonances = [
        {"stark_GHz": s, "conditions": dict(resonance_conditions(d, s))}
        for s in job.stark_values
    ]
    scan = coupled_scar_map(
        p,
        job.omega_d,
        job.xi,
        initial_labels=job.initial_labels,
        time_steps=job.time_steps,
        workers=workers,
        resonance_guard=job.resonance_guard,
    )
    summary = scan.summary()
    summary["device"] = {
        "ej_GHz": p.transmon.ej,
        "ec_GHz": p.transmon.ec,
        "mode_freq_GHz": p.mode_freq,
        "coupling_GHz": p.coupling,
        "dressed_omega01_GHz": d.transition((0, 0), (1, 0)),
        "dressed_mode_GHz": d.transition((0, 0), (0, 1)),
        "chi_GHz": chi,
    }
    summary["resonances"] = resonances
    names = ["scan.json"]
    _write_json(out / "scan.json", summary)
    if cfg.wants("csv"):
        scan.write_csv(out / "scan.csv")
        names.append("scan.csv")
    names += _scan_svgs(scan, out, cfg, "theta")
    return names


def _run_readout_fidelity(job, cfg, out, workers):
    entries = []
    names = ["fidelity.json"]
    for k, nbar in enumerate(job.nbar_values):
        m = replace(job.model, nbar_r=nbar)
        s0 = simulate_shots(m, 0, job.shots, (cfg.seed, k, 0), workers=workers)
        s1 = simulate_shots(m, 1, job.shots, (cfg.seed, k, 1), workers=workers)
        sep, f0, f1 = optimize_separatrix(s0, s1)
        entries.append(
            {
                "nbar_r": nbar,
                "shots": job.shots,
                "fidelity_0": f0,
                "fidelity_1": f1,
                "snr": snr(s0, s1),
                "separatrix": {"center": list(sep.center), "radius": sep.radius},
            }
        )
        if cfg.wants("csv"):
            name = f"shots_{k}.csv"
            with open(out / name, "w", newline="", encoding="utf-8") as f:
                w = csv.writer(f)
                w.writerow(["I", "Q", "prepared", "assigned"])
                for s in (s0, s1):
                    assigned = sep.assign(s)
                    for j in range(len(s)):
                        w.writerow(
                            [
                                f"{s.i[j]:.12g}",
                                f"{s.q[j]:.12g}",
                                int(s.prepared[j]),
                                int(assigned[j]),
                            ]
                        )
            names.append(name)
        if cfg.wants("svg"):
            from .plots import iq_scatter_svg

            name = f"iq_{k}.svg"
            iq_scatter_svg(
                out / name,
                [(s0.i, s0.q, "prepared 0"), (s1.i, s1.q, "prepared 1")],
                separatrix=sep,
                title=f"nbar_r = {nbar:g}",
            )
            names.append(name)
    _write_json(out / "fidelity.json", {"points": entries})
    return names


_MHZ = 2.0 * math.pi * 1e6  # rad/s per (2pi MHz)


def _eval_check(name, c):
    """One closed-form consistency check -> {value, expected, pass, ...}."""
    if name == "g_estimate":
        value = g_from_chi(c["omega_r_GHz"], c["omega_1_GHz"], c["chi1_GHz"], c["alpha_GHz"])
        ok = abs(value - c["expected_GHz"]) <= c["atol_GHz"]
    elif name == "n_bound":
        value = n_bound(TransmonParams(ej=c["ej_GHz"], ec=c["ec_GHz"]))
        ok = value == c["expected"]
    elif name == "empty_cavity":
        value = empty_cavity_frequency(c["l2_mm"] * 1e-3, c["l3_mm"] * 1e-3)
        ok = abs(value - c["expected_GHz"]) <= c["atol_GHz"]
    elif name == "dephasing":
        value = dephasing_rate(c["nbar_r"], c["kappa_GHz"], c["chi1_GHz"]) / _MHZ
        ok = abs(value - c["expected_2pi_MHz"]) <= c["rtol"] * abs(c["expected_2pi_MHz"])
    elif name == "efficiency_point":
        eta, nbar_sys = efficiency_and_noise(
            c["gamma_m_2pi_MHz"] * _MHZ, c["gamma_phi_2pi_MHz"] * _MHZ
        )
        ok = (
            abs(eta - c["expected_eta"]) <= c["atol_eta"]
            and abs(nbar_sys - c["expected_nbar_sys"]) <= c["atol_nbar_sys"]
        )
        return {"eta": eta, "nbar_sys": nbar_sys, "pass": bool(ok)}
    elif name == "detection":
        value = detection_threshold(c["n_shots"], c["p_baseline"], c["confidence"])
        factor = c["factor"]
        ok = c["expected"] / factor <= value <= c["expected"] * factor
    elif name == "survival":
        value = decay_survival(parse_time(c["tau_total"]), parse_time(c["t1"]))
        ok = abs(value - c["expected"]) <= c["rtol"] * abs(c["expected"])
    else:  # config parsing already rejected unknown names
        raise ConfigurationError(f"unknown check '{name}'")
    return {"value": value, "pass": bool(ok)}


def _run_efficiency(job, cfg, out, workers):
    result = {}
    names = ["efficiency.json"]
    if job.model is not None:
        m = job.model
        s0 = simulate_shots(m, 0, job.shots, (cfg.seed, 0), workers=workers)
        s1 = simulate_shots(m, 1, job.shots, (cfg.seed, 1), workers=workers)
        r = snr(s0, s1)
        gm = measurement_rate(r, m.tau_r)
        gphi = dephasing_rate(m.nbar_r, m.kappa, m.chi[1])
        eta, nbar_sys = efficiency_and_noise(gm, gphi)
        result["simulated"] = {
            "shots": job.shots,
            "nbar_r": m.nbar_r,
            "snr": r,
            "gamma_m_2pi_MHz": gm / _MHZ,
            "gamma_phi_2pi_MHz": gphi / _MHZ,
            "eta": eta,
            "nbar_sys": nbar_sys,
            "eta_injected": m.eta,
        }
        if cfg.wants("svg"):
            from .plots import iq_scatter_svg

            sep, _, _ = optimize_separatrix(s0, s1)
            iq_scatter_svg(
                out / "iq.svg",
                [(s0.i, s0.q, "prepared 0"), (s1.i, s1.q, "prepared 1")],
                separatrix=sep,
                title=f"nbar_r = {m.nbar_r:g}",
            )
            names.append("iq.svg")
    if job.checks is not None:
        evaluated = {}
        for name, c in job.checks.items():
            entry = _eval_check(name, c)
            entry["inputs"] = c
            evaluated[name] = entry
        result["checks"] = evaluated
        result["all_pass"] = all(e["pass"] for e in evaluated.values())
    _write_json(out / "efficiency.json", result)
    return names


def _load_curve_csv(path, chi1) -> CalibrationCurve:
    try:
        with open(path, newline="", encoding="utf-8") as f:
            rows = list(csv.DictReader(f))
    except OSError as exc:
        raise ConfigurationError(f"cannot read calibration CSV {path}: {exc}") from exc
    needed = {"amplitude", "shift_GHz", "sigma_GHz"}
    if not rows or not needed.issubset(rows[0]):
        raise ConfigurationError(
            f"calibration CSV {path} needs columns {sorted(needed)} and at least one row"
        )
    return CalibrationCurve(
        amplitudes=np.array([float(r["amplitude"]) for r in rows]),
        stark_shifts=np.array([float(r["shift_GHz"]) for r in rows]),
        sigmas=np.array([float(r["sigma_GHz"]) for r in rows]),
        chi1=chi1,
    )


def _run_calibrate(job, cfg, out, workers):
    if job.curve is not None:
        curve = job.curve
    else:
        csv_path = Path(job.data_csv)
        if not csv_path.is_absolute():
            csv_path = Path(cfg.source_path).parent / csv_path
        curve = _load_curve_csv(csv_path, job.chi1)
    fit = fit_quadratic_calibration(curve)
    result = {
        "chi1_GHz": curve.chi1,
        "points": len(curve.amplitudes),
        "a": fit.a,
        "sigma_a": fit.sigma_a,
        "amp_max": fit.amp_max,
        "extrapolations": [
            {
                "amplitude": a,
                "photons": fit.photons(a),
                "factor_beyond_calibrated": fit.extrapolation_factor(a),
            }
            for a in job.extrapolate
        ],
    }
    names = ["calibration.json"]
    _write_json(out / "calibration.json", result)
    if cfg.wants("csv"):
        with open(out / "calibration.csv", "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow(["amplitude", "shift_GHz", "sigma_GHz", "photons"])
            for a, s, sg, n in zip(
                curve.amplitudes, curve.stark_shifts, curve.sigmas, curve.photons
            ):
                w.writerow([f"{a:.12g}", f"{s:.12g}", f"{sg:.12g}", f"{n:.12g}"])
        names.append("calibration.csv")
    if cfg.wants("svg"):
        from .plots import calibration_svg

        calibration_svg(out / "calibration.svg", curve.amplitudes, curve.photons, fit)
        names.append("calibration.svg")
    return names


def _run_thresholds(job, cfg, out, workers):
    delta = detection_threshold(job.n_shots, job.p_baseline, job.confidence)
    result = {
        "n_shots": job.n_shots,
        "p_baseline": job.p_baseline,
        "confidence": job.confidence,
        "min_detectable_drop": delta,
    }
    if job.survival is not None:
        tau_total, t1 = job.survival
        result["survival"] = {
            "tau_total_s": tau_total,
            "t1_s": t1,
            "probability": decay_survival(tau_total, t1),
        }
    _write_json(out / "thresholds.json", result)
    return ["thresholds.json"]


_RUNNERS = {
    "spectrum": _run_spectrum,
    "scar-map": _run_scar_map,
    "coupled-map": _run_coupled_map,
    "readout-fidelity": _run_readout_fidelity,
    "efficiency": _run_efficiency,
    "calibrate": _run_calibrate,
    "thresholds": _run_thresholds,
}


def run_experiment(cfg: ExperimentConfig, out_dir=None, workers=None) -> dict:
    """Execute a parsed config and write its artifacts; returns the manifest.

    Output directory priority: explicit `out_dir` argument, then the config's
    `out_dir` key, then `<config stem>_out` next to the current directory.
    """
    stem = Path(cfg.source_path).stem or "experiment"
    out = Path(out_dir or cfg.out_dir or f"{stem}_out")
    out.mkdir(parents=True, exist_ok=True)

    t0 = time.perf_counter()
    outputs = _RUNNERS[cfg.kind](cfg.payload, cfg, out, workers)
    wall = time.perf_counter() - t0

    from . import __version__

    manifest = {
        "config": Path(cfg.source_path).name,
        "config_sha256": cfg.sha256,
        "kind": cfg.kind,
        "seed": cfg.seed,
        "workers": workers if workers is not None else "auto",
        "versions": {
            "mmwave_qed": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": sys.version.split()[0],
        },
        "wall_time_s": round(wall, 3),
        "out_dir": str(out),
        "outputs": outputs,
    }
    _write_json(out / "manifest.json", manifest)
    return manifest
