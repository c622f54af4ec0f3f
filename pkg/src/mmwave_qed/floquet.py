"""Floquet analysis of the charge-driven transmon.

Pipeline: one-period propagator -> Floquet modes and quasienergies -> branch
tracking vs drive strength -> smooth reference ("ideal displaced") states ->
hybridization maps averaged over gate charge.

Drive convention: H(t) = H0 + E_d * n_hat * cos(2*pi*omega_d*t) with all
energies in h*GHz and time in ns, so exp(-i*2*pi*H*t) is the propagator
phase. The dimensionless drive strength is
xi = 2*n_zpf*omega_d*E_d / (omega_d^2 - omega_q^2).
"""

from dataclasses import dataclass, field, replace
import csv
import json

import numpy as np
import scipy.linalg
from joblib import Parallel, delayed
from scipy.optimize import linear_sum_assignment

from .errors import ConfigurationError, DomainError, NumericError
from .transmon import (
    TransmonParams,
    build_hamiltonian,
    charge_numbers,
    diagonalize,
    n_zpf,
)

__all__ = [
    "DriveSpec",
    "FloquetScan",
    "QuantumClassicalScan",
    "xi_to_drive_energy",
    "stark_shift_from_xi",
    "period_propagator",
    "one_period_propagator",
    "fold_quasienergy",
    "floquet_modes",
    "track_branches",
    "ideal_displaced_state",
    "hybridization",
    "branch_population",
    "scar_map",
    "quantum_classical_scan",
]


# ---------------------------------------------------------------------------
# drive parametrization


def xi_to_drive_energy(xi: float, omega_d: float, omega_q: float, nzpf: float) -> float:
    """Invert the dimensionless drive strength: E_d = xi*(omega_d^2 - omega_q^2)/(2*nzpf*omega_d)."""
    if abs(omega_d - omega_q) <= 1e-9 * max(1.0, abs(omega_d)):
        raise DomainError(
            f"drive on qubit resonance (omega_d = {omega_d} ~ omega_q = {omega_q}); "
            "xi is singular there"
        )
    return xi * (omega_d**2 - omega_q**2) / (2.0 * nzpf * omega_d)


def stark_shift_from_xi(xi: float, alpha: float) -> float:
    """Drive-induced qubit shift xi^2 * alpha / 2 (negative for negative alpha)."""
    return 0.5 * xi**2 * alpha


@dataclass(frozen=True)
class DriveSpec:
    """One drive column: frequency, a ramp of xi values starting at 0, step count."""

    omega_d: float
    xi_grid: tuple
    time_steps: int = 256

    def __post_init__(self):
        xi = np.asarray(self.xi_grid, dtype=float)
        if xi.ndim != 1 or xi.size < 1 or xi[0] != 0.0:
            raise ConfigurationError("xi_grid must be 1D and start at 0")
        if np.any(np.diff(xi) <= 0):
            raise ConfigurationError("xi_grid must be strictly increasing")
        if int(self.time_steps) < 64:
            raise ConfigurationError(f"time_steps must be >= 64, got {self.time_steps}")
        if not self.omega_d > 0:
            raise ConfigurationError(f"omega_d must be positive, got {self.omega_d}")


# ---------------------------------------------------------------------------
# propagator and Floquet modes


def period_propagator(h0, drive_op, omega_d: float, ed: float, time_steps: int = 256):
    """One-period propagator of H(t) = h0 + ed*cos(2*pi*omega_d*t)*drive_op.

    Ordered product of piecewise-constant steps exp(-i*2*pi*H(t_k)*dt) with
    H evaluated at step midpoints. The cosine midpoint grid is mirror
    symmetric, c_k = c_(M-1-k), so only M//2 (+1 if odd) distinct step
    Hamiltonians need an eigendecomposition; for real-symmetric inputs each
    step matrix is complex symmetric and the period product collapses to
    P^T (S_mid) P with P the first-half product.
    """
    m = int(time_steps)
    if m < 64:
        raise ConfigurationError(f"time_steps must be >= 64, got {time_steps}")
    h0 = np.asarray(h0)
    drive_op = np.asarray(drive_op)
    dt = 1.0 / (omega_d * m)
    half = m // 2
    coeffs = ed * np.cos(2.0 * np.pi * (np.arange(half) + 0.5) / m)

    hs = h0[None, :, :] + coeffs[:, None, None] * drive_op[None, :, :]
    w, v = np.linalg.eigh(hs)
    phases = np.exp(-2j * np.pi * w * dt)
    steps = np.matmul(v * phases[:, None, :], np.swapaxes(v, 1, 2).conj())

    p = steps[0]
    for k in range(1, half):
        p = steps[k] @ p  # chronological: later steps multiply from the left

    if m % 2:
        wm, vm = np.linalg.eigh(h0 - ed * drive_op)  # midpoint cosine is exactly -1
        mid = (vm * np.exp(-2j * np.pi * wm * dt)) @ vm.conj().T
    else:
        mid = None

    if np.isrealobj(h0) and np.isrealobj(drive_op):
        left = p.T  # steps of a real-symmetric H are complex symmetric
    else:
        left = steps[0]  # mirrored second half, applied in reversed order
        for k in range(1, half):
            left = left @ steps[k]

    u = left @ mid @ p if mid is not None else left @ p

    defect = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
    if defect > 1e-6:
        raise NumericError(
            "propagator lost unitarity; increase time_steps",
            diagnostics={"max|U+U - I|": float(defect), "time_steps": m},
        )
    return u


def one_period_propagator(p: TransmonParams, omega_d: float, ed: float, time_steps: int = 256):
    """Transmon-specialized wrapper around :func:`period_propagator` (charge basis)."""
    return period_propagator(
        build_hamiltonian(p), np.diag(charge_numbers(p)), omega_d, ed, time_steps
    )


def fold_quasienergy(energy, omega_d: float):
    """Fold energies into the Floquet Brillouin zone (-omega_d/2, omega_d/2]."""
    e = np.mod(np.asarray(energy, dtype=float), omega_d)
    e = np.where(e > omega_d / 2, e - omega_d, e)
    return e if e.ndim else float(e)


def floquet_modes(u, omega_d: float):
    """Eigen-decompose a one-period propagator.

    Returns (quasienergies, modes): quasienergy eps_k = -arg(lambda_k)*omega_d/(2*pi)
    folded into (-omega_d/2, omega_d/2]; modes are the orthonormal columns of the
    (complex) Schur factorization, which coincide with eigenvectors for a
    healthy unitary input.
    """
    t, q = scipy.linalg.schur(np.asarray(u, dtype=complex), output="complex")
    offdiag = np.max(np.abs(t - np.diag(np.diag(t))))
    if offdiag > 1e-6:
        raise NumericError(
            "defective propagator decomposition (input far from unitary?)",
            diagnostics={"max off-diagonal": float(offdiag)},
        )
    lam = np.diag(t)
    eps = fold_quasienergy(-np.angle(lam) * omega_d / (2.0 * np.pi), omega_d)
    return eps, q


# ---------------------------------------------------------------------------
# branch continuation


def track_branches(modes_by_xi, quasienergies_by_xi=None, initial=None, ambiguity_tol=1e-6):
    """Assign Floquet modes to continuous branches along a drive ramp.

    modes_by_xi : sequence of (dim, n_modes) matrices, one per xi step.
    initial : branch seed matrix at xi = 0 (defaults to the first entry).
    Assignment at each step maximizes total squared overlap with the previous
    branch set via a globally optimal permutation; near-ties (squared overlaps
    within `ambiguity_tol`) are resolved toward the lower mode index and
    flagged. Each tracked mode is phase-aligned with its predecessor so the
    coefficients vary smoothly.

    Returns (tracked, quasienergies, ambiguous) with shapes
    (n_xi, dim, n_branches), (n_xi, n_branches) or None, (n_xi, n_branches).
    """
    mats = [np.asarray(m, dtype=complex) for m in modes_by_xi]
    n_xi = len(mats)
    dim, _ = mats[0].shape
    ref = np.asarray(initial, dtype=complex) if initial is not None else mats[0]
    nb = ref.shape[1]

    tracked = np.empty((n_xi, dim, nb), dtype=complex)
    eps_out = None if quasienergies_by_xi is None else np.empty((n_xi, nb))
    ambiguous = np.zeros((n_xi, nb), dtype=bool)
    rows = np.arange(nb)

    for i, m in enumerate(mats):
        ov = np.abs(ref.conj().T @ m) ** 2  # (nb, n_modes)
        cost = -ov + 1e-12 * np.arange(m.shape[1])[None, :]  # deterministic tie-break
        _, cols = linear_sum_assignment(cost)
        best = ov[rows, cols]
        masked = ov.copy()
        masked[rows, cols] = -np.inf
        runner_up = masked.max(axis=1) if m.shape[1] > 1 else np.full(nb, -np.inf)
        ambiguous[i] = best - runner_up < ambiguity_tol

        sel = m[:, cols]
        phase = np.sum(ref.conj() * sel, axis=0)
        phase = np.where(np.abs(phase) < 1e-300, 1.0, phase)
        sel = sel * (np.abs(phase) / phase)[None, :]

        tracked[i] = sel
        if eps_out is not None:
            eps_out[i] = np.asarray(quasienergies_by_xi[i])[cols]
        ref = sel
    return tracked, eps_out, ambiguous


def ideal_displaced_state(xi_grid, coeffs, degree=4, iterations=3, outlier_factor=10.0):
    """Fit the smooth drive-deformed continuation of one tracked branch.

    Each complex coefficient is fabricated as a degree-`degree` polynomial in
    xi whose constant term is pinned to the xi = 0 coefficient, with
    `iterations` rounds of outlier rejection at `outlier_factor` times the
    median residual. Flagged points are the resonance candidates.

    Returns (states, flags, fit_failed): states is (n_xi, dim) and normalized
    at every xi; fit_failed is True when more than 60% of the ramp is flagged
    (branch resonant over most of the ramp) -- the last fit is still returned
    so a hybridization can be reported against it.
    """
    xi = np.asarray(xi_grid, dtype=float)
    cfs = np.asarray(coeffs, dtype=complex)
    if xi.size < 8:
        raise ConfigurationError(f"need at least 8 xi points for the reference fit, got {xi.size}")
    c0 = cfs[0]
    y = cfs - c0[None, :]
    vm = np.vander(xi, degree + 1, increasing=True)[:, 1:]  # constant term pinned
    good = np.ones(xi.size, dtype=bool)
    fit = flagged = None
    for it in range(iterations + 1):
        sol, *_ = np.linalg.lstsq(vm[good], y[good], rcond=None)
        fit = c0[None, :] + vm @ sol
        resid = np.linalg.norm(cfs - fit, axis=1)
        med = np.median(resid[good])
        flagged = resid > outlier_factor * max(med, 1e-12)
        flagged[0] = False  # the xi = 0 anchor is never an outlier
        if it < iterations:
            good = ~flagged
    norms = np.linalg.norm(fit, axis=1)
    fit = fit / np.where(norms == 0, 1.0, norms)[:, None]
    fit_failed = bool(flagged.mean() > 0.6)
    return fit, flagged, fit_failed


def hybridization(floquet_state, ideal_state) -> float:
    """Theta = 1 - |<ideal|floquet>|^2, clipped into [0, 1] against round-off."""
    ov = np.vdot(np.asarray(ideal_state), np.asarray(floquet_state))
    return float(np.clip(1.0 - np.abs(ov) ** 2, 0.0, 1.0))


def branch_population(mode, weights=None) -> float:
    """Average level index sum_j w_j |<j|mode>|^2 (w_j = j unless given)."""
    probs = np.abs(np.asarray(mode)) ** 2
    w = np.arange(probs.shape[-1], dtype=float) if weights is None else np.asarray(weights, float)
    return float(probs @ w)


# ---------------------------------------------------------------------------
# scan containers


def _label_str(label) -> str:
    if isinstance(label, (tuple, list)):
        return ",".join(str(int(x)) for x in label)
    return str(label)


@dataclass
class FloquetScan:
    """Gridded branch observables over (initial state, gate charge, omega_d, xi).

    theta, quasienergies, branch_populations, resonant_flags all have shape
    (n_states, n_ng, n_wd, n_xi). For joint-system scans the populations are
    the combined (transmon + mode) quanta and the per-subsystem channels are
    kept in transmon_populations / mode_populations.
    """

    gate_charges: np.ndarray
    omega_d_grid: np.ndarray
    xi_grid: np.ndarray
    initial_states: tuple
    theta: np.ndarray
    quasienergies: np.ndarray
    branch_populations: np.ndarray
    resonant_flags: np.ndarray
    transmon_populations: np.ndarray = None
    mode_populations: np.ndarray = None

    def __post_init__(self):
        self.gate_charges = np.asarray(self.gate_charges, dtype=float)
        self.omega_d_grid = np.asarray(self.omega_d_grid, dtype=float)
        self.xi_grid = np.asarray(self.xi_grid, dtype=float)
        if np.any(self.theta < 0) or np.any(self.theta > 1):
            raise NumericError(
                "theta out of [0, 1]",
                diagnostics={"min": float(self.theta.min()), "max": float(self.theta.max())},
            )
        if np.any(self.theta[..., 0] != 0.0):
            raise NumericError("theta at xi = 0 must be exactly 0")
        half = self.omega_d_grid[None, None, :, None] / 2.0
        if np.any(self.quasienergies > half + 1e-12) or np.any(self.quasienergies <= -half - 1e-12):
            raise NumericError("quasienergies not folded into (-omega_d/2, omega_d/2]")

    @property
    def theta_charge_mean(self) -> np.ndarray:
        """Arithmetic mean of theta over the gate-charge axis: (n_states, n_wd, n_xi)."""
        return self.theta.mean(axis=1)

    @property
    def theta_charge_max(self) -> np.ndarray:
        """Worst-case theta over gate charge, a conservative scar detector."""
        return self.theta.max(axis=1)

    def write_csv(self, path):
        """Long-form rows: ng, omega_d_GHz, xi, initial_state, theta, quasienergy_GHz, branch_population, resonant_flag."""
        with open(path, "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow(
                [
                    "ng",
                    "omega_d_GHz",
                    "xi",
                    "initial_state",
                    "theta",
                    "quasienergy_GHz",
                    "branch_population",
                    "resonant_flag",
                ]
            )
            for s, label in enumerate(self.initial_states):
                lab = _label_str(label)
                for a, ng in enumerate(self.gate_charges):
                    for b, wd in enumerate(self.omega_d_grid):
                        for c, xi in enumerate(self.xi_grid):
                            w.writerow(
                                [
                                    f"{ng:.12g}",
                                    f"{wd:.12g}",
                                    f"{xi:.12g}",
                                    lab,
                                    f"{self.theta[s, a, b, c]:.12g}",
                                    f"{self.quasienergies[s, a, b, c]:.12g}",
                                    f"{self.branch_populations[s, a, b, c]:.12g}",
                                    int(self.resonant_flags[s, a, b, c]),
                                ]
                            )

    def summary(self) -> dict:
        """Compact JSON-ready digest of the scan."""
        per_state = []
        for s, label in enumerate(self.initial_states):
            per_state.append(
                {
                    "initial_state": _label_str(label),
                    "max_theta": float(self.theta[s].max()),
                    "max_theta_charge_mean": float(self.theta_charge_mean[s].max()),
                    "flagged_fraction": float(self.resonant_flags[s].mean()),
                    "max_branch_population": float(self.branch_populations[s].max()),
                }
            )
        return {
            "kind": "floquet-scan",
            "gate_charges": self.gate_charges.tolist(),
            "omega_d_GHz": {
                "min": float(self.omega_d_grid.min()),
                "max": float(self.omega_d_grid.max()),
                "count": int(self.omega_d_grid.size),
            },
            "xi": {
                "min": float(self.xi_grid.min()),
                "max": float(self.xi_grid.max()),
                "count": int(self.xi_grid.size),
            },
            "states": per_state,
        }

    def write_json(self, path):
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.summary(), f, indent=2, sort_keys=True)
            f.write("\n")


# ---------------------------------------------------------------------------
# transmon scan pipeline


def _transmon_column(p: TransmonParams, omega_d, xi_grid, time_steps, initial_states):
    """Full branch pipeline for one (ng, omega_d) column; coefficients in the bare basis."""
    spectrum = diagonalize(p)
    v = spectrum.eigenvectors
    energies = spectrum.energies
    wq = energies[1] - energies[0]
    nz = n_zpf(p)
    dim = p.dimension
    n_xi = len(xi_grid)

    h0 = build_hamiltonian(p)
    n_op = np.diag(charge_numbers(p))

    modes = np.empty((n_xi, dim, dim), dtype=complex)
    eps = np.empty((n_xi, dim))
    modes[0] = np.eye(dim)  # undriven limit: bare eigenstates, exact
    eps[0] = fold_quasienergy(energies, omega_d)
    for i in range(1, n_xi):
        ed = xi_to_drive_energy(xi_grid[i], omega_d, wq, nz)
        u = period_propagator(h0, n_op, omega_d, ed, time_steps)
        e_i, q = floquet_modes(u, omega_d)
        eps[i] = e_i
        modes[i] = v.T @ q  # rotate Schur vectors into the bare eigenbasis

    tracked, eps_t, ambiguous = track_branches(modes, eps, initial=np.eye(dim))

    n_states = len(initial_states)
    theta = np.empty((n_states, n_xi))
    quas = np.empty((n_states, n_xi))
    pops = np.empty((n_states, n_xi))
    flags = np.zeros((n_states, n_xi), dtype=bool)
    level_index = np.arange(dim, dtype=float)
    for s, k in enumerate(initial_states):
        coeffs = tracked[:, :, k]
        ref, outliers, _failed = ideal_displaced_state(xi_grid, coeffs)
        overlap = np.abs(np.sum(ref.conj() * coeffs, axis=1)) ** 2
        theta[s] = np.clip(1.0 - overlap, 0.0, 1.0)
        theta[s, 0] = 0.0  # reference is pinned to the xi = 0 state
        quas[s] = eps_t[:, k]
        pops[s] = (np.abs(coeffs) ** 2) @ level_index
        flags[s] = outliers | ambiguous[:, k]
    return theta, quas, pops, flags


def _failed_column(initial_states, xi_grid):
    n_states, n_xi = len(initial_states), len(xi_grid)
    theta = np.zeros((n_states, n_xi))
    quas = np.zeros((n_states, n_xi))
    pops = np.array([[float(k)] * n_xi for k in range(n_states)])
    flags = np.ones((n_states, n_xi), dtype=bool)
    return theta, quas, pops, flags


def _safe_transmon_column(p, omega_d, xi_grid, time_steps, initial_states):
    try:
        return _transmon_column(p, omega_d, xi_grid, time_steps, initial_states)
    except NumericError:
        # per-point numeric failures become flagged cells, not aborted scans
        return _failed_column(initial_states, xi_grid)


def scar_map(
    p: TransmonParams,
    omega_d_grid,
    xi_grid,
    gate_charges,
    initial_states=(0, 1),
    time_steps: int = 256,
    workers=None,
) -> FloquetScan:
    """Hybridization map over (gate charge, drive frequency, drive strength).

    Deterministic parallel map over (ng, omega_d) columns; each column is
    sequential in xi because branch continuation is order-dependent. Results
    are merged by grid index, so the worker count never changes the output.
    """
    omega_d_grid = np.asarray(omega_d_grid, dtype=float)
    gate_charges = np.asarray(gate_charges, dtype=float)
    xi = np.asarray(xi_grid, dtype=float)
    if omega_d_grid.size == 0 or gate_charges.size == 0:
        raise ConfigurationError("omega_d and gate-charge grids must be non-empty")
    DriveSpec(omega_d=float(omega_d_grid[0]), xi_grid=tuple(xi), time_steps=time_steps)

    jobs = [
        (a, b, replace(p, ng=float(ng)), float(wd))
        for a, ng in enumerate(gate_charges)
        for b, wd in enumerate(omega_d_grid)
    ]
    n_jobs = -1 if workers is None else max(1, int(workers))
    results = Parallel(n_jobs=n_jobs)(
        delayed(_safe_transmon_column)(pj, wd, xi, time_steps, tuple(initial_states))
        for (_, _, pj, wd) in jobs
    )

    n_states = len(initial_states)
    shape = (n_states, gate_charges.size, omega_d_grid.size, xi.size)
    theta = np.empty(shape)
    quas = np.empty(shape)
    pops = np.empty(shape)
    flags = np.empty(shape, dtype=bool)
    for (a, b, _, _), (th, qu, po, fl) in zip(jobs, results):
        theta[:, a, b, :] = th
        quas[:, a, b, :] = qu
        pops[:, a, b, :] = po
        flags[:, a, b, :] = fl
    return FloquetScan(
        gate_charges=gate_charges,
        omega_d_grid=omega_d_grid,
        xi_grid=xi,
        initial_states=tuple(initial_states),
        theta=theta,
        quasienergies=quas,
        branch_populations=pops,
        resonant_flags=flags,
    )


# ---------------------------------------------------------------------------
# quantum-to-classical onset


@dataclass
class QuantumClassicalScan:
    """Best bare-state overlap per tracked branch vs xi, plus the 0.5-collapse onset."""

    xi_grid: np.ndarray
    initial_states: tuple
    max_overlap: np.ndarray  # (n_states, n_xi)
    onset_xi: np.ndarray  # nan where the overlap never drops below 0.5

    def as_dict(self) -> dict:
        return {
            "xi": self.xi_grid.tolist(),
            "initial_states": [int(s) for s in self.initial_states],
            "max_overlap": self.max_overlap.tolist(),
            "onset_xi": [None if np.isnan(x) else float(x) for x in self.onset_xi],
        }


def quantum_classical_scan(
    p: TransmonParams,
    omega_d: float,
    xi_grid,
    initial_states=(0, 1, 2, 3),
    time_steps: int = 256,
) -> QuantumClassicalScan:
    """Track branches at fixed ng and record max_j |<j_bare|mode>|^2 vs xi.

    The onset of the quantum-to-classical transition for a branch is the
    first xi where this overlap drops below 0.5 (bare states stop describing
    the driven system). The xi grid should extend beyond isolated scars,
    which appear as narrow dips rather than a collapse.
    """
    xi = np.asarray(xi_grid, dtype=float)
    DriveSpec(omega_d=float(omega_d), xi_grid=tuple(xi), time_steps=time_steps)
    spectrum = diagonalize(p)
    v = spectrum.eigenvectors
    wq = spectrum.omega01
    nz = n_zpf(p)
    dim = p.dimension

    h0 = build_hamiltonian(p)
    n_op = np.diag(charge_numbers(p))
    modes = np.empty((len(xi), dim, dim), dtype=complex)
    modes[0] = np.eye(dim)
    for i in range(1, len(xi)):
        ed = xi_to_drive_energy(xi[i], omega_d, wq, nz)
        u = period_propagator(h0, n_op, omega_d, ed, time_steps)
        _, q = floquet_modes(u, omega_d)
        modes[i] = v.T @ q

    tracked, _, _ = track_branches(modes, initial=np.eye(dim))
    states = tuple(int(s) for s in initial_states)
    max_ov = np.empty((len(states), len(xi)))
    onset = np.full(len(states), np.nan)
    for s, k in enumerate(states):
        probs = np.abs(tracked[:, :, k]) ** 2
        max_ov[s] = probs.max(axis=1)
        below = np.nonzero(max_ov[s] < 0.5)[0]
        if below.size:
            onset[s] = xi[below[0]]
    return QuantumClassicalScan(
        xi_grid=xi, initial_states=states, max_overlap=max_ov, onset_xi=onset
    )
