"""Joint transmon + linear-mode system: dressed spectrum, cross-Kerr, and
cavity-mediated drive resonances.

The joint Hamiltonian in the truncated product basis |t> x |r> is

    H = diag(E_t) + omega_a * a^dag a - i g n_t (a - a^dag)

with E_t the lowest transmon eigenvalues and n_t the (signed) charge operator
projected onto those eigenstates. The drive stays attached to the transmon
charge, so Floquet scans of the joint system reuse the same machinery as the
bare-transmon scans, just in the dressed basis.
"""

from dataclasses import dataclass, replace
import math

import numpy as np
from joblib import Parallel, delayed

from .errors import ConfigurationError, DomainError, FitError, NumericError, RangeError
from .floquet import (
    FloquetScan,
    DriveSpec,
    floquet_modes,
    fold_quasienergy,
    ideal_displaced_state,
    period_propagator,
    track_branches,
    xi_to_drive_energy,
)
from .transmon import TransmonParams, charge_numbers, diagonalize, fit_ej_ec, n_zpf

__all__ = [
    "JointSystemParams",
    "DressedSystem",
    "build_joint_hamiltonian",
    "dress_and_truncate",
    "cross_kerr",
    "fit_joint",
    "g_from_chi",
    "resonance_conditions",
    "coupled_scar_map",
]


@dataclass(frozen=True)
class JointSystemParams:
    """Transmon + single linear mode with charge-type coupling g (GHz)."""

    transmon: TransmonParams
    mode_freq: float
    coupling: float
    transmon_levels: int = 41
    mode_levels: int = 5
    keep_dressed: int = 45

    def __post_init__(self):
        if self.coupling < 0:
            raise ConfigurationError(f"coupling must be >= 0, got {self.coupling}")
        if not self.mode_freq > 0:
            raise ConfigurationError(f"mode_freq must be positive, got {self.mode_freq}")
        if self.transmon_levels * self.mode_levels < self.keep_dressed:
            raise ConfigurationError(
                f"product space {self.transmon_levels}x{self.mode_levels} smaller than "
                f"keep_dressed={self.keep_dressed}"
            )
        if self.transmon_levels > self.transmon.dimension:
            raise ConfigurationError(
                f"transmon_levels={self.transmon_levels} exceeds the charge-basis "
                f"dimension {self.transmon.dimension}; raise charge_cutoff"
            )
        if min(self.transmon_levels, self.mode_levels, self.keep_dressed) < 1:
            raise ConfigurationError("all truncation sizes must be >= 1")


def _joint_operators(p: JointSystemParams):
    """Joint Hamiltonian plus the product-basis transmon charge operator.

    Both are built from the same transmon eigenbasis instance so the
    (arbitrary) eigenvector gauge cancels between them.
    """
    ts = diagonalize(p.transmon)
    nt, nm = p.transmon_levels, p.mode_levels
    v = ts.eigenvectors[:, :nt]
    e_t = ts.energies[:nt]
    n_t = v.T @ (charge_numbers(p.transmon)[:, None] * v)  # signed elements

    a = np.diag(np.sqrt(np.arange(1, nm)), 1)
    number = np.diag(np.arange(nm, dtype=float))
    eye_t, eye_m = np.eye(nt), np.eye(nm)

    h = (
        np.kron(np.diag(e_t), eye_m)
        + p.mode_freq * np.kron(eye_t, number)
        + (-1j * p.coupling) * np.kron(n_t, a - a.T)
    )
    n_prod = np.kron(n_t, eye_m)
    herm = np.max(np.abs(h - h.conj().T))
    if herm > 1e-10:
        raise NumericError("joint Hamiltonian not Hermitian", diagnostics={"defect": float(herm)})
    return h, n_prod


def build_joint_hamiltonian(p: JointSystemParams) -> np.ndarray:
    """Hermitian product-basis matrix (transmon_levels*mode_levels square)."""
    h, _ = _joint_operators(p)
    return h


@dataclass
class DressedSystem:
    """Lowest dressed eigenpairs with injective bare-product labels.

    labels[k] = (t, r) of the bare product state with maximum overlap; when
    that label is already taken, the next-best unused one is assigned and the
    state is marked in `hybridized` (also set when the best overlap is <= 0.5).
    """

    energies: np.ndarray
    dressed_states: np.ndarray  # (product_dim, kept), columns in the product basis
    labels: tuple
    hybridized: np.ndarray
    transmon_levels: int
    mode_levels: int

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels):
            raise NumericError("dressed-state labels are not injective")
        if np.any(np.diff(self.energies) < -1e-9):
            raise NumericError("dressed energies not ascending")
        self._index = {lab: k for k, lab in enumerate(self.labels)}

    def index_of(self, t: int, r: int) -> int:
        try:
            return self._index[(int(t), int(r))]
        except KeyError:
            raise RangeError(
                f"no dressed state labeled ({t},{r}); kept labels cover "
                f"{sorted(self._index)[:8]}..."
            ) from None

    def energy_of(self, t: int, r: int) -> float:
        return float(self.energies[self.index_of(t, r)])

    def transition(self, a, b) -> float:
        """E(b) - E(a) for (t, r) label pairs, GHz."""
        return self.energy_of(*b) - self.energy_of(*a)


def dress_and_truncate(h: np.ndarray, p: JointSystemParams) -> DressedSystem:
    """Diagonalize the joint Hamiltonian and keep the lowest `keep_dressed` states."""
    h = np.asarray(h)
    herm = np.max(np.abs(h - h.conj().T))
    if herm > 1e-10:
        raise NumericError("input not Hermitian", diagnostics={"defect": float(herm)})
    try:
        energies, vectors = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise NumericError(
            "joint eigensolver failed", diagnostics={"dimension": h.shape[0]}
        ) from exc
    keep = p.keep_dressed
    energies, vectors = energies[:keep], vectors[:, :keep]

    nt, nm = p.transmon_levels, p.mode_levels
    labels, flags = [], np.zeros(keep, dtype=bool)
    used = set()
    for k in range(keep):
        probs = np.abs(vectors[:, k]) ** 2
        order = np.argsort(probs)[::-1]
        chosen = None
        for idx in order:
            lab = (int(idx) // nm, int(idx) % nm)
            if lab not in used:
                chosen = lab
                flags[k] = bool(idx != order[0] or probs[order[0]] <= 0.5)
                break
        if chosen is None:  # cannot happen while product_dim >= keep_dressed
            raise NumericError(
                "unresolvable label collision",
                diagnostics={"state": k, "cluster": [tuple(map(int, divmod(i, nm))) for i in order[:6]]},
            )
        used.add(chosen)
        labels.append(chosen)
    return DressedSystem(
        energies=energies,
        dressed_states=vectors,
        labels=tuple(labels),
        hybridized=flags,
        transmon_levels=nt,
        mode_levels=nm,
    )


def _dress(p: JointSystemParams):
    h, n_prod = _joint_operators(p)
    return dress_and_truncate(h, p), n_prod


def cross_kerr(d: DressedSystem, n: int) -> float:
    """State-dependent mode pull chi_n = [E(n,1)-E(n,0)] - [E(0,1)-E(0,0)], GHz."""
    return d.transition((n, 0), (n, 1)) - d.transition((0, 0), (0, 1))


def g_from_chi(omega_r: float, omega_1: float, chi1: float, alpha: float) -> float:
    """Closed-form coupling estimate ((w_r-w_1)(w_r+w_1)/w_r) * sqrt(chi1/(8 alpha))."""
    ratio = chi1 / alpha if alpha != 0 else math.nan
    if not ratio > 0:
        raise DomainError(
            f"chi1 and alpha must share a sign (and alpha be nonzero), "
            f"got chi1={chi1}, alpha={alpha}"
        )
    return (omega_r - omega_1) * (omega_r + omega_1) / omega_r * math.sqrt(chi1 / (8.0 * alpha))


# ---------------------------------------------------------------------------
# joint fit


def _joint_observables(ej, ec, wa, g, ng, cutoff, nt, nm, keep):
    p = JointSystemParams(
        transmon=TransmonParams(ej=ej, ec=ec, ng=ng, charge_cutoff=cutoff),
        mode_freq=wa,
        coupling=g,
        transmon_levels=nt,
        mode_levels=nm,
        keep_dressed=keep,
    )
    d, _ = _dress(p)
    w01 = d.transition((0, 0), (1, 0))
    alpha = d.transition((1, 0), (2, 0)) - w01
    wr = d.transition((0, 0), (0, 1))
    chi1 = cross_kerr(d, 1)
    return np.array([w01, alpha, wr, chi1])


def fit_joint(
    omega01: float,
    alpha: float,
    omega_r: float,
    chi1: float,
    ng: float = 0.25,
    charge_cutoff: int = 30,
    transmon_levels: int = 41,
    mode_levels: int = 5,
    keep_dressed: int = 45,
    tol: float = 1e-4,
    max_outer: int = 20,
) -> JointSystemParams:
    """Fit (ej, ec, omega_a, g) so the *dressed* system reproduces the four targets.

    The dressed observables are the measurable ones: qubit frequency and
    anharmonicity of the coupled system, dressed mode frequency, and chi_1.
    Solved as two nested damped-Newton problems -- (ej, ec) against
    (omega01, alpha), then (omega_a, g) against (omega_r, chi1) -- alternated
    until all four residuals are below `tol` GHz. A vanishing chi1 target
    leaves (omega_a, g) underdetermined; the degenerate Jacobian is detected
    and reported rather than iterated on.
    """
    if not (omega01 > 0 and omega_r > 0):
        raise RangeError("omega01 and omega_r must be positive")
    if not alpha < 0:
        raise RangeError("alpha must be negative")

    seed_t = fit_ej_ec(omega01, alpha, ng=ng, charge_cutoff=charge_cutoff)
    ej, ec = seed_t.ej, seed_t.ec
    wa = omega_r
    g = g_from_chi(omega_r, omega01, chi1, alpha) if chi1 / alpha > 0 else 0.0
    targets = np.array([omega01, alpha, omega_r, chi1])
    steps = np.array([1e-4, 1e-4, 1e-4, 1e-3])  # central-difference steps per parameter

    def measure(x):
        # |g|: the spectrum is even in the coupling, and this keeps the
        # central-difference probe at g = 0 inside the valid parameter set
        return _joint_observables(
            x[0], x[1], x[2], abs(x[3]), ng, charge_cutoff, transmon_levels, mode_levels, keep_dressed
        )

    def newton_block(x, idx_par, idx_obs):
        """Damped Newton on the 2x2 sub-problem; mutates a copy of x."""
        idx_par = list(idx_par)  # list indexing: tuples would be read as multi-dim
        idx_obs = list(idx_obs)
        x = x.copy()
        r = measure(x)[idx_obs] - targets[idx_obs]
        for _ in range(12):
            if np.max(np.abs(r)) < 0.5 * tol:
                return x, r
            jac = np.empty((2, 2))
            for j, pi in enumerate(idx_par):
                dx = np.zeros(4)
                dx[pi] = steps[pi]
                jac[:, j] = (
                    measure(x + dx)[idx_obs] - measure(x - dx)[idx_obs]
                ) / (2 * steps[pi])
            svals = np.linalg.svd(jac, compute_uv=False)
            if svals[-1] < 1e-9 * max(svals[0], 1.0):
                raise FitError(
                    "degenerate Jacobian (target leaves a parameter direction unconstrained)",
                    residuals=r,
                )
            delta = np.linalg.solve(jac, -r)
            lam = 1.0
            for _ in range(25):
                xn = x.copy()
                xn[idx_par[0]] += lam * delta[0]
                xn[idx_par[1]] += lam * delta[1]
                valid = xn[0] > 0 and xn[1] > 0 and xn[0] / xn[1] > 1 and xn[2] > 0 and xn[3] >= 0
                if valid:
                    rn = measure(xn)[idx_obs] - targets[idx_obs]
                    if np.linalg.norm(rn) < np.linalg.norm(r):
                        x, r = xn, rn
                        break
                lam *= 0.5
            else:
                return x, r  # stalled; let the outer loop decide
        return x, r

    x = np.array([ej, ec, wa, g])
    for _ in range(max_outer):
        full = measure(x) - targets
        if np.max(np.abs(full)) < tol:
            return JointSystemParams(
                transmon=TransmonParams(ej=x[0], ec=x[1], ng=ng, charge_cutoff=charge_cutoff),
                mode_freq=x[2],
                coupling=x[3],
                transmon_levels=transmon_levels,
                mode_levels=mode_levels,
                keep_dressed=keep_dressed,
            )
        x, _ = newton_block(x, (0, 1), (0, 1))
        x, _ = newton_block(x, (2, 3), (2, 3))
    full = measure(x) - targets
    if np.max(np.abs(full)) < tol:
        return JointSystemParams(
            transmon=TransmonParams(ej=x[0], ec=x[1], ng=ng, charge_cutoff=charge_cutoff),
            mode_freq=x[2],
            coupling=x[3],
            transmon_levels=transmon_levels,
            mode_levels=mode_levels,
            keep_dressed=keep_dressed,
        )
    raise FitError(f"joint fit did not converge in {max_outer} outer rounds", residuals=full)


# ---------------------------------------------------------------------------
# analytic drive resonances


def resonance_conditions(d: DressedSystem, stark: float = 0.0):
    """Drive frequencies of the five cavity-mediated processes at a given
    AC-Stark shift of the qubit (GHz, signed).

    Two-photon conditions (drive photons absorbed in pairs):
      exchange   |1,0> <-> |0,1>  : 2 w_d = w_mode - w01 - stark
      pair_01    |0,0> -> |1,1>   : 2 w_d = w_mode + w01 + stark
      pair_12    |1,0> -> |2,1>   : 2 w_d = w_mode + w12 + stark
    Single-photon two-quanta de-excitations:
      deexcite_20  |2,0> -> |0,1> : w_d = w_mode - w02 - stark
      deexcite_31  |3,0> -> |1,1> : w_d = w_mode - w13 - stark

    Returns a list of (label, omega_d) pairs; the two-photon entries already
    contain the halved drive frequency.
    """
    w01 = d.transition((0, 0), (1, 0))
    w12 = d.transition((1, 0), (2, 0))
    w02 = d.transition((0, 0), (2, 0))
    w13 = d.transition((1, 0), (3, 0))
    w_mode = d.transition((0, 0), (0, 1))
    return [
        ("exchange", 0.5 * (w_mode - w01 - stark)),
        ("pair_01", 0.5 * (w_mode + w01 + stark)),
        ("pair_12", 0.5 * (w_mode + w12 + stark)),
        ("deexcite_20", w_mode - w02 - stark),
        ("deexcite_31", w_mode - w13 - stark),
    ]


# ---------------------------------------------------------------------------
# joint Floquet scan


def _joint_column(p: JointSystemParams, omega_d, xi_grid, time_steps, initial_labels):
    d, n_prod = _dress(p)
    w = d.dressed_states
    keep = w.shape[1]
    n_dressed = w.conj().T @ n_prod @ w  # drive operator in the dressed basis
    h0 = np.diag(d.energies).astype(complex)

    wq = d.transition((0, 0), (1, 0))
    nz = n_zpf(p.transmon)
    n_xi = len(xi_grid)

    modes = np.empty((n_xi, keep, keep), dtype=complex)
    eps = np.empty((n_xi, keep))
    modes[0] = np.eye(keep)
    eps[0] = fold_quasienergy(d.energies, omega_d)
    for i in range(1, n_xi):
        ed = xi_to_drive_energy(xi_grid[i], omega_d, wq, nz)
        u = period_propagator(h0, n_dressed, omega_d, ed, time_steps)
        e_i, q = floquet_modes(u, omega_d)
        eps[i] = e_i
        modes[i] = q  # already dressed-basis coordinates

    tracked, eps_t, ambiguous = track_branches(modes, eps, initial=np.eye(keep))

    nt, nm = d.transmon_levels, d.mode_levels
    w_t = np.repeat(np.arange(nt, dtype=float), nm)
    w_r = np.tile(np.arange(nm, dtype=float), nt)

    n_states = len(initial_labels)
    theta = np.empty((n_states, n_xi))
    quas = np.empty((n_states, n_xi))
    pop_c = np.empty((n_states, n_xi))
    pop_t = np.empty((n_states, n_xi))
    pop_r = np.empty((n_states, n_xi))
    flags = np.zeros((n_states, n_xi), dtype=bool)
    for s, lab in enumerate(initial_labels):
        k = d.index_of(*lab)
        coeffs = tracked[:, :, k]
        ref, outliers, _failed = ideal_displaced_state(xi_grid, coeffs)
        overlap = np.abs(np.sum(ref.conj() * coeffs, axis=1)) ** 2
        theta[s] = np.clip(1.0 - overlap, 0.0, 1.0)
        theta[s, 0] = 0.0
        quas[s] = eps_t[:, k]
        probs = np.abs(coeffs @ w.T) ** 2  # product-basis occupation
        pop_t[s] = probs @ w_t
        pop_r[s] = probs @ w_r
        pop_c[s] = pop_t[s] + pop_r[s]
        flags[s] = outliers | ambiguous[:, k]
    return theta, quas, pop_c, pop_t, pop_r, flags


def _safe_joint_column(p, omega_d, xi_grid, time_steps, initial_labels):
    try:
        return _joint_column(p, omega_d, xi_grid, time_steps, initial_labels)
    except NumericError:
        n_states, n_xi = len(initial_labels), len(xi_grid)
        zeros = np.zeros((n_states, n_xi))
        pops = np.array([[float(t + r)] * n_xi for (t, r) in initial_labels])
        pt = np.array([[float(t)] * n_xi for (t, _) in initial_labels])
        pr = np.array([[float(r)] * n_xi for (_, r) in initial_labels])
        return zeros, zeros.copy(), pops, pt, pr, np.ones((n_states, n_xi), dtype=bool)


def coupled_scar_map(
    p: JointSystemParams,
    omega_d_grid,
    xi_grid,
    gate_charges=None,
    initial_labels=((0, 0), (1, 0), (2, 0), (3, 0)),
    time_steps: int = 256,
    workers=None,
    resonance_guard: float = 0.010,
) -> FloquetScan:
    """Hybridization map of the joint system over (ng, omega_d, xi).

    Branch populations are reported as combined transmon + mode quanta, with
    the per-subsystem channels kept alongside. Drive frequencies within
    `resonance_guard` GHz of the linear mode are rejected: a resonant drive
    rings the mode up and the smooth-reference tracking is meaningless there.
    """
    omega_d_grid = np.asarray(omega_d_grid, dtype=float)
    xi = np.asarray(xi_grid, dtype=float)
    if gate_charges is None:
        gate_charges = np.array([p.transmon.ng])
    gate_charges = np.asarray(gate_charges, dtype=float)
    DriveSpec(omega_d=float(omega_d_grid[0]), xi_grid=tuple(xi), time_steps=time_steps)
    near = np.abs(omega_d_grid - p.mode_freq) < resonance_guard
    if np.any(near):
        raise RangeError(
            f"drive frequencies {omega_d_grid[near].tolist()} are within "
            f"{resonance_guard} GHz of the linear mode at {p.mode_freq} GHz"
        )
    labels = tuple((int(t), int(r)) for t, r in initial_labels)

    jobs = [
        (a, b, replace(p, transmon=replace(p.transmon, ng=float(ng))), float(wd))
        for a, ng in enumerate(gate_charges)
        for b, wd in enumerate(omega_d_grid)
    ]
    n_jobs = -1 if workers is None else max(1, int(workers))
    results = Parallel(n_jobs=n_jobs)(
        delayed(_safe_joint_column)(pj, wd, xi, time_steps, labels)
        for (_, _, pj, wd) in jobs
    )

    n_states = len(labels)
    shape = (n_states, gate_charges.size, omega_d_grid.size, xi.size)
    theta = np.empty(shape)
    quas = np.empty(shape)
    pop_c = np.empty(shape)
    pop_t = np.empty(shape)
    pop_r = np.empty(shape)
    flags = np.empty(shape, dtype=bool)
    for (a, b, _, _), (th, qu, pc, pt, pr, fl) in zip(jobs, results):
        theta[:, a, b, :] = th
        quas[:, a, b, :] = qu
        pop_c[:, a, b, :] = pc
        pop_t[:, a, b, :] = pt
        pop_r[:, a, b, :] = pr
        flags[:, a, b, :] = fl
    return FloquetScan(
        gate_charges=gate_charges,
        omega_d_grid=omega_d_grid,
        xi_grid=xi,
        initial_states=labels,
        theta=theta,
        quasienergies=quas,
        branch_populations=pop_c,
        resonant_flags=flags,
        transmon_populations=pop_t,
        mode_populations=pop_r,
    )
