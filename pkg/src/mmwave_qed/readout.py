"""Dispersive readout: steady-state cavity response, Monte-Carlo I/Q shots,
separatrix optimization, fidelity / SNR / rate / efficiency analysis.

Unit conventions: kappa, chi, detunings are linear frequencies in GHz;
tau_r and t1 are in seconds. Rates returned by measurement_rate and
dephasing_rate are angular (rad/s) -- the 2*pi lives inside those functions
only. I/Q amplitudes are vacuum-referenced: additive Gaussian noise has
variance 1/2 per quadrature and every signal scaling is defined against it,
so SNR is convention-free.
"""

from dataclasses import dataclass
import csv
import math
import warnings

import numpy as np
from joblib import Parallel, delayed

from .errors import (
    CalibrationWarning,
    ConfigurationError,
    DomainError,
    RangeError,
)

__all__ = [
    "ReadoutModel",
    "ShotSet",
    "Separatrix",
    "steady_state_field",
    "lorentzian_drive_correction",
    "simulate_shots",
    "stream_shot_chunks",
    "snr",
    "measurement_rate",
    "dephasing_rate",
    "efficiency_and_noise",
    "optimize_separatrix",
    "bayes_credence",
    "multi_state_assign",
    "empty_cavity_frequency",
]

SPEED_OF_LIGHT = 299792458.0  # m/s
_CHUNK = 4096  # shots per RNG block; fixes the draw stream for any worker split


@dataclass(frozen=True)
class ReadoutModel:
    """Dispersive readout parameters.

    chi is the ladder of state-dependent pulls (GHz) with chi[0] = 0;
    probe_detuning is relative to the bare readout frequency omega_r; nbar_r
    is the mean resonator photon number with the transmon in |0>.
    """

    omega_r: float
    kappa: float
    chi: tuple
    probe_detuning: float
    nbar_r: float
    tau_r: float
    eta: float
    t1: float
    thermal_pop: float

    def __post_init__(self):
        object.__setattr__(self, "chi", tuple(float(c) for c in self.chi))
        if not self.kappa > 0:
            raise ConfigurationError(f"kappa must be positive, got {self.kappa}")
        if not self.tau_r > 0:
            raise ConfigurationError(f"tau_r must be positive, got {self.tau_r}")
        if not 0 < self.eta <= 1:
            raise ConfigurationError(f"eta must be in (0, 1], got {self.eta}")
        if not 0 <= self.thermal_pop < 0.5:
            raise ConfigurationError(f"thermal_pop must be in [0, 0.5), got {self.thermal_pop}")
        if len(self.chi) < 2 or self.chi[0] != 0.0:
            raise ConfigurationError("chi must list at least chi_0 = 0 and chi_1")
        if not self.nbar_r >= 0:
            raise ConfigurationError(f"nbar_r must be non-negative, got {self.nbar_r}")
        if not self.t1 > 0:
            raise ConfigurationError(f"t1 must be positive (may be inf), got {self.t1}")


def steady_state_field(m: ReadoutModel, n: int) -> complex:
    """Steady-state cavity amplitude with the transmon in |n>.

    alpha_n = eps / (kappa_ang/2 + i*2*pi*(Delta - chi_n)), with the drive eps
    fixed so |alpha_0|^2 = nbar_r. All rates are angular internally; the
    overall 2*pi cancels in the ratio.
    """
    if not 0 <= n < len(m.chi):
        raise RangeError(f"state {n} outside the chi ladder (0..{len(m.chi) - 1})")
    two_pi = 2.0 * math.pi

    def response(chi_n):
        return two_pi * 0.5 * m.kappa + 1j * two_pi * (m.probe_detuning - chi_n)

    eps = math.sqrt(m.nbar_r) * abs(response(m.chi[0]))
    return eps / response(m.chi[n])


def lorentzian_drive_correction(nbar0: float, delta_d: float, kappa: float, chi: float, n: int) -> float:
    """State-dependent drive photon number from the ratio of Lorentzian responses.

    nbar(|n>) = nbar(|0>) * (delta_d^2 + kappa^2) / ((delta_d - n*chi)^2 + kappa^2).
    Deliberately uses the full linewidth squared in both terms -- the
    convention of the drive-photon calibration this feeds -- whereas
    steady_state_field carries the physical half-linewidth cavity response.
    The two are kept distinct on purpose.
    """
    return nbar0 * (delta_d**2 + kappa**2) / ((delta_d - n * chi) ** 2 + kappa**2)


# ---------------------------------------------------------------------------
# shot simulation


@dataclass(frozen=True)
class ShotSet:
    """Simulated single shots: I/Q pairs plus the prepared-state label and seed."""

    i: np.ndarray
    q: np.ndarray
    prepared: np.ndarray
    seed: object  # int, or tuple of ints for derived streams

    def __len__(self):
        return self.i.size

    @property
    def iq(self) -> np.ndarray:
        """Shots as complex numbers I + iQ."""
        return self.i + 1j * self.q

    @property
    def shots(self):
        """List-of-tuples view (I, Q, prepared_label)."""
        return list(zip(self.i.tolist(), self.q.tolist(), self.prepared.tolist()))

    def mean(self) -> complex:
        return complex(np.mean(self.i), np.mean(self.q))

    def write_csv(self, path, assigned=None):
        with open(path, "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow(["I", "Q", "prepared", "assigned"])
            for k in range(len(self)):
                w.writerow(
                    [
                        f"{self.i[k]:.12g}",
                        f"{self.q[k]:.12g}",
                        int(self.prepared[k]),
                        "" if assigned is None else int(assigned[k]),
                    ]
                )


def _seed_key(seed):
    """Normalize a seed (int or sequence of ints) to a tuple RNG key."""
    if isinstance(seed, (tuple, list)):
        return tuple(int(s) for s in seed)
    return (int(seed),)


def _shot_chunk(m: ReadoutModel, prepared: int, count: int, seed, start: int, alphas, scale):
    """One deterministic RNG block of shots; the stream depends only on (seed, start)."""
    rng = np.random.default_rng([*_seed_key(seed), int(start)])
    flips = rng.random(count)
    jumps = rng.exponential(1.0, count)
    noise = rng.normal(0.0, math.sqrt(0.5), (count, 2))

    state = np.full(count, prepared, dtype=int)
    flipped = flips < m.thermal_pop
    if prepared == 0:
        state[flipped] = 1  # residual thermal excitation
    else:
        state[flipped] = prepared - 1  # preparation pulse missed one quantum

    tau = m.tau_r
    if math.isfinite(m.t1):
        t_jump = jumps * m.t1
    else:
        t_jump = np.full(count, np.inf)
    t_jump[state == 0] = np.inf  # the ground state never decays

    alpha_now = alphas[state]
    alpha_after = alphas[np.maximum(state - 1, 0)]
    frac = np.clip(t_jump / tau, 0.0, 1.0)  # time-weighted average across one jump
    mean = scale * (frac * alpha_now + (1.0 - frac) * alpha_after)
    return mean.real + noise[:, 0], mean.imag + noise[:, 1], state


def stream_shot_chunks(m: ReadoutModel, prepared: int, count: int, seed, workers=None):
    """Yield (i, q, realized_initial_state) arrays in fixed chunk order (streaming mode).

    Shots are generated in blocks of 4096 with per-block seeds derived as
    (*seed, block_start), so any parallel split over blocks reproduces the
    identical stream. `seed` may be an int or a tuple of ints (handy for
    deriving independent streams per prepared state without collisions). Use
    this generator directly when `count` is too large to hold in memory.
    """
    if count < 1:
        raise ConfigurationError(f"count must be >= 1, got {count}")
    if not 0 <= prepared < len(m.chi):
        raise RangeError(f"prepared state {prepared} outside the chi ladder")
    alphas = np.array([steady_state_field(m, n) for n in range(len(m.chi))])
    kappa_tau = 2.0 * math.pi * m.kappa * 1e9 * m.tau_r
    scale = math.sqrt(m.eta * kappa_tau)
    starts = list(range(0, count, _CHUNK))
    sizes = [min(_CHUNK, count - s) for s in starts]
    if workers is not None and workers > 1:
        results = Parallel(n_jobs=int(workers), prefer="threads")(
            delayed(_shot_chunk)(m, prepared, c, seed, s, alphas, scale)
            for s, c in zip(starts, sizes)
        )
        yield from results
    else:
        for s, c in zip(starts, sizes):
            yield _shot_chunk(m, prepared, c, seed, s, alphas, scale)


def simulate_shots(m: ReadoutModel, prepared: int, count: int, seed, workers=None) -> ShotSet:
    """Monte-Carlo single shots for one prepared state.

    Per shot: (1) the prepared label is resampled with probability
    thermal_pop (|0> starts excited; excited preparations land one level
    down); (2) excited states draw a single downward decay jump time from
    Exp(t1); (3) the mean I/Q is sqrt(eta * kappa_ang * tau_r) times the
    time-weighted steady-state amplitude across the jump; (4) circular
    Gaussian noise of variance 1/2 per quadrature is added. Identical
    (model, seed) inputs give bit-identical results for any worker count.
    """
    is_, qs, states = [], [], []
    for i, q, st in stream_shot_chunks(m, prepared, count, seed, workers=workers):
        is_.append(i)
        qs.append(q)
        states.append(st)
    key = _seed_key(seed)
    return ShotSet(
        i=np.concatenate(is_),
        q=np.concatenate(qs),
        prepared=np.full(count, prepared, dtype=int),
        seed=key[0] if len(key) == 1 else key,
    )


# ---------------------------------------------------------------------------
# analysis


def snr(s0: ShotSet, s1: ShotSet) -> float:
    """|mean separation| over the quadrature-summed projected widths.

    Widths are standard deviations of the shots projected onto the
    separation axis; SNR = |mu1 - mu0| / sqrt(sigma0^2 + sigma1^2).
    """
    if len(s0) == 0 or len(s1) == 0:
        raise ConfigurationError("both shot sets must be non-empty")
    axis = s1.mean() - s0.mean()
    sep = abs(axis)
    if sep == 0.0:
        return 0.0
    u = axis / sep
    p0 = s0.i * u.real + s0.q * u.imag
    p1 = s1.i * u.real + s1.q * u.imag
    w = math.sqrt(np.var(p0, ddof=1) + np.var(p1, ddof=1))
    if w == 0.0:
        raise DomainError("degenerate (zero-width) shot distributions")
    return float(sep / w)


def measurement_rate(snr_value: float, tau_r: float) -> float:
    """Gamma_m = SNR^2 / (4 tau_r), angular rate in rad/s."""
    if not tau_r > 0:
        raise RangeError(f"tau_r must be positive, got {tau_r}")
    return snr_value**2 / (4.0 * tau_r)


def dephasing_rate(nbar_r: float, kappa: float, chi1: float) -> float:
    """Measurement-induced dephasing 2*nbar*kappa*chi1^2/(kappa^2 + chi1^2).

    kappa and chi1 are linear GHz; the conversion to angular rad/s happens
    here and the returned rate is angular.
    """
    k = 2.0 * math.pi * kappa * 1e9
    x = 2.0 * math.pi * chi1 * 1e9
    return 2.0 * nbar_r * k * x**2 / (k**2 + x**2)


def efficiency_and_noise(gamma_m: float, gamma_phi: float):
    """eta = Gamma_m / Gamma_phi and the equivalent added noise quanta.

    nbar_sys = (1/eta - 1)/2; eta = 1 is the quantum limit. An eta above 1
    signals an inconsistent calibration and is warned about, not raised.
    """
    if not gamma_phi > 0:
        raise DomainError(f"gamma_phi must be positive, got {gamma_phi}")
    eta = gamma_m / gamma_phi
    if eta > 1:
        warnings.warn(
            f"eta = {eta:.3g} exceeds the quantum limit; calibration inconsistent",
            CalibrationWarning,
        )
    nbar_sys = (1.0 / eta - 1.0) / 2.0
    return float(eta), float(nbar_sys)


@dataclass(frozen=True)
class Separatrix:
    """Circular decision boundary: inside -> label 0, outside -> label 1."""

    center: tuple
    radius: float

    def __post_init__(self):
        if self.radius < 0:
            raise ConfigurationError(f"radius must be >= 0, got {self.radius}")

    def assign(self, shots: ShotSet) -> np.ndarray:
        d = np.hypot(shots.i - self.center[0], shots.q - self.center[1])
        return (d > self.radius).astype(int)


def optimize_separatrix(s0: ShotSet, s1: ShotSet):
    """Equal-fidelity circle around the ground-state cluster median.

    center = component-wise median of s0. F0(r) (fraction of s0 inside) is
    nondecreasing and F1(r) (fraction of s1 outside) is nonincreasing, so
    their difference crosses zero once; the radius is found by bisection.
    Returns (separatrix, F0, F1).
    """
    if len(s0) == 0 or len(s1) == 0:
        raise ConfigurationError("both shot sets must be non-empty")
    cx, cy = float(np.median(s0.i)), float(np.median(s0.q))
    d0 = np.sort(np.hypot(s0.i - cx, s0.q - cy))
    d1 = np.sort(np.hypot(s1.i - cx, s1.q - cy))

    def f0(r):
        return np.searchsorted(d0, r, side="right") / d0.size

    def f1(r):
        return 1.0 - np.searchsorted(d1, r, side="right") / d1.size

    lo, hi = 0.0, float(max(d0[-1], d1[-1])) + 1.0
    if f0(lo) - f1(lo) > 0 or f0(hi) - f1(hi) < 0:
        warnings.warn("no equal-fidelity crossing; returning boundary optimum", CalibrationWarning)
        r = lo if f0(lo) - f1(lo) > 0 else hi
        return Separatrix(center=(cx, cy), radius=r), float(f0(r)), float(f1(r))
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if f0(mid) - f1(mid) < 0:
            lo = mid
        else:
            hi = mid
    r = hi
    return Separatrix(center=(cx, cy), radius=r), float(f0(r)), float(f1(r))


def bayes_credence(f_n: float, f_other: float) -> float:
    """P(state was |n> | assigned n) under a flat prior: F_n / (1 + F_n - F_other)."""
    if not (0 <= f_n <= 1 and 0 <= f_other <= 1):
        raise RangeError("fidelities must lie in [0, 1]")
    denom = 1.0 + f_n - f_other
    if denom == 0.0:
        return 0.0
    return f_n / denom


def multi_state_assign(shots: ShotSet, templates) -> np.ndarray:
    """Nearest-template assignment in the I/Q plane; ties go to the lowest label."""
    t = np.asarray(templates, dtype=float)
    if t.ndim != 2 or t.shape[1] != 2:
        raise ConfigurationError("templates must be an array of (I, Q) points")
    for a in range(t.shape[0]):
        for b in range(a + 1, t.shape[0]):
            if np.all(t[a] == t[b]):
                raise ConfigurationError(f"templates {a} and {b} coincide")
    d2 = (shots.i[:, None] - t[None, :, 0]) ** 2 + (shots.q[:, None] - t[None, :, 1]) ** 2
    return np.argmin(d2, axis=1)


def empty_cavity_frequency(l2: float, l3: float) -> float:
    """Fundamental rectangular-cavity mode (c/2)*sqrt(l2^-2 + l3^-2), lengths in m, result GHz."""
    if not (l2 > 0 and l3 > 0):
        raise RangeError("cavity dimensions must be positive")
    return SPEED_OF_LIGHT / 2.0 * math.sqrt(l2**-2 + l3**-2) / 1e9
