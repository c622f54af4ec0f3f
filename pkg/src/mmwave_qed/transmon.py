"""Charge-basis transmon: exact spectrum, charge matrix elements, inverse fits.

Conventions used throughout the package:

* every stored energy/frequency is a *linear* frequency in h*GHz; factors of
  2*pi enter only inside time evolution and rate formulas, explicitly;
* the charge basis spans k = -charge_cutoff .. +charge_cutoff, so the
  Hamiltonian dimension is 2*charge_cutoff + 1.
"""

from dataclasses import dataclass, replace
import math

import numpy as np

from .errors import ConfigurationError, FitError, NumericError, RangeError

__all__ = [
    "TransmonParams",
    "TransmonSpectrum",
    "build_hamiltonian",
    "charge_numbers",
    "diagonalize",
    "n_bound",
    "charge_dispersion",
    "fit_ej_ec",
    "n_zpf",
]


@dataclass(frozen=True)
class TransmonParams:
    """Inputs of the charge-basis transmon Hamiltonian.

    ej, ec : h*GHz. ng : offset charge (any real; the spectrum is periodic
    under ng -> ng + 1). charge_cutoff : half-width of the charge basis.
    """

    ej: float
    ec: float
    ng: float = 0.0
    charge_cutoff: int = 30

    def __post_init__(self):
        if not (self.ej > 0 and self.ec > 0):
            raise ConfigurationError(
                f"ej and ec must be positive, got ej={self.ej}, ec={self.ec}"
            )
        if not self.ej / self.ec > 1:
            raise ConfigurationError(
                f"ej/ec must exceed 1 (charge-insensitive regime), got {self.ej / self.ec:.3g}"
            )
        if int(self.charge_cutoff) != self.charge_cutoff or self.charge_cutoff < 10:
            raise ConfigurationError(
                f"charge_cutoff must be an integer >= 10 (truncation unsafe below), got {self.charge_cutoff}"
            )
        if not np.isfinite(self.ng):
            raise ConfigurationError(f"ng must be finite, got {self.ng}")

    @property
    def dimension(self) -> int:
        return 2 * int(self.charge_cutoff) + 1


@dataclass(frozen=True)
class TransmonSpectrum:
    """Diagonalized transmon: ascending energies, eigenvector columns, |<f|n|i>|.

    energies : (d,) h*GHz, ascending. eigenvectors : (d, d), column k is the
    k-th eigenstate in the charge basis. charge_elements : (d, d) magnitudes
    of the charge operator between eigenstates.
    """

    energies: np.ndarray
    eigenvectors: np.ndarray
    charge_elements: np.ndarray

    def __post_init__(self):
        v = self.eigenvectors
        gram = v.conj().T @ v
        unitary_defect = np.max(np.abs(gram - np.eye(v.shape[1])))
        if unitary_defect > 1e-10:
            raise NumericError(
                "eigenvector matrix not unitary",
                diagnostics={"max|V+V - I|": float(unitary_defect)},
            )
        de = np.diff(self.energies)
        if np.any(de < -1e-9):
            raise NumericError(
                "energies not ascending beyond degeneracy tolerance",
                diagnostics={"min gap": float(de.min())},
            )
        asym = np.max(np.abs(self.charge_elements - self.charge_elements.T))
        if asym > 1e-10:
            raise NumericError(
                "charge element magnitudes not symmetric",
                diagnostics={"max asymmetry": float(asym)},
            )

    @property
    def dimension(self) -> int:
        return self.energies.shape[0]

    def transition(self, i: int, f: int) -> float:
        """Transition frequency E_f - E_i in GHz."""
        return float(self.energies[f] - self.energies[i])

    @property
    def omega01(self) -> float:
        return self.transition(0, 1)

    @property
    def anharmonicity(self) -> float:
        return self.transition(1, 2) - self.transition(0, 1)


def charge_numbers(p: TransmonParams) -> np.ndarray:
    """Charge quantum numbers k = -cutoff..cutoff (the diagonal of n-hat)."""
    c = int(p.charge_cutoff)
    return np.arange(-c, c + 1, dtype=float)


def build_hamiltonian(p: TransmonParams) -> np.ndarray:
    """Charge-basis Hamiltonian: diag 4*ec*(k - ng)^2, off-diagonal -ej/2.

    The cosine of the phase acts as half the sum of the two charge shift
    operators, hence the -ej/2 on the first off-diagonals. Real symmetric.
    """
    k = charge_numbers(p)
    h = np.diag(4.0 * p.ec * (k - p.ng) ** 2)
    off = np.full(p.dimension - 1, -0.5 * p.ej)
    h += np.diag(off, 1) + np.diag(off, -1)
    return h


def diagonalize(p: TransmonParams) -> TransmonSpectrum:
    """Exact eigensystem plus charge matrix element magnitudes."""
    h = build_hamiltonian(p)
    try:
        energies, vectors = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise NumericError(
            "eigensolver failed to converge",
            diagnostics={
                "dimension": p.dimension,
                "cond": float(np.linalg.cond(h)),
                "scale": float(np.max(np.abs(h))),
            },
        ) from exc
    n_op = charge_numbers(p)
    # eigenvectors are real; <f|n|i> = V^T diag(n) V
    elements = np.abs(vectors.T @ (n_op[:, None] * vectors))
    elements = 0.5 * (elements + elements.T)  # kill eigensolver round-off asymmetry
    return TransmonSpectrum(energies=energies, eigenvectors=vectors, charge_elements=elements)


def n_bound(p: TransmonParams) -> int:
    """Number of levels bound in the cosine well: ceil((1/2)^(1/4) sqrt(ej/ec))."""
    return math.ceil((0.5) ** 0.25 * math.sqrt(p.ej / p.ec))


def charge_dispersion(p: TransmonParams, level: int) -> float:
    """|E_level(ng=0.5) - E_level(ng=0.0)| from two diagonalizations, in h*GHz."""
    if not 0 <= level < p.dimension - 2:
        raise RangeError(
            f"level {level} outside the truncation-safe range [0, {p.dimension - 3}]"
        )
    e_sweet = diagonalize(replace(p, ng=0.0)).energies[level]
    e_edge = diagonalize(replace(p, ng=0.5)).energies[level]
    return float(abs(e_edge - e_sweet))


def n_zpf(p: TransmonParams) -> float:
    """Zero-point charge fluctuation amplitude (ej/(32 ec))^(1/4)."""
    return (p.ej / (32.0 * p.ec)) ** 0.25


def _freq_and_anharm(ej: float, ec: float, ng: float, cutoff: int) -> np.ndarray:
    e = diagonalize(TransmonParams(ej=ej, ec=ec, ng=ng, charge_cutoff=cutoff)).energies
    w01 = e[1] - e[0]
    alpha = (e[2] - e[1]) - w01
    return np.array([w01, alpha])


def fit_ej_ec(
    omega01: float,
    alpha: float,
    ng: float = 0.25,
    charge_cutoff: int = 30,
    tol: float = 1e-4,
    max_iter: int = 100,
) -> TransmonParams:
    """Invert (omega01, alpha) -> (ej, ec) by damped Newton on the exact spectrum.

    Seeded from the asymptotic expressions omega01 ~ sqrt(8 ej ec) - ec and
    alpha ~ -ec; the numerical Jacobian uses central differences with step
    1e-4 h*GHz. Converges when both residuals are below `tol` GHz (0.1 MHz).
    """
    if not omega01 > 0:
        raise RangeError(f"omega01 must be positive, got {omega01}")
    if not alpha < 0:
        raise RangeError(f"alpha must be negative for a transmon, got {alpha}")
    if not abs(alpha) < omega01:
        raise RangeError("need |alpha| < omega01 (weak anharmonicity regime)")

    target = np.array([omega01, alpha])
    ec = -alpha
    ej = (omega01 + ec) ** 2 / (8.0 * ec)
    x = np.array([ej, ec])
    step = 1e-4

    def residual(x):
        return _freq_and_anharm(x[0], x[1], ng, charge_cutoff) - target

    r = residual(x)
    for _ in range(max_iter):
        if np.max(np.abs(r)) < tol:
            return TransmonParams(ej=x[0], ec=x[1], ng=ng, charge_cutoff=charge_cutoff)
        jac = np.empty((2, 2))
        for j in range(2):
            dx = np.zeros(2)
            dx[j] = step
            jac[:, j] = (residual(x + dx) - residual(x - dx)) / (2 * step)
        try:
            delta = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError as exc:
            raise FitError("singular Jacobian in (ej, ec) fit", residuals=r) from exc
        lam = 1.0
        for _ in range(30):  # backtracking: keep params valid and residual shrinking
            xn = x + lam * delta
            if xn[0] > 0 and xn[1] > 0 and xn[0] / xn[1] > 1:
                rn = residual(xn)
                if np.linalg.norm(rn) < np.linalg.norm(r):
                    x, r = xn, rn
                    break
            lam *= 0.5
        else:
            raise FitError("line search stalled in (ej, ec) fit", residuals=r)
    if np.max(np.abs(r)) < tol:
        return TransmonParams(ej=x[0], ec=x[1], ng=ng, charge_cutoff=charge_cutoff)
    raise FitError(
        f"no convergence in {max_iter} iterations", residuals=r
    )
