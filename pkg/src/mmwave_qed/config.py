"""Strict TOML experiment configs.

One config = one experiment kind plus its parameter blocks. Parsing is
strict: unknown keys anywhere are rejected with their full key path, since a
silently ignored typo in a physics parameter is the worst failure mode a
config front end can have. Frequencies in configs are linear GHz; times are
seconds or strings with an explicit unit suffix ("780 ns", "110 us").

Parsing validates module preconditions (cheap domain objects are built right
away) but performs no heavy computation; fits and scans run later.
"""

from dataclasses import dataclass
import hashlib
import re

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

import numpy as np

from .errors import ConfigurationError
from .calibration import CalibrationCurve
from .coupled import JointSystemParams
from .floquet import DriveSpec
from .readout import ReadoutModel
from .transmon import TransmonParams

__all__ = ["ExperimentConfig", "load_config", "parse_time", "KINDS"]

KINDS = (
    "spectrum",
    "scar-map",
    "coupled-map",
    "readout-fidelity",
    "efficiency",
    "calibrate",
    "thresholds",
)

_TIME_RE = re.compile(r"^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*(ns|us|µs|ms|s)\s*$")
_TIME_SCALE = {"ns": 1e-9, "us": 1e-6, "µs": 1e-6, "ms": 1e-3, "s": 1.0}


def parse_time(value, key="time"):
    """Seconds from a number (already seconds) or a suffixed string like '780 ns'."""
    if isinstance(value, bool):
        raise ConfigurationError(f"'{key}' must be a time, got a boolean")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        m = _TIME_RE.match(value)
        if m:
            return float(m.group(1)) * _TIME_SCALE[m.group(2)]
    raise ConfigurationError(
        f"'{key}' must be seconds or a string with a unit suffix (ns/us/ms/s), got {value!r}"
    )


class _Section:
    """Typed, strict accessor for one TOML table; close() rejects unknown keys."""

    def __init__(self, data, path=""):
        if not isinstance(data, dict):
            raise ConfigurationError(f"[{path or 'root'}] must be a table")
        self._d = data
        self._path = path
        self._seen = set()

    def _key(self, key):
        return f"{self._path}.{key}" if self._path else key

    def _fetch(self, key, required, default):
        self._seen.add(key)
        if key not in self._d:
            if required:
                raise ConfigurationError(f"missing required key '{self._key(key)}'")
            return default
        return self._d[key]

    def has(self, key):
        return key in self._d

    def number(self, key, required=False, default=None):
        v = self._fetch(key, required, default)
        if v is default and not required and key not in self._d:
            return default
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigurationError(f"'{self._key(key)}' must be a number, got {v!r}")
        return float(v)

    def integer(self, key, required=False, default=None):
        v = self._fetch(key, required, default)
        if v is default and not required and key not in self._d:
            return default
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigurationError(f"'{self._key(key)}' must be an integer, got {v!r}")
        return int(v)

    def string(self, key, required=False, default=None):
        v = self._fetch(key, required, default)
        if v is default and not required and key not in self._d:
            return default
        if not isinstance(v, str):
            raise ConfigurationError(f"'{self._key(key)}' must be a string, got {v!r}")
        return v

    def array(self, key, required=False, default=None):
        v = self._fetch(key, required, default)
        if v is default and not required and key not in self._d:
            return default
        if not isinstance(v, list):
            raise ConfigurationError(f"'{self._key(key)}' must be an array, got {v!r}")
        return v

    def time(self, key, required=False, default=None):
        v = self._fetch(key, required, default)
        if v is default and not required and key not in self._d:
            return default
        return parse_time(v, self._key(key))

    def raw(self, key, required=False, default=None):
        return self._fetch(key, required, default)

    def table(self, key, required=False):
        v = self._fetch(key, required, None)
        if v is None:
            return None
        return _Section(v, self._key(key))

    def close(self):
        extra = set(self._d) - self._seen
        if extra:
            where = f"[{self._path}]" if self._path else "the top level"
            raise ConfigurationError(
                f"unknown key(s) {sorted(extra)} in {where}; strict parsing rejects typos"
            )


def _parse_grid(value, key):
    """A grid is either an explicit array of numbers or {start, stop, count}."""
    if isinstance(value, list):
        try:
            arr = np.array([float(v) for v in value], dtype=float)
        except (TypeError, ValueError):
            raise ConfigurationError(f"'{key}' array must contain numbers") from None
    elif isinstance(value, dict):
        sec = _Section(value, key)
        start = sec.number("start", required=True)
        stop = sec.number("stop", required=True)
        count = sec.integer("count", required=True)
        sec.close()
        if count < 1:
            raise ConfigurationError(f"'{key}.count' must be >= 1")
        arr = np.linspace(start, stop, count)
    else:
        raise ConfigurationError(f"'{key}' must be an array or a {{start, stop, count}} table")
    if arr.size == 0:
        raise ConfigurationError(f"'{key}' must be non-empty")
    return arr


# ---------------------------------------------------------------------------
# device sources (direct parameters or fit targets, materialized at run time)


@dataclass(frozen=True)
class TransmonSource:
    params: object  # TransmonParams or None
    fit_targets: object  # (omega01, alpha) or None
    ng: float
    charge_cutoff: int

    def materialize(self) -> TransmonParams:
        if self.params is not None:
            return self.params
        from .transmon import fit_ej_ec

        w01, alpha = self.fit_targets
        return fit_ej_ec(w01, alpha, ng=self.ng, charge_cutoff=self.charge_cutoff)


def _parse_transmon(sec: _Section) -> TransmonSource:
    ng = sec.number("ng", default=0.25)
    cutoff = sec.integer("charge_cutoff", default=30)
    direct = sec.has("ej_GHz") or sec.has("ec_GHz")
    fitted = sec.has("omega01_GHz") or sec.has("alpha_GHz")
    if direct == fitted:
        raise ConfigurationError(
            f"[{sec._path}] needs either ej_GHz+ec_GHz or omega01_GHz+alpha_GHz (exactly one pair)"
        )
    if direct:
        params = TransmonParams(
            ej=sec.number("ej_GHz", required=True),
            ec=sec.number("ec_GHz", required=True),
            ng=ng,
            charge_cutoff=cutoff,
        )
        return TransmonSource(params=params, fit_targets=None, ng=ng, charge_cutoff=cutoff)
    w01 = sec.number("omega01_GHz", required=True)
    alpha = sec.number("alpha_GHz", required=True)
    if not w01 > 0 or not alpha < 0 or not abs(alpha) < w01:
        raise ConfigurationError(
            f"[{sec._path}] fit targets need omega01 > 0 and -omega01 < alpha < 0"
        )
    return TransmonSource(params=None, fit_targets=(w01, alpha), ng=ng, charge_cutoff=cutoff)


@dataclass(frozen=True)
class JointSource:
    params: object  # JointSystemParams or None
    fit_targets: object  # (omega01, alpha, omega_r, chi1) or None
    ng: float
    charge_cutoff: int
    transmon_levels: int
    mode_levels: int
    keep_dressed: int

    def materialize(self) -> JointSystemParams:
        if self.params is not None:
            return self.params
        from .coupled import fit_joint

        w01, alpha, wr, chi1 = self.fit_targets
        return fit_joint(
            w01,
            alpha,
            wr,
            chi1,
            ng=self.ng,
            charge_cutoff=self.charge_cutoff,
            transmon_levels=self.transmon_levels,
            mode_levels=self.mode_levels,
            keep_dressed=self.keep_dressed,
        )


def _parse_joint(sec: _Section) -> JointSource:
    ng = sec.number("ng", default=0.25)
    cutoff = sec.integer("charge_cutoff", default=30)
    nt = sec.integer("transmon_levels", default=41)
    nm = sec.integer("mode_levels", default=5)
    keep = sec.integer("keep_dressed", default=45)
    fit_sec = sec.table("fit")
    if fit_sec is not None:
        w01 = fit_sec.number("omega01_GHz", required=True)
        alpha = fit_sec.number("alpha_GHz", required=True)
        wr = fit_sec.number("omega_r_GHz", required=True)
        chi1 = fit_sec.number("chi1_GHz", required=True)
        fit_sec.close()
        if not w01 > 0 or not alpha < 0 or not wr > 0:
            raise ConfigurationError(f"[{sec._path}.fit] targets out of range")
        sec.close()
        return JointSource(
            params=None,
            fit_targets=(w01, alpha, wr, chi1),
            ng=ng,
            charge_cutoff=cutoff,
            transmon_levels=nt,
            mode_levels=nm,
            keep_dressed=keep,
        )
    params = JointSystemParams(
        transmon=TransmonParams(
            ej=sec.number("ej_GHz", required=True),
            ec=sec.number("ec_GHz", required=True),
            ng=ng,
            charge_cutoff=cutoff,
        ),
        mode_freq=sec.number("mode_freq_GHz", required=True),
        coupling=sec.number("coupling_GHz", required=True),
        transmon_levels=nt,
        mode_levels=nm,
        keep_dressed=keep,
    )
    sec.close()
    return JointSource(
        params=params,
        fit_targets=None,
        ng=ng,
        charge_cutoff=cutoff,
        transmon_levels=nt,
        mode_levels=nm,
        keep_dressed=keep,
    )


def _parse_readout(sec: _Section, nbar_list=False):
    """ReadoutModel fields; nbar_r may be a list when nbar_list is True."""
    raw_nbar = sec.raw("nbar_r", required=True)
    if isinstance(raw_nbar, list):
        if not nbar_list:
            raise ConfigurationError(f"'{sec._key('nbar_r')}' must be a single number here")
        nbars = [float(v) for v in raw_nbar]
    else:
        if isinstance(raw_nbar, bool) or not isinstance(raw_nbar, (int, float)):
            raise ConfigurationError(f"'{sec._key('nbar_r')}' must be a number")
        nbars = [float(raw_nbar)]
    if not nbars or any(v < 0 for v in nbars):
        raise ConfigurationError(f"'{sec._key('nbar_r')}' values must be >= 0")
    chi = sec.array("chi_GHz", required=True)
    model = ReadoutModel(
        omega_r=sec.number("omega_r_GHz", required=True),
        kappa=sec.number("kappa_GHz", required=True),
        chi=tuple(float(c) for c in chi),
        probe_detuning=sec.number("probe_detuning_GHz", required=True),
        nbar_r=nbars[0],
        tau_r=sec.time("tau_r", required=True),
        t1=sec.time("t1", required=True),
        eta=sec.number("eta", required=True),
        thermal_pop=sec.number("thermal_pop", default=0.0),
    )
    sec.close()
    return model, nbars


# ---------------------------------------------------------------------------
# per-kind payloads


@dataclass(frozen=True)
class SpectrumJob:
    source: TransmonSource
    levels: int


@dataclass(frozen=True)
class ScarMapJob:
    source: TransmonSource
    omega_d: np.ndarray
    xi: np.ndarray
    gate_charges: np.ndarray
    initial_states: tuple
    time_steps: int


@dataclass(frozen=True)
class CoupledMapJob:
    source: JointSource
    omega_d: np.ndarray
    xi: np.ndarray
    initial_labels: tuple
    time_steps: int
    resonance_guard: float
    stark_values: tuple


@dataclass(frozen=True)
class ReadoutFidelityJob:
    model: ReadoutModel
    nbar_values: tuple
    shots: int


@dataclass(frozen=True)
class EfficiencyJob:
    model: object  # ReadoutModel or None (checks-only run)
    shots: int
    checks: object  # raw dict of named closed-form checks, or None


@dataclass(frozen=True)
class CalibrateJob:
    curve: object  # CalibrationCurve or None when loading from CSV
    data_csv: object  # path string or None
    chi1: float
    extrapolate: tuple


@dataclass(frozen=True)
class ThresholdsJob:
    n_shots: int
    p_baseline: float
    confidence: float
    survival: object  # (tau_total_s, t1_s) or None


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    seed: int
    out_dir: object
    formats: tuple
    payload: object
    source_path: str
    sha256: str

    def wants(self, fmt: str) -> bool:
        return fmt in self.formats


# ---------------------------------------------------------------------------
# kind parsers


def _parse_spectrum(top: _Section) -> SpectrumJob:
    dev = top.table("device", required=True)
    source = _parse_transmon(dev)
    dev.close()
    rep = top.table("report")
    levels = 8
    if rep is not None:
        levels = rep.integer("levels", default=8)
        rep.close()
    if levels < 2:
        raise ConfigurationError("'report.levels' must be >= 2")
    return SpectrumJob(source=source, levels=levels)


def _parse_scar_map(top: _Section) -> ScarMapJob:
    dev = top.table("device", required=True)
    source = _parse_transmon(dev)
    dev.close()
    grid = top.table("grid", required=True)
    omega_d = _parse_grid(grid.raw("omega_d_GHz", required=True), grid._key("omega_d_GHz"))
    xi = _parse_grid(grid.raw("xi", required=True), grid._key("xi"))
    charges = _parse_grid(grid.raw("gate_charges", required=True), grid._key("gate_charges"))
    states_raw = grid.array("initial_states", default=[0, 1])
    time_steps = grid.integer("time_steps", default=256)
    grid.close()
    try:
        states = tuple(int(s) for s in states_raw)
    except (TypeError, ValueError):
        raise ConfigurationError("'grid.initial_states' must be integers") from None
    if any(s < 0 for s in states) or not states:
        raise ConfigurationError("'grid.initial_states' must be non-negative and non-empty")
    if np.any(omega_d <= 0):
        raise ConfigurationError("'grid.omega_d_GHz' must be positive")
    DriveSpec(omega_d=float(omega_d[0]), xi_grid=tuple(xi), time_steps=time_steps)
    return ScarMapJob(
        source=source,
        omega_d=omega_d,
        xi=xi,
        gate_charges=charges,
        initial_states=states,
        time_steps=time_steps,
    )


def _parse_coupled_map(top: _Section) -> CoupledMapJob:
    dev = top.table("device", required=True)
    source = _parse_joint(dev)  # closes the section itself (fit vs direct key sets)
    grid = top.table("grid", required=True)
    omega_d = _parse_grid(grid.raw("omega_d_GHz", required=True), grid._key("omega_d_GHz"))
    xi = _parse_grid(grid.raw("xi", required=True), grid._key("xi"))
    labels_raw = grid.array("initial_states", default=[[0, 0], [1, 0], [2, 0], [3, 0]])
    time_steps = grid.integer("time_steps", default=256)
    guard = grid.number("resonance_guard_GHz", default=0.010)
    grid.close()
    labels = []
    for item in labels_raw:
        if not isinstance(item, list) or len(item) != 2:
            raise ConfigurationError(
                "'grid.initial_states' must be pairs [transmon_level, mode_level]"
            )
        labels.append((int(item[0]), int(item[1])))
    res = top.table("resonances")
    stark_values = (0.0,)
    if res is not None:
        stark_values = tuple(float(v) for v in res.array("stark_GHz", default=[0.0]))
        res.close()
    if np.any(omega_d <= 0):
        raise ConfigurationError("'grid.omega_d_GHz' must be positive")
    DriveSpec(omega_d=float(omega_d[0]), xi_grid=tuple(xi), time_steps=time_steps)
    return CoupledMapJob(
        source=source,
        omega_d=omega_d,
        xi=xi,
        initial_labels=tuple(labels),
        time_steps=time_steps,
        resonance_guard=guard,
        stark_values=stark_values,
    )


def _parse_readout_fidelity(top: _Section) -> ReadoutFidelityJob:
    sec = top.table("readout", required=True)
    model, nbars = _parse_readout(sec, nbar_list=True)
    shots = top.integer("shots", default=50_000)
    if shots < 1:
        raise ConfigurationError("'shots' must be >= 1")
    return ReadoutFidelityJob(model=model, nbar_values=tuple(nbars), shots=shots)


_CHECK_KEYS = {
    "g_estimate": ("omega_r_GHz", "omega_1_GHz", "chi1_GHz", "alpha_GHz", "expected_GHz", "atol_GHz"),
    "n_bound": ("ej_GHz", "ec_GHz", "expected"),
    "empty_cavity": ("l2_mm", "l3_mm", "expected_GHz", "atol_GHz"),
    "dephasing": ("nbar_r", "kappa_GHz", "chi1_GHz", "expected_2pi_MHz", "rtol"),
    "efficiency_point": (
        "gamma_m_2pi_MHz",
        "gamma_phi_2pi_MHz",
        "expected_eta",
        "atol_eta",
        "expected_nbar_sys",
        "atol_nbar_sys",
    ),
    "detection": ("n_shots", "p_baseline", "confidence", "expected", "factor"),
    "survival": ("tau_total", "t1", "expected", "rtol"),
}


def _parse_efficiency(top: _Section) -> EfficiencyJob:
    model = None
    sec = top.table("readout")
    if sec is not None:
        model, _ = _parse_readout(sec, nbar_list=False)
    shots = top.integer("shots", default=50_000)
    if shots < 1:
        raise ConfigurationError("'shots' must be >= 1")
    checks = None
    chk = top.table("checks")
    if chk is not None:
        checks = {}
        for name in list(chk._d):
            if name not in _CHECK_KEYS:
                raise ConfigurationError(
                    f"unknown check '[checks.{name}]'; known: {sorted(_CHECK_KEYS)}"
                )
            sub = chk.table(name)
            entry = {}
            for key in _CHECK_KEYS[name]:
                entry[key] = sub.raw(key, required=True)
            sub.close()
            checks[name] = entry
        chk.close()
    if model is None and checks is None:
        raise ConfigurationError("efficiency config needs a [readout] block, [checks], or both")
    return EfficiencyJob(model=model, shots=shots, checks=checks)


def _parse_calibrate(top: _Section) -> CalibrateJob:
    sec = top.table("calibration", required=True)
    chi1 = sec.number("chi1_GHz", required=True)
    extrapolate = tuple(float(v) for v in sec.array("extrapolate", default=[]))
    data_csv = sec.string("data_csv", default=None)
    inline = sec.has("amplitudes") or sec.has("shifts_GHz") or sec.has("sigmas_GHz")
    if data_csv is not None and inline:
        raise ConfigurationError("[calibration] must use either inline arrays or data_csv, not both")
    curve = None
    if data_csv is None:
        amps = sec.array("amplitudes", required=True)
        shifts = sec.array("shifts_GHz", required=True)
        sigmas = sec.array("sigmas_GHz", required=True)
        curve = CalibrationCurve(
            amplitudes=np.array([float(v) for v in amps]),
            stark_shifts=np.array([float(v) for v in shifts]),
            sigmas=np.array([float(v) for v in sigmas]),
            chi1=chi1,
        )
    sec.close()
    return CalibrateJob(curve=curve, data_csv=data_csv, chi1=chi1, extrapolate=extrapolate)


def _parse_thresholds(top: _Section) -> ThresholdsJob:
    sec = top.table("test", required=True)
    n_shots = sec.integer("n_shots", required=True)
    p_baseline = sec.number("p_baseline", required=True)
    confidence = sec.number("confidence", required=True)
    sec.close()
    if n_shots < 100:
        raise ConfigurationError("'test.n_shots' must be >= 100")
    if not 0 < p_baseline < 1 or not 0 < confidence < 1:
        raise ConfigurationError("'test.p_baseline' and 'test.confidence' must be in (0, 1)")
    survival = None
    surv = top.table("survival")
    if surv is not None:
        survival = (surv.time("tau_total", required=True), surv.time("t1", required=True))
        surv.close()
        if survival[0] < 0 or survival[1] <= 0:
            raise ConfigurationError("[survival] times must be positive")
    return ThresholdsJob(
        n_shots=n_shots, p_baseline=p_baseline, confidence=confidence, survival=survival
    )


_PARSERS = {
    "spectrum": _parse_spectrum,
    "scar-map": _parse_scar_map,
    "coupled-map": _parse_coupled_map,
    "readout-fidelity": _parse_readout_fidelity,
    "efficiency": _parse_efficiency,
    "calibrate": _parse_calibrate,
    "thresholds": _parse_thresholds,
}


def load_config(path) -> ExperimentConfig:
    """Read, parse, and validate a TOML experiment config (no heavy computation)."""
    try:
        with open(path, "rb") as f:
            raw = f.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    try:
        data = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigurationError(f"TOML parse error in {path}: {exc}") from exc

    top = _Section(data)
    kind = top.string("kind", required=True)
    if kind not in KINDS:
        raise ConfigurationError(f"unknown kind '{kind}'; expected one of {list(KINDS)}")
    seed = top.integer("seed", default=0)
    out_dir = top.string("out_dir", default=None)
    formats_raw = top.array("formats", default=["csv", "json", "svg"])
    formats = tuple(formats_raw)
    for fmt in formats:
        if fmt not in ("csv", "json", "svg"):
            raise ConfigurationError(f"unknown output format '{fmt}' (csv/json/svg)")

    payload = _PARSERS[kind](top)
    top.close()
    return ExperimentConfig(
        kind=kind,
        seed=seed,
        out_dir=out_dir,
        formats=formats,
        payload=payload,
        source_path=str(path),
        sha256=hashlib.sha256(raw).hexdigest(),
    )
