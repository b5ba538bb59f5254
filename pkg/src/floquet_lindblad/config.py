"""Simulation configuration: a single JSON file, validated field by field."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, InvalidInputError
from .floquet import PeriodicMatrixFunction
from .linalg import Tolerances, check_density_matrix, matrix_from_json, matrix_to_json
from .wcl import BathSpectrum

GENERATORS = ("fast-wcl", "adiabatic")
KNOWN_FIELDS = {
    "dimension",
    "period",
    "omega",
    "hamiltonian",
    "couplings",
    "bath",
    "truncation",
    "harmonics",
    "generator",
    "initial_state",
    "time_grid",
    "steps_per_period",
    "rk4_steps_per_period",
    "tolerances",
    "seed",
    "dissipator_scale",
    "output_dir",
    "name",
}
DEFAULT_SEED = 20240611


@dataclass(frozen=True, eq=False)
class SimulationConfig:
    dimension: int
    period: float
    hamiltonian: PeriodicMatrixFunction
    couplings: list[np.ndarray]
    bath: BathSpectrum
    bath_spec: dict
    initial_state: np.ndarray
    times: np.ndarray
    time_grid: dict
    truncation: int | None = None
    harmonics: int | None = None
    generator: str = "fast-wcl"
    steps_per_period: int = 512
    rk4_steps_per_period: int = 512
    tolerances: Tolerances = field(default_factory=Tolerances)
    seed: int = DEFAULT_SEED
    dissipator_scale: float = 1.0
    output_dir: str | None = None
    name: str = "simulation"

    @property
    def omega(self) -> float:
        return 2 * math.pi / self.period

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "dimension": self.dimension,
            "period": self.period,
            "hamiltonian": self.hamiltonian.to_json()["coeffs"],
            "couplings": [matrix_to_json(s) for s in self.couplings],
            "bath": self.bath_spec,
            "truncation": self.truncation,
            "harmonics": self.harmonics,
            "generator": self.generator,
            "initial_state": matrix_to_json(self.initial_state),
            "time_grid": self.time_grid,
            "steps_per_period": self.steps_per_period,
            "rk4_steps_per_period": self.rk4_steps_per_period,
            "seed": self.seed,
            "dissipator_scale": self.dissipator_scale,
        }


def _matrix(obj, name: str, d: int) -> np.ndarray:
    try:
        m = matrix_from_json(obj)
    except (InvalidInputError, AttributeError) as exc:
        raise ConfigError(name, str(exc)) from exc
    if m.shape != (d, d):
        raise ConfigError(name, f"expected {d}x{d}, got {m.shape[0]}x{m.shape[1]}")
    return m


def _number(raw: dict, key: str, default=None, positive: bool = False, integer: bool = False):
    if key not in raw:
        if default is None:
            raise ConfigError(key, "required field is missing")
        return default
    v = raw[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(key, f"expected a number, got {type(v).__name__}")
    if integer and int(v) != v:
        raise ConfigError(key, f"expected an integer, got {v}")
    if not math.isfinite(v):
        raise ConfigError(key, "must be finite")
    if positive and not v > 0:
        raise ConfigError(key, f"must be positive, got {v}")
    return int(v) if integer else float(v)


def _time_grid(spec, period: float) -> np.ndarray:
    if not isinstance(spec, dict):
        raise ConfigError("time_grid", "expected an object")
    unknown = set(spec) - {"start", "stop", "periods", "points"}
    if unknown:
        raise ConfigError("time_grid", f"unknown keys {sorted(unknown)}")
    start = float(spec.get("start", 0.0))
    if "stop" in spec and "periods" in spec:
        raise ConfigError("time_grid", "give either stop or periods, not both")
    if "stop" in spec:
        stop = float(spec["stop"])
    elif "periods" in spec:
        stop = start + float(spec["periods"]) * period
    else:
        raise ConfigError("time_grid", "stop or periods is required")
    points = spec.get("points", 101)
    if not isinstance(points, int) or points < 1:
        raise ConfigError("time_grid.points", "must be a positive integer")
    if start < 0 or stop < start:
        raise ConfigError("time_grid", f"need 0 <= start <= stop, got [{start}, {stop}]")
    return np.linspace(start, stop, points)


def parse_config(raw: dict) -> SimulationConfig:
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "expected a JSON object")
    unknown = set(raw) - KNOWN_FIELDS
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown field")
    d = _number(raw, "dimension", integer=True, positive=True)
    if "period" in raw and "omega" in raw:
        raise ConfigError("period", "give either period or omega, not both")
    if "omega" in raw:
        period = 2 * math.pi / _number(raw, "omega", positive=True)
    else:
        period = _number(raw, "period", positive=True)

    ham = raw.get("hamiltonian")
    if not isinstance(ham, list) or not ham:
        raise ConfigError("hamiltonian", "expected a non-empty list of {n, matrix} entries")
    coeffs: dict[int, np.ndarray] = {}
    for i, item in enumerate(ham):
        if not isinstance(item, dict) or "n" not in item or "matrix" not in item:
            raise ConfigError(f"hamiltonian[{i}]", "expected {n, matrix}")
        n = item["n"]
        if isinstance(n, bool) or not isinstance(n, int):
            raise ConfigError(f"hamiltonian[{i}].n", "harmonic index must be an integer")
        if n in coeffs:
            raise ConfigError(f"hamiltonian[{i}].n", f"duplicate harmonic {n}")
        coeffs[n] = _matrix(item["matrix"], f"hamiltonian[{i}].matrix", d)
    tol = _tolerances(raw.get("tolerances"))
    for n, c in coeffs.items():
        partner = coeffs.get(-n, np.zeros_like(c))
        gap = float(np.max(np.abs(partner - c.conj().T)))
        if gap > tol.structural:
            raise ConfigError(
                f"hamiltonian[n={-n}]",
                f"H_{{-n}} must equal H_n^dag for Hermitian H(t); mismatch {gap:.3e} at n={n}",
            )
    H = PeriodicMatrixFunction(period, coeffs)

    cpl = raw.get("couplings")
    if not isinstance(cpl, list) or not cpl:
        raise ConfigError("couplings", "expected a non-empty list of matrices")
    couplings = [_matrix(c, f"couplings[{i}]", d) for i, c in enumerate(cpl)]

    bath_spec = raw.get("bath")
    if not isinstance(bath_spec, dict):
        raise ConfigError("bath", "expected an object")
    try:
        bath = BathSpectrum.from_config(bath_spec, len(couplings))
    except (InvalidInputError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError("bath", str(exc)) from exc

    if "initial_state" not in raw:
        raise ConfigError("initial_state", "required field is missing")
    rho0 = _matrix(raw["initial_state"], "initial_state", d)
    try:
        rho0 = check_density_matrix(rho0, tol.structural)
    except InvalidInputError as exc:
        raise ConfigError("initial_state", str(exc)) from exc

    times = _time_grid(raw.get("time_grid", {"periods": 5, "points": 101}), period)
    generator = raw.get("generator", "fast-wcl")
    if generator not in GENERATORS:
        raise ConfigError("generator", f"must be one of {GENERATORS}, got {generator!r}")

    truncation = raw.get("truncation")
    if truncation is not None:
        truncation = _number(raw, "truncation", integer=True)
        if truncation < 0:
            raise ConfigError("truncation", "must be non-negative")
        bw = H.operative_bandwidth()
        if truncation < bw + 2:
            raise ConfigError("truncation", f"N={truncation} is below bandwidth + 2 = {bw + 2}")
    harmonics = raw.get("harmonics")
    if harmonics is not None:
        harmonics = _number(raw, "harmonics", integer=True)
        if harmonics < 0:
            raise ConfigError("harmonics", "must be non-negative")

    steps = _number(raw, "steps_per_period", 512, positive=True, integer=True)
    rk4 = _number(raw, "rk4_steps_per_period", 512, positive=True, integer=True)
    if steps < 16:
        raise ConfigError("steps_per_period", "must be at least 16")
    if rk4 < 16:
        raise ConfigError("rk4_steps_per_period", "must be at least 16")
    seed = _number(raw, "seed", DEFAULT_SEED, integer=True)
    scale = _number(raw, "dissipator_scale", 1.0)
    out = raw.get("output_dir")
    if out is not None and not isinstance(out, str):
        raise ConfigError("output_dir", "expected a string")
    name = raw.get("name", "simulation")
    if not isinstance(name, str):
        raise ConfigError("name", "expected a string")
    return SimulationConfig(
        dimension=d,
        period=period,
        hamiltonian=H,
        couplings=couplings,
        bath=bath,
        bath_spec=dict(bath_spec),
        initial_state=rho0,
        times=times,
        time_grid=dict(raw.get("time_grid", {"periods": 5, "points": 101})),
        truncation=truncation,
        harmonics=harmonics,
        generator=generator,
        steps_per_period=steps,
        rk4_steps_per_period=rk4,
        tolerances=tol,
        seed=seed,
        dissipator_scale=scale,
        output_dir=out,
        name=name,
    )


def _tolerances(spec) -> Tolerances:
    if spec is None:
        return Tolerances()
    if not isinstance(spec, dict):
        raise ConfigError("tolerances", "expected an object")
    try:
        return Tolerances.from_dict(spec)
    except (InvalidInputError, TypeError, ValueError) as exc:
        raise ConfigError("tolerances", str(exc)) from exc


def load_config(path) -> SimulationConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError("<file>", f"{path} does not exist")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return parse_config(raw)
