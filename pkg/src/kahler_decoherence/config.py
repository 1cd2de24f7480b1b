"""Run configuration: JSON text in, validated :class:`RunConfig` out."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .constants import DEFAULT_L_MAX, DEFAULT_N_PHI, DEFAULT_N_THETA, DEFAULT_SCAN, DEFAULT_STEP, SCAN_TOL
from .errors import ParseError, ValidationError
from .pauli_channel import DecoherenceRates, HamiltonianSpec, RatesSchedule

COMMANDS = (
    "evolve-density",
    "evolve-distribution",
    "check",
    "classify",
    "bracket-table",
    "demo-negativity",
)
_NEEDS_RATES = {"evolve-density", "evolve-distribution", "check", "classify"}
_NEEDS_STATE = {"evolve-density", "evolve-distribution"}
_KEYS = {
    "command",
    "rates",
    "schedule",
    "hamiltonian",
    "bloch",
    "density",
    "harmonics_file",
    "l_max",
    "n_theta",
    "n_phi",
    "t_grid",
    "tol",
    "step",
    "scan",
    "grid_times",
    "out",
}
DEMO_RATES = (1.0, 1.0, -0.6)


@dataclass(frozen=True)
class TimeGrid:
    start: float = 0.0
    stop: float = 1.0
    count: int = 11

    def times(self) -> np.ndarray:
        if self.count == 1:
            return np.array([self.start])
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class RunConfig:
    command: str
    rates: tuple[float, float, float] | None = None
    schedule: tuple[tuple[float, tuple[float, float, float]], ...] | None = None
    hamiltonian: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    bloch: tuple[float, float, float] | None = None
    density: tuple[tuple[complex, complex], tuple[complex, complex]] | None = None
    harmonics_file: str | None = None
    l_max: int = DEFAULT_L_MAX
    n_theta: int = DEFAULT_N_THETA
    n_phi: int = DEFAULT_N_PHI
    t_grid: TimeGrid = field(default_factory=TimeGrid)
    tol: float = SCAN_TOL
    step: float = DEFAULT_STEP
    scan: tuple[int, int] = DEFAULT_SCAN
    grid_times: tuple[int, ...] = ()
    out: str | None = None

    @property
    def initial_source(self) -> str | None:
        for key in ("bloch", "density", "harmonics_file"):
            if getattr(self, key) is not None:
                return key
        return None

    def rates_schedule(self) -> RatesSchedule:
        if self.schedule is not None:
            return RatesSchedule.from_pairs(self.schedule)
        return RatesSchedule.constant(DecoherenceRates.from_array(self.rates))

    def hamiltonian_spec(self) -> HamiltonianSpec:
        return HamiltonianSpec.from_array(self.hamiltonian)

    def to_dict(self) -> dict[str, Any]:
        """Normalised, JSON-ready form; :func:`parse_config` accepts it back."""
        d: dict[str, Any] = {"command": self.command}
        if self.rates is not None:
            d["rates"] = list(self.rates)
        if self.schedule is not None:
            d["schedule"] = {"samples": [[t, list(g)] for t, g in self.schedule]}
        d["hamiltonian"] = list(self.hamiltonian)
        if self.bloch is not None:
            d["bloch"] = list(self.bloch)
        if self.density is not None:
            d["density"] = [[[z.real, z.imag] for z in row] for row in self.density]
        if self.harmonics_file is not None:
            d["harmonics_file"] = self.harmonics_file
        d.update(
            l_max=self.l_max,
            n_theta=self.n_theta,
            n_phi=self.n_phi,
            t_grid={"start": self.t_grid.start, "stop": self.t_grid.stop, "count": self.t_grid.count},
            tol=self.tol,
            step=self.step,
            scan=list(self.scan),
            grid_times=list(self.grid_times),
        )
        if self.out is not None:
            d["out"] = self.out
        return d


def _number(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(name, "expected a number")
    v = float(value)
    if not math.isfinite(v):
        raise ValidationError(name, "must be finite")
    return v


def _integer(value, name: str, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(name, "expected an integer")
    if value < minimum:
        raise ValidationError(name, f"must be >= {minimum}")
    return value


def _vector(value, name: str, n: int) -> tuple[float, ...]:
    if not isinstance(value, list) or len(value) != n:
        raise ValidationError(name, f"expected a list of {n} numbers")
    return tuple(_number(v, f"{name}[{i}]") for i, v in enumerate(value))


def _complex(value, name: str) -> complex:
    if isinstance(value, list):
        re, im = _vector(value, name, 2)
        return complex(re, im)
    return complex(_number(value, name))


def _schedule(value) -> tuple:
    name = "schedule.samples"
    if isinstance(value, dict):
        extra = set(value) - {"samples"}
        if extra:
            raise ValidationError(f"schedule.{sorted(extra)[0]}", "unknown key")
        value = value.get("samples")
    if not isinstance(value, list) or not value:
        raise ValidationError(name, "expected a non-empty list of samples")
    out = []
    for i, s in enumerate(value):
        if isinstance(s, dict):
            if set(s) != {"t", "rates"}:
                raise ValidationError(f"{name}[{i}]", "sample objects need exactly 't' and 'rates'")
            t, g = s["t"], s["rates"]
        elif isinstance(s, list) and len(s) == 2:
            t, g = s
        else:
            raise ValidationError(f"{name}[{i}]", "expected [t, [g1, g2, g3]]")
        out.append((_number(t, f"{name}[{i}].t"), _vector(g, f"{name}[{i}].rates", 3)))
    times = [t for t, _ in out]
    if times[0] < 0:
        raise ValidationError(name, "times must be >= 0")
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValidationError(name, "times must be strictly increasing")
    return tuple(out)


def parse_config(text: str) -> RunConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from exc
    if not isinstance(raw, dict):
        raise ParseError("configuration must be a JSON object", 1, 1)
    unknown = sorted(set(raw) - _KEYS)
    if unknown:
        raise ValidationError(unknown[0], "unknown key")

    command = raw.get("command")
    if command not in COMMANDS:
        raise ValidationError("command", f"expected one of {', '.join(COMMANDS)}")
    kw: dict[str, Any] = {"command": command}

    if "rates" in raw and "schedule" in raw:
        raise ValidationError("rates", "give either 'rates' or 'schedule', not both")
    if "rates" in raw:
        kw["rates"] = _vector(raw["rates"], "rates", 3)
    elif "schedule" in raw:
        kw["schedule"] = _schedule(raw["schedule"])
    elif command in _NEEDS_RATES:
        raise ValidationError("rates", f"'{command}' needs 'rates' or 'schedule'")
    elif command == "demo-negativity":
        kw["rates"] = DEMO_RATES
    if command == "check" and "schedule" in kw:
        raise ValidationError("rates", "'check' takes constant rates")

    if "hamiltonian" in raw:
        kw["hamiltonian"] = _vector(raw["hamiltonian"], "hamiltonian", 4)

    sources = [k for k in ("bloch", "density", "harmonics_file") if k in raw]
    if len(sources) > 1:
        raise ValidationError("initial", "give exactly one of bloch, density, harmonics_file")
    if command in _NEEDS_STATE and not sources:
        raise ValidationError("initial", f"'{command}' needs bloch, density or harmonics_file")
    if "bloch" in raw:
        kw["bloch"] = _vector(raw["bloch"], "bloch", 3)
        if np.linalg.norm(kw["bloch"]) > 1 + 1e-12:
            raise ValidationError("bloch", "norm exceeds 1")
    if "density" in raw:
        d = raw["density"]
        if not isinstance(d, list) or len(d) != 2 or not all(isinstance(r, list) and len(r) == 2 for r in d):
            raise ValidationError("density", "expected a 2x2 nested list")
        kw["density"] = tuple(tuple(_complex(v, f"density[{i}][{j}]") for j, v in enumerate(r)) for i, r in enumerate(d))
    if "harmonics_file" in raw:
        if not isinstance(raw["harmonics_file"], str) or not raw["harmonics_file"]:
            raise ValidationError("harmonics_file", "expected a path")
        if command == "evolve-density":
            raise ValidationError("initial", "'evolve-density' needs bloch or density")
        kw["harmonics_file"] = raw["harmonics_file"]

    for key, minimum in (("l_max", 0), ("n_theta", 1), ("n_phi", 1)):
        if key in raw:
            kw[key] = _integer(raw[key], key, minimum)

    if "t_grid" in raw:
        tg = raw["t_grid"]
        if not isinstance(tg, dict) or set(tg) - {"start", "stop", "count"}:
            raise ValidationError("t_grid", "expected {start, stop, count}")
        grid = TimeGrid(
            _number(tg.get("start", 0.0), "t_grid.start"),
            _number(tg.get("stop", 1.0), "t_grid.stop"),
            _integer(tg.get("count", 11), "t_grid.count", 1),
        )
        if grid.start < 0:
            raise ValidationError("t_grid.start", "must be >= 0")
        if grid.stop < grid.start:
            raise ValidationError("t_grid.stop", "must be >= start")
        kw["t_grid"] = grid

    for key in ("tol", "step"):
        if key in raw:
            v = _number(raw[key], key)
            if v <= 0:
                raise ValidationError(key, "must be positive")
            kw[key] = v
    if "scan" in raw:
        s = raw["scan"]
        if not isinstance(s, list) or len(s) != 2:
            raise ValidationError("scan", "expected [n_theta, n_phi]")
        kw["scan"] = (_integer(s[0], "scan[0]", 2), _integer(s[1], "scan[1]", 1))
    if "grid_times" in raw:
        gt = raw["grid_times"]
        if not isinstance(gt, list):
            raise ValidationError("grid_times", "expected a list of time indices")
        count = kw.get("t_grid", TimeGrid()).count
        idx = tuple(_integer(i, "grid_times", 0) for i in gt)
        if any(i >= count for i in idx):
            raise ValidationError("grid_times", "index beyond t_grid.count")
        kw["grid_times"] = idx
    if "out" in raw:
        if not isinstance(raw["out"], str):
            raise ValidationError("out", "expected a path")
        kw["out"] = raw["out"]
    return RunConfig(**kw)
