"""Run configuration files (YAML) with strict validation.

Example::

    geometry: {L: 1.0, h: 1.0e-4}
    modes: [1, 2]
    repetitions: 5
    trajectory:
      sample: {tau: 0.3333333333333333, t: 0.3333333333333333, y: 1.0, epsilon: 1}
    sweep:
      tau: {start: 0.0, stop: 0.6666666666666666, num: 64}
      t: {start: 0.0, stop: 0.6666666666666666, num: 64}
    numerics: {n_max: 40, quad_tol: 1.0e-12, workers: 1}
    output: {dir: out, heatmap: true}

``geometry`` accepts either ``L`` and ``h`` or ``walls: [x_A, x_B]``.
``trajectory`` is either ``sample`` (burn h for tau, coast t, burn
epsilon*y*h for tau, coast t) or an explicit ``segments`` list of
``{kind: burn, duration: ..., h: ...}`` / ``{kind: coast, duration: ...}``.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .bogoliubov import DEFAULT_NMAX
from .modes import DEFAULT_QUAD_TOL, CavityGeometry
from .trajectories import H_WARN, ModePair, SampleScenario, Segment, Trajectory


class ConfigError(ValueError):
    pass


class ConfigWarning(UserWarning):
    pass


_SCHEMA = {
    "": {"geometry", "modes", "repetitions", "trajectory", "sweep", "numerics", "output"},
    "geometry": {"L", "h", "walls", "mass"},
    "trajectory": {"sample", "segments"},
    "trajectory.sample": {"tau", "t", "y", "epsilon"},
    "trajectory.segments[]": {"kind", "duration", "h"},
    "sweep": {"tau", "t"},
    "sweep.axis": {"start", "stop", "num"},
    "numerics": {"n_max", "quad_tol", "workers"},
    "output": {"dir", "heatmap"},
}


@dataclass(frozen=True)
class Axis:
    start: float
    stop: float
    num: int

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.num)


@dataclass
class RunConfig:
    geometry: CavityGeometry
    modes: ModePair
    repetitions: int = 1
    sample: dict | None = None
    segments: tuple[Segment, ...] | None = None
    sweep: dict[str, Axis] = field(default_factory=dict)
    n_max: int = DEFAULT_NMAX
    quad_tol: float = DEFAULT_QUAD_TOL
    workers: int = 1
    out_dir: str = "out"
    heatmap: bool = True
    warnings: list[str] = field(default_factory=list)

    def scenario(self, **overrides) -> SampleScenario:
        if self.sample is None:
            raise ConfigError("this operation needs a 'trajectory.sample' scenario")
        params = dict(self.sample, **overrides)
        return SampleScenario(
            tau=params["tau"], t=params["t"], h=self.geometry.h, y=params["y"],
            epsilon=params["epsilon"], k=self.modes.k, kp=self.modes.kp, N=self.repetitions,
        )

    def trajectory(self) -> Trajectory:
        if self.segments is not None:
            return Trajectory(self.segments, self.repetitions)
        return self.scenario().trajectory()

    def to_dict(self) -> dict:
        g = self.geometry
        traj = (
            {"sample": dict(self.sample)}
            if self.sample is not None
            else {"segments": [
                {"kind": s.kind, "duration": s.duration, **({"h": s.h_signed} if s.kind == "burn" else {})}
                for s in self.segments
            ]}
        )
        return {
            "geometry": {"L": g.L, "h": g.h, "mass": g.mass},
            "modes": [self.modes.k, self.modes.kp],
            "repetitions": self.repetitions,
            "trajectory": traj,
            "sweep": {k: {"start": a.start, "stop": a.stop, "num": a.num} for k, a in self.sweep.items()},
            "numerics": {"n_max": self.n_max, "quad_tol": self.quad_tol, "workers": self.workers},
            "output": {"dir": self.out_dir, "heatmap": self.heatmap},
        }

    def physics_hash(self) -> str:
        """SHA-256 of the resolved config, excluding output and worker settings."""
        d = self.to_dict()
        d.pop("output")
        d["numerics"].pop("workers")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()


def _check_keys(section: dict, schema_key: str, where: str):
    if not isinstance(section, dict):
        raise ConfigError(f"{where or 'top level'}: expected a mapping, got {type(section).__name__}")
    unknown = set(section) - _SCHEMA[schema_key]
    if unknown:
        raise ConfigError(f"{where or 'top level'}: unknown key(s) {sorted(unknown)}")


def _number(value, where: str, *, integer=False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    if integer and int(value) != value:
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    return int(value) if integer else float(value)


def parse_config(data: dict) -> RunConfig:
    """Validate an already-parsed mapping; see :func:`load_config`."""
    if data is None:
        data = {}
    _check_keys(data, "", "")
    notes: list[str] = []

    geo = data.get("geometry")
    if geo is None:
        raise ConfigError("geometry: section is required")
    _check_keys(geo, "geometry", "geometry")
    mass = _number(geo.get("mass", 0.0), "geometry.mass")
    try:
        if "walls" in geo:
            if "L" in geo or "h" in geo:
                raise ConfigError("geometry: give either walls or L/h, not both")
            xa, xb = (_number(v, "geometry.walls") for v in geo["walls"])
            geometry = CavityGeometry.from_walls(xa, xb, mass)
        else:
            geometry = CavityGeometry(
                _number(geo.get("L", 1.0), "geometry.L"), _number(geo.get("h", 0.0), "geometry.h"), mass
            )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"geometry: {exc}") from None
    if mass != 0:
        notes.append("geometry.mass != 0: accelerated segments will be rejected (massless only)")

    modes = data.get("modes", [1, 2])
    if not isinstance(modes, list) or len(modes) != 2:
        raise ConfigError(f"modes: expected a list of two mode indices, got {modes!r}")
    try:
        pair = ModePair(*(_number(m, "modes", integer=True) for m in modes))
    except ValueError as exc:
        raise ConfigError(f"modes: {exc}") from None

    reps = _number(data.get("repetitions", 1), "repetitions", integer=True)
    if reps < 1:
        raise ConfigError(f"repetitions: must be >= 1, got {reps}")

    traj = data.get("trajectory")
    if traj is None:
        raise ConfigError("trajectory: section is required")
    _check_keys(traj, "trajectory", "trajectory")
    if ("sample" in traj) == ("segments" in traj):
        raise ConfigError("trajectory: give exactly one of 'sample' or 'segments'")
    sample = segments = None
    h_values = [geometry.h]
    if "sample" in traj:
        s = traj["sample"]
        _check_keys(s, "trajectory.sample", "trajectory.sample")
        sample = {
            "tau": _number(s.get("tau", 0.0), "trajectory.sample.tau"),
            "t": _number(s.get("t", 0.0), "trajectory.sample.t"),
            "y": _number(s.get("y", 1.0), "trajectory.sample.y"),
            "epsilon": _number(s.get("epsilon", 1), "trajectory.sample.epsilon", integer=True),
        }
        try:
            SampleScenario(h=geometry.h, k=pair.k, kp=pair.kp, N=reps, **sample)
        except ValueError as exc:
            raise ConfigError(f"trajectory.sample: {exc}") from None
        h_values.append(sample["y"] * geometry.h)
    else:
        segs = traj["segments"]
        if not isinstance(segs, list) or not segs:
            raise ConfigError("trajectory.segments: expected a non-empty list")
        built = []
        for i, s in enumerate(segs):
            where = f"trajectory.segments[{i}]"
            _check_keys(s, "trajectory.segments[]", where)
            try:
                h = s.get("h")
                built.append(Segment(
                    s.get("kind"), _number(s.get("duration"), f"{where}.duration"),
                    None if h is None else _number(h, f"{where}.h"),
                ))
            except ValueError as exc:
                if isinstance(exc, ConfigError):
                    raise
                raise ConfigError(f"{where}: {exc}") from None
            if built[-1].h_signed is not None:
                h_values.append(abs(built[-1].h_signed))
        segments = tuple(built)
        try:
            Trajectory(segments, reps)
        except ValueError as exc:
            raise ConfigError(f"trajectory.segments: {exc}") from None

    h_big = max(h_values)
    if h_big > H_WARN:
        notes.append(f"perturbative validity: |h|={h_big:g} exceeds {H_WARN:g}; first-order results are unreliable")

    sweep = {}
    if "sweep" in data and data["sweep"] is not None:
        _check_keys(data["sweep"], "sweep", "sweep")
        if sample is None:
            raise ConfigError("sweep: sweeping tau/t needs a 'trajectory.sample' scenario")
        for name, ax in data["sweep"].items():
            where = f"sweep.{name}"
            _check_keys(ax, "sweep.axis", where)
            try:
                axis = Axis(_number(ax["start"], f"{where}.start"), _number(ax["stop"], f"{where}.stop"),
                            _number(ax["num"], f"{where}.num", integer=True))
            except KeyError as exc:
                raise ConfigError(f"{where}: missing key {exc}") from None
            if axis.num < 1 or axis.start < 0 or axis.stop < axis.start:
                raise ConfigError(f"{where}: need num >= 1 and 0 <= start <= stop")
            sweep[name] = axis

    num = data.get("numerics") or {}
    _check_keys(num, "numerics", "numerics")
    n_max = _number(num.get("n_max", DEFAULT_NMAX), "numerics.n_max", integer=True)
    if n_max < 2 * max(pair.k, pair.kp):
        raise ConfigError(f"numerics.n_max: must be at least twice the largest mode ({2 * max(pair.k, pair.kp)})")
    quad_tol = _number(num.get("quad_tol", DEFAULT_QUAD_TOL), "numerics.quad_tol")
    workers = _number(num.get("workers", 1), "numerics.workers", integer=True)
    if quad_tol <= 0 or workers < 1:
        raise ConfigError("numerics: quad_tol must be positive and workers >= 1")

    out = data.get("output") or {}
    _check_keys(out, "output", "output")
    heatmap = out.get("heatmap", True)
    if not isinstance(heatmap, bool):
        raise ConfigError("output.heatmap: expected true or false")

    cfg = RunConfig(
        geometry=geometry, modes=pair, repetitions=reps, sample=sample, segments=segments,
        sweep=sweep, n_max=n_max, quad_tol=quad_tol, workers=workers,
        out_dir=str(out.get("dir", "out")), heatmap=heatmap, warnings=notes,
    )
    for note in notes:
        warnings.warn(note, ConfigWarning, stacklevel=3)
    return cfg


def load_config(path) -> RunConfig:
    """Read and validate a YAML run configuration."""
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"{path}: YAML parse error{where}: {getattr(exc, 'problem', exc)}") from None
    return parse_config(data)


def dump_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False)
