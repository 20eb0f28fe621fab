"""Run configuration: flat key-value files with dotted sections.

Example::

    grid.points = 64
    initial.kind = taylor-green
    solver.dt = 1e-3
    solver.T = 0.1

Unknown keys are hard errors so typos never silently fall back to defaults.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

from .dynamics import SolverConfig
from .grid import GridSpec, VectorField, random_divergence_free, shear_mode, taylor_green
from .snapshots import read_snapshot


class ConfigError(ValueError):
    pass


def _parse_bool(text: str) -> bool:
    low = text.lower()
    if low in ("true", "on", "yes", "1"):
        return True
    if low in ("false", "off", "no", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(p) for p in text.split(","))


def _parse_ints(text: str) -> tuple[int, ...]:
    return tuple(int(p) for p in text.split(","))


_SCHEMA = {
    "grid.dim": (int, 3),
    "grid.points": (int, 32),
    "grid.box_length": (_parse_floats, (2.0 * math.pi,)),
    "initial.kind": (str, "taylor-green"),
    "initial.amplitude": (float, 1.0),
    "initial.seed": (int, 0),
    "initial.band": (int, 8),
    "initial.path": (str, ""),
    "solver.dt": (float, 1e-3),
    "solver.T": (float, 0.1),
    "solver.scheme": (str, "ETD-RK2"),
    "solver.dealias": (_parse_bool, True),
    "solver.snapshot_stride": (int, 1),
    "window.c_win": (float, 0.1),
    "window.doubling_factor": (float, 2.0),
    "diagnostics.j_max": (int, 2),
    "diagnostics.lambdas": (_parse_ints, (2,)),
    "diagnostics.amplitudes": (_parse_floats, (1.0, 2.0, 4.0)),
    "output.dir": (str, "out"),
    "kernels.dims": (_parse_ints, (1, 3)),
    "kernels.max_order": (int, 3),
    "kernels.t_values": (_parse_floats, (0.25, 1.0, 4.0)),
    "kernels.composite": (_parse_bool, True),
    "kernels.composite_points": (int, 128),
    "kernels.composite_box_factor": (float, 48.0),
    "kernels.composite_t_values": (_parse_floats, (0.5, 1.0, 2.0)),
    "kernels.composite_max_order": (int, 2),
    "picard.T": (float, 0.05),
    "picard.nodes": (int, 64),
    "picard.k_max": (int, 20),
    "theorem.system": (str, "nse"),
    "theorem.direction": (int, 1),
}

_INITIAL_KINDS = ("taylor-green", "random", "shear", "file")
_SYSTEMS = ("nse", "illustrative")


@dataclass(frozen=True)
class InitialSpec:
    kind: str
    amplitude: float
    seed: int
    band: int
    path: str


@dataclass(frozen=True)
class KernelSettings:
    dims: tuple[int, ...]
    max_order: int
    t_values: tuple[float, ...]
    composite: bool
    composite_points: int
    composite_box_factor: float
    composite_t_values: tuple[float, ...]
    composite_max_order: int


@dataclass(frozen=True)
class PicardSettings:
    T: float
    nodes: int
    k_max: int


@dataclass(frozen=True)
class RunConfig:
    grid: GridSpec
    initial: InitialSpec
    solver: SolverConfig
    c_win: float
    doubling_factor: float
    j_max: int
    lambdas: tuple[int, ...]
    amplitudes: tuple[float, ...]
    out_dir: Path
    kernels: KernelSettings
    picard: PicardSettings
    system: str
    direction: int

    def with_overrides(self, out_dir=None, seed=None) -> "RunConfig":
        cfg = self
        if out_dir is not None:
            cfg = replace(cfg, out_dir=Path(out_dir))
        if seed is not None:
            cfg = replace(cfg, initial=replace(cfg.initial, seed=int(seed)))
        return cfg


def _read_pairs(path) -> dict[str, str]:
    pairs = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _SCHEMA:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in pairs:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"{path}:{lineno}: empty value for {key!r}")
        pairs[key] = value
    return pairs


def parse_config(path) -> RunConfig:
    """Parse and fully validate a run configuration file."""
    pairs = _read_pairs(path)
    values = {}
    for key, (parser, default) in _SCHEMA.items():
        if key in pairs:
            try:
                values[key] = parser(pairs[key])
            except ValueError as exc:
                raise ConfigError(f"{path}: bad value for {key!r}: {exc}") from exc
        else:
            values[key] = default

    def fail(key, message):
        raise ConfigError(f"{path}: {key}: {message}")

    try:
        grid = GridSpec(values["grid.dim"], values["grid.points"], values["grid.box_length"])
    except ValueError as exc:
        raise ConfigError(f"{path}: grid.*: {exc}") from exc

    kind = values["initial.kind"]
    if kind not in _INITIAL_KINDS:
        fail("initial.kind", f"must be one of {_INITIAL_KINDS}, got {kind!r}")
    if kind == "file":
        if not values["initial.path"]:
            fail("initial.path", "required when initial.kind = file")
        if not Path(values["initial.path"]).is_file():
            fail("initial.path", f"no such file: {values['initial.path']}")
    if kind == "random" and not 1 <= values["initial.band"] < grid.points // 2:
        fail("initial.band", f"must satisfy 1 <= band < N/2 = {grid.points // 2}")
    initial = InitialSpec(kind, values["initial.amplitude"], values["initial.seed"],
                          values["initial.band"], values["initial.path"])

    try:
        solver = SolverConfig(values["solver.dt"], values["solver.T"], values["solver.scheme"],
                              values["solver.dealias"], values["solver.snapshot_stride"])
    except ValueError as exc:
        raise ConfigError(f"{path}: solver.*: {exc}") from exc

    if values["window.c_win"] <= 0:
        fail("window.c_win", "must be positive")
    if values["window.doubling_factor"] <= 1:
        fail("window.doubling_factor", "must exceed 1")
    if not 0 <= values["diagnostics.j_max"] <= 4:
        fail("diagnostics.j_max", "must be in 0..4 (derivative count guard)")
    if any(lam < 1 for lam in values["diagnostics.lambdas"]):
        fail("diagnostics.lambdas", "entries must be positive integers")
    if not values["diagnostics.amplitudes"] or any(a <= 0 for a in values["diagnostics.amplitudes"]):
        fail("diagnostics.amplitudes", "need a non-empty list of positive amplitudes")
    if values["theorem.system"] not in _SYSTEMS:
        fail("theorem.system", f"must be one of {_SYSTEMS}")
    if not 1 <= values["theorem.direction"] <= grid.dim:
        fail("theorem.direction", f"must be in 1..{grid.dim}")
    if values["picard.nodes"] < 8:
        fail("picard.nodes", "need at least 8 nodes")
    if values["picard.k_max"] < 1:
        fail("picard.k_max", "need at least one iteration")
    if values["picard.T"] <= 0:
        fail("picard.T", "must be positive")
    for key in ("kernels.max_order", "kernels.composite_max_order"):
        if not 0 <= values[key] <= 4:
            fail(key, "must be in 0..4")
    if any(t <= 0 for t in values["kernels.t_values"] + values["kernels.composite_t_values"]):
        fail("kernels.t_values", "times must be positive")
    if any(n not in (1, 2, 3) for n in values["kernels.dims"]):
        fail("kernels.dims", "dimensions must be in {1, 2, 3}")

    kernels = KernelSettings(values["kernels.dims"], values["kernels.max_order"],
                             values["kernels.t_values"], values["kernels.composite"],
                             values["kernels.composite_points"],
                             values["kernels.composite_box_factor"],
                             values["kernels.composite_t_values"],
                             values["kernels.composite_max_order"])
    picard = PicardSettings(values["picard.T"], values["picard.nodes"], values["picard.k_max"])

    return RunConfig(grid, initial, solver, values["window.c_win"],
                     values["window.doubling_factor"], values["diagnostics.j_max"],
                     values["diagnostics.lambdas"], values["diagnostics.amplitudes"],
                     Path(values["output.dir"]), kernels, picard,
                     values["theorem.system"], values["theorem.direction"])


def build_initial(cfg: RunConfig, amplitude: float | None = None) -> VectorField:
    """Construct the initial datum selected by the configuration."""
    a = cfg.initial.amplitude if amplitude is None else amplitude
    kind = cfg.initial.kind
    if kind == "taylor-green":
        return taylor_green(cfg.grid, a)
    if kind == "shear":
        return shear_mode(cfg.grid, a)
    if kind == "random":
        return random_divergence_free(cfg.grid, cfg.initial.seed, cfg.initial.band, a)
    loaded = read_snapshot(cfg.initial.path)
    if not isinstance(loaded, VectorField):
        raise ConfigError(f"{cfg.initial.path}: snapshot is not a vector field")
    if loaded.grid != cfg.grid:
        raise ConfigError(f"{cfg.initial.path}: snapshot grid differs from configured grid")
    return loaded
