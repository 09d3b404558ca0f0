"""Pipeline configuration: flat ``section.key = value`` files.

Lines are ``section.key = value``; ``#`` starts a comment. Unknown keys are
rejected. ``dump_config`` writes a file that loads back to an equal config.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .dynamics import IntegratorOptions, ModelParams
from .errors import BasinAtlasError, ConfigError
from .kernels import RadialKernel
from .separatrix import GridSpec
from .surface import CoverSpec

MODEL_KEYS = ("p", "q", "r", "a", "b", "c", "e", "f", "g", "u", "v", "w")
PRESETS = {"paper", "paper.cfg"}


@dataclass(frozen=True)
class PipelineConfig:
    params: ModelParams
    grid: GridSpec
    bisection_tol: float = 1e-4
    integrator: IntegratorOptions = field(default_factory=IntegratorOptions)
    kernel: RadialKernel = field(default_factory=RadialKernel)
    cover: CoverSpec = field(default_factory=CoverSpec)
    trunc_tol: float = 1e-14
    delta: float | None = None  # None: delta_fraction of each cloud's bounding-box diagonal
    delta_fraction: float = 0.01
    normal_k: int = 12
    mesh_resolution: int = 40
    mesh_obj: bool = False
    field_csv: bool = False
    output_dir: str = "out"
    seed: int = 0


def _pos_float(s):
    v = float(s)
    if not v > 0:
        raise ValueError("must be positive")
    return v


def _nonneg_float(s):
    v = float(s)
    if not v >= 0:
        raise ValueError("must be nonnegative")
    return v


def _int_at_least(lo):
    def parse(s):
        try:
            v = int(s)
        except ValueError:
            raise ValueError("must be an integer") from None
        if v < lo:
            raise ValueError(f"must be an integer >= {lo}")
        return v
    return parse


def _auto(parse):
    def inner(s):
        return None if s.strip().lower() == "auto" else parse(s)
    return inner


def _bool(s):
    t = s.strip().lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise ValueError("must be true or false")


def _counts(s):
    parts = [p.strip() for p in s.split(",")]
    if len(parts) != 3:
        raise ValueError("must be three comma-separated integers")
    vals = tuple(_int_at_least(1)(p) for p in parts)
    return vals


def _preset(s):
    s = s.strip()
    if s.lower() == "none":
        return None
    if s != "paper-d4":
        raise ValueError("must be 'paper-d4' or 'none'")
    return s


_REQUIRED = object()

# key -> (parser, default)
SCHEMA = {
    **{f"model.{k}": (_pos_float, _REQUIRED) for k in MODEL_KEYS},
    "grid.n": (_int_at_least(2), _REQUIRED),
    "grid.gamma": (_pos_float, _REQUIRED),
    "bisection.tol": (_pos_float, 1e-4),
    "integrator.t_max": (_pos_float, 1000.0),
    "integrator.rtol": (_pos_float, 1e-8),
    "integrator.atol": (_pos_float, 1e-10),
    "integrator.capture_radius": (_pos_float, 1e-2),
    "integrator.x_max": (_auto(_pos_float), None),
    "integrator.max_steps": (_int_at_least(1), 1_000_000),
    "kernel.family": (str.strip, "WendlandC6"),
    "kernel.epsilon": (_pos_float, 1.0),
    "cover.counts": (_counts, (4, 4, 4)),
    "cover.preset": (_preset, None),
    "cover.overlap": (_pos_float, 1.25),
    "cover.pad": (_nonneg_float, 0.01),
    "cover.shepard": (str.strip, "WendlandC2"),
    "wsvd.trunc_tol": (_nonneg_float, 1e-14),
    "surface.delta": (_auto(_pos_float), None),
    "surface.delta_fraction": (_pos_float, 0.01),
    "surface.normal_k": (_int_at_least(3), 12),
    "mesh.resolution": (_int_at_least(2), 40),
    "mesh.obj": (_bool, False),
    "mesh.field_csv": (_bool, False),
    "output.dir": (str.strip, "out"),
    "run.seed": (_int_at_least(0), 0),
}


def parse_config(text: str, source: str = "<string>") -> PipelineConfig:
    raw: dict[str, tuple[str, int]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{source}:{lineno}: expected 'section.key = value', got {line.strip()!r}")
        key, value = (s.strip() for s in body.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r} (first set on line {raw[key][1]})")
        if not value:
            raise ConfigError(f"{source}:{lineno}: empty value for {key!r}")
        raw[key] = (value, lineno)

    missing = [k for k, (_, d) in SCHEMA.items() if d is _REQUIRED and k not in raw]
    if missing:
        raise ConfigError(f"{source}: missing required fields: {', '.join(missing)}")

    vals = {}
    for key, (parse, default) in SCHEMA.items():
        if key in raw:
            text_val, lineno = raw[key]
            try:
                vals[key] = parse(text_val)
            except ValueError as exc:
                raise ConfigError(f"{source}:{lineno}: {key}: {exc}") from None
        else:
            vals[key] = default
    return _build(vals, source)


def _build(v: dict, source: str) -> PipelineConfig:
    def section(name, make):
        try:
            return make()
        except BasinAtlasError as exc:
            raise ConfigError(f"{source}: {name}: {exc}") from None

    params = section("model", lambda: ModelParams(**{k: v[f"model.{k}"] for k in MODEL_KEYS}))
    grid = section("grid", lambda: GridSpec(v["grid.n"], v["grid.gamma"]))
    integ = section("integrator", lambda: IntegratorOptions(
        t_max=v["integrator.t_max"], rtol=v["integrator.rtol"], atol=v["integrator.atol"],
        capture_radius=v["integrator.capture_radius"], x_max=v["integrator.x_max"],
        max_steps=v["integrator.max_steps"]))
    kernel = section("kernel", lambda: RadialKernel(v["kernel.family"], v["kernel.epsilon"]))
    shep = section("cover.shepard", lambda: RadialKernel(v["cover.shepard"], 1.0).family)
    cover = CoverSpec(counts=v["cover.counts"], preset=v["cover.preset"], overlap=v["cover.overlap"],
                      pad=v["cover.pad"], shepard_family=shep)
    x_max = integ.x_max if integ.x_max is not None else params.x_max
    if grid.gamma > x_max:
        raise ConfigError(f"{source}: grid.gamma: {grid.gamma} exceeds the state bound integrator.x_max={x_max}")
    return PipelineConfig(
        params=params, grid=grid, bisection_tol=v["bisection.tol"], integrator=integ,
        kernel=kernel, cover=cover, trunc_tol=v["wsvd.trunc_tol"], delta=v["surface.delta"],
        delta_fraction=v["surface.delta_fraction"], normal_k=v["surface.normal_k"],
        mesh_resolution=v["mesh.resolution"], mesh_obj=v["mesh.obj"], field_csv=v["mesh.field_csv"],
        output_dir=v["output.dir"], seed=v["run.seed"],
    )


def preset_text(name: str = "paper.cfg") -> str:
    return resources.files("basin_atlas").joinpath("presets", "paper.cfg").read_text()


def load_config(path) -> PipelineConfig:
    """Load a config file; the bare names 'paper' / 'paper.cfg' fall back to the shipped preset."""
    p = Path(path)
    if p.is_file():
        return parse_config(p.read_text(), str(p))
    if str(path) in PRESETS:
        return parse_config(preset_text(), "preset:paper.cfg")
    raise ConfigError(f"config file not found: {path}")


def _flatten(cfg: PipelineConfig) -> dict[str, object]:
    P, I = cfg.params, cfg.integrator
    out = {f"model.{k}": getattr(P, k) for k in MODEL_KEYS}
    out.update({
        "grid.n": cfg.grid.n, "grid.gamma": cfg.grid.gamma,
        "bisection.tol": cfg.bisection_tol,
        "integrator.t_max": I.t_max, "integrator.rtol": I.rtol, "integrator.atol": I.atol,
        "integrator.capture_radius": I.capture_radius,
        "integrator.x_max": "auto" if I.x_max is None else I.x_max,
        "integrator.max_steps": I.max_steps,
        "kernel.family": cfg.kernel.family, "kernel.epsilon": cfg.kernel.epsilon,
        "cover.counts": ",".join(str(c) for c in cfg.cover.counts),
        "cover.preset": cfg.cover.preset or "none",
        "cover.overlap": cfg.cover.overlap, "cover.pad": cfg.cover.pad,
        "cover.shepard": cfg.cover.shepard_family,
        "wsvd.trunc_tol": cfg.trunc_tol,
        "surface.delta": "auto" if cfg.delta is None else cfg.delta,
        "surface.delta_fraction": cfg.delta_fraction, "surface.normal_k": cfg.normal_k,
        "mesh.resolution": cfg.mesh_resolution,
        "mesh.obj": str(cfg.mesh_obj).lower(), "mesh.field_csv": str(cfg.field_csv).lower(),
        "output.dir": cfg.output_dir, "run.seed": cfg.seed,
    })
    return out


def dump_config(cfg: PipelineConfig) -> str:
    lines = []
    for key, val in _flatten(cfg).items():
        lines.append(f"{key} = {val!r}" if isinstance(val, float) else f"{key} = {val}")
    return "\n".join(lines) + "\n"


def config_dict(cfg: PipelineConfig) -> dict:
    return {k: v for k, v in _flatten(cfg).items()}


def replace(cfg: PipelineConfig, **changes) -> PipelineConfig:
    return dataclasses.replace(cfg, **changes)
