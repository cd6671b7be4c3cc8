"""JSON tool configuration: schema validation and conversion to model objects.

Config files carry units in their field names (``l_mm``, ``E_MPa``); the
objects built here are in SI. Every schema violation is reported with the
dotted path of the offending field.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema
from referencing import Registry, Resource

from hairclip import mechanics as mech
from hairclip.design import DesignGrid, DesignObjective, Target
from hairclip.mechanics import Convention, EnergyLandscape, Material, RibbonGeometry
from hairclip.simulation import (
    REF_HCM_BARRIER,
    SUBSTRATES,
    ConfigError,
    GaitMode,
    RobotConfig,
    SubstrateFriction,
    SuiteEntry,
)

SCHEMA_FILES = ("config.schema.json", "suite.schema.json", "output.schema.json")

REFERENCE_CONFIG = {
    "material": {"E_MPa": 1730.0, "nu": 0.40, "rho_s_kg_m3": 1270.0},
    "geometry": {"l_mm": 129.1, "D_mm": 16.0, "h_mm": 15.0, "t_mm": 0.381},
    "convention": "paper-literal",
}

DEFAULT_STIFFNESS = {"K1": 0.0205, "K2": 0.2186, "K3": 0.0848}


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    return json.loads(resources.files("hairclip.schemas").joinpath(name).read_text(encoding="utf-8"))


@lru_cache(maxsize=1)
def _registry() -> Registry:
    return Registry().with_resources(
        (f"hairclip/{name}", Resource.from_contents(load_schema(name))) for name in SCHEMA_FILES
    )


def validate(instance, schema_name: str) -> None:
    """Raise :class:`ConfigError` naming the first offending field (sorted by path)."""
    schema = load_schema(schema_name)
    validator = jsonschema.Draft202012Validator(schema, registry=_registry())
    errors = sorted(validator.iter_errors(instance), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if not errors:
        return
    err = errors[0]
    path = [str(p) for p in err.absolute_path]
    if err.validator == "required":
        missing = err.message.split("'")[1]
        path.append(missing)
        msg = "required field is missing"
    elif err.validator == "additionalProperties":
        extra = sorted(set(err.instance) - set(err.schema.get("properties", {})))
        path.append(extra[0] if extra else "?")
        msg = "unknown field"
    else:
        msg = err.message
    raise ConfigError(f"{'.'.join(path) or '<root>'}: {msg}")


@dataclass(frozen=True)
class SimulationSettings:
    dt: float = 1e-4
    duration: float = 5.0
    sample_rate: float = 1000.0
    workers: int = 1


@dataclass(frozen=True)
class OutputSettings:
    dir: str | None = None
    json: bool = False
    plot_data: bool = False


@dataclass(frozen=True)
class ToolConfig:
    material: Material
    geometry: RibbonGeometry
    convention: Convention
    robot: RobotConfig
    simulation: SimulationSettings
    stiffness: dict[str, float]
    grid: DesignGrid
    objective: DesignObjective
    output: OutputSettings
    sweep_workers: int = 1
    raw: dict = field(default_factory=dict, repr=False, compare=False)


def _at(block: str, fn, *args, **kwargs):
    # re-raise model validation errors with the config block they came from
    try:
        return fn(*args, **kwargs)
    except (mech.ValidationError, ConfigError) as exc:
        raise ConfigError(f"{block}: {exc}") from None


def _si(block: dict, key: str, scale: float, default: float) -> float:
    # unit-suffixed field converted to SI; omitted fields keep the exact SI default
    return block[key] / scale if key in block else default


def build_robot(robot: dict, actuation: dict) -> RobotConfig:
    """RobotConfig from the unit-suffixed ``robot`` and ``actuation`` blocks."""
    defaults = RobotConfig()
    L = _si(robot, "L_mm", 1e3, defaults.body_length)
    Lf = _si(robot, "L_f_mm", 1e3, defaults.flexion_length)
    if not Lf < L:
        raise ConfigError("robot.L_f_mm: flexion length must be shorter than L_mm")
    barrier = _si(robot, "hcm_barrier_mJ", 1e3, REF_HCM_BARRIER)
    landscape = _at("robot", EnergyLandscape, U_barr=barrier, stroke=L - Lf)
    substrate = SUBSTRATES[robot.get("substrate", "wood")]
    if "friction" in robot:
        fr = robot["friction"]
        substrate = SubstrateFriction("custom", fr["mu_plastic"], fr["mu_rubber"])
    limit = actuation.get("servo_energy_limit_mJ")
    kwargs = dict(
        total_mass=_si(robot, "mass_g", 1e3, defaults.total_mass),
        mass_split=robot.get("fore_mass_fraction", defaults.mass_split),
        body_length=L,
        flexion_length=Lf,
        fore_landscape=landscape,
        rear_landscape=landscape,
        spine_damping=robot.get("spine_damping_N_s_m", defaults.spine_damping),
        snap_time=_si(robot, "snap_time_ms", 1e3, defaults.snap_time),
        substrate=substrate,
        frequency=actuation.get("frequency_Hz", defaults.frequency),
        mode=GaitMode(actuation.get("mode", defaults.mode.value)),
        servo_energy_limit=None if limit is None else limit / 1e3,
        actuated=actuation.get("actuated", True),
        kick_gain=robot.get("kick_gain_N_s_m", defaults.kick_gain),
        servo_rate=robot.get("servo_rate_m_s", defaults.servo_rate),
        servo_gain=robot.get("servo_gain_N_s_m", defaults.servo_gain),
        servo_margin=robot.get("servo_margin", defaults.servo_margin),
        contact_stiffness=robot.get("contact_stiffness_N_m", defaults.contact_stiffness),
    )
    return _at("robot", RobotConfig, **kwargs)


def _range(values: list[float]) -> tuple[float, float, float]:
    lo, hi, step = (v / 1e3 for v in values)
    return lo, hi, step


def parse_config(raw: dict, convention: str | None = None) -> ToolConfig:
    """Validate ``raw`` against the config schema and build the model objects.

    ``convention`` overrides the file's convention (the ``--convention`` flag).
    """
    validate(raw, "config.schema.json")
    m = raw["material"]
    g = raw["geometry"]
    material = _at(
        "material",
        Material,
        E=m["E_MPa"] * 1e6,
        nu=m.get("nu", mech.PETG_NU),
        rho_s=m.get("rho_s_kg_m3", mech.PETG_RHO),
    )
    geometry = _at(
        "geometry", RibbonGeometry, l=g["l_mm"] / 1e3, D=g["D_mm"] / 1e3, h=g["h_mm"] / 1e3, t=g["t_mm"] / 1e3
    )
    conv = Convention(convention or raw.get("convention", Convention.PAPER_LITERAL.value))
    robot = build_robot(raw.get("robot", {}), raw.get("actuation", {}))

    s = raw.get("simulation", {})
    sim = SimulationSettings(
        dt=s.get("dt_s", 1e-4),
        duration=s.get("duration_s", 5.0),
        sample_rate=s.get("sample_rate_Hz", 1000.0),
        workers=s.get("workers", 1),
    )

    sw = raw.get("sweep", {})
    grid_defaults = DesignGrid()
    grid = _at(
        "sweep",
        DesignGrid,
        l_range=_range(sw["l_mm"]) if "l_mm" in sw else grid_defaults.l_range,
        D_range=_range(sw["D_mm"]) if "D_mm" in sw else grid_defaults.D_range,
        material=material,
        h=geometry.h,
        t=geometry.t,
        convention=conv,
    )

    o = raw.get("optimize", {})
    budget = o.get("budget_mJ")
    objective = _at(
        "optimize",
        DesignObjective,
        target=Target(o.get("target", Target.TIP_ANGLE.value)),
        budget=math.inf if budget is None else budget / 1e3,
        w_psi=o.get("w_psi", 1.0),
        w_U=o.get("w_U", 0.0),
        l_bounds=tuple(v / 1e3 for v in o["l_bounds_mm"]) if "l_bounds_mm" in o else None,
        D_bounds=tuple(v / 1e3 for v in o["D_bounds_mm"]) if "D_bounds_mm" in o else None,
        levels=o.get("levels", 4),
    )

    out = raw.get("output", {})
    return ToolConfig(
        material=material,
        geometry=geometry,
        convention=conv,
        robot=robot,
        simulation=sim,
        stiffness=dict(raw.get("stiffness", {}).get("K_N_mm", DEFAULT_STIFFNESS)),
        grid=grid,
        objective=objective,
        output=OutputSettings(dir=out.get("dir"), json=out.get("json", False), plot_data=out.get("plot_data", False)),
        sweep_workers=sw.get("workers", 1),
        raw=raw,
    )


def read_json(path: str | Path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def load_config(path: str | Path | None = None, convention: str | None = None) -> ToolConfig:
    """Load a config file, or the reference configuration when ``path`` is None."""
    raw = REFERENCE_CONFIG if path is None else read_json(path)
    return parse_config(raw, convention=convention)


def load_suite(path: str | Path, base: ToolConfig) -> tuple[list[SuiteEntry], int]:
    """Suite entries in declaration order plus the requested worker count."""
    raw = read_json(path)
    validate(raw, "suite.schema.json")
    base_robot = base.raw.get("robot", {})
    base_act = base.raw.get("actuation", {})
    entries = []
    for i, e in enumerate(raw["entries"]):
        try:
            robot = build_robot({**base_robot, **e.get("robot", {})}, {**base_act, **e.get("actuation", {})})
        except ConfigError as exc:
            raise ConfigError(f"entries.{i}.{exc}") from None
        entries.append(
            SuiteEntry(
                label=e["label"],
                config=robot,
                duration=e.get("duration_s", base.simulation.duration),
                dt=e.get("dt_s", base.simulation.dt),
            )
        )
    labels = [e.label for e in entries]
    if len(set(labels)) != len(labels):
        raise ConfigError("entries: labels must be unique")
    return entries, raw.get("workers", base.simulation.workers)
