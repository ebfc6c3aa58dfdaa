"""Line-oriented configuration files (INI sections with key = value pairs)."""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace

from .stepper import Params


class ConfigError(ValueError):
    """Raised for unreadable or inconsistent configuration files."""


def parse_xi(text: str) -> float:
    """Adsorption rate; the literal token 'inf' selects the instantaneous limit."""
    text = text.strip().lower()
    if text in ("inf", "infinity"):
        return math.inf
    return float(text)


def format_xi(value: float) -> str:
    return "inf" if math.isinf(value) else repr(value)


@dataclass(frozen=True)
class EocSettings:
    axis: str = "h"
    levels: tuple = (4, 5)
    reference_level: int = 6
    taus: tuple = (2e-5, 4e-5)
    reference_tau: float = 1e-5
    xis: tuple = (1e-4, 2e-4, 4e-4)
    level: int = 5
    tau: float = 2e-5
    t_end: float = 0.05
    sample_dt: float = 2e-4


@dataclass(frozen=True)
class Config:
    scenario: str = "separation"
    params: Params = field(default_factory=Params)
    mesh_level: int | None = 6
    mesh_path: str | None = None
    shift_bulk: float | None = None
    shift_bnd: float | None = None
    phi0_constant: float | None = None
    output_dir: str = "out"
    snapshot_every: int = 0
    diagnostics_every: int = 1
    svg: bool = False
    solver: str = "lu"
    eoc: EocSettings = field(default_factory=EocSettings)


def _floats(text: str) -> tuple:
    return tuple(float(t) for t in text.split())


def _ints(text: str) -> tuple:
    return tuple(int(t) for t in text.split())


def load_config(path) -> Config:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    read = cp.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path!r}")
    try:
        return _from_parser(cp)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _from_parser(cp: configparser.ConfigParser) -> Config:
    cfg = Config()
    if cp.has_section("scenario"):
        cfg = replace(cfg, scenario=cp.get("scenario", "name", fallback=cfg.scenario))

    params = Params() if cfg.scenario != "adsorption" else Params(
        epsilon=0.01, delta=0.01, beta=4.0, tau=3e-5, t_end=2.5)
    if cp.has_section("params"):
        kwargs = {}
        for key in ("m", "m_gamma", "epsilon", "sigma", "delta", "beta", "tau", "t_end"):
            if cp.has_option("params", key):
                kwargs[key] = cp.getfloat("params", key)
        if cp.has_option("params", "xi"):
            kwargs["xi"] = parse_xi(cp.get("params", "xi"))
        params = replace(params, **kwargs)
    cfg = replace(cfg, params=params)

    if cp.has_section("mesh"):
        if cp.has_option("mesh", "path"):
            cfg = replace(cfg, mesh_path=cp.get("mesh", "path"), mesh_level=None)
        if cp.has_option("mesh", "level"):
            cfg = replace(cfg, mesh_level=cp.getint("mesh", "level"))

    if cp.has_section("potential"):
        if cp.has_option("potential", "shift_bulk"):
            cfg = replace(cfg, shift_bulk=cp.getfloat("potential", "shift_bulk"))
        if cp.has_option("potential", "shift_bnd"):
            cfg = replace(cfg, shift_bnd=cp.getfloat("potential", "shift_bnd"))

    if cp.has_section("initial"):
        if cp.has_option("initial", "constant"):
            cfg = replace(cfg, phi0_constant=cp.getfloat("initial", "constant"))

    if cp.has_section("output"):
        cfg = replace(
            cfg,
            output_dir=cp.get("output", "directory", fallback=cfg.output_dir),
            snapshot_every=cp.getint("output", "snapshot_every", fallback=cfg.snapshot_every),
            diagnostics_every=cp.getint("output", "diagnostics_every", fallback=cfg.diagnostics_every),
            svg=cp.getboolean("output", "svg", fallback=cfg.svg),
        )

    if cp.has_section("solver"):
        cfg = replace(cfg, solver=cp.get("solver", "method", fallback=cfg.solver))

    if cp.has_section("eoc"):
        eoc = cfg.eoc
        get = lambda key: cp.get("eoc", key)
        if cp.has_option("eoc", "axis"):
            eoc = replace(eoc, axis=get("axis").replace("-", "_"))
        if cp.has_option("eoc", "levels"):
            eoc = replace(eoc, levels=_ints(get("levels")))
        if cp.has_option("eoc", "reference_level"):
            eoc = replace(eoc, reference_level=cp.getint("eoc", "reference_level"))
        if cp.has_option("eoc", "taus"):
            eoc = replace(eoc, taus=_floats(get("taus")))
        if cp.has_option("eoc", "reference_tau"):
            eoc = replace(eoc, reference_tau=cp.getfloat("eoc", "reference_tau"))
        if cp.has_option("eoc", "xis"):
            eoc = replace(eoc, xis=_floats(get("xis")))
        if cp.has_option("eoc", "level"):
            eoc = replace(eoc, level=cp.getint("eoc", "level"))
        if cp.has_option("eoc", "tau"):
            eoc = replace(eoc, tau=cp.getfloat("eoc", "tau"))
        if cp.has_option("eoc", "t_end"):
            eoc = replace(eoc, t_end=cp.getfloat("eoc", "t_end"))
        if cp.has_option("eoc", "sample_dt"):
            eoc = replace(eoc, sample_dt=cp.getfloat("eoc", "sample_dt"))
        cfg = replace(cfg, eoc=eoc)

    if cfg.scenario not in ("separation", "adsorption", "custom"):
        raise ConfigError(f"unknown scenario {cfg.scenario!r}")
    if cfg.solver not in ("lu", "gmres"):
        raise ConfigError(f"unknown solver {cfg.solver!r}")
    return cfg


def save_config(cfg: Config, path) -> None:
    cp = configparser.ConfigParser()
    cp["scenario"] = {"name": cfg.scenario}
    p = cfg.params
    cp["params"] = {
        "m": repr(p.m), "m_gamma": repr(p.m_gamma), "epsilon": repr(p.epsilon),
        "sigma": repr(p.sigma), "delta": repr(p.delta), "beta": repr(p.beta),
        "xi": format_xi(p.xi), "tau": repr(p.tau), "t_end": repr(p.t_end),
    }
    cp["mesh"] = {}
    if cfg.mesh_path is not None:
        cp["mesh"]["path"] = cfg.mesh_path
    if cfg.mesh_level is not None:
        cp["mesh"]["level"] = str(cfg.mesh_level)
    cp["potential"] = {}
    if cfg.shift_bulk is not None:
        cp["potential"]["shift_bulk"] = repr(cfg.shift_bulk)
    if cfg.shift_bnd is not None:
        cp["potential"]["shift_bnd"] = repr(cfg.shift_bnd)
    if cfg.phi0_constant is not None:
        cp["initial"] = {"constant": repr(cfg.phi0_constant)}
    cp["output"] = {
        "directory": cfg.output_dir,
        "snapshot_every": str(cfg.snapshot_every),
        "diagnostics_every": str(cfg.diagnostics_every),
        "svg": str(cfg.svg).lower(),
    }
    cp["solver"] = {"method": cfg.solver}
    e = cfg.eoc
    cp["eoc"] = {
        "axis": e.axis,
        "levels": " ".join(str(v) for v in e.levels),
        "reference_level": str(e.reference_level),
        "taus": " ".join(repr(v) for v in e.taus),
        "reference_tau": repr(e.reference_tau),
        "xis": " ".join(repr(v) for v in e.xis),
        "level": str(e.level),
        "tau": repr(e.tau),
        "t_end": repr(e.t_end),
        "sample_dt": repr(e.sample_dt),
    }
    with open(path, "w") as fh:
        cp.write(fh)
