"""Simulation configuration and its INI-style text format."""
from __future__ import annotations

import configparser
import io
from dataclasses import asdict, dataclass, field, fields

from .bedrf import DIRICHLET, NEUMANN
from .geometry import EMISSION_MODES
from .sampler import Material


@dataclass
class SimulationConfig:
    """Physical constants, estimator toggles and run controls.

    The source emits a unit-energy impulse normalised to unit pressure
    amplitude at 1 m, so the direct path contributes ``1 / R``. Slots are
    processed in independent groups of ``group_size``: inverse Russian
    roulette and subpath pairing stay inside a group, and each group is one
    sample for the variance estimate. ``emission`` selects how endpoints
    emit rays: uniformly over the sphere, or by solid angle toward the proxy
    triangles (the default, which wastes no rays on non-proxy directions).
    """
    c: float = 344.0
    air_density: float = 1.21
    source_energy: float = 1.0
    absorption: float = 0.0
    samples: int = 12000
    max_order: int = 2
    max_depth: int = 6
    mis: bool = True
    irr: bool = True
    outlier_suppression: bool = True
    co_star: float = 100.0
    sample_rate: float = 48000.0
    ir_length: float = 0.2
    seed: int = 0
    workers: int = 1
    batch_size: int = 3000
    group_size: int = 16
    emission: str = "proxy"
    direct: bool = True
    materials: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("c", "air_density", "source_energy", "co_star", "sample_rate",
                     "ir_length"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.emission not in EMISSION_MODES:
            raise ValueError(f"emission must be one of {EMISSION_MODES}")
        if self.absorption < 0:
            raise ValueError("absorption must be non-negative")
        for name in ("samples", "max_order", "max_depth", "workers", "batch_size",
                     "group_size"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be at least 1")

    @property
    def subpath_depth(self) -> int:
        return min(self.max_depth, self.max_order)

    def bc_of_material(self):
        return {name: m.bc for name, m in self.materials.items()}

    def replace(self, **kw):
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d.update(kw)
        return SimulationConfig(**d)

    # -- text format --------------------------------------------------------

    def to_text(self) -> str:
        cp = configparser.ConfigParser()
        d = asdict(self)
        d.pop("materials")
        cp["simulation"] = {k: _fmt(v) for k, v in d.items()}
        for name, m in self.materials.items():
            cp[f"material.{name}"] = {"bc": m.bc, "reflection": repr(m.reflection),
                                      "specularity": repr(m.specularity)}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "SimulationConfig":
        cp = configparser.ConfigParser()
        cp.read_string(text)
        kw = {}
        types = {f.name: f.type for f in fields(cls)}
        if cp.has_section("simulation"):
            for key, raw in cp["simulation"].items():
                if key not in types or key == "materials":
                    raise ValueError(f"unknown simulation key {key!r}")
                kw[key] = _parse(types[key], raw, cp["simulation"], key)
        mats = {}
        for sec in cp.sections():
            if sec.startswith("material."):
                name = sec.split(".", 1)[1]
                s = cp[sec]
                bc = s.get("bc", NEUMANN).strip().lower()
                if bc not in (DIRICHLET, NEUMANN):
                    raise ValueError(f"material {name}: bc must be dirichlet or neumann")
                mats[name] = Material(name, bc, s.getfloat("reflection", 1.0),
                                      s.getfloat("specularity", 0.0))
            elif sec != "simulation":
                raise ValueError(f"unknown section [{sec}]")
        kw["materials"] = mats
        return cls(**kw)

    @classmethod
    def from_file(cls, path) -> "SimulationConfig":
        with open(path) as fh:
            return cls.from_text(fh.read())


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    return repr(v) if isinstance(v, float) else str(v)


def _parse(typ, raw, section, key):
    if typ in ("bool", bool):
        return section.getboolean(key)
    if typ in ("int", int):
        return int(raw)
    if typ in ("str", str):
        return raw.strip()
    return float(raw)
