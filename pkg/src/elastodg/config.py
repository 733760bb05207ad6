"""Run configuration: TOML files with dotted sections, validated in one pass.

Grammar (every key optional unless marked)::

    [mesh]
    dim = 2                       # required, 2 or 3
    cells = 8                     # required, int or list of d ints
    bounds = [[0, 1], [0, 1]]     # default unit box
    boundary.xmin = "neumann"     # per side: dirichlet (default) or neumann

    [material]
    rho = 1.0                     # global constants ...
    lambda = 1.0
    mu = 1.0
    file = "material.csv"         # ... or per-element table (element_id, rho, lambda, mu)

    [method]
    formulation = "ip"            # ip | mixed
    degree = 2
    theta = -1                    # ip: -1 SIP, 1 NIP, 0 IIP
    delta = 0.5
    c0 = 10.0                     # ip penalty constant
    c_F = 0.0                     # ip velocity-jump damping
    flux = "LDG"                  # mixed: FDG | LDG | ALT
    c1 = 1.0                      # mixed
    c2 = 0.0                      # mixed (FDG only)

    [time]
    T = 0.5                       # required
    cfl = 0.25                    # or dt = 1e-3 (default cfl = 0.25)
    dt_rule = "spectral"          # spectral | heuristic
    stride = 10
    damping = "centred"           # centred | explicit

    [problem]
    name = "paper2d"              # see manufactured.PROBLEMS

    [converge]
    levels = [4, 8, 16]           # cells per axis
    degrees = [1, 2]
    norm = "energy"               # energy | augmented

    [dtscan]
    c_F = [0.0, 10.0]
    rtol = 0.01                   # relative bisection width
    threshold = 1e6               # blow-up energy ratio

    [output]
    dir = "out"
    prefix = ""
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .ip import IpConfig
from .manufactured import PROBLEMS
from .mesh import SIDE_NAMES, FaceKind, MeshConfig
from .mixed import ALT_NEUMANN_WARNING, Method, MixedConfig
from .timestep import TimeConfig

SCHEMA = {
    "mesh": {"dim", "cells", "bounds", "boundary"},
    "material": {"rho", "lambda", "mu", "file"},
    "method": {"formulation", "degree", "theta", "delta", "c0", "c_F", "flux", "c1", "c2"},
    "time": {"T", "dt", "cfl", "dt_rule", "stride", "damping"},
    "problem": {"name"},
    "converge": {"levels", "degrees", "norm"},
    "dtscan": {"c_F", "rtol", "threshold"},
    "output": {"dir", "prefix"},
}
IP_KEYS = {"theta", "c0", "c_F"}
MIXED_KEYS = {"flux", "c1", "c2"}


class ConfigError(ValueError):
    def __init__(self, errors: list[str]):
        super().__init__("invalid configuration:\n  " + "\n  ".join(errors))
        self.errors = errors


@dataclass
class MaterialSpec:
    rho: float = 1.0
    lam: float = 1.0
    mu: float = 1.0
    file: str | None = None


@dataclass
class ConvergeSpec:
    levels: list = field(default_factory=lambda: [4, 8, 16])
    degrees: list = field(default_factory=lambda: [1, 2])
    norm: str = "energy"


@dataclass
class DtScanSpec:
    c_F: list = field(default_factory=lambda: [0.0])
    rtol: float = 0.01
    threshold: float = 1e6


@dataclass
class RunConfig:
    mesh: MeshConfig
    material: MaterialSpec
    formulation: str
    degree: int
    ip: IpConfig
    mixed: MixedConfig
    time: TimeConfig
    problem: str
    converge: ConvergeSpec = field(default_factory=ConvergeSpec)
    dtscan: DtScanSpec = field(default_factory=DtScanSpec)
    out_dir: str = "out"
    prefix: str = ""
    warnings: list = field(default_factory=list)
    base_dir: Path = field(default_factory=Path.cwd)

    @property
    def method_label(self) -> str:
        if self.formulation == "ip":
            name = {-1: "SIP", 1: "NIP", 0: "IIP"}[self.ip.theta]
            return name if self.ip.c_F == 0 else f"{name}+cF"
        return self.mixed.method.value


def _number(sec, where, key, errors, default, kind=float):
    if key not in sec:
        return default
    v = sec[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or (kind is int and not float(v).is_integer()):
        errors.append(f"{where}.{key} must be {'an integer' if kind is int else 'a number'}, got {v!r}")
        return default
    return kind(v)


def parse_dict(raw: dict, base_dir: Path | None = None) -> RunConfig:
    """Validate a decoded config; raises ``ConfigError`` listing every violation."""
    errors: list[str] = []
    for sec, body in raw.items():
        if sec not in SCHEMA:
            errors.append(f"unknown section [{sec}]")
            continue
        if not isinstance(body, dict):
            errors.append(f"[{sec}] must be a table")
            continue
        for key in body:
            if key not in SCHEMA[sec]:
                errors.append(f"unknown key {sec}.{key}")

    def section(name):
        s = raw.get(name, {})
        return s if isinstance(s, dict) else {}

    # mesh
    m = section("mesh")
    for req in ("dim", "cells"):
        if req not in m:
            errors.append(f"mesh.{req} is required")
    dim = m.get("dim", 2)
    if dim not in (2, 3):
        errors.append(f"mesh.dim must be 2 or 3, got {dim!r}")
        dim = 2
    cells = m.get("cells", 1)
    if isinstance(cells, int) and not isinstance(cells, bool):
        cells = [cells] * dim
    boundary = m.get("boundary", {})
    if not isinstance(boundary, dict):
        errors.append("mesh.boundary must be a table of side = kind")
        boundary = {}
    mesh_cfg = MeshConfig(dim=dim, cells=tuple(cells) if isinstance(cells, list) else cells,
                          bounds=m.get("bounds"), boundary=dict(boundary))
    errors += mesh_cfg.validate()

    # material
    mt = section("material")
    mat = MaterialSpec(
        rho=_number(mt, "material", "rho", errors, 1.0), lam=_number(mt, "material", "lambda", errors, 1.0),
        mu=_number(mt, "material", "mu", errors, 1.0), file=mt.get("file"),
    )
    if mat.file is not None and any(k in mt for k in ("rho", "lambda", "mu")):
        errors.append("material: give either a file or global constants, not both")
    for name, v in (("rho", mat.rho), ("lambda", mat.lam), ("mu", mat.mu)):
        if not v > 0:
            errors.append(f"material.{name} must be > 0, got {v}")

    # method
    me = section("method")
    form = me.get("formulation", "ip")
    if form not in ("ip", "mixed"):
        errors.append(f"method.formulation must be 'ip' or 'mixed', got {form!r}")
        form = "ip"
    degree = _number(me, "method", "degree", errors, 2, int)
    if not 1 <= degree <= 8:
        errors.append(f"method.degree must lie in 1..8, got {degree}")
    foreign = (MIXED_KEYS if form == "ip" else IP_KEYS) & set(me)
    for key in sorted(foreign):
        errors.append(f"method.{key} is not a parameter of formulation {form!r}")
    delta = _number(me, "method", "delta", errors, 0.5)
    warnings = []
    ip_cfg = IpConfig(
        theta=_number(me, "method", "theta", errors, -1, int), delta=delta,
        c0=_number(me, "method", "c0", errors, 10.0), c_F=_number(me, "method", "c_F", errors, 0.0),
    )
    flux = str(me.get("flux", "LDG")).upper()
    if flux not in Method.__members__:
        errors.append(f"method.flux must be one of FDG, LDG, ALT, got {me.get('flux')!r}")
        flux = "LDG"
    mixed_cfg = MixedConfig(method=Method(flux), delta=delta,
                            c1=_number(me, "method", "c1", errors, 1.0), c2=_number(me, "method", "c2", errors, 0.0))
    if form == "ip":
        errors += ip_cfg.validate()
        warnings += ip_cfg.warnings()
    else:
        errors += mixed_cfg.validate()
        tags = mesh_cfg.side_tags() if not mesh_cfg.validate() else {}
        if mixed_cfg.method is Method.ALT and FaceKind.NEUMANN in tags.values():
            warnings.append(ALT_NEUMANN_WARNING)

    # time
    ti = section("time")
    if "T" not in ti:
        errors.append("time.T is required")
    dt = _number(ti, "time", "dt", errors, None)
    cfl = _number(ti, "time", "cfl", errors, None)
    if dt is None and cfl is None:
        cfl = 0.25
    time_cfg = TimeConfig(
        T=_number(ti, "time", "T", errors, 1.0), dt=dt, cfl=cfl, stride=_number(ti, "time", "stride", errors, 10, int),
        damping=ti.get("damping", "centred"), dt_rule=ti.get("dt_rule", "spectral"),
    )
    errors += time_cfg.validate()

    # problem
    pr = section("problem")
    problem = pr.get("name", f"paper{dim}d")
    if problem not in PROBLEMS:
        errors.append(f"problem.name must be one of {sorted(PROBLEMS)}, got {problem!r}")
    elif not problem.endswith(f"{dim}d"):
        errors.append(f"problem.name {problem!r} does not match mesh.dim = {dim}")

    # subcommand sections
    cv = section("converge")
    conv = ConvergeSpec(
        levels=list(cv.get("levels", [4, 8, 16])), degrees=list(cv.get("degrees", [degree])),
        norm=cv.get("norm", "energy"),
    )
    if conv.norm not in ("energy", "augmented"):
        errors.append(f"converge.norm must be 'energy' or 'augmented', got {conv.norm!r}")
    if not all(isinstance(n, int) and n > 0 for n in conv.levels):
        errors.append("converge.levels must be positive integers (cells per axis)")
    if not all(isinstance(n, int) and 1 <= n <= 8 for n in conv.degrees):
        errors.append("converge.degrees must be integers in 1..8")
    ds = section("dtscan")
    scan = DtScanSpec(c_F=list(ds.get("c_F", [0.0])), rtol=_number(ds, "dtscan", "rtol", errors, 0.01),
                      threshold=_number(ds, "dtscan", "threshold", errors, 1e6))
    if not all(isinstance(c, (int, float)) and c >= 0 for c in scan.c_F):
        errors.append("dtscan.c_F must be nonnegative numbers")

    out = section("output")
    if errors:
        raise ConfigError(errors)
    return RunConfig(
        mesh=mesh_cfg, material=mat, formulation=form, degree=degree, ip=ip_cfg, mixed=mixed_cfg,
        time=time_cfg, problem=problem, converge=conv, dtscan=scan,
        out_dir=str(out.get("dir", "out")), prefix=str(out.get("prefix", "")),
        warnings=warnings, base_dir=base_dir or Path.cwd(),
    )


def parse_config(path) -> RunConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as err:
        raise ConfigError([f"{path}: {err}"]) from None
    return parse_dict(raw, base_dir=path.parent)


def parse_text(text: str) -> RunConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as err:
        raise ConfigError([str(err)]) from None
    return parse_dict(raw)


__all__ = ["RunConfig", "ConfigError", "parse_config", "parse_text", "parse_dict", "SIDE_NAMES"]
