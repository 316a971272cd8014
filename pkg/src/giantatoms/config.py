"""Run configuration files.

Grammar (one item per line, ``#`` starts a comment)::

    [geometry]                 gap_phases = p1, p2, ...  | wavenumber = k
                               mirror = m    velocity = v    units = gamma_ref
    [atom <label>]             omega = w        (one section per atom, in order)
    [connections]              point = <label>, <gamma>[, <x>]   (waveguide order)
    [drive]                    alpha = a    omega_d = w    port = 0
    [simulation]               rho0 = eg    t_final = T    dt = h
                               observables = P_ge, pop_a, purity, trace
                               output_every = n
    [scan]                     parameter = phi    start = s    stop = e    step = d
    [spectrum]                 start = s    stop = e    step = d

Numbers are Python float literals, optionally written with pi
(``pi/2``, ``3*pi/4``, ``-pi``).  Files written by :func:`dump_config` use the
shortest round-trip decimal form, so they re-parse to bit-identical values.
``units`` multiplies every rate and frequency in the file.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .geometry import ConnectionPoint, Geometry, GeometryError


class ConfigError(ValueError):
    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        self.message = message
        where = f"{path or 'config'}:{line}: " if line is not None else f"{path or 'config'}: "
        super().__init__(where + message)


_PI = re.compile(r"^\s*(?:([+-]?[0-9.eE+-]*)\s*\*?\s*)?pi\s*(?:/\s*([0-9.eE+]+))?\s*$")


def parse_number(text, line=None):
    t = text.strip()
    try:
        return float(t)
    except ValueError:
        pass
    m = _PI.match(t)
    if m:
        head, den = m.groups()
        try:
            coef = 1.0 if head in (None, "", "+") else (-1.0 if head == "-" else float(head))
            return coef * math.pi / (float(den) if den else 1.0)
        except ValueError:
            pass
    raise ConfigError(f"cannot parse number {text.strip()!r}", line)


def fmt(x):
    """Shortest round-trip decimal form of a float."""
    return repr(float(x))


@dataclass
class AtomSpec:
    label: str
    omega: float = 0.0
    line: int | None = None


@dataclass
class PointSpec:
    label: str
    gamma: float
    coordinate: float | None = None
    line: int | None = None


@dataclass
class DriveConfig:
    alpha: complex = 1e-3
    omega_d: float = 0.0
    port: int = 0


@dataclass
class SimulationConfig:
    rho0: str = ""
    t_final: float = 0.0
    dt: float | None = None
    observables: list = field(default_factory=list)
    output_every: int = 1


@dataclass
class RangeConfig:
    start: float = 0.0
    stop: float = 0.0
    step: float = 0.0
    parameter: str = "phi"

    def values(self):
        if not self.step > 0:
            raise ConfigError(f"step must be positive, got {self.step}")
        if self.stop < self.start:
            raise ConfigError("stop must not be below start")
        n = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return [self.start + i * self.step for i in range(n)]


@dataclass
class RunConfig:
    atoms: list = field(default_factory=list)
    points: list = field(default_factory=list)
    wavenumber: float | None = None
    gap_phases: tuple | None = None
    mirror: float | None = None
    velocity: float | None = None
    units: float = 1.0
    drive: DriveConfig | None = None
    simulation: SimulationConfig | None = None
    scan: RangeConfig | None = None
    spectrum: RangeConfig | None = None
    path: str | None = None
    section_lines: dict = field(default_factory=dict)

    @property
    def labels(self):
        return [a.label for a in self.atoms]

    def geometry(self):
        """Build the Geometry; errors are anchored to the offending line."""
        if not self.atoms:
            raise ConfigError("no atoms", self.section_lines.get("geometry"), self.path)
        index = {}
        for a in self.atoms:
            if a.label in index:
                raise ConfigError(f"duplicate atom label {a.label!r}", a.line, self.path)
            index[a.label] = len(index)
        u = self.units
        pts = []
        for p in self.points:
            if p.label not in index:
                raise ConfigError(f"connection to unknown atom {p.label!r}", p.line, self.path)
            pts.append(ConnectionPoint(index[p.label], p.gamma * u, p.coordinate))
        for a in self.atoms:
            if not any(p.label == a.label for p in self.points):
                raise ConfigError(f"atom {a.label!r} has no connection points", a.line, self.path)
        try:
            return Geometry(tuple(a.omega * u for a in self.atoms), tuple(pts),
                            wavenumber=self.wavenumber, gap_phases=self.gap_phases,
                            mirror=self.mirror, velocity=self.velocity,
                            labels=tuple(self.labels))
        except GeometryError as exc:
            line = self.section_lines.get("connections", self.section_lines.get("geometry"))
            raise ConfigError(str(exc), line, self.path) from None


_SECTION = re.compile(r"^\[\s*([A-Za-z_]+)(?:\s+([^\]\s]+))?\s*\]$")


def _split_list(value):
    return [v.strip() for v in value.split(",") if v.strip()]


def parse_config(text, path=None):
    cfg = RunConfig(path=path)
    section = None
    seen = set()
    current_atom = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _SECTION.match(line)
        if m:
            name, arg = m.group(1).lower(), m.group(2)
            if name == "atom":
                if not arg:
                    raise ConfigError("atom section needs a label, e.g. [atom a]", lineno, path)
                current_atom = AtomSpec(arg, line=lineno)
                cfg.atoms.append(current_atom)
            elif name in ("geometry", "connections", "drive", "simulation", "scan", "spectrum"):
                if arg:
                    raise ConfigError(f"section [{name}] takes no argument", lineno, path)
                if name in seen:
                    raise ConfigError(f"duplicate section [{name}]", lineno, path)
                seen.add(name)
                cfg.section_lines[name] = lineno
                if name == "drive":
                    cfg.drive = DriveConfig()
                elif name == "simulation":
                    cfg.simulation = SimulationConfig()
                elif name == "scan":
                    cfg.scan = RangeConfig()
                elif name == "spectrum":
                    cfg.spectrum = RangeConfig(parameter="Delta")
            else:
                raise ConfigError(f"unknown section [{name}]", lineno, path)
            section = name
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno, path)
        key, value = (s.strip() for s in line.split("=", 1))
        if section is None:
            raise ConfigError(f"key {key!r} outside of any section", lineno, path)
        _assign(cfg, section, current_atom, key, value, lineno, path)
    return cfg


def _assign(cfg, section, atom, key, value, lineno, path):
    def num(v):
        return parse_number(v, lineno)

    def bad():
        return ConfigError(f"unknown key {key!r} in [{section if section != 'atom' else 'atom ' + atom.label}]",
                           lineno, path)

    try:
        if section == "geometry":
            if key == "wavenumber":
                cfg.wavenumber = num(value)
            elif key == "gap_phases":
                cfg.gap_phases = tuple(num(v) for v in _split_list(value))
            elif key == "mirror":
                cfg.mirror = num(value)
            elif key == "velocity":
                cfg.velocity = num(value)
            elif key == "units":
                cfg.units = num(value)
                if not cfg.units > 0:
                    raise ConfigError("units must be positive", lineno, path)
            else:
                raise bad()
        elif section == "atom":
            if key != "omega":
                raise bad()
            atom.omega = num(value)
        elif section == "connections":
            if key != "point":
                raise bad()
            parts = _split_list(value)
            if len(parts) not in (2, 3):
                raise ConfigError("point needs 'label, gamma' or 'label, gamma, x'", lineno, path)
            x = num(parts[2]) if len(parts) == 3 else None
            cfg.points.append(PointSpec(parts[0], num(parts[1]), x, lineno))
        elif section == "drive":
            d = cfg.drive
            if key == "alpha":
                d.alpha = complex(value.replace(" ", "")) if "j" in value else num(value)
            elif key == "omega_d":
                d.omega_d = num(value)
            elif key == "port":
                d.port = int(value)
            else:
                raise bad()
        elif section == "simulation":
            s = cfg.simulation
            if key == "rho0":
                if not value or set(value) - set("ge"):
                    raise ConfigError(f"rho0 must be a string of g/e, got {value!r}", lineno, path)
                s.rho0 = value
            elif key == "t_final":
                s.t_final = num(value)
            elif key == "dt":
                s.dt = num(value)
            elif key == "observables":
                s.observables = _split_list(value)
            elif key == "output_every":
                s.output_every = int(value)
                if s.output_every < 1:
                    raise ConfigError("output_every must be >= 1", lineno, path)
            else:
                raise bad()
        elif section in ("scan", "spectrum"):
            r = cfg.scan if section == "scan" else cfg.spectrum
            if key in ("start", "stop", "step"):
                setattr(r, key, num(value))
            elif key == "parameter" and section == "scan":
                r.parameter = value
            else:
                raise bad()
    except ConfigError as exc:
        if exc.path is None and path is not None:
            raise ConfigError(exc.message, exc.line, path) from None
        raise
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {exc}", lineno, path) from None


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), path=str(path))


def config_from_geometry(geometry):
    cfg = RunConfig(wavenumber=geometry.wavenumber, gap_phases=geometry.gap_phases,
                    mirror=geometry.mirror, velocity=geometry.velocity)
    cfg.atoms = [AtomSpec(lbl, w) for lbl, w in zip(geometry.labels, geometry.omegas)]
    cfg.points = [PointSpec(geometry.labels[cp.atom], cp.gamma, cp.coordinate)
                  for cp in geometry.points]
    return cfg


def dump_config(cfg):
    out = ["[geometry]"]
    if cfg.gap_phases is not None:
        out.append("gap_phases = " + ", ".join(fmt(p) for p in cfg.gap_phases))
    if cfg.wavenumber is not None:
        out.append(f"wavenumber = {fmt(cfg.wavenumber)}")
    if cfg.mirror is not None:
        out.append(f"mirror = {fmt(cfg.mirror)}")
    if cfg.velocity is not None:
        out.append(f"velocity = {fmt(cfg.velocity)}")
    if cfg.units != 1.0:
        out.append(f"units = {fmt(cfg.units)}")
    for a in cfg.atoms:
        out += ["", f"[atom {a.label}]", f"omega = {fmt(a.omega)}"]
    out += ["", "[connections]"]
    for p in cfg.points:
        tail = f", {fmt(p.coordinate)}" if p.coordinate is not None else ""
        out.append(f"point = {p.label}, {fmt(p.gamma)}{tail}")
    if cfg.drive is not None:
        d = cfg.drive
        a = complex(d.alpha)
        alpha = fmt(a.real) if a.imag == 0 else f"{fmt(a.real)}{'+' if a.imag >= 0 else '-'}{fmt(abs(a.imag))}j"
        out += ["", "[drive]", f"alpha = {alpha}", f"omega_d = {fmt(d.omega_d)}",
                f"port = {d.port}"]
    if cfg.simulation is not None:
        s = cfg.simulation
        out += ["", "[simulation]", f"rho0 = {s.rho0}", f"t_final = {fmt(s.t_final)}"]
        if s.dt is not None:
            out.append(f"dt = {fmt(s.dt)}")
        if s.observables:
            out.append("observables = " + ", ".join(s.observables))
        out.append(f"output_every = {s.output_every}")
    for name, r in (("scan", cfg.scan), ("spectrum", cfg.spectrum)):
        if r is not None:
            out += ["", f"[{name}]"]
            if name == "scan":
                out.append(f"parameter = {r.parameter}")
            out += [f"start = {fmt(r.start)}", f"stop = {fmt(r.stop)}", f"step = {fmt(r.step)}"]
    return "\n".join(out) + "\n"
