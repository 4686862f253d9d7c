"""Scenario files: INI sections with unit-suffixed physical quantities.

Example::

    [scenario]
    mode = spectrum

    [system]
    beta = 0.95
    eta = 0.56
    parity = even            ; snaps eta so that phi_p = 2 p pi
    omega0_over_gamma = 500

    [initial]
    state = symmetric        ; or theta = 0.785, phi_s = 0

    [grid]
    detuning = -10:10:2001   ; start:stop:count, units of gamma

Physical setups replace ``[system]`` with ``[physical]``::

    [physical]
    omega0 = 5 GHz           ; ordinary frequency, converted to rad/s
    gamma = 10 MHz
    beta = 0.95
    d = 1.6 cm
    l_j = 1 nH
    c_j = 1 fF
    c_g = 100 fF
    a = 10 um
"""
from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field

import numpy as np

from .cqed import JJArrayParams, PhysicalSetup, nearest_commensurate_eta, to_system_params
from .params import TABLE_I_RATIO, DriveParams, InitialState, SystemParams

MODES = ("dynamics", "rates", "spectrum", "driven", "dispersion", "sweep", "validate")

# unit -> power of ten; negative powers divide so that e.g. 10 um is exactly 1e-05
_UNITS = {
    "frequency": {"Hz": 0, "kHz": 3, "MHz": 6, "GHz": 9},
    "length": {"m": 0, "cm": -2, "mm": -3, "um": -6, "nm": -9},
    "inductance": {"H": 0, "uH": -6, "nH": -9, "pH": -12},
    "capacitance": {"F": 0, "nF": -9, "pF": -12, "fF": -15},
    "velocity": {"m/s": 0, "km/s": 3},
}
_PHYSICAL_KEYS = {
    "omega0": "frequency", "gamma": "frequency", "d": "length", "a": "length",
    "l_j": "inductance", "c_j": "capacitance", "c_g": "capacitance", "velocity": "velocity",
}
_QUANTITY = re.compile(r"^\s*([-+0-9.eE]+)\s*([A-Za-z/]+)\s*$")


class ConfigError(ValueError):
    """Bad scenario file; the message names the section, key and line."""


@dataclass(frozen=True)
class GridSpec:
    start: float
    stop: float
    count: int

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)

    def describe(self) -> str:
        return f"{self.start!r}:{self.stop!r}:{self.count}"


@dataclass
class Scenario:
    mode: str
    system: SystemParams | None = None
    physical: PhysicalSetup | None = None
    initial: InitialState = field(default_factory=InitialState.symmetric)
    drive: DriveParams = field(default_factory=lambda: DriveParams(0.1, 0.0))
    grids: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)
    axes: list = field(default_factory=list)  # sweep axes: (name, values)
    source: str = "<defaults>"

    def resolved_system(self) -> SystemParams:
        if (self.system is None) == (self.physical is None):
            raise ConfigError("give exactly one of [system] or [physical]")
        return self.system if self.physical is None else to_system_params(self.physical)

    def metadata(self) -> dict:
        meta = {"mode": self.mode, "source": self.source}
        if self.physical is not None:
            meta["physical"] = repr(self.physical)
        if self.system is not None or self.physical is not None:
            meta["system"] = repr(self.resolved_system())
        meta["initial"] = repr(self.initial)
        if self.mode in ("driven", "sweep"):
            meta["drive"] = repr(self.drive)
        for name in sorted(self.grids):
            meta[f"grid.{name}"] = self.grids[name].describe()
        for name in sorted(self.options):
            meta[f"option.{name}"] = repr(self.options[name])
        for name, values in self.axes:
            meta[f"axis.{name}"] = ",".join(repr(float(v)) for v in values)
        return meta


def parse_quantity(text: str, kind: str) -> float:
    """'5 GHz' -> 5e9 (frequencies returned as rad/s: 2 pi f)."""
    m = _QUANTITY.match(text)
    if not m:
        raise ValueError(f"expected '<number> <unit>', got {text!r}")
    value, unit = float(m.group(1)), m.group(2)  # case matters: mHz is not MHz
    table = _UNITS[kind]
    if unit not in table:
        raise ValueError(f"unknown {kind} unit {unit!r}; use one of {', '.join(table)}")
    power = table[unit]
    value = value * 10.0**power if power >= 0 else value / 10.0**-power
    return 2.0 * math.pi * value if kind == "frequency" else value


def parse_grid(text: str) -> GridSpec:
    parts = [p.strip() for p in text.split(":")]
    if len(parts) != 3:
        raise ValueError(f"grid must be start:stop:count, got {text!r}")
    count = int(parts[2])
    if count < 1:
        raise ValueError("grid needs at least one point")
    return GridSpec(float(parts[0]), float(parts[1]), count)


def parse_axis(text: str) -> np.ndarray:
    """Either start:stop:count or a comma-separated list."""
    if ":" in text:
        return parse_grid(text).values()
    vals = np.array([float(v) for v in text.split(",") if v.strip()])
    if vals.size == 0:
        raise ValueError("axis has no points")
    return vals


def _line_of(parser_text: str, section: str, key: str) -> int | None:
    current = None
    for no, line in enumerate(parser_text.splitlines(), 1):
        s = line.strip()
        if s.startswith("[") and s.endswith("]"):
            current = s[1:-1].strip()
        elif current == section and re.match(rf"{re.escape(key)}\s*[=:]", s):
            return no
    return None


class _Reader:
    def __init__(self, cp, text, source):
        self.cp, self.text, self.source = cp, text, source
        self.used = set()

    def fail(self, section, key, msg):
        line = _line_of(self.text, section, key)
        where = f"{self.source}:{line}" if line else self.source
        raise ConfigError(f"{where}: [{section}] {key}: {msg}")

    def get(self, section, key, conv, default=None):
        if not self.cp.has_option(section, key):
            return default
        self.used.add((section, key))
        raw = self.cp.get(section, key)
        try:
            return conv(raw)
        except (ValueError, TypeError) as exc:
            self.fail(section, key, str(exc))


def _initial(r: _Reader) -> InitialState:
    state = r.get("initial", "state", str.strip)
    theta = r.get("initial", "theta", float)
    phi_s = r.get("initial", "phi_s", float, 0.0)
    if state is not None and theta is not None:
        r.fail("initial", "theta", "give either state or theta/phi_s, not both")
    if theta is not None:
        return InitialState(theta, phi_s)
    named = {"symmetric": InitialState.symmetric, "antisymmetric": InitialState.antisymmetric,
             "atom1": InitialState.atom1}
    if state is None:
        return InitialState.symmetric()
    if state not in named:
        r.fail("initial", "state", f"unknown state {state!r}; use {', '.join(named)}")
    return named[state]()


def _system(r: _Reader) -> SystemParams:
    beta = r.get("system", "beta", float)
    eta = r.get("system", "eta", float)
    if beta is None or eta is None:
        r.fail("system", "beta" if beta is None else "eta", "required")
    ratio = r.get("system", "omega0_over_gamma", float, TABLE_I_RATIO)
    parity = r.get("system", "parity", str.strip)
    phi_p = r.get("system", "phi_p", float)
    if parity is not None:
        if phi_p is not None:
            r.fail("system", "phi_p", "give either parity or phi_p, not both")
        if parity not in ("even", "odd"):
            r.fail("system", "parity", "must be even or odd")
        eta, _ = nearest_commensurate_eta(eta, ratio, parity)
    try:
        return SystemParams(beta=beta, eta=eta, phi_p=phi_p, omega0_over_gamma=ratio)
    except ValueError as exc:
        r.fail("system", "beta", str(exc))


def _physical(r: _Reader) -> PhysicalSetup:
    vals = {}
    for key, kind in _PHYSICAL_KEYS.items():
        vals[key] = r.get("physical", key, lambda t, k=kind: parse_quantity(t, k))
    beta = r.get("physical", "beta", float)
    for key in ("omega0", "gamma", "d"):
        if vals[key] is None:
            r.fail("physical", key, "required")
    if beta is None:
        r.fail("physical", "beta", "required")
    jj = None
    if any(vals[k] is not None for k in ("l_j", "c_j", "c_g", "a")):
        missing = [k for k in ("l_j", "c_j", "c_g", "a") if vals[k] is None]
        if missing:
            r.fail("physical", missing[0], "required when any junction parameter is given")
        n_cells = r.get("physical", "n_cells", int, 2000)
        try:
            jj = JJArrayParams(vals["l_j"], vals["c_j"], vals["c_g"], vals["a"], n_cells)
        except ValueError as exc:
            r.fail("physical", "l_j", str(exc))
    if jj is None and vals["velocity"] is None:
        r.fail("physical", "velocity", "give a velocity or the junction-array parameters")
    return PhysicalSetup(vals["omega0"], vals["gamma"], beta, vals["d"], jj, vals["velocity"])


def parse_text(text: str, source: str = "<string>", mode: str | None = None) -> Scenario:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    r = _Reader(cp, text, source)
    file_mode = r.get("scenario", "mode", str.strip)
    if mode is not None and file_mode is not None and file_mode != mode:
        r.fail("scenario", "mode", f"file is a {file_mode} scenario, not {mode}")
    mode = mode or file_mode
    if mode is None:
        raise ConfigError(f"{source}: no mode given (set [scenario] mode or use a subcommand)")
    if mode not in MODES:
        r.fail("scenario", "mode", f"unknown mode {mode!r}")
    if cp.has_section("system") and cp.has_section("physical"):
        raise ConfigError(f"{source}: give exactly one of [system] or [physical]")
    sc = Scenario(mode=mode, source=source)
    if cp.has_section("system"):
        sc.system = _system(r)
    elif cp.has_section("physical"):
        sc.physical = _physical(r)
    if cp.has_section("initial"):
        sc.initial = _initial(r)
    if cp.has_section("drive"):
        rabi = r.get("drive", "rabi", float, 0.1)
        det = r.get("drive", "detuning", float, 0.0)
        try:
            sc.drive = DriveParams(rabi, det)
        except ValueError as exc:
            r.fail("drive", "rabi", str(exc))
    if cp.has_section("grid"):
        for key in cp.options("grid"):
            sc.grids[key] = r.get("grid", key, parse_grid)
    if cp.has_section("options"):
        for key in cp.options("options"):
            sc.options[key] = r.get("options", key, _scalar)
    if cp.has_section("sweep"):
        for key in cp.options("sweep"):
            if key == "observable":
                sc.options["observable"] = r.get("sweep", key, str.strip)
            else:
                sc.axes.append((key, r.get("sweep", key, parse_axis)))
    for section in cp.sections():
        if section not in ("scenario", "system", "physical", "initial", "drive", "grid", "options", "sweep"):
            raise ConfigError(f"{source}: unknown section [{section}]")
        for key in cp.options(section):
            if (section, key) not in r.used:
                r.fail(section, key, "unknown key")
    return sc


def _scalar(text: str):
    t = text.strip()
    for conv in (int, float):
        try:
            return conv(t)
        except ValueError:
            pass
    return t


def load(path: str, mode: str | None = None) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    return parse_text(text, source=path, mode=mode)
