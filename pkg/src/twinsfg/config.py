"""Run configuration: an INI file where every physical value carries a unit.

Values are converted to SI on load.  Lists are comma separated with one
trailing unit (``defocus = 0, 100, 200, 400 um``); ``none`` clears an
optional value.  Unknown sections and keys are errors.
"""

from __future__ import annotations

import configparser
import difflib
import math
import re
from decimal import Decimal
from dataclasses import dataclass
from typing import Any

import numpy as np

from .correlator import Grid
from .dispersion import DispersionModel, FieldParams, Medium, SellmeierSheet
from .experiments import Setup, default_delays
from .phasematch import Crystal
from .propagation import TransferSpec, pinhole_from_geometry

# int: decimal exponent to SI (scaled exactly); float: multiplicative factor
UNITS = {
    "length": {"m": 0, "cm": -2, "mm": -3, "um": -6, "µm": -6, "nm": -9},
    "time": {"s": 0, "ps": -12, "fs": -15},
    "angfreq": {"rad/s": 0, "rad/fs": 15},
    "angle": {"rad": 0, "mrad": -3, "deg": math.pi / 180.0},
    "wavenumber": {"rad/m": 0, "1/m": 0, "rad/mm": 3, "rad/um": 6},
    "area": {"um2": 0, "µm2": 0},
    "inv_area": {"um-2": 0, "1/um2": 0},
    "gvd": {"s2/m": 0, "fs2/mm": -27},
}

_FLOAT = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_VALUE = re.compile(rf"\s*(?P<nums>{_FLOAT}(?:\s*,\s*{_FLOAT})*)\s*(?P<unit>\S.*?)?\s*")


class ConfigError(ValueError):
    def __init__(self, message, field=None, line=None):
        super().__init__(message)
        self.field = field
        self.line = line


class UnitError(ConfigError):
    pass


class UnknownKeyError(ConfigError):
    pass


@dataclass(frozen=True)
class Key:
    kind: str  # float, floats, int, choice, str
    default: Any
    dim: str | None = None
    display: str | None = None
    choices: tuple = ()
    optional: bool = False


def _num(default, dim=None, display=None, optional=False):
    return Key("float", default, dim, display, optional=optional)


SCHEMA: dict[str, dict[str, Key]] = {
    "scenario": {
        "name": Key("choice", "fig2", choices=("fig2", "fig3", "fig4", "sweep")),
    },
    "dispersion": {
        "pump_wavelength": _num(527.5e-9, "length", "nm"),
        "signal_polarization": Key("choice", "ordinary", choices=("ordinary", "extraordinary")),
        "ordinary_constant": _num(1.0),
        "ordinary_strengths": Key("floats", (0.90291, 0.83155, 0.76536)),
        "ordinary_poles": Key("floats", (0.003926, 0.018786, 60.01), "area", "um2"),
        "ordinary_ir": _num(0.0, "inv_area", "um-2"),
        "extraordinary_constant": _num(1.0),
        "extraordinary_strengths": Key("floats", (1.151075, 0.21803, 0.656)),
        "extraordinary_poles": Key("floats", (0.007142, 0.02259, 263.0), "area", "um2"),
        "extraordinary_ir": _num(0.0, "inv_area", "um-2"),
        "valid_min": _num(188e-9, "length", "nm"),
        "valid_max": _num(5200e-9, "length", "nm"),
        "gvd_override": _num(None, "gvd", "fs2/mm", optional=True),
    },
    "pdc": {
        "length": _num(4e-3, "length", "mm"),
        "gain": _num(1e-3),
        "pump": Key("choice", "tuned", choices=("tuned", "angle")),
        "pump_angle": _num(None, "angle", "rad", optional=True),
        "mismatch_offset": _num(0.0),
    },
    "sfg": {
        "length": _num(4e-3, "length", "mm"),
        "coupling": _num(1e-3),
        "sinc_argument": Key("choice", "full", choices=("full", "half")),
        "pump": Key("choice", "tuned", choices=("tuned", "angle")),
        "pump_angle": _num(None, "angle", "rad", optional=True),
        "mismatch_offset": _num(0.0),
    },
    "transfer": {
        "delay_start": _num(-60e-15, "time", "fs"),
        "delay_stop": _num(60e-15, "time", "fs"),
        "delay_step": _num(0.5e-15, "time", "fs"),
        "defocus": Key("floats", (0.0, 100e-6, 200e-6, 400e-6), "length", "um"),
        "defocus_model": Key("choice", "propagation", choices=("propagation", "chirp")),
        "window": _num(0.9e15, "angfreq", "rad/s", optional=True),
        "window_shape": Key("choice", "box", choices=("box", "smooth")),
        "window_edge": _num(0.05e15, "angfreq", "rad/s"),
        "gap_q_min": _num(0.0, "wavenumber", "rad/m"),
        "transmission": _num(1.0),
        "baseline": _num(0.0),
    },
    "pinhole": {
        "apply": Key("choice", "auto", choices=("auto", "yes", "no")),
        "diameter": _num(4e-3, "length", "mm"),
        "distance": _num(0.29, "length", "cm"),
        "half_angle": _num(None, "angle", "rad", optional=True),
    },
    "grid": {
        "q_max": _num(4e5, "wavenumber", "rad/m"),
        "n_q": Key("int", 1025),
        "omega_max": _num(0.9e15, "angfreq", "rad/s"),
        "n_omega": Key("int", 4097),
        "reduction": Key("choice", "radial", choices=("radial", "cartesian")),
    },
    "output": {
        "directory": Key("str", "results"),
    },
}


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration; ``sections[section][key]`` holds SI values."""

    sections: dict

    def __getitem__(self, section):
        return self.sections[section]

    @property
    def scenario(self):
        return self.sections["scenario"]["name"]


def _parse_value(section, key, spec: Key, raw: str):
    name = f"{section}.{key}"
    text = raw.strip()
    if spec.kind == "str":
        return text
    if spec.kind == "choice":
        if text not in spec.choices:
            raise ConfigError(f"{name}: {text!r} is not one of {', '.join(spec.choices)}", name)
        return text
    if spec.optional and text.lower() == "none":
        return None
    m = _VALUE.fullmatch(text)
    if not m:
        raise ConfigError(f"{name}: cannot parse value {raw!r}", name)
    unit = m.group("unit")
    texts = [x.strip() for x in m.group("nums").split(",")]
    nums = [float(x) for x in texts]
    if spec.kind == "int":
        if unit or len(nums) != 1 or not nums[0].is_integer():
            raise ConfigError(f"{name}: expected a plain integer, got {raw!r}", name)
        return int(nums[0])
    if spec.dim is None:
        if unit:
            raise UnitError(f"{name}: dimensionless value must not carry a unit (got {unit!r})", name)
        factor = 0
    else:
        table = UNITS[spec.dim]
        if not unit:
            raise UnitError(f"{name}: missing unit; expected one of {', '.join(table)}", name)
        if unit not in table:
            raise UnitError(f"{name}: unit {unit!r} not accepted; expected one of {', '.join(table)}", name)
        factor = table[unit]
    vals = [_to_si(x, factor) for x in texts]
    if spec.kind == "floats":
        return tuple(vals)
    if len(vals) != 1:
        raise ConfigError(f"{name}: expected a single value", name)
    return vals[0]


def _to_si(text, factor):
    if isinstance(factor, int):
        return float(Decimal(text).scaleb(factor))
    return float(text) * factor


def _decimal_text(d: Decimal):
    if d == 0:
        return "0"
    if -6 <= d.adjusted() <= 15:
        text = format(d, "f")
        return text.rstrip("0").rstrip(".") if "." in text else text
    return str(d.normalize())


def _unknown_key_message(section, key):
    for other in SCHEMA:
        if other != section and key.startswith(other + "_"):
            keys = ", ".join(SCHEMA[other])
            return f"unknown key {key!r} in [{section}]; did you mean the [{other}] section (keys: {keys})?"
    close = difflib.get_close_matches(key, SCHEMA[section], n=1)
    hint = f"; did you mean {close[0]!r}?" if close else ""
    return f"unknown key {key!r} in [{section}]{hint}"


def parse_config(text: str) -> RunConfig:
    parser = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#", ";"), delimiters=("=",)
    )
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as err:
        line = getattr(err, "lineno", None)
        detail = err.message.splitlines()[0]
        if getattr(err, "errors", None):
            line, bad = err.errors[0]
            detail = f"cannot parse {bad}"
        where = f" (line {line})" if line else ""
        raise ConfigError(f"syntax error{where}: {detail}", line=line) from err

    sections = {s: {k: spec.default for k, spec in keys.items()} for s, keys in SCHEMA.items()}
    for section in parser.sections():
        if section not in SCHEMA:
            close = difflib.get_close_matches(section, SCHEMA, n=1)
            hint = f"; did you mean [{close[0]}]?" if close else ""
            raise UnknownKeyError(f"unknown section [{section}]{hint}", section)
        for key, raw in parser.items(section):
            if key not in SCHEMA[section]:
                raise UnknownKeyError(_unknown_key_message(section, key), f"{section}.{key}")
            sections[section][key] = _parse_value(section, key, SCHEMA[section][key], raw)
    cfg = RunConfig(sections)
    try:
        build_setup(cfg)  # range and consistency checks live in the model types
    except ConfigError:
        raise
    except ValueError as err:
        raise ConfigError(f"invalid configuration: {err}") from err
    return cfg


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def _format_number(value, spec: Key):
    """Render in the display unit; the text parses back to exactly ``value``."""
    value = float(value)
    if spec.dim is None:
        return repr(value), ""
    unit = spec.display
    exp = UNITS[spec.dim][unit]
    return _decimal_text(Decimal(repr(value)).scaleb(-exp)), unit


def dump_config(cfg: RunConfig) -> str:
    """Effective configuration with every default resolved."""
    lines = []
    for section, keys in SCHEMA.items():
        lines.append(f"[{section}]")
        for key, spec in keys.items():
            value = cfg[section][key]
            if value is None:
                text = "none"
            elif spec.kind in ("str", "choice"):
                text = value
            elif spec.kind == "int":
                text = str(value)
            elif spec.kind == "floats":
                parts = [_format_number(v, spec) for v in value]
                text = ", ".join(p for p, _ in parts) + (f" {parts[0][1]}" if parts and parts[0][1] else "")
            else:
                num, unit = _format_number(value, spec)
                text = f"{num} {unit}".strip()
            lines.append(f"{key} = {text}")
        lines.append("")
    return "\n".join(lines)


def _crystal(sec, medium, coupling_key, **extra):
    if sec["pump"] == "angle":
        if sec["pump_angle"] is None:
            raise ConfigError("pump = angle requires pump_angle", "pump_angle")
        mode = sec["pump_angle"]
    else:
        mode = "tuned"
    return Crystal(length=sec["length"], coupling=sec[coupling_key], medium=medium, pump_mode=mode,
                   mismatch_offset=sec["mismatch_offset"], **extra)


def build_setup(cfg: RunConfig, workers=None) -> Setup:
    d = cfg["dispersion"]
    model = DispersionModel(
        ordinary=SellmeierSheet(d["ordinary_constant"], d["ordinary_strengths"], d["ordinary_poles"], d["ordinary_ir"]),
        extraordinary=SellmeierSheet(
            d["extraordinary_constant"], d["extraordinary_strengths"], d["extraordinary_poles"], d["extraordinary_ir"]
        ),
        valid_range=(d["valid_min"], d["valid_max"]),
    )
    medium = Medium(model, FieldParams(d["pump_wavelength"]), signal_polarization=d["signal_polarization"],
                    gvd_override=d["gvd_override"])
    pdc = _crystal(cfg["pdc"], medium, "gain")
    sfg = _crystal(cfg["sfg"], medium, "coupling", sinc_argument=cfg["sfg"]["sinc_argument"])
    t = cfg["transfer"]
    transfer = TransferSpec(
        window=t["window"], window_shape=t["window_shape"], window_edge=t["window_edge"],
        gap_q_min=t["gap_q_min"], transmission=t["transmission"], defocus_model=t["defocus_model"],
    )
    p = cfg["pinhole"]
    half_angle = p["half_angle"] if p["half_angle"] is not None else pinhole_from_geometry(p["diameter"], p["distance"])
    g = cfg["grid"]
    grid = Grid(g["q_max"], g["n_q"], g["omega_max"], g["n_omega"], g["reduction"])
    grid.validate(medium)
    delays = default_delays(t["delay_start"], t["delay_stop"], t["delay_step"])
    if delays.size < 2:
        raise ConfigError("delay sweep needs at least two points", "transfer.delay_step")
    return Setup(pdc=pdc, sfg=sfg, transfer=transfer, grid=grid, delays=np.asarray(delays),
                 pinhole_half_angle=half_angle, defocus_list=tuple(t["defocus"]), baseline=t["baseline"],
                 workers=workers)
