"""INI configuration files for the command-line front end.

Example::

    [ancilla]
    delta_omega = -0.5
    lambda11 = 0.5
    epsilon = 1.2
    N1 = bose(2.26e9, 0.1)

    [coupling]
    lambda01 = 0.02

    [run]
    sweep = delta_omega:-3:3:601
    format = csv
    seed = 7

Occupations may be given as numbers or as ``bose(omega, T)`` with omega in
rad/s and T in kelvin.  A complete [geometry] section together with
``kappa_si`` in [run] sets lambda11 from the beam formula unless lambda11 is
given explicitly.  Every key is optional; unknown sections and keys are
rejected with their line number.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field, fields

import numpy as np

from .params import AncillaParams, BeamGeometry, CouplingParams, ModelParams, SystemParams, beam_anharmonicity, bose_occupation


class ConfigError(ValueError):
    pass


SWEEPABLE = {
    "delta_omega": "ancilla",
    "lambda11": "ancilla",
    "epsilon": "ancilla",
    "damping_thermal": "ancilla",
    "damping_measurement": "ancilla",
    "N_bar1": "ancilla",
    "N_m": "ancilla",
    "N1": "ancilla",
    "lambda01": "coupling",
    "omega0": "system",
    "lambda00": "system",
    "nu": "system",
    "N0": "system",
}

_SECTION_KEYS = {
    "system": {f.name for f in fields(SystemParams)},
    "ancilla": {f.name for f in fields(AncillaParams)} | {"N1"},
    "coupling": {f.name for f in fields(CouplingParams)},
    "geometry": {f.name for f in fields(BeamGeometry)},
    "run": {"sweep", "output", "format", "seed", "tol", "tail_tol", "kappa_si", "branch"},
}
_OCCUPATIONS = {"N_bar1", "N_m", "N1", "N0"}
_BOSE = re.compile(r"^bose\(\s*([^,]+?)\s*,\s*([^)]+?)\s*\)$")


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    start: float
    stop: float
    points: int
    spacing: str = "linear"

    def __post_init__(self):
        if self.variable not in SWEEPABLE:
            raise ConfigError(f"cannot sweep {self.variable!r}; choose from {sorted(SWEEPABLE)}")
        if self.points < 1:
            raise ConfigError("a sweep needs at least one point")
        if self.spacing not in ("linear", "log"):
            raise ConfigError(f"spacing must be 'linear' or 'log', got {self.spacing!r}")
        if self.spacing == "log" and not (self.start > 0 and self.stop > 0):
            raise ConfigError("log spacing needs positive end points")

    def grid(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)

    @classmethod
    def parse(cls, text: str) -> "SweepSpec":
        """``variable:start:stop:points[:linear|log]``."""
        parts = [s.strip() for s in text.split(":")]
        if len(parts) not in (4, 5):
            raise ConfigError(f"sweep {text!r} must look like variable:start:stop:points[:spacing]")
        try:
            start, stop, points = float(parts[1]), float(parts[2]), int(parts[3])
        except ValueError as exc:
            raise ConfigError(f"sweep {text!r}: {exc}") from None
        return cls(parts[0], start, stop, points, parts[4] if len(parts) == 5 else "linear")


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams = field(default_factory=ModelParams)
    geometry: BeamGeometry | None = None
    sweeps: tuple[SweepSpec, ...] = ()
    output: str | None = None
    format: str = "csv"
    seed: int = 0
    tol: float | None = None
    tail_tol: float | None = None
    kappa_si: float | None = None
    branch: str = "operating"

    def __post_init__(self):
        if len(self.sweeps) > 2:
            raise ConfigError("at most two variables can be swept at once")
        if len({s.variable for s in self.sweeps}) != len(self.sweeps):
            raise ConfigError("a variable is swept twice")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")


def parse_number(text: str, key: str) -> float:
    m = _BOSE.match(text.strip())
    if m:
        if key not in _OCCUPATIONS:
            raise ConfigError(f"bose(...) is only allowed for occupations, not {key!r}")
        return bose_occupation(float(m.group(1)), float(m.group(2)))
    return float(text)


def _key_lines(text: str) -> dict[tuple[str, str], int]:
    """Line number of every ``key = value`` entry, by (section, key)."""
    out, section = {}, None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            out[(section, "")] = lineno
            continue
        key = re.split(r"[=:]", line, maxsplit=1)[0].strip()
        out[(section, key)] = lineno
    return out


def ancilla_from_mapping(values: dict[str, float], base: AncillaParams | None = None) -> AncillaParams:
    """AncillaParams from field values; ``N1`` sets both bath occupations."""
    values = dict(values)
    if "N1" in values:
        n1 = values.pop("N1")
        values.setdefault("N_bar1", n1)
        values.setdefault("N_m", n1)
    base = base or AncillaParams()
    return base.replace(**values)


def load_config(path: str) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text, source=path)


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # keys are case sensitive (N1 vs n1)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    lines = _key_lines(text)

    def where(section, key=""):
        return f"{source}, line {lines.get((section, key), '?')}"

    values: dict[str, dict[str, float]] = {s: {} for s in _SECTION_KEYS}
    run: dict[str, str] = {}
    for section in parser.sections():
        if section not in _SECTION_KEYS:
            raise ConfigError(f"{where(section)}: unknown section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SECTION_KEYS[section]:
                raise ConfigError(f"{where(section, key)}: unknown key {key!r} in [{section}]")
            if section == "run":
                run[key] = raw
                continue
            try:
                values[section][key] = parse_number(raw, key)
            except (ValueError, ConfigError) as exc:
                raise ConfigError(f"{where(section, key)}: field {key!r}: {exc}") from None

    def build(section, factory):
        try:
            return factory(values[section])
        except (TypeError, ValueError) as exc:
            # validation messages start with the offending field name
            name = str(exc).split(" ", 1)[0]
            key = name if (section, name) in lines else ""
            raise ConfigError(f"{where(section, key)}: [{section}] {exc}") from None

    system = build("system", lambda v: SystemParams(**v))
    ancilla = build("ancilla", ancilla_from_mapping)
    coupling = build("coupling", lambda v: CouplingParams(**v))
    geometry = None
    if parser.has_section("geometry"):
        missing = _SECTION_KEYS["geometry"] - set(values["geometry"])
        if missing:
            raise ConfigError(f"{where('geometry')}: [geometry] is missing {sorted(missing)}")
        geometry = build("geometry", lambda v: BeamGeometry(**v))

    try:
        sweeps = tuple(SweepSpec.parse(s) for s in run.get("sweep", "").split(",") if s.strip())
        kappa_si = float(run["kappa_si"]) if "kappa_si" in run else None
        if kappa_si is not None and not (math.isfinite(kappa_si) and kappa_si > 0):
            raise ConfigError("kappa_si must be positive")
        if geometry is not None and "lambda11" not in values["ancilla"] and kappa_si is not None:
            # self-Kerr of the beam, converted from rad/s to kappa units
            ancilla = ancilla.replace(lambda11=beam_anharmonicity(geometry) / kappa_si)
        return RunConfig(
            model=ModelParams(system=system, ancilla=ancilla, coupling=coupling),
            geometry=geometry,
            sweeps=sweeps,
            output=run.get("output"),
            format=run.get("format", "csv"),
            seed=int(run.get("seed", 0)),
            tol=float(run["tol"]) if "tol" in run else None,
            tail_tol=float(run["tail_tol"]) if "tail_tol" in run else None,
            kappa_si=kappa_si,
            branch=run.get("branch", "operating"),
        )
    except (ValueError, ConfigError) as exc:
        raise ConfigError(f"{where('run')}: [run] {exc}") from None


def apply_overrides(model: ModelParams, overrides: dict[str, float]) -> ModelParams:
    """Return ``model`` with the named fields replaced (names as in SWEEPABLE)."""
    from dataclasses import replace

    groups: dict[str, dict[str, float]] = {"system": {}, "ancilla": {}, "coupling": {}}
    for key, value in overrides.items():
        if key not in SWEEPABLE:
            raise ConfigError(f"unknown parameter {key!r}")
        groups[SWEEPABLE[key]][key] = value
    return ModelParams(
        system=replace(model.system, **groups["system"]),
        ancilla=ancilla_from_mapping(groups["ancilla"], model.ancilla),
        coupling=replace(model.coupling, **groups["coupling"]),
    )
