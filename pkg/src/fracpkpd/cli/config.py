"""Scenario configuration files.

A scenario is an INI-style text file::

    [patient]
    age = 53
    weight = 77
    height = 177
    sex = male

    [bis]                       ; optional, defaults 100 / 3.4 / 3
    ec50 = 3.4

    [schedule]
    breakpoints = 0, 0.5467, 1.8397
    rates = 106.0907, 0

    [sweep]
    psi = identity, sqrt, power:2, shift:0.2
    alpha = 1, 0.9
    horizon = 1.8397            ; optional, defaults to the last breakpoint
    grid_points = 400           ; optional

    [output]
    directory = out             ; relative to the config file
    formats = csv, svg, gnuplot

    [figures]                   ; optional named subsets of the sweep
    alpha_sweep = psi=identity; alpha=1,0.9

Without a ``[figures]`` section one group is formed per psi (varying alpha)
and one per alpha (varying psi).
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigError, ValidationError
from ..pkpd import BisParams, PatientProfile
from ..psi import PsiFunction, check_increasing, parse_psi
from ..solver import InfusionSchedule, _check_alpha

DEFAULT_GRID_POINTS = 400
FORMATS = ("csv", "svg", "gnuplot")

_SECTIONS = {
    "patient": {"age", "weight", "height", "sex"},
    "bis": {"bis0", "ec50", "gamma"},
    "schedule": {"breakpoints", "rates"},
    "sweep": {"psi", "alpha", "horizon", "grid_points"},
    "output": {"directory", "formats"},
    "figures": None,  # free-form group names
}


@dataclass(frozen=True)
class FigureGroup:
    name: str
    psis: tuple  # psi descriptors
    alphas: tuple


@dataclass
class ScenarioConfig:
    patient: PatientProfile
    schedule: InfusionSchedule
    psi_list: list
    alpha_list: list
    horizon: float
    bis: BisParams = field(default_factory=BisParams)
    grid_points: int = DEFAULT_GRID_POINTS
    output_dir: Path = Path("out")
    formats: tuple = FORMATS
    groups: list = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.psi_list:
            raise ValidationError("psi list is empty", field="psi")
        if not self.alpha_list:
            raise ValidationError("alpha list is empty", field="alpha")
        if not self.horizon > 0:
            raise ValidationError(f"horizon must be positive, got {self.horizon}", field="horizon")
        if self.grid_points < 16:
            raise ValidationError(f"grid_points must be at least 16, got {self.grid_points}", field="grid_points")
        if self.schedule.start + self.horizon > self.schedule.end * (1 + 1e-12) + 1e-12:
            raise ValidationError("schedule does not cover the horizon", field="horizon")
        if not self.groups:
            self.groups = default_groups(self.psi_list, self.alpha_list)

    def grid(self):
        import numpy as np

        t0 = self.schedule.start
        return np.linspace(t0, t0 + self.horizon, self.grid_points)

    def echo(self) -> dict:
        """Resolved parameters as plain data (for the run manifest)."""
        return {
            "patient": {
                "age": self.patient.age,
                "weight": self.patient.weight,
                "height": self.patient.height,
                "sex": self.patient.sex.value,
            },
            "bis": {"bis0": self.bis.bis0, "ec50": self.bis.ec50, "gamma": self.bis.gamma},
            "schedule": {"breakpoints": list(self.schedule.breakpoints), "rates": list(self.schedule.rates)},
            "sweep": {
                "psi": [p.descriptor() for p in self.psi_list],
                "alpha": list(self.alpha_list),
                "horizon": self.horizon,
                "grid_points": self.grid_points,
            },
            "formats": list(self.formats),
            "groups": [{"name": g.name, "psi": list(g.psis), "alpha": list(g.alphas)} for g in self.groups],
        }


def default_groups(psi_list, alpha_list) -> list:
    groups = []
    descs = tuple(p.descriptor() for p in psi_list)
    alphas = tuple(alpha_list)
    if len(alphas) > 1:
        for d in descs:
            groups.append(FigureGroup(f"psi_{_slug(d)}", (d,), alphas))
    if len(descs) > 1:
        for a in alphas:
            groups.append(FigureGroup(f"alpha_{_slug(format(a, 'g'))}", descs, (a,)))
    if not groups:
        groups.append(FigureGroup("all", descs, alphas))
    return groups


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9.]+", "_", text).strip("_")


def _key_lines(text: str) -> dict:
    """Map (section, key) to the line number where the key is set."""
    lines = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        m = re.match(r"^\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip().lower()
            lines[(section, None)] = lineno
            continue
        m = re.match(r"^([^=:;#\s][^=:]*?)\s*[=:]", line)
        if m and section is not None:
            lines[(section, m.group(1).strip().lower())] = lineno
    return lines


def _floats(text: str, section: str, key: str, where) -> list:
    try:
        return [float(x) for x in text.replace(";", ",").split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"[{section}] {key}: expected numbers, got {text!r}", where(section, key), key) from None


def load_config(path) -> ScenarioConfig:
    """Parse and validate a scenario file.

    Raises:
        ConfigError: on syntax errors (with line number) and on invalid or
            missing fields (naming the field).
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None

    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    try:
        parser.read_string(text, source=str(path))
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ConfigError(f"{path}:{lineno}: cannot parse line", lineno) from None
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: key outside of any section", exc.lineno) from None
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        raise ConfigError(f"{path}:{exc.lineno}: {exc.message if hasattr(exc, 'message') else exc}", exc.lineno) from None

    lines = _key_lines(text)

    def where(section, key=None):
        return lines.get((section, key)) or lines.get((section, None))

    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"{path}:{where(section)}: unknown section [{section}]", where(section))
        allowed = _SECTIONS[section]
        if allowed is not None:
            for key in parser[section]:
                if key not in allowed:
                    raise ConfigError(
                        f"{path}:{where(section, key)}: unknown key {key!r} in [{section}]", where(section, key), key
                    )

    def need(section, key):
        if not parser.has_option(section, key):
            raise ConfigError(f"{path}: missing required field [{section}] {key}", where(section), key)
        return parser.get(section, key)

    def fail(exc: ValidationError, section: str):
        key = exc.field
        lineno = where(section, key) if key else where(section)
        prefix = f"{path}:{lineno}: " if lineno else f"{path}: "
        return ConfigError(prefix + f"invalid [{section}] {key or ''}: {exc}".replace(" :", ":"), lineno, key)

    body = {k: _floats(need("patient", k), "patient", k, where)[0] for k in ("age", "weight", "height")}
    sex = need("patient", "sex").strip().lower()
    if sex not in ("male", "female"):
        raise ConfigError(f"{path}:{where('patient', 'sex')}: sex must be male or female", where("patient", "sex"), "sex")
    try:
        patient = PatientProfile(sex=sex, **body)
    except ValidationError as exc:
        raise fail(exc, "patient") from None

    bis_kw = {}
    if parser.has_section("bis"):
        for key in parser["bis"]:
            bis_kw[key] = _floats(parser.get("bis", key), "bis", key, where)[0]
    try:
        bis = BisParams(**bis_kw)
    except ValidationError as exc:
        raise fail(exc, "bis") from None

    try:
        schedule = InfusionSchedule(
            tuple(_floats(need("schedule", "breakpoints"), "schedule", "breakpoints", where)),
            tuple(_floats(need("schedule", "rates"), "schedule", "rates", where)),
        )
    except ValidationError as exc:
        raise fail(exc, "schedule") from None

    psi_specs = [s.strip() for s in need("sweep", "psi").split(",") if s.strip()]
    alpha_text = need("sweep", "alpha")
    alphas = _floats(alpha_text, "sweep", "alpha", where)
    horizon = (
        _floats(parser.get("sweep", "horizon"), "sweep", "horizon", where)[0]
        if parser.has_option("sweep", "horizon")
        else schedule.end - schedule.start
    )
    grid_points = DEFAULT_GRID_POINTS
    if parser.has_option("sweep", "grid_points"):
        try:
            grid_points = int(parser.get("sweep", "grid_points"))
        except ValueError:
            raise ConfigError(
                f"{path}:{where('sweep', 'grid_points')}: grid_points must be an integer",
                where("sweep", "grid_points"),
                "grid_points",
            ) from None

    psi_list: list[PsiFunction] = []
    try:
        for spec in psi_specs:
            psi = parse_psi(spec)
            check_increasing(psi, schedule.start, schedule.start + horizon)
            psi_list.append(psi)
        alphas = [_check_alpha(a) for a in alphas]
    except ValidationError as exc:
        raise fail(exc, "sweep") from None
    if len({p.descriptor() for p in psi_list}) != len(psi_list) or len(set(alphas)) != len(alphas):
        raise ConfigError(f"{path}:{where('sweep')}: duplicate entries in the sweep", where("sweep"))

    out_dir = Path(parser.get("output", "directory", fallback="out"))
    if not out_dir.is_absolute():
        out_dir = path.parent / out_dir
    formats = tuple(
        f.strip().lower() for f in parser.get("output", "formats", fallback=",".join(FORMATS)).split(",") if f.strip()
    )
    bad = [f for f in formats if f not in FORMATS]
    if bad or "csv" not in formats:
        raise ConfigError(
            f"{path}:{where('output', 'formats')}: formats must include csv and be among {FORMATS}",
            where("output", "formats"),
            "formats",
        )

    groups = []
    if parser.has_section("figures"):
        known_psi = {p.descriptor() for p in psi_list}
        for name in parser["figures"]:
            groups.append(_parse_group(name, parser.get("figures", name), known_psi, set(alphas), path, where))

    try:
        return ScenarioConfig(
            patient=patient,
            schedule=schedule,
            psi_list=psi_list,
            alpha_list=alphas,
            horizon=horizon,
            bis=bis,
            grid_points=grid_points,
            output_dir=out_dir,
            formats=formats,
            groups=groups,
        )
    except ValidationError as exc:
        raise fail(exc, "sweep") from None


def _parse_group(name, text, known_psi, known_alpha, path, where) -> FigureGroup:
    lineno = where("figures", name)
    parts = {}
    for chunk in text.split(";"):
        key, sep, value = chunk.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: figure {name!r} needs 'psi=...; alpha=...'", lineno, name)
        parts[key.strip().lower()] = [v.strip() for v in value.split(",") if v.strip()]
    if set(parts) != {"psi", "alpha"}:
        raise ConfigError(f"{path}:{lineno}: figure {name!r} needs exactly psi= and alpha=", lineno, name)
    try:
        psis = tuple(parse_psi(s).descriptor() for s in parts["psi"])
        alphas = tuple(float(a) for a in parts["alpha"])
    except (ValidationError, ValueError) as exc:
        raise ConfigError(f"{path}:{lineno}: figure {name!r}: {exc}", lineno, name) from None
    missing = [p for p in psis if p not in known_psi] + [format(a, "g") for a in alphas if a not in known_alpha]
    if missing:
        raise ConfigError(f"{path}:{lineno}: figure {name!r} uses {missing} which are not in the sweep", lineno, name)
    return FigureGroup(_slug(name), psis, alphas)
