"""Scenario files: a small sectioned key/value format with unit suffixes.

Every physical value carries an explicit unit (``frequency = 15.955 MHz``)
so there is no implicit-unit guessing anywhere downstream.  Parsing errors
point at the offending line.  ``parse_scenario(scenario_to_text(s))`` is an
identity: values are serialized in the factor-1 canonical unit of their
dimension, and rms amplitudes are normalized to zero-to-peak at load.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace

from .errors import ConfigError

TRAP_KINDS = ("ideal_quadrupole", "npl_endcap", "innsbruck_linear", "custom")
FIELD_METHODS = ("bem", "fdm", "analytic")
AMPLITUDE_KINDS = ("rms", "zero_to_peak")
OUTPUT_KINDS = ("report", "report_data", "trajectory", "spectrum_x",
                "spectrum_y", "spectrum_z", "map_zx", "map_zy", "map_xy")

# dimension -> canonical unit (factor exactly 1.0) listed first
_UNITS = {
    "length": (("m", 1.0), ("mm", 1e-3), ("um", 1e-6), ("nm", 1e-9)),
    "voltage": (("V", 1.0), ("kV", 1e3), ("mV", 1e-3)),
    "frequency": (("Hz", 1.0), ("kHz", 1e3), ("MHz", 1e6), ("GHz", 1e9)),
    "time": (("s", 1.0), ("ms", 1e-3), ("us", 1e-6), ("ns", 1e-9)),
    "energy": (("eV", 1.0), ("meV", 1e-3), ("keV", 1e3)),
    "angle_rad": (("rad", 1.0), ("deg", math.pi / 180.0)),
    "angle_deg": (("deg", 1.0), ("rad", 180.0 / math.pi)),
    "mass": (("u", 1.0),),
    "resistance": (("ohm", 1.0), ("Ohm", 1.0), ("kohm", 1e3)),
    "temperature": (("K", 1.0),),
}

_SECTION_RE = re.compile(r"^\[([A-Za-z0-9_.]+)\]$")
_NUMBER_RE = re.compile(r"^[-+]?(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?$")


@dataclass(frozen=True)
class DriveEntry:
    """Voltage programme of one electrode (amplitude is zero-to-peak)."""

    dc: float = 0.0
    amplitude: float = 0.0
    frequency: float = 0.0
    phase: float = 0.0


@dataclass(frozen=True)
class IonSpec:
    isotope: str = "Sr-88"
    charge: int = 1
    kinetic_energy: float = 0.0     # eV


@dataclass(frozen=True)
class SimulationSpec:
    duration: float = 1.0e-3
    steps_per_rf_period: int = 100
    dt_out: float | None = None     # None picks a decimation automatically
    field_method: str = "bem"
    cache_box: tuple[float, float, float] | None = None
    fdm_spacing: float | None = None
    fdm_half_extent: float | None = None


@dataclass(frozen=True)
class Scenario:
    name: str
    trap: str
    geometry: tuple[tuple[str, float | int], ...] = ()
    drives: tuple[tuple[str, DriveEntry], ...] = ()
    ion: IonSpec = field(default_factory=IonSpec)
    simulation: SimulationSpec = field(default_factory=SimulationSpec)
    outputs: tuple[tuple[str, str], ...] = ()

    @property
    def rf_frequency(self) -> float:
        """The shared RF frequency (Hz); 0 when no electrode is driven."""
        for _, d in self.drives:
            if d.amplitude != 0.0:
                return d.frequency
        return 0.0

    def drive_map(self) -> dict[str, DriveEntry]:
        return dict(self.drives)

    def geometry_map(self) -> dict[str, float | int]:
        return dict(self.geometry)


def _err(source, line, msg) -> ConfigError:
    where = f"{source}:{line}: " if line else f"{source}: "
    return ConfigError(where + msg)


def _parse_quantity(raw: str, dim: str | None, source, line, key) -> float:
    raw = raw.strip()
    m = re.match(r"^(\S+)\s*(\S*)$", raw)
    if not m:
        raise _err(source, line, f"{key}: cannot parse value {raw!r}")
    num, unit = m.group(1), m.group(2)
    if not _NUMBER_RE.match(num):
        raise _err(source, line, f"{key}: {num!r} is not a number")
    value = float(num)
    if dim is None:
        if unit:
            raise _err(source, line, f"{key}: unexpected unit {unit!r}")
        return value
    if not unit:
        if value == 0.0:
            return 0.0
        raise _err(source, line,
                   f"{key}: missing unit, expected one of "
                   f"{[u for u, _ in _UNITS[dim]]}")
    for name, factor in _UNITS[dim]:
        if unit == name:
            return value * factor
    raise _err(source, line,
               f"{key}: unit {unit!r} is not a {dim.split('_')[0]} unit")


def _parse_int(raw, source, line, key) -> int:
    try:
        return int(raw.strip())
    except ValueError:
        raise _err(source, line, f"{key}: expected an integer, got {raw!r}") \
            from None


class _Section:
    """One parsed section: key -> (value string, line number)."""

    def __init__(self, name, line, source):
        self.name = name
        self.line = line
        self.source = source
        self.items: dict[str, tuple[str, int]] = {}

    def add(self, key, value, line):
        if key in self.items:
            raise _err(self.source, line,
                       f"duplicate key {key!r} in [{self.name}]")
        self.items[key] = (value, line)

    def take(self, key, default=None):
        return self.items.pop(key, (default, self.line))

    def finish(self):
        if self.items:
            key, (_, line) = next(iter(self.items.items()))
            raise _err(self.source, line,
                       f"unknown key {key!r} in [{self.name}]")


def _split_sections(text: str, source: str) -> dict[str, _Section]:
    sections: dict[str, _Section] = {}
    current = None
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        m = _SECTION_RE.match(line)
        if m:
            name = m.group(1)
            if name in sections:
                raise _err(source, lineno, f"duplicate section [{name}]")
            current = _Section(name, lineno, source)
            sections[name] = current
            continue
        if "=" not in line:
            raise _err(source, lineno, f"expected 'key = value', got {line!r}")
        if current is None:
            raise _err(source, lineno, "key/value before any [section]")
        key, _, value = line.partition("=")
        current.add(key.strip(), value.strip(), lineno)
    return sections


def _geometry_dim(key: str) -> str | None:
    if key in ("resolution",):
        return "int"
    if key.endswith("_angle"):
        return "angle_deg"
    length_words = ("diameter", "length", "separation", "thickness",
                    "distance", "spacing", "extent")
    if any(w in key for w in length_words) or key in ("r0", "z0"):
        return "length"
    return None    # dimensionless: efficiency, radial_truncation, ...


def _parse_geometry(sec: _Section) -> tuple:
    out = []
    for key in list(sec.items):
        raw, line = sec.items.pop(key)
        dim = _geometry_dim(key)
        if dim == "int":
            out.append((key, _parse_int(raw, sec.source, line, key)))
        else:
            out.append((key, _parse_quantity(raw, dim, sec.source, line, key)))
    return tuple(out)


def _parse_drive(sec: _Section, electrode: str) -> DriveEntry:
    src = sec.source
    raw, line = sec.take("dc", "0")
    dc = _parse_quantity(raw, "voltage", src, line, "dc")
    raw, line = sec.take("amplitude", "0")
    amp = _parse_quantity(raw, "voltage", src, line, "amplitude")
    raw, line = sec.take("amplitude_kind", "zero_to_peak")
    kind = raw.strip()
    if kind not in AMPLITUDE_KINDS:
        raise _err(src, line, f"amplitude_kind must be one of {AMPLITUDE_KINDS}")
    raw, fline = sec.take("frequency", "0")
    freq = _parse_quantity(raw, "frequency", src, fline, "frequency")
    raw, line = sec.take("phase", "0")
    phase = _parse_quantity(raw, "angle_rad", src, line, "phase")
    sec.finish()
    if kind == "rms":
        amp *= math.sqrt(2.0)
    if amp != 0.0 and freq <= 0.0:
        raise _err(src, sec.line,
                   f"electrode {electrode!r} has an RF amplitude but no "
                   "positive frequency")
    if amp == 0.0 and freq != 0.0:
        raise _err(src, fline,
                   f"electrode {electrode!r} has a frequency but no amplitude")
    return DriveEntry(dc=dc, amplitude=amp, frequency=freq, phase=phase)


def parse_scenario(text: str, source: str = "<string>") -> Scenario:
    sections = _split_sections(text, source)

    sc = sections.pop("scenario", None)
    if sc is None:
        raise _err(source, 0, "missing [scenario] section")
    name, _ = sc.take("name", "unnamed")
    trap, line = sc.take("trap")
    sc.finish()
    if trap is None:
        raise _err(source, sc.line, "missing 'trap' in [scenario]")
    if trap not in TRAP_KINDS:
        raise _err(source, line, f"trap must be one of {TRAP_KINDS}")

    geometry = ()
    if "geometry" in sections:
        geometry = _parse_geometry(sections.pop("geometry"))

    drives = []
    for secname in [s for s in sections if s.startswith("drive.")]:
        electrode = secname.split(".", 1)[1]
        if not electrode:
            raise _err(source, sections[secname].line,
                       "drive section needs an electrode name: [drive.<name>]")
        drives.append((electrode, _parse_drive(sections.pop(secname),
                                               electrode)))

    ion = IonSpec()
    if "ion" in sections:
        sec = sections.pop("ion")
        iso, _ = sec.take("isotope", ion.isotope)
        raw, line = sec.take("charge", "1")
        charge = _parse_int(raw, source, line, "charge")
        raw, line = sec.take("kinetic_energy", "0")
        ke = _parse_quantity(raw, "energy", source, line, "kinetic_energy")
        sec.finish()
        if charge == 0:
            raise _err(source, line, "charge state must be nonzero")
        if ke < 0:
            raise _err(source, line, "kinetic_energy must be nonnegative")
        ion = IonSpec(isotope=iso, charge=charge, kinetic_energy=ke)

    sim = SimulationSpec()
    if "simulation" in sections:
        sec = sections.pop("simulation")
        src = source
        raw, line = sec.take("duration", "1 ms")
        duration = _parse_quantity(raw, "time", src, line, "duration")
        raw, line = sec.take("steps_per_rf_period", "100")
        spp = _parse_int(raw, src, line, "steps_per_rf_period")
        raw, line = sec.take("dt_out", "auto")
        dt_out = None if raw.strip() == "auto" else \
            _parse_quantity(raw, "time", src, line, "dt_out")
        raw, line = sec.take("field_method", "bem")
        method = raw.strip()
        if method not in FIELD_METHODS:
            raise _err(src, line, f"field_method must be one of {FIELD_METHODS}")
        raw, line = sec.take("cache_box", "auto")
        if raw.strip() == "auto":
            cache_box = None
        else:
            parts = [p for p in raw.split(",")]
            if len(parts) == 1:
                parts = parts * 3
            if len(parts) != 3:
                raise _err(src, line, "cache_box wants one or three lengths")
            cache_box = tuple(_parse_quantity(p, "length", src, line,
                                              "cache_box") for p in parts)
        raw, line = sec.take("fdm_spacing", "0")
        fdm_h = _parse_quantity(raw, "length", src, line, "fdm_spacing") or None
        raw, line = sec.take("fdm_half_extent", "0")
        fdm_he = _parse_quantity(raw, "length", src, line,
                                 "fdm_half_extent") or None
        sec.finish()
        if duration <= 0:
            raise _err(src, sec.line, "duration must be positive")
        sim = SimulationSpec(duration=duration, steps_per_rf_period=spp,
                             dt_out=dt_out, field_method=method,
                             cache_box=cache_box, fdm_spacing=fdm_h,
                             fdm_half_extent=fdm_he)

    outputs = []
    if "outputs" in sections:
        sec = sections.pop("outputs")
        for key in list(sec.items):
            raw, line = sec.items.pop(key)
            if key not in OUTPUT_KINDS:
                raise _err(source, line,
                           f"unknown output kind {key!r}; "
                           f"known: {OUTPUT_KINDS}")
            outputs.append((key, raw))

    if sections:
        stray = next(iter(sections.values()))
        raise _err(source, stray.line, f"unknown section [{stray.name}]")

    scenario = Scenario(name=name, trap=trap, geometry=geometry,
                        drives=tuple(drives), ion=ion, simulation=sim,
                        outputs=tuple(outputs))
    _validate_rf(scenario, source)
    return scenario


def _validate_rf(scenario: Scenario, source: str):
    freqs = {d.frequency for _, d in scenario.drives if d.amplitude != 0.0}
    if len(freqs) > 1:
        raise _err(source, 0,
                   f"electrodes carry different RF frequencies {sorted(freqs)}; "
                   "exactly one drive frequency is supported")


def load_scenario(path) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file {path}: {exc}") from None
    return parse_scenario(text, source=str(path))


def _fmt(value: float, unit: str) -> str:
    return f"{value!r} {unit}" if value != 0.0 else f"0 {unit}"


def scenario_to_text(s: Scenario) -> str:
    lines = ["[scenario]", f"name = {s.name}", f"trap = {s.trap}", ""]
    if s.geometry:
        lines.append("[geometry]")
        for key, val in s.geometry:
            dim = _geometry_dim(key)
            if dim == "int":
                lines.append(f"{key} = {val}")
            elif dim == "length":
                lines.append(f"{key} = {_fmt(val, 'm')}")
            elif dim == "angle_deg":
                lines.append(f"{key} = {_fmt(val, 'deg')}")
            else:
                lines.append(f"{key} = {val!r}")
        lines.append("")
    for electrode, d in s.drives:
        lines.append(f"[drive.{electrode}]")
        if d.dc:
            lines.append(f"dc = {_fmt(d.dc, 'V')}")
        if d.amplitude:
            lines.append(f"amplitude = {_fmt(d.amplitude, 'V')}")
            lines.append("amplitude_kind = zero_to_peak")
            lines.append(f"frequency = {_fmt(d.frequency, 'Hz')}")
        if d.phase:
            lines.append(f"phase = {_fmt(d.phase, 'rad')}")
        lines.append("")
    lines += ["[ion]", f"isotope = {s.ion.isotope}", f"charge = {s.ion.charge}",
              f"kinetic_energy = {_fmt(s.ion.kinetic_energy, 'eV')}", ""]
    sim = s.simulation
    lines += ["[simulation]", f"duration = {_fmt(sim.duration, 's')}",
              f"steps_per_rf_period = {sim.steps_per_rf_period}"]
    lines.append("dt_out = auto" if sim.dt_out is None
                 else f"dt_out = {_fmt(sim.dt_out, 's')}")
    lines.append(f"field_method = {sim.field_method}")
    lines.append("cache_box = auto" if sim.cache_box is None else
                 "cache_box = " + ", ".join(_fmt(v, "m")
                                            for v in sim.cache_box))
    if sim.fdm_spacing:
        lines.append(f"fdm_spacing = {_fmt(sim.fdm_spacing, 'm')}")
    if sim.fdm_half_extent:
        lines.append(f"fdm_half_extent = {_fmt(sim.fdm_half_extent, 'm')}")
    lines.append("")
    if s.outputs:
        lines.append("[outputs]")
        lines += [f"{kind} = {path}" for kind, path in s.outputs]
        lines.append("")
    return "\n".join(lines)


def save_scenario(s: Scenario, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(scenario_to_text(s))


def with_updates(s: Scenario, **kwargs) -> Scenario:
    """Convenience for tests and the CLI: dataclasses.replace passthrough."""
    return replace(s, **kwargs)
