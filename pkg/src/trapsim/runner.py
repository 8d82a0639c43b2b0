"""Scenario pipeline: geometry, field solve, trajectory, spectra, report.

Everything here is deterministic for a given scenario: solver seeds are
fixed and the integrator is seedless, so rerunning a config reproduces
the report bit for bit.
"""
from __future__ import annotations

import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields as dc_fields

import numpy as np

from . import config as cfg
from .bem import BemDriveField, DriveWaveform, solve_charge_basis
from .dynamics import (STATUS_OK, initial_state_from_energy,
                       integrate_trajectory, export_trajectory_csv)
from .errors import (ConfigError, PeakExtractionError, TrapSimError,
                     UnstableParametersError)
from .fdm import FdmDriveField
from .fieldcache import build_field_cache, default_cache_box
from .geometry import (EndcapTrapParams, IdealQuadrupoleParams,
                       LinearTrapParams, TrapGeometry, build_ideal_quadrupole,
                       build_innsbruck_linear, build_npl_endcap)
from .heating import HeatingInputs, johnson_heating_rate
from .mathieu import (IonSpecies, IdealQuadrupoleField, SecularFrequencies,
                      StabilityParams, endcap_stability_params,
                      estimate_efficiency, estimate_geometric_factor,
                      linear_stability_params, secular_frequencies,
                      species_by_name)
from .spectral import axis_spectrum, export_spectrum_csv, \
    extract_secular_frequency

log = logging.getLogger(__name__)

REPORT_SCHEMA = "trapsim-report-1"
NOMINAL_KAPPA = 0.05          # banding estimate only, refined by the run
_AXES = ("x", "y", "z")


# ---------------------------------------------------------------------------
# scenario -> simulation objects


def ion_species(scenario: cfg.Scenario) -> IonSpecies:
    base = species_by_name(scenario.ion.isotope)
    if scenario.ion.charge == 1:
        return base
    return IonSpecies(mass=base.mass,
                      charge=scenario.ion.charge * base.charge,
                      label=f"{base.label}({scenario.ion.charge:+d})")


_BUILDERS = {
    "ideal_quadrupole": (IdealQuadrupoleParams, build_ideal_quadrupole),
    "npl_endcap": (EndcapTrapParams, build_npl_endcap),
    "innsbruck_linear": (LinearTrapParams, build_innsbruck_linear),
}

# extension point for trap = custom
CUSTOM_BUILDERS: dict[str, callable] = {}


def build_trap(scenario: cfg.Scenario) -> TrapGeometry:
    overrides = scenario.geometry_map()
    if scenario.trap == "custom":
        name = overrides.pop("builder", None)
        builder = CUSTOM_BUILDERS.get(name)
        if builder is None:
            raise ConfigError(
                f"custom trap needs a registered builder, got {name!r} "
                f"(registered: {sorted(CUSTOM_BUILDERS)})")
        return builder(**overrides)
    params_cls, builder = _BUILDERS[scenario.trap]
    known = {f.name for f in dc_fields(params_cls)}
    unknown = set(overrides) - known
    if unknown:
        raise ConfigError(
            f"[geometry] keys {sorted(unknown)} not understood by "
            f"{scenario.trap}; known: {sorted(known)}")
    return builder(params_cls(**overrides))


def build_drive(scenario: cfg.Scenario, geometry: TrapGeometry) -> DriveWaveform:
    names = set(geometry.electrode_names)
    dm = scenario.drive_map()
    unknown = set(dm) - names
    if unknown:
        raise ConfigError(
            f"drive electrodes {sorted(unknown)} not in trap "
            f"{scenario.trap} (has {sorted(names)})")
    return DriveWaveform.for_geometry(
        geometry,
        dc={n: d.dc for n, d in dm.items()},
        ac={n: d.amplitude for n, d in dm.items()},
        frequency=scenario.rf_frequency,
        phase={n: d.phase for n, d in dm.items()})


def _trap_params(scenario: cfg.Scenario):
    params_cls, _ = _BUILDERS[scenario.trap]
    known = {f.name for f in dc_fields(params_cls)}
    overrides = {k: v for k, v in scenario.geometry_map().items()
                 if k in known}
    return params_cls(**overrides)


def _analytic_provider(scenario: cfg.Scenario, geometry: TrapGeometry):
    if scenario.trap != "ideal_quadrupole":
        raise ConfigError(
            "field_method = analytic needs trap = ideal_quadrupole")
    dm = scenario.drive_map()
    ring = dm.get("ring", cfg.DriveEntry())
    for name, d in dm.items():
        if name != "ring" and (d.dc or d.amplitude):
            raise ConfigError(
                "analytic field method drives the ring only; ground the caps")
    return IdealQuadrupoleField(geometry.r0, geometry.z0, ring.dc,
                                ring.amplitude,
                                2.0 * math.pi * scenario.rf_frequency,
                                ring.phase)


def build_provider(scenario: cfg.Scenario, geometry: TrapGeometry,
                   drive: DriveWaveform, timings: dict):
    """Direct field provider for the scenario's method (pre-cache)."""
    method = scenario.simulation.field_method
    t0 = time.perf_counter()
    if method == "bem":
        basis = solve_charge_basis(geometry)
        provider = BemDriveField(basis, drive)
    elif method == "fdm":
        sim = scenario.simulation
        half = sim.fdm_half_extent or 1.5 * geometry.bounding_radius
        spacing = sim.fdm_spacing or half / 64.0
        provider = FdmDriveField.solve(geometry, drive, spacing=spacing,
                                       half_extent=half)
    else:
        provider = _analytic_provider(scenario, geometry)
    timings["field_solve_s"] = time.perf_counter() - t0
    return provider


def stability_estimate(scenario: cfg.Scenario, geometry: TrapGeometry,
                       species: IonSpecies) -> StabilityParams:
    """a/q from the scenario's drive levels and nominal trap factors.

    Used to predict frequencies and to place spectral search bands; the
    run itself then measures the real values.
    """
    dm = scenario.drive_map()
    v_peak = max((d.amplitude for d in dm.values()), default=0.0)
    omega = 2.0 * math.pi * scenario.rf_frequency
    if scenario.trap == "ideal_quadrupole":
        ring = dm.get("ring", cfg.DriveEntry())
        return endcap_stability_params(species, ring.dc, ring.amplitude,
                                       omega, geometry.z0, 1.0)
    if scenario.trap == "npl_endcap":
        p = _trap_params(scenario)
        # the outer-cap DC couples through a separate geometry factor, so
        # it is left out of the a estimate; the bands absorb the shift
        return endcap_stability_params(species, 0.0, v_peak, omega,
                                       p.z0, p.efficiency)
    if scenario.trap == "innsbruck_linear":
        p = _trap_params(scenario)
        u_ring = max((d.dc for n, d in dm.items() if n.startswith("ring")),
                     default=0.0)
        # only the antisymmetric part of the two rod-pair drives makes a
        # quadrupole; for one driven pair that is half its amplitude
        rf = dm.get("rf_rods", cfg.DriveEntry())
        gnd = dm.get("ground_rods", cfg.DriveEntry())
        db = rf.amplitude * math.cos(rf.phase) \
            - gnd.amplitude * math.cos(gnd.phase)
        dc_ = rf.amplitude * math.sin(rf.phase) \
            - gnd.amplitude * math.sin(gnd.phase)
        v_pair = 0.5 * math.hypot(db, dc_)
        return linear_stability_params(species, u_ring, v_pair, omega,
                                       p.r0, p.z0, NOMINAL_KAPPA)
    raise ConfigError(f"no stability model for trap {scenario.trap!r}")


def search_bands(params: StabilityParams, rf_frequency: float) \
        -> tuple[dict[str, float], dict[str, tuple[float, float]]]:
    """Per-axis (lo, hi) windows around the Floquet-predicted lines.

    Each window takes a generous margin around its own prediction and is
    clipped away from the other axes' predictions so a strong neighbour
    mode cannot capture the peak search.  Unstable drive parameters give
    no usable prediction; both dicts come back empty.
    """
    try:
        pred = secular_frequencies(params, 2.0 * math.pi * rf_frequency)
    except UnstableParametersError:
        return {}, {}
    est = {u: getattr(pred, f"omega_{u}") / (2.0 * math.pi) for u in _AXES}
    bands = {}
    for u in _AXES:
        f = est[u]
        if f <= 0.0:
            continue
        lo, hi = 0.68 * f, min(1.40 * f, 0.49 * rf_frequency)
        for v in _AXES:
            g = est[v]
            if v == u or g <= 0.0:
                continue
            if g > 1.08 * f:
                hi = min(hi, 0.88 * g)
            elif g < 0.92 * f:
                lo = max(lo, 1.15 * g)
        bands[u] = (lo, hi)
    return est, bands


# ---------------------------------------------------------------------------
# report


@dataclass
class Report:
    scenario: cfg.Scenario
    source: str
    species: IonSpecies
    status: str
    frequencies: dict[str, float | None]
    notes: dict[str, str]
    bands: dict[str, tuple[float, float]]
    stability: StabilityParams
    predicted: dict[str, SecularFrequencies]
    efficiency_estimate: float | None = None
    kappa_estimate: float | None = None
    heating_rate_per_ohm: float | None = None
    heating_distance: float | None = None
    nyquist: float | None = None
    n_samples: int = 0
    timings: dict[str, float] = field(default_factory=dict)

    def to_text(self) -> str:
        s = self.scenario
        L = [f"scenario {s.name} ({s.trap}, {s.simulation.field_method})",
             f"ion {self.species.label or s.ion.isotope}, "
             f"{s.ion.kinetic_energy} eV start, "
             f"{s.simulation.duration * 1e3:g} ms record",
             f"rf {s.rf_frequency / 1e6:.6g} MHz", ""]
        L.append("extracted fundamentals:")
        for u in _AXES:
            f = self.frequencies.get(u)
            if f is not None:
                band = self.bands.get(u)
                L.append(f"  f_{u} = {f / 1e6:.6f} MHz   "
                         f"(searched {band[0] / 1e6:.3f}-{band[1] / 1e6:.3f} MHz)")
            else:
                L.append(f"  f_{u} = n/a   ({self.notes.get(u, 'not searched')})")
        L.append("")
        L.append("predictions (f_x, f_y, f_z in MHz):")
        for name, p in self.predicted.items():
            vals = [getattr(p, f"omega_{u}") / (2.0 * math.pi * 1e6)
                    for u in _AXES]
            L.append(f"  {name:12s} " + "  ".join(f"{v:8.4f}" for v in vals))
        st = self.stability
        L.append("")
        L.append(f"stability: a_x={st.a_x:+.3e} q_x={st.q_x:+.4f} "
                 f"a_z={st.a_z:+.3e} q_z={st.q_z:+.4f}")
        if self.efficiency_estimate is not None:
            L.append(f"quadrupole efficiency from f_z: "
                     f"{self.efficiency_estimate:.4f}")
        if self.kappa_estimate is not None:
            L.append(f"axial geometric factor kappa from f_z: "
                     f"{self.kappa_estimate:.4f}")
        if self.heating_rate_per_ohm is not None:
            L.append(f"johnson heating at 300 K, d = "
                     f"{self.heating_distance * 1e3:.2f} mm: "
                     f"{self.heating_rate_per_ohm:.3e} quanta/s per ohm")
        L.append("")
        L.append(f"trajectory: {self.n_samples} samples, status {self.status}")
        L.append("timings: " + "  ".join(
            f"{k[:-2]}={v:.2f}s" for k, v in self.timings.items()))
        return "\n".join(L) + "\n"

    def to_data(self) -> str:
        """Machine-readable key = value form, same content as to_text."""
        s = self.scenario
        rows = [("schema", REPORT_SCHEMA), ("scenario", s.name),
                ("trap", s.trap), ("field_method", s.simulation.field_method),
                ("ion", self.species.label or s.ion.isotope),
                ("kinetic_energy_ev", s.ion.kinetic_energy),
                ("duration_s", s.simulation.duration),
                ("rf_frequency_hz", s.rf_frequency),
                ("status", self.status),
                ("n_samples", self.n_samples)]
        for u in _AXES:
            f = self.frequencies.get(u)
            rows.append((f"f_{u}_hz", "" if f is None else f))
            if u in self.bands:
                rows.append((f"band_{u}_lo_hz", self.bands[u][0]))
                rows.append((f"band_{u}_hi_hz", self.bands[u][1]))
        for name, p in self.predicted.items():
            for u in _AXES:
                rows.append((f"predicted_{name}_f_{u}_hz",
                             getattr(p, f"omega_{u}") / (2.0 * math.pi)))
        for u in _AXES:
            a, q = self.stability.axis(u)
            rows.append((f"a_{u}", a))
            rows.append((f"q_{u}", q))
        if self.efficiency_estimate is not None:
            rows.append(("efficiency_estimate", self.efficiency_estimate))
        if self.kappa_estimate is not None:
            rows.append(("kappa_estimate", self.kappa_estimate))
        if self.heating_rate_per_ohm is not None:
            rows.append(("heating_quanta_per_s_per_ohm",
                         self.heating_rate_per_ohm))
            rows.append(("heating_distance_m", self.heating_distance))
        if self.nyquist is not None:
            rows.append(("nyquist_hz", self.nyquist))
        for k, v in self.timings.items():
            rows.append((f"timing_{k}", v))
        return "\n".join(f"{k} = {v}" for k, v in rows) + "\n"


def parse_report_data(text: str) -> dict[str, str]:
    """Inverse of Report.to_data for manifest comparisons."""
    out = {}
    for line in text.splitlines():
        if "=" in line:
            k, _, v = line.partition("=")
            out[k.strip()] = v.strip()
    return out


# ---------------------------------------------------------------------------
# bundled scenarios and their expected-output manifests


def bundled_scenario_path(name: str):
    """Path of a scenario that ships with the package, by bare name."""
    from importlib.resources import files
    p = files("trapsim").joinpath("scenarios", f"{name}.cfg")
    if not p.is_file():
        raise ConfigError(
            f"no bundled scenario {name!r}; have {list_bundled_scenarios()}")
    return p


def list_bundled_scenarios() -> list[str]:
    from importlib.resources import files
    d = files("trapsim").joinpath("scenarios")
    return sorted(p.name[:-4] for p in d.iterdir() if p.name.endswith(".cfg"))


def load_manifest(path) -> list[dict]:
    import json
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)["constraints"]


def manifest_for(name: str):
    from importlib.resources import files
    p = files("trapsim").joinpath("scenarios", f"{name}.json")
    return load_manifest(p) if p.is_file() else None


def check_manifest(report: "Report", constraints: list[dict]) -> list[str]:
    """Compare a report against manifest constraints; returns failures."""
    data = parse_report_data(report.to_data())
    failures = []
    for c in constraints:
        key, want = c["key"], c["value"]
        got = data.get(key, "")
        label = c.get("reference", "")
        if isinstance(want, str):
            if got != want:
                failures.append(f"{key} = {got!r}, wanted {want!r}")
            continue
        rtol = c.get("rtol", 0.0)
        try:
            val = float(got)
        except ValueError:
            failures.append(f"{key} missing from report ({label})")
            continue
        if abs(val - want) > rtol * abs(want):
            failures.append(
                f"{key} = {val:.6g} vs {want:.6g} {label} "
                f"({(val - want) / want * 100.0:+.2f}%, limit "
                f"{rtol * 100.0:g}%)")
    return failures


# ---------------------------------------------------------------------------
# the pipeline


def _resolve_scenario(scenario) -> tuple[cfg.Scenario, str]:
    if isinstance(scenario, cfg.Scenario):
        return scenario, "<memory>"
    path = str(scenario)
    if not os.path.exists(path) and "/" not in path and "." not in path:
        path = str(bundled_scenario_path(path))
    return cfg.load_scenario(path), path


def _electrode_distance(scenario: cfg.Scenario, geometry: TrapGeometry) -> float:
    if scenario.trap == "innsbruck_linear":
        return geometry.r0
    return geometry.z0


def run_scenario(scenario, outdir=None, *, keep_trajectory: bool = False):
    """Execute the full pipeline; returns the Report.

    Output files named in the scenario's [outputs] section are written
    into ``outdir`` (default: current directory).  ``keep_trajectory``
    attaches the Trajectory object to the returned report as
    ``report.trajectory`` for interactive use.
    """
    scenario, source = _resolve_scenario(scenario)
    outdir = os.getcwd() if outdir is None else str(outdir)
    sim = scenario.simulation
    timings: dict[str, float] = {}
    t_total = time.perf_counter()

    t0 = time.perf_counter()
    geometry = build_trap(scenario)
    species = ion_species(scenario)
    drive = build_drive(scenario, geometry)
    timings["geometry_s"] = time.perf_counter() - t0

    provider = build_provider(scenario, geometry, drive, timings)

    t0 = time.perf_counter()
    box = sim.cache_box if sim.cache_box is not None \
        else default_cache_box(geometry)
    cache = build_field_cache(provider, center=(0.0, 0.0, 0.0),
                              half_extent=box)
    timings["cache_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    init = initial_state_from_energy(scenario.ion.kinetic_energy, species)
    traj = integrate_trajectory(
        init, cache, duration=sim.duration,
        steps_per_rf_period=sim.steps_per_rf_period, dt_out=sim.dt_out,
        bounding_radius=geometry.bounding_radius,
        metadata={"scenario": scenario.name})
    timings["integrate_s"] = time.perf_counter() - t0

    params = stability_estimate(scenario, geometry, species)
    estimates, bands = search_bands(params, scenario.rf_frequency)
    predicted = {}
    for method in ("dehmelt", "fourth_order", "floquet"):
        try:
            predicted[method] = secular_frequencies(
                params, 2.0 * math.pi * scenario.rf_frequency, method)
        except (UnstableParametersError, TrapSimError) as exc:
            log.info("%s prediction unavailable: %s", method, exc)

    t0 = time.perf_counter()
    frequencies: dict[str, float | None] = {}
    notes: dict[str, str] = {}
    spectra = {}
    nyquist = 0.5 / traj.dt_out
    if traj.status == STATUS_OK:
        for u in _AXES:
            if u not in bands:
                notes[u] = "no drive on this axis"
                frequencies[u] = None
                continue
            spec = axis_spectrum(traj, u)
            spectra[u] = spec
            try:
                peak = extract_secular_frequency(spec, bands[u])
                if not 0.0 < peak.frequency < nyquist:
                    raise PeakExtractionError(
                        f"peak {peak.frequency:.3e} Hz outside (0, nyquist)")
                frequencies[u] = peak.frequency
            except PeakExtractionError as exc:
                frequencies[u] = None
                notes[u] = str(exc)
                log.warning("axis %s: %s", u, exc)
    else:
        frequencies = {u: None for u in _AXES}
        notes = {u: f"ion lost at t = {traj.loss_time:.3e} s" for u in _AXES}
    timings["spectra_s"] = time.perf_counter() - t0

    efficiency = kappa = None
    heating_rate = heat_d = None
    f_z = frequencies.get("z")
    f_x = frequencies.get("x")
    dm = scenario.drive_map()
    if f_z is not None:
        v_peak = max((d.amplitude for d in dm.values()), default=0.0)
        try:
            if scenario.trap in ("npl_endcap", "ideal_quadrupole") and v_peak:
                efficiency = estimate_efficiency(
                    2.0 * math.pi * f_z, species, v_peak,
                    2.0 * math.pi * scenario.rf_frequency, geometry.z0)
            elif scenario.trap == "innsbruck_linear":
                u_ring = max((d.dc for n, d in dm.items()
                              if n.startswith("ring")), default=0.0)
                if u_ring > 0.0:
                    kappa = estimate_geometric_factor(
                        2.0 * math.pi * f_z, species, u_ring, geometry.z0)
        except (UnstableParametersError, TrapSimError) as exc:
            log.warning("trap factor estimate failed: %s", exc)
    if f_x is not None:
        heat_d = _electrode_distance(scenario, geometry)
        heating_rate = johnson_heating_rate(HeatingInputs(
            resistance=1.0, distance=heat_d,
            omega_u=2.0 * math.pi * f_x, species=species))

    timings["total_s"] = time.perf_counter() - t_total
    report = Report(scenario=scenario, source=source, species=species,
                    status=traj.status, frequencies=frequencies, notes=notes,
                    bands=bands, stability=params, predicted=predicted,
                    efficiency_estimate=efficiency, kappa_estimate=kappa,
                    heating_rate_per_ohm=heating_rate,
                    heating_distance=heat_d, nyquist=nyquist,
                    n_samples=len(traj), timings=timings)
    if keep_trajectory:
        report.trajectory = traj

    for kind, filename in scenario.outputs:
        path = os.path.join(outdir, filename)
        if kind == "report":
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(report.to_text())
        elif kind == "report_data":
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(report.to_data())
        elif kind == "trajectory":
            export_trajectory_csv(traj, path)
        elif kind.startswith("spectrum_"):
            u = kind[-1]
            if u in spectra:
                export_spectrum_csv(spectra[u], path,
                                    max_frequency=1.2 * scenario.rf_frequency)
            else:
                log.warning("no %s spectrum to write", u)
        elif kind.startswith("map_"):
            export_potential_map(scenario, kind[4:], 201, path,
                                 _provider=provider, _geometry=geometry)
    return report


def run_all(paths, outdir=None, workers: int | None = None) -> dict:
    """Run several scenario files concurrently; maps path -> Report/error."""
    paths = list(paths)
    workers = workers or min(len(paths), os.cpu_count() or 1)
    results = {}
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(run_scenario, p, outdir): p for p in paths}
        for fut, p in futures.items():
            try:
                results[p] = fut.result()
            except TrapSimError as exc:
                results[p] = exc
    return results


# ---------------------------------------------------------------------------
# potential maps


_PLANES = {"zx": (2, 0, 1), "zy": (2, 1, 0), "xy": (0, 1, 2)}


def export_potential_map(scenario, plane: str, resolution: int, path,
                         half_extent=None, *, _provider=None, _geometry=None):
    """CSV (x, y, z, phi, method) over a coordinate plane at t = 0.

    ``plane`` picks the two in-plane axes ("zx", "zy" or "xy"); the third
    coordinate is 0.  Default extents come from the trap's interior field
    box, which keeps every sample outside the electrodes.
    """
    scenario, _ = _resolve_scenario(scenario)
    if plane not in _PLANES:
        raise ConfigError(f"plane must be one of {sorted(_PLANES)}")
    if resolution < 2:
        raise ConfigError("resolution must be at least 2")
    geometry = _geometry if _geometry is not None else build_trap(scenario)
    if _provider is None:
        drive = build_drive(scenario, geometry)
        provider = build_provider(scenario, geometry, drive, {})
    else:
        provider = _provider
    iu, iv, iw = _PLANES[plane]
    box = scenario.simulation.cache_box or default_cache_box(geometry)
    if half_extent is None:
        hu, hv = box[iu], box[iv]
    else:
        hu = hv = float(half_extent)
    us = np.linspace(-hu, hu, resolution)
    vs = np.linspace(-hv, hv, resolution)
    gu, gv = np.meshgrid(us, vs, indexing="ij")
    pts = np.zeros((gu.size, 3))
    pts[:, iu] = gu.ravel()
    pts[:, iv] = gv.ravel()
    phi = provider.potential(pts, 0.0)
    method = scenario.simulation.field_method
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("x,y,z,phi,method\n")
        for p, v in zip(pts, phi):
            fh.write(f"{float(p[0])!r},{float(p[1])!r},{float(p[2])!r},"
                     f"{float(v)!r},{method}\n")
    return path


# ---------------------------------------------------------------------------
# method comparison (ideal quadrupole benchmark)


@dataclass
class MethodComparison:
    potential_mean: dict[str, float]
    potential_max: dict[str, float]
    field_mean: dict[str, float]
    field_max: dict[str, float]
    solve_time: dict[str, float]
    n_points: int

    def to_text(self) -> str:
        L = [f"method comparison over {self.n_points} points, |r| < r0/2",
             f"{'':8s}{'mean dPhi':>12s}{'max dPhi':>12s}"
             f"{'mean dE':>12s}{'max dE':>12s}{'solve':>9s}"]
        for m in self.potential_mean:
            L.append(f"{m:8s}{self.potential_mean[m]:12.3e}"
                     f"{self.potential_max[m]:12.3e}"
                     f"{self.field_mean[m]:12.3e}{self.field_max[m]:12.3e}"
                     f"{self.solve_time[m]:8.2f}s")
        L.append("relative errors; potentials against the local value, "
                 "fields against the ball's peak field")
        return "\n".join(L) + "\n"


def sample_ball(radius: float, n: int, seed: int = 7) -> np.ndarray:
    rng = np.random.default_rng(seed)
    d = rng.normal(size=(n, 3))
    d /= np.linalg.norm(d, axis=1)[:, None]
    return d * radius * rng.random((n, 1)) ** (1.0 / 3.0)


def compare_methods(scenario, n_points: int = 400) -> MethodComparison:
    """BEM vs FDM against the exact quadrupole at the t = 0 snapshot."""
    scenario, _ = _resolve_scenario(scenario)
    if scenario.trap != "ideal_quadrupole":
        raise ConfigError("compare_methods needs trap = ideal_quadrupole")
    geometry = build_trap(scenario)
    drive = build_drive(scenario, geometry)
    truth = _analytic_provider(scenario, geometry)
    r0 = geometry.r0
    pts = sample_ball(0.5 * r0, n_points)
    phi_true = truth.potential(pts, 0.0)
    e_true = truth.fields(pts, 0.0)
    e_scale = np.linalg.norm(e_true, axis=1).max()
    v0 = drive.voltages(0.0)

    results = {}
    t0 = time.perf_counter()
    basis = solve_charge_basis(geometry)
    t_bem = time.perf_counter() - t0
    from .bem import field_at, potential_at
    results["bem"] = (potential_at(basis, pts, v0),
                      field_at(basis, pts, v0), t_bem)

    sim = scenario.simulation
    half = sim.fdm_half_extent or 2.0 * r0
    spacing = sim.fdm_spacing or half / 64.0
    from .fdm import interpolate_field, interpolate_potential, solve_grid
    t0 = time.perf_counter()
    grid = solve_grid(geometry, v0, spacing=spacing, half_extent=half)
    t_fdm = time.perf_counter() - t0
    results["fdm"] = (interpolate_potential(grid, pts),
                      interpolate_field(grid, pts), t_fdm)

    pm, px, fm, fx, st = {}, {}, {}, {}, {}
    for m, (phi, e, t) in results.items():
        rel_phi = np.abs(phi - phi_true) / np.abs(phi_true)
        rel_e = np.linalg.norm(e - e_true, axis=1) / e_scale
        pm[m], px[m] = float(rel_phi.mean()), float(rel_phi.max())
        fm[m], fx[m] = float(rel_e.mean()), float(rel_e.max())
        st[m] = t
    return MethodComparison(potential_mean=pm, potential_max=px,
                            field_mean=fm, field_max=fx, solve_time=st,
                            n_points=n_points)
