"""Run orchestration: grid sizing, the end-to-end pipelines, and artifact output.

Every mode writes its tables as CSV plus a manifest.json holding the exact
parameters, derived constants, measured results, and monitor flags.  Writes
are transactional (temp file + atomic replace), and CSV content is a pure
function of the config, so reruns are bit-identical.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
import time as _time
from typing import Sequence

import numpy as np

from . import __version__
from .asymptotic import assemble_ap, frame_from
from .config import RunConfig
from .exceptions import ConfigError
from .fullsys import (
    FieldState,
    fast_frequency,
    full_initial_condition,
    full_solve,
    weighted_energy,
)
from .kdv import Branch, KdvState, kdv_initial_condition, kdv_solve
from .params import (
    DerivedParams,
    PhysicalParams,
    derive_params,
    effective_speed,
    slow_wave_speed,
)
from .spectral import PeriodicGrid
from .validation import (
    ErrorReport,
    compare_fields,
    condition_monitor,
    eps_sweep,
    fast_mode_diagnostic,
    pde_residual,
)

BOX_MARGIN = 1.0          # lab-frame padding beyond support + travel distance
ZETA_MARGIN = 4.0         # extra zeta padding beyond the mapped range
POINTS_PER_EPS = 8        # dx <= eps / POINTS_PER_EPS
POINTS_PER_SCALE = 8      # dzeta <= profile scale / POINTS_PER_SCALE
RESIDUAL_DELTA_FACTOR = 0.01   # snapshot spacing eps * factor for defect probes
FAST_PERIODS = 5.0
FAST_SAMPLES_PER_PERIOD = 16


def _next_pow2(x: float) -> int:
    return 1 << max(0, math.ceil(math.log2(max(1.0, x))))


def physical_from(cfg: RunConfig, eps: float | None = None) -> PhysicalParams:
    return PhysicalParams(
        eps=cfg.eps if eps is None else eps,
        k1=cfg.k1, k2=cfg.k2, a=cfg.a, b=cfg.b,
        omega_u=cfg.omega_u, omega_v=cfg.omega_v,
    )


def full_grid_for(cfg: RunConfig, p: PhysicalParams, t_end: float) -> PeriodicGrid:
    r0 = max(cfg.u0.support_radius(), cfg.phi.support_radius())
    length = cfg.length
    if length is None:
        length = 2.0 * (r0 * p.eps + max(p.k1, p.k2) * t_end + BOX_MARGIN)
    n = cfg.n
    if n is None:
        n = max(128, _next_pow2(length * POINTS_PER_EPS / p.eps))
    return PeriodicGrid(n=n, length=float(length), left=-0.5 * float(length))


def kdv_grid_for(cfg: RunConfig, p: PhysicalParams, d: DerivedParams, t_end: float,
                 x_grid: PeriodicGrid) -> PeriodicGrid:
    length = cfg.zeta_length
    if length is None:
        reach = (0.5 * x_grid.length + d.k * t_end) / p.eps
        length = 2.0 * (reach + ZETA_MARGIN)
    m = cfg.m
    if m is None:
        dz = cfg.u0.scale / POINTS_PER_SCALE
        m = max(256, _next_pow2(length / dz))
    return PeriodicGrid(n=m, length=float(length), left=-0.5 * float(length))


def _solver_flux(cfg: RunConfig):
    return None if cfg.flux.is_zero else cfg.flux


def _kdv_flux(cfg: RunConfig):
    return _solver_flux(cfg) if cfg.kdv_flux else None


def _output_times(cfg: RunConfig) -> list[float]:
    return sorted(cfg.output_times) if cfg.output_times else [cfg.t_end]


def solve_kdv_pipeline(cfg: RunConfig, times: Sequence[float] | None = None):
    """Both profile branches at the requested times."""
    p = physical_from(cfg)
    d = derive_params(p, speed=cfg.speed_convention)
    times = list(times) if times is not None else _output_times(cfg)
    x_grid = full_grid_for(cfg, p, cfg.t_end)
    grid = kdv_grid_for(cfg, p, d, max(times + [cfg.t_end]), x_grid)
    f = _kdv_flux(cfg)
    t_end = max(times)
    out = {}
    for branch in (Branch.I, Branch.II):
        state0 = kdv_initial_condition(cfg.u0, grid, branch)
        out[branch] = kdv_solve(state0, d, f, t_end, dt=cfg.dt, output_times=times)
    return p, d, out


def solve_full_pipeline(cfg: RunConfig, times: Sequence[float] | None = None,
                        dt: float | None = None):
    p = physical_from(cfg)
    times = list(times) if times is not None else _output_times(cfg)
    grid = full_grid_for(cfg, p, max(times + [cfg.t_end]))
    state0 = full_initial_condition(p, cfg.u0, cfg.phi, grid, consistent=cfg.consistent)
    traj = full_solve(state0, p, _solver_flux(cfg), max(times), dt=dt if dt is not None else cfg.dt,
                      output_times=times)
    return p, grid, traj


def assemble_pipeline(cfg: RunConfig, times: Sequence[float] | None = None,
                      x_grid: PeriodicGrid | None = None):
    """KdV solves plus lab-frame assembly at each requested time."""
    p = physical_from(cfg)
    d = derive_params(p, speed=cfg.speed_convention)
    times = list(times) if times is not None else _output_times(cfg)
    if x_grid is None:
        x_grid = full_grid_for(cfg, p, max(times + [cfg.t_end]))
    grid = kdv_grid_for(cfg, p, d, max(times + [cfg.t_end]), x_grid)
    f = _kdv_flux(cfg)
    frame = frame_from(p, d)
    t_end = max(times)
    branch_states = {}
    for branch in (Branch.I, Branch.II):
        state0 = kdv_initial_condition(cfg.u0, grid, branch)
        branch_states[branch] = kdv_solve(state0, d, f, t_end, dt=cfg.dt, output_times=times)
    fields = [
        assemble_ap(s1, s2, p, d, f, frame, x_grid, s1.t)
        for s1, s2 in zip(branch_states[Branch.I], branch_states[Branch.II])
    ]
    return p, d, branch_states, fields


def compare_pipeline(cfg: RunConfig, eps: float | None = None) -> list[ErrorReport]:
    """Full solve vs assembled approximation at each output time, with the
    approximation's equation defect measured from a closely spaced triplet."""
    sub = cfg if eps is None else cfg.with_eps(eps)
    p = physical_from(sub)
    d = derive_params(p, speed=sub.speed_convention)
    times = _output_times(sub)
    t_end = max(times)
    grid = full_grid_for(sub, p, t_end)
    state0 = full_initial_condition(p, sub.u0, sub.phi, grid, consistent=sub.consistent)
    full_traj = full_solve(state0, p, _solver_flux(sub), t_end, dt=sub.dt, output_times=times)

    delta = RESIDUAL_DELTA_FACTOR * p.eps
    probe_times = sorted({
        round(tt, 12)
        for t in times
        for tt in (max(t, delta) - delta, max(t, delta), max(t, delta) + delta)
    } | set(times))
    kdv_grid = kdv_grid_for(sub, p, d, t_end + delta, grid)
    f = _kdv_flux(sub)
    frame = frame_from(p, d)
    branch_states = {}
    for branch in (Branch.I, Branch.II):
        st0 = kdv_initial_condition(sub.u0, kdv_grid, branch)
        branch_states[branch] = kdv_solve(st0, d, f, max(probe_times), dt=sub.dt,
                                          output_times=probe_times)
    by_time = {
        s1.t: assemble_ap(s1, s2, p, d, f, frame, grid, s1.t)
        for s1, s2 in zip(branch_states[Branch.I], branch_states[Branch.II])
    }

    monitor = condition_monitor(branch_states[Branch.I][-1])
    flags = {
        "max_s": monitor.max_s,
        "within_omega_u": monitor.max_s <= p.omega_u,
        "max_d1": monitor.max_d1,
        "max_d2": monitor.max_d2,
        "max_d3": monitor.max_d3,
        "edge_magnitude": monitor.edge_magnitude,
    }
    reports = []
    for full_state, t in zip(full_traj, times):
        center = max(t, delta)
        triplet = [by_time[round(center - delta, 12)], by_time[round(center, 12)],
                   by_time[round(center + delta, 12)]]
        samples = pde_residual(triplet, p, _solver_flux(sub))
        defect = max(samples[0].defect_u, samples[0].defect_v)
        base = compare_fields(full_state, by_time[round(t, 12)], eps=p.eps)
        reports.append(ErrorReport(
            eps=base.eps, t=base.t, sup_u=base.sup_u, sup_v=base.sup_v,
            l2_u=base.l2_u, l2_v=base.l2_v, pde_residual_sup=defect,
            monitors=flags,
        ))
    return reports


def fast_mode_pipeline(cfg: RunConfig):
    """Consistent vs inconsistent initial data: fast energy and frequency."""
    p = physical_from(cfg)
    period = 2.0 * np.pi / fast_frequency(p)
    spacing = period / FAST_SAMPLES_PER_PERIOD
    count = int(round(FAST_PERIODS * FAST_SAMPLES_PER_PERIOD))
    times = [i * spacing for i in range(count + 1)]
    t_end = times[-1]
    grid = full_grid_for(cfg, p, t_end)
    dt = cfg.dt if cfg.dt is not None else min(0.25 * p.eps, 0.25 * grid.dx / max(p.k1, p.k2),
                                               spacing / 4.0)
    f = _solver_flux(cfg)
    runs = {}
    for label, consistent in (("consistent", True), ("inconsistent", False)):
        state0 = full_initial_condition(p, cfg.u0, cfg.phi, grid, consistent=consistent)
        runs[label] = full_solve(state0, p, f, t_end, dt=dt, output_times=times)
    report = fast_mode_diagnostic(runs["inconsistent"], p)
    baseline = fast_mode_diagnostic(runs["consistent"], p, probe_index=report.probe_index)
    return p, times, runs, report, baseline


# ---------------------------------------------------------------------------
# artifact writers

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        # plain-float repr: numpy scalars would print as np.float64(...)
        return repr(float(value))
    return str(value)


def atomic_write_text(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: str, header: Sequence[str], rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(cell) for cell in row) for row in rows)
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_fields_csv(path: str, states: Sequence[FieldState]):
    def rows():
        for state in states:
            x = state.grid.points
            for j in range(state.grid.n):
                yield (state.t, x[j], state.u[j], state.ut[j], state.v[j], state.vt[j])
    write_csv(path, ("t", "x", "u", "ut", "v", "vt"), rows())


def write_kdv_csv(path: str, states: Sequence[KdvState]):
    def rows():
        for state in states:
            z = state.grid.points
            for j in range(state.grid.n):
                yield (state.t, z[j], state.s[j])
    write_csv(path, ("t", "zeta", "s"), rows())


def write_report_csv(path: str, reports: Sequence[ErrorReport]):
    write_csv(
        path,
        ("eps", "t", "sup_u", "sup_v", "l2_u", "l2_v", "pde_residual_sup"),
        ((r.eps, r.t, r.sup_u, r.sup_v, r.l2_u, r.l2_v, r.pde_residual_sup) for r in reports),
    )


_PLOTS = {
    "sweep": """set datafile separator ","
set logscale xy
set xlabel "eps"
set ylabel "error"
set key left top
plot "sweep.csv" skip 1 using 1:3 with linespoints title "sup |u - u_ap|", \\
     "sweep.csv" skip 1 using 1:7 with linespoints title "sup defect"
""",
    "fields": """set datafile separator ","
set xlabel "x"
set ylabel "u"
plot "{name}" skip 1 using 2:3 with lines title "u"
""",
    "kdv": """set datafile separator ","
set xlabel "zeta"
set ylabel "s"
plot "kdv_I.csv" skip 1 using 2:3 with lines title "branch I", \\
     "kdv_II.csv" skip 1 using 2:3 with lines title "branch II"
""",
    "compare": """set datafile separator ","
set xlabel "t"
set ylabel "error"
plot "compare.csv" skip 1 using 2:3 with linespoints title "sup |u - u_ap|", \\
     "compare.csv" skip 1 using 2:7 with linespoints title "sup defect"
""",
    "fastmode": """set datafile separator ","
set xlabel "t"
set ylabel "fast energy"
set logscale y
plot "fastmode.csv" skip 1 using 1:2 with lines title "consistent", \\
     "fastmode.csv" skip 1 using 1:3 with lines title "inconsistent"
""",
}


def _manifest_base(cfg: RunConfig, p: PhysicalParams) -> dict:
    d_used = derive_params(p, speed=cfg.speed_convention)
    return {
        "version": __version__,
        "mode": cfg.mode,
        "physical": {"eps": p.eps, "k1": p.k1, "k2": p.k2, "a": p.a, "b": p.b,
                     "omega_u": p.omega_u, "omega_v": p.omega_v},
        "flux": cfg.flux_source,
        "kdv_flux": cfg.kdv_flux,
        "profiles": {
            "u0": {"kind": cfg.u0.kind, "amplitude": cfg.u0.amplitude,
                   "scale": cfg.u0.scale, "shift": cfg.u0.shift},
            "phi": {"kind": cfg.phi.kind, "amplitude": cfg.phi.amplitude,
                    "scale": cfg.phi.scale, "shift": cfg.phi.shift},
        },
        "derived": {
            "speed_convention": cfg.speed_convention,
            "k": d_used.k,
            "cap_k": d_used.cap_k,
            "flux_scale": d_used.flux_scale,
            "k_dispersion": slow_wave_speed(p),
            "k_mean": effective_speed(p),
            "degenerate": d_used.degenerate,
        },
        "consistent": cfg.consistent,
        "warnings": (["k1 == k2: zero dispersion coefficient, profiles do not disperse"]
                     if d_used.degenerate else []),
    }


def run(cfg: RunConfig) -> dict:
    """Execute the configured mode, write artifacts into out_dir, return the manifest."""
    started = _time.perf_counter()
    out = cfg.out_dir
    os.makedirs(out, exist_ok=True)
    p = physical_from(cfg)
    manifest = _manifest_base(cfg, p)

    if cfg.mode == "solve-kdv":
        p, d, states = solve_kdv_pipeline(cfg)
        write_kdv_csv(os.path.join(out, "kdv_I.csv"), states[Branch.I])
        write_kdv_csv(os.path.join(out, "kdv_II.csv"), states[Branch.II])
        monitor = condition_monitor(states[Branch.I][-1])
        manifest["results"] = {
            "times": [s.t for s in states[Branch.I]],
            "monitor": {
                "max_s": monitor.max_s, "max_d1": monitor.max_d1,
                "max_d2": monitor.max_d2, "max_d3": monitor.max_d3,
                "edge_magnitude": monitor.edge_magnitude,
            },
        }
        plot = _PLOTS["kdv"]

    elif cfg.mode == "solve-full":
        p, grid, traj = solve_full_pipeline(cfg)
        write_fields_csv(os.path.join(out, "fields_full.csv"), traj)
        manifest["results"] = {
            "times": [s.t for s in traj],
            "grid": {"n": grid.n, "length": grid.length},
            "energy": [weighted_energy(s, p) for s in traj],
        }
        plot = _PLOTS["fields"].format(name="fields_full.csv")

    elif cfg.mode == "assemble":
        p, d, _, fields = assemble_pipeline(cfg)
        write_fields_csv(os.path.join(out, "fields_ap.csv"), fields)
        manifest["results"] = {"times": [s.t for s in fields]}
        plot = _PLOTS["fields"].format(name="fields_ap.csv")

    elif cfg.mode == "compare":
        reports = compare_pipeline(cfg)
        write_report_csv(os.path.join(out, "compare.csv"), reports)
        manifest["results"] = {"reports": [vars(r) for r in reports]}
        plot = _PLOTS["compare"]

    elif cfg.mode == "sweep":
        eps_values = cfg.eps_list
        if len(eps_values) < 2:
            raise ConfigError("sweep mode needs run.eps_list with at least two values")
        result = eps_sweep(eps_values, lambda e: compare_pipeline(cfg, eps=e),
                           threads=cfg.threads)
        write_report_csv(os.path.join(out, "sweep.csv"), result.rows)
        manifest["results"] = {
            "eps_values": list(result.eps_values),
            "slopes": result.slopes,
            "monotone": result.monotone,
        }
        plot = _PLOTS["sweep"]

    elif cfg.mode == "diagnose-fast-mode":
        p, times, runs, report, baseline = fast_mode_pipeline(cfg)
        qc = [float(np.sum((p.a * s.u - p.b * s.v) ** 2) * s.grid.dx)
              for s in runs["consistent"]]
        qi = [float(np.sum((p.a * s.u - p.b * s.v) ** 2) * s.grid.dx)
              for s in runs["inconsistent"]]
        write_csv(os.path.join(out, "fastmode.csv"),
                  ("t", "fast_energy_consistent", "fast_energy_inconsistent"),
                  zip(times, qc, qi))
        ratio = (report.max_fast_energy / baseline.max_fast_energy
                 if baseline.max_fast_energy > 0 else float("inf"))
        manifest["results"] = {
            "max_fast_energy_consistent": baseline.max_fast_energy,
            "max_fast_energy_inconsistent": report.max_fast_energy,
            "energy_ratio": ratio,
            "dominant_omega": report.dominant_omega,
            "expected_omega": report.expected_omega,
            "frequency_rel_err": abs(report.dominant_omega - report.expected_omega)
            / report.expected_omega,
            "samples_per_period": report.samples_per_period,
        }
        plot = _PLOTS["fastmode"]

    else:  # pragma: no cover - config validation rejects unknown modes
        raise ConfigError(f"unhandled mode {cfg.mode!r}")

    manifest["wall_time_s"] = _time.perf_counter() - started
    atomic_write_text(os.path.join(out, "plot.gp"), plot)
    atomic_write_text(os.path.join(out, "manifest.json"),
                      json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest
