"""Error measurement, residual checks, convergence fits, and monitors."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .exceptions import (
    GridMismatchError,
    InsufficientSnapshotsError,
    InvalidParamsError,
    SimulationError,
    UndersampledTrajectoryError,
)
from .fluxexpr import FluxExpr
from .fullsys import FieldState, fast_frequency
from .kdv import KdvState
from .params import PhysicalParams
from .spectral import spectral_derivative


@dataclass(frozen=True)
class ErrorReport:
    eps: float
    t: float
    sup_u: float
    sup_v: float
    l2_u: float
    l2_v: float
    pde_residual_sup: float | None = None
    monitors: dict = field(default_factory=dict)


def compare_fields(full: FieldState, ap: FieldState, eps: float = float("nan")) -> ErrorReport:
    """Sup and L2 differences of (u, v) between two states on one grid."""
    if full.grid != ap.grid:
        raise GridMismatchError(f"grids differ: {full.grid} vs {ap.grid}")
    if abs(full.t - ap.t) > 1e-9 * max(1.0, abs(full.t)):
        raise GridMismatchError(f"snapshot times differ: {full.t!r} vs {ap.t!r}")
    dx = full.grid.dx
    du = full.u - ap.u
    dv = full.v - ap.v
    return ErrorReport(
        eps=eps,
        t=full.t,
        sup_u=float(np.max(np.abs(du))),
        sup_v=float(np.max(np.abs(dv))),
        l2_u=float(np.sqrt(np.sum(du**2) * dx)),
        l2_v=float(np.sqrt(np.sum(dv**2) * dx)),
    )


@dataclass(frozen=True)
class ResidualSample:
    t: float
    defect_u: float
    defect_v: float


def _uniform_spacing(times: np.ndarray, what: str) -> float:
    gaps = np.diff(times)
    if np.any(gaps <= 0) or abs(gaps.max() - gaps.min()) > 1e-6 * gaps.max():
        raise InvalidParamsError(f"{what} requires uniformly spaced snapshot times")
    return float(gaps.mean())


def pde_residual(traj: Sequence[FieldState], p: PhysicalParams,
                 f: FluxExpr | None) -> list[ResidualSample]:
    """Sup-norm defect of both equations at interior snapshots.

    u_tt, v_tt come from centered second differences of the snapshots (spacing
    delta, truncation O(delta^2)); x-derivatives are spectral.  The defects are

        r_u = eps^3 (u_tt - k1^2 u_xx) + a u - b v - eps^2 f(u, v)
        r_v = eps^3 (v_tt - k2^2 v_xx) - a u + b v + eps^2 f(u, v)
    """
    if len(traj) < 3:
        raise InsufficientSnapshotsError(f"need at least 3 snapshots, got {len(traj)}")
    grid = traj[0].grid
    for snap in traj[1:]:
        if snap.grid != grid:
            raise GridMismatchError("residual snapshots must share one grid")
    times = np.array([snap.t for snap in traj])
    delta = _uniform_spacing(times, "pde_residual")

    e3 = p.eps**3
    e2 = p.eps**2
    out = []
    for i in range(1, len(traj) - 1):
        prev, here, nxt = traj[i - 1], traj[i], traj[i + 1]
        utt = (nxt.u - 2.0 * here.u + prev.u) / delta**2
        vtt = (nxt.v - 2.0 * here.v + prev.v) / delta**2
        uxx = spectral_derivative(here.u, grid, 2)
        vxx = spectral_derivative(here.v, grid, 2)
        fv = f.eval(here.u, here.v) if f is not None else 0.0
        ru = e3 * (utt - p.k1**2 * uxx) + p.a * here.u - p.b * here.v - e2 * fv
        rv = e3 * (vtt - p.k2**2 * vxx) - p.a * here.u + p.b * here.v + e2 * fv
        out.append(ResidualSample(
            t=here.t,
            defect_u=float(np.max(np.abs(ru))),
            defect_v=float(np.max(np.abs(rv))),
        ))
    return out


def fit_loglog_slope(eps_values: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of log(error) against log(eps)."""
    eps_arr = np.asarray(eps_values, dtype=float)
    err = np.asarray(errors, dtype=float)
    if eps_arr.size != err.size or eps_arr.size < 2:
        raise InvalidParamsError("need matching eps/error sequences of length >= 2")
    if np.any(eps_arr <= 0) or np.any(err <= 0):
        raise InvalidParamsError("slope fit needs positive eps and errors")
    return float(np.polyfit(np.log(eps_arr), np.log(err), 1)[0])


@dataclass(frozen=True)
class SweepResult:
    eps_values: tuple
    rows: tuple  # ErrorReport, ordered by eps then time
    slopes: dict = field(default_factory=dict)
    monotone: dict = field(default_factory=dict)

    def final_rows(self) -> list[ErrorReport]:
        last_t = max(r.t for r in self.rows)
        return [r for r in self.rows if r.t == last_t]


# sup_R is the remainder's sup norm over both fields
_METRICS = {
    "sup_u": lambda r: r.sup_u,
    "sup_v": lambda r: r.sup_v,
    "sup_R": lambda r: max(r.sup_u, r.sup_v),
    "l2_u": lambda r: r.l2_u,
    "l2_v": lambda r: r.l2_v,
    "pde_residual_sup": lambda r: r.pde_residual_sup,
}


def _tagged(runner: Callable[[float], Sequence[ErrorReport]], eps: float):
    try:
        return list(runner(eps))
    except SimulationError as exc:
        exc.message = f"{exc.message} (eps={eps:g})"
        exc.args = (exc.message,)
        raise


def eps_sweep(eps_values: Sequence[float], runner: Callable[[float], Sequence[ErrorReport]],
              threads: int = 1) -> SweepResult:
    """Run `runner` per eps and fit log-log slopes of the final-time errors.

    eps_values must be strictly decreasing, at least three of them.  Rows keep
    (eps, t) keys, so parallel execution cannot scramble their meaning; with
    threads > 1 the runners execute concurrently but results are collected in
    eps order.  Runner failures propagate with the failing eps tagged.
    """
    eps_values = tuple(float(e) for e in eps_values)
    if len(eps_values) < 3:
        raise InvalidParamsError("a sweep needs at least three eps values")
    if any(x <= y for x, y in zip(eps_values, eps_values[1:])):
        raise InvalidParamsError("eps values must be strictly decreasing")
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_eps = list(pool.map(lambda e: _tagged(runner, e), eps_values))
    else:
        per_eps = [_tagged(runner, e) for e in eps_values]

    rows = tuple(r for reports in per_eps for r in reports)
    finals = [reports[-1] for reports in per_eps]
    slopes, monotone = {}, {}
    for metric, get in _METRICS.items():
        vals = [get(r) for r in finals]
        if any(v is None for v in vals):
            continue
        monotone[metric] = all(x > y for x, y in zip(vals, vals[1:]))
        if all(v > 0 for v in vals):
            slopes[metric] = fit_loglog_slope(eps_values, vals)
    return SweepResult(eps_values=eps_values, rows=rows, slopes=slopes, monotone=monotone)


@dataclass(frozen=True)
class FastModeReport:
    max_fast_energy: float
    dominant_omega: float
    expected_omega: float
    samples_per_period: float
    probe_index: int


def fast_mode_diagnostic(traj: Sequence[FieldState], p: PhysicalParams,
                         probe_index: int | None = None) -> FastModeReport:
    """Track q = a u - b v: its energy and its dominant oscillation frequency.

    The frequency comes from an FFT of the raw probe signal q(x*, t) (not of
    q^2, which would double it); x* defaults to the point of largest time
    variance of q.
    """
    if len(traj) < 16:
        raise InsufficientSnapshotsError(
            f"need at least 16 snapshots to resolve a frequency, got {len(traj)}"
        )
    times = np.array([snap.t for snap in traj])
    spacing = _uniform_spacing(times, "fast_mode_diagnostic")
    expected = fast_frequency(p)
    period = 2.0 * np.pi / expected
    samples_per_period = period / spacing
    if samples_per_period < 8.0:
        raise UndersampledTrajectoryError(
            f"{samples_per_period:.2f} samples per fast period, need >= 8"
        )

    q = np.stack([p.a * snap.u - p.b * snap.v for snap in traj])
    dx = traj[0].grid.dx
    max_energy = float(np.max(np.sum(q**2, axis=1) * dx))
    if probe_index is None:
        probe_index = int(np.argmax(np.var(q, axis=0)))
    signal = q[:, probe_index] - np.mean(q[:, probe_index])
    window = np.hanning(len(signal))
    power = np.abs(np.fft.rfft(signal * window))
    freqs = 2.0 * np.pi * np.fft.rfftfreq(len(signal), d=spacing)
    dominant = float(freqs[1 + int(np.argmax(power[1:]))])
    return FastModeReport(
        max_fast_energy=max_energy,
        dominant_omega=dominant,
        expected_omega=expected,
        samples_per_period=float(samples_per_period),
        probe_index=probe_index,
    )


@dataclass(frozen=True)
class BoundReport:
    max_s: float
    max_d1: float
    max_d2: float
    max_d3: float
    edge_magnitude: float


def condition_monitor(state: KdvState) -> BoundReport:
    """Certificate quantities behind the residual bound: sup norms of the
    profile and its first three derivatives, plus the boundary-cell size."""
    g = state.grid
    return BoundReport(
        max_s=float(np.max(np.abs(state.s))),
        max_d1=float(np.max(np.abs(spectral_derivative(state.s, g, 1)))),
        max_d2=float(np.max(np.abs(spectral_derivative(state.s, g, 2)))),
        max_d3=float(np.max(np.abs(spectral_derivative(state.s, g, 3)))),
        edge_magnitude=float(max(abs(state.s[0]), abs(state.s[-1]))),
    )
