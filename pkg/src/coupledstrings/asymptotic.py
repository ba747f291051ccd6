"""Assembly of the leading-order approximation from the two profiles.

    u_ap(x, t) = S_I(zeta_1) + S_II(zeta_2),    zeta_1,2 = (x -+ k t)/eps,
    v_ap = (a/b) u_ap,

with S_I, S_II held on their own periodic zeta grids and evaluated at the
mapped points by trigonometric interpolation.  Time derivatives follow from
the chain rule,

    (u_ap)_t = [rhs_I](zeta_1) - (k/eps) S_I'(zeta_1)
             + [rhs_II](zeta_2) + (k/eps) S_II'(zeta_2),

where rhs_* is the profile equation's right-hand side, so the assembled state
carries consistent (u, u_t, v, v_t) fields comparable to the full solver's.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import CoverageError, InvalidParamsError
from .fluxexpr import FluxExpr
from .fullsys import FieldState
from .kdv import Branch, KdvState, rhs_physical
from .params import DerivedParams, PhysicalParams
from .spectral import PeriodicGrid, spectral_derivative, trig_interpolate


@dataclass(frozen=True)
class StretchedFrame:
    """Moving stretched coordinates zeta_1 = (x - k t)/eps, zeta_2 = (x + k t)/eps."""

    k: float
    eps: float

    def __post_init__(self):
        if self.k <= 0 or self.eps <= 0:
            raise InvalidParamsError(f"frame needs k > 0 and eps > 0, got {self.k!r}, {self.eps!r}")


def frame_from(p: PhysicalParams, d: DerivedParams) -> StretchedFrame:
    return StretchedFrame(k=d.k, eps=p.eps)


def map_zeta(frame: StretchedFrame, x, t: float):
    """Both stretched coordinates of the lab point (x, t)."""
    x = np.asarray(x, dtype=float)
    return (x - frame.k * t) / frame.eps, (x + frame.k * t) / frame.eps


def _check_coverage(zeta: np.ndarray, grid: PeriodicGrid, label: str):
    lo, hi = float(np.min(zeta)), float(np.max(zeta))
    if lo < grid.left or hi > grid.left + grid.length - grid.dx:
        raise CoverageError(
            f"mapped points [{lo:.6g}, {hi:.6g}] leave the {label} zeta box "
            f"[{grid.left:.6g}, {grid.left + grid.length:.6g}); widen it or shorten t"
        )


def assemble_ap(s1: KdvState, s2: KdvState, p: PhysicalParams, d: DerivedParams,
                f: FluxExpr | None, frame: StretchedFrame, x_grid: PeriodicGrid,
                t: float) -> FieldState:
    """Combine profile snapshots taken at time t into lab-frame fields."""
    if s1.branch is not Branch.I or s2.branch is not Branch.II:
        raise InvalidParamsError("assemble_ap expects (branch I, branch II) in that order")
    tol = 1e-9 * max(1.0, abs(t))
    if abs(s1.t - t) > tol or abs(s2.t - t) > tol:
        raise InvalidParamsError(
            f"profile times ({s1.t!r}, {s2.t!r}) do not match assembly time {t!r}"
        )
    zeta1, zeta2 = map_zeta(frame, x_grid.points, t)
    _check_coverage(zeta1, s1.grid, "branch I")
    _check_coverage(zeta2, s2.grid, "branch II")

    u1 = trig_interpolate(s1.s, s1.grid, zeta1)
    u2 = trig_interpolate(s2.s, s2.grid, zeta2)
    u = u1 + u2

    ke = frame.k / frame.eps
    dt1 = trig_interpolate(rhs_physical(s1, d, f), s1.grid, zeta1) \
        - ke * trig_interpolate(spectral_derivative(s1.s, s1.grid), s1.grid, zeta1)
    dt2 = trig_interpolate(rhs_physical(s2, d, f), s2.grid, zeta2) \
        + ke * trig_interpolate(spectral_derivative(s2.s, s2.grid), s2.grid, zeta2)
    ut = dt1 + dt2

    ratio = d.ab_ratio
    return FieldState(grid=x_grid, u=u, ut=ut, v=ratio * u, vt=ratio * ut, t=t)
