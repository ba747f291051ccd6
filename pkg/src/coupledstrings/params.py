"""Model parameters and the derived constants of the two-wave reduction.

The underlying system couples two strings through a stiff linear exchange
term and a weak nonlinear one:

    eps^3 (u_tt - k1^2 u_xx) = -a u + b v + eps^2 f(u, v)
    eps^3 (v_tt - k2^2 v_xx) =  a u - b v - eps^2 f(u, v)

with a, b, k1, k2 > 0 and 0 < eps << 1.  Slow ripples of the exchange-free
manifold v = (a/b) u split into two counter-propagating profiles; each obeys
a generalized KdV equation in a frame moving at speed k,

    S_t = +- cap_k S_zzz -+ (h(S))_z,      h(S) = flux_scale * f(S, (a/b) S),

where cap_k and flux_scale are algebraic in (a, b, k1, k2, k).  Two speed
conventions are provided:

* ``effective_speed``: the weighted mean (b k1 + a k2)/(a + b).
* ``slow_wave_speed``: sqrt((b k1^2 + a k2^2)/(a + b)), the small-wavenumber
  limit of the slow branch of the dispersion relation.  This is the speed at
  which hump solutions of the full system are observed to travel (see the
  full-solver tests), and is the default for the assembly pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidParamsError, OutOfDomainError
from .fluxexpr import FluxExpr

_POSITIVE_FIELDS = ("eps", "k1", "k2", "a", "b", "omega_u", "omega_v")


@dataclass(frozen=True)
class PhysicalParams:
    """Raw model parameters plus the box Omega = [-omega_u, omega_u] x [-omega_v, omega_v]
    on which the nonlinearity is trusted."""

    eps: float
    k1: float
    k2: float
    a: float
    b: float
    omega_u: float = 10.0
    omega_v: float = 10.0

    def __post_init__(self):
        for name in _POSITIVE_FIELDS:
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise InvalidParamsError(f"{name} must be finite and positive, got {value!r}")


@dataclass(frozen=True)
class DerivedParams:
    """Constants of the reduced two-profile description.

    ab_ratio and omega_u are carried along so the KdV layer never needs the
    raw PhysicalParams; degenerate marks k1 == k2, where cap_k = 0 and the
    profile equations lose their dispersive term.
    """

    k: float
    cap_k: float
    flux_scale: float
    ab_ratio: float
    omega_u: float
    degenerate: bool = False


def effective_speed(p: PhysicalParams) -> float:
    """Weighted-mean transport speed (b k1 + a k2)/(a + b)."""
    return (p.b * p.k1 + p.a * p.k2) / (p.a + p.b)


def slow_wave_speed(p: PhysicalParams) -> float:
    """Long-wave limit of the slow dispersion branch, sqrt((b k1^2 + a k2^2)/(a + b))."""
    return float(np.sqrt((p.b * p.k1**2 + p.a * p.k2**2) / (p.a + p.b)))


def dispersion_coefficient(p: PhysicalParams, k: float) -> float:
    """cap_k = (k^2 - k2^2)(k^2 - k1^2) / (2 k (a + b))."""
    if not np.isfinite(k) or k <= 0:
        raise InvalidParamsError(f"speed k must be finite and positive, got {k!r}")
    return (k**2 - p.k2**2) * (k**2 - p.k1**2) / (2.0 * k * (p.a + p.b))


def flux_scale_value(p: PhysicalParams, k: float) -> float:
    """Prefactor of the profile flux: -b (k^2 - k2^2) / (2 k (a + b))."""
    if not np.isfinite(k) or k <= 0:
        raise InvalidParamsError(f"speed k must be finite and positive, got {k!r}")
    return -p.b * (k**2 - p.k2**2) / (2.0 * k * (p.a + p.b))


def derive_params(p: PhysicalParams, speed: str = "dispersion") -> DerivedParams:
    """Bundle the derived constants for a chosen speed convention.

    speed: "dispersion" (default, matches observed propagation) or "mean".
    """
    if speed == "dispersion":
        k = slow_wave_speed(p)
    elif speed == "mean":
        k = effective_speed(p)
    else:
        raise InvalidParamsError(f"unknown speed convention {speed!r}")
    return DerivedParams(
        k=k,
        cap_k=dispersion_coefficient(p, k),
        flux_scale=flux_scale_value(p, k),
        ab_ratio=p.a / p.b,
        omega_u=p.omega_u,
        degenerate=(p.k1 == p.k2),
    )


def flux_h_values(d: DerivedParams, f: FluxExpr | None, s):
    """h(S) = flux_scale * f(S, (a/b) S) without domain checks (solver core)."""
    if f is None:
        return np.zeros_like(np.asarray(s, dtype=float))
    s = np.asarray(s, dtype=float)
    return d.flux_scale * f.eval(s, d.ab_ratio * s)


def flux_h(p: PhysicalParams, d: DerivedParams, f: FluxExpr | None, s):
    """Checked flux evaluation; s (scalar or array) must satisfy |s| <= omega_u
    and |(a/b) s| <= omega_v."""
    arr = np.asarray(s, dtype=float)
    m = float(np.max(np.abs(arr))) if arr.size else 0.0
    if m > p.omega_u or m * d.ab_ratio > p.omega_v:
        raise OutOfDomainError(
            f"flux argument max |s| = {m:.6g} leaves the trusted box "
            f"(omega_u={p.omega_u}, omega_v={p.omega_v})"
        )
    return flux_h_values(d, f, s)


def flux_slope_limit(d: DerivedParams, f: FluxExpr | None, lo: float, hi: float,
                     samples: int = 129) -> float:
    """max |h'(s)| over [lo, hi], estimated from divided differences.

    Used for the nonlinear CFL bound; no derivatives of f are assumed.
    """
    if f is None:
        return 0.0
    if hi < lo:
        lo, hi = hi, lo
    pad = max(1e-6, 0.01 * max(abs(lo), abs(hi)))
    grid = np.linspace(lo - pad, hi + pad, samples)
    h = flux_h_values(d, f, grid)
    return float(np.max(np.abs(np.diff(h) / np.diff(grid))))
