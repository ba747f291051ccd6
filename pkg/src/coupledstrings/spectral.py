"""Periodic grids and the Fourier helpers shared by both solvers."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import InvalidParamsError


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform periodic grid: points left + j*dx, j = 0..n-1, period `length`."""

    n: int
    length: float
    left: float

    def __post_init__(self):
        if self.n < 4 or self.length <= 0 or not np.isfinite(self.length):
            raise InvalidParamsError(f"bad grid (n={self.n}, length={self.length!r})")

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def points(self) -> np.ndarray:
        return self.left + self.dx * np.arange(self.n)

    def wavenumbers(self) -> np.ndarray:
        # rfft layout, kappa_m = 2*pi*m/length
        return 2.0 * np.pi * np.fft.rfftfreq(self.n, d=self.dx)


def odd_wavenumbers(grid: PeriodicGrid) -> np.ndarray:
    """Wavenumbers with the Nyquist mode zeroed; use for odd-order derivatives."""
    kap = grid.wavenumbers()
    if grid.n % 2 == 0:
        kap = kap.copy()
        kap[-1] = 0.0
    return kap


def spectral_derivative(values: np.ndarray, grid: PeriodicGrid, order: int = 1) -> np.ndarray:
    kap = odd_wavenumbers(grid) if order % 2 else grid.wavenumbers()
    return np.fft.irfft((1j * kap) ** order * np.fft.rfft(values), grid.n)


@lru_cache(maxsize=64)
def _dealias_mask(n: int) -> np.ndarray:
    # 2/3 rule for quadratic products: keep |m| <= n//3
    m = np.arange(n // 2 + 1)
    mask = (m <= n // 3).astype(float)
    mask.flags.writeable = False
    return mask


def dealias_mask(grid: PeriodicGrid) -> np.ndarray:
    return _dealias_mask(grid.n)


def trig_interpolate(values: np.ndarray, grid: PeriodicGrid, targets: np.ndarray,
                     chunk: int = 2048) -> np.ndarray:
    """Evaluate the trigonometric interpolant of grid samples at arbitrary points.

    Exact (to roundoff) at the grid points; periodic continuation elsewhere.
    """
    coeffs = np.fft.rfft(values)
    kap = grid.wavenumbers()
    weights = np.full(coeffs.shape, 2.0 / grid.n)
    weights[0] = 1.0 / grid.n
    if grid.n % 2 == 0:
        weights[-1] = 1.0 / grid.n
    wc = weights * coeffs
    targets = np.asarray(targets, dtype=float)
    flat = targets.ravel()
    out = np.empty(flat.shape, dtype=float)
    for start in range(0, flat.size, chunk):
        block = flat[start:start + chunk, None] - grid.left
        out[start:start + chunk] = (np.exp(1j * block * kap[None, :]) * wc[None, :]).real.sum(axis=1)
    return out.reshape(targets.shape)


def boundary_fraction(values: np.ndarray, frac: float = 0.05) -> float:
    """Share of sum(values^2) carried by the cells within frac*length of either edge."""
    n = values.shape[-1]
    band = max(1, int(np.ceil(frac * n)))
    total = float(np.sum(values**2))
    if total == 0.0:
        return 0.0
    edge = float(np.sum(values[..., :band] ** 2) + np.sum(values[..., -band:] ** 2))
    return edge / total
