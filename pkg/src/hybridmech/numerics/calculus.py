"""Quadrature and differentiation on :class:`~hybridmech.numerics.grid.Grid`.

Periodic axes default to spectral derivatives; clamped axes use 4th-order
central differences closed with 4th-order one-sided stencils.  Action-like
fields (S, sigma) are generally not periodic, so their callers ask for
``scheme="fd4"`` explicitly; that stencil never wraps around.
"""

from __future__ import annotations

import numpy as np

from .grid import Axis, Field, Grid

SCHEMES = ("spectral", "fd4")


def default_scheme(axis: Axis) -> str:
    return "spectral" if axis.boundary == "periodic" else "fd4"


def integrate(field: Field | np.ndarray, grid: Grid | None = None):
    """Quadrature over the whole grid (periodic trapezoid / midpoint rule)."""
    if isinstance(field, Field):
        grid, values = field.grid, field.values
    else:
        values = np.asarray(field)
    total = values.sum() * grid.cell_volume
    return total if np.iscomplexobj(values) else float(total)


def integrate_over(values: np.ndarray, grid: Grid, names) -> np.ndarray:
    """Integrate out the named axes, keeping the others (marginalisation)."""
    dims = tuple(sorted(grid.index(n) for n in names))
    scale = float(np.prod([grid.axes[d].spacing for d in dims]))
    return values.sum(axis=dims) * scale


def _spectral(values: np.ndarray, axis: Axis, dim: int, order: int) -> np.ndarray:
    k = axis.wavenumbers
    mult = (1j * k) ** order
    if order % 2 == 1 and axis.points % 2 == 0:
        mult[axis.points // 2] = 0.0
    shape = [1] * values.ndim
    shape[dim] = axis.points
    out = np.fft.ifft(np.fft.fft(values, axis=dim) * mult.reshape(shape), axis=dim)
    return out if np.iscomplexobj(values) else out.real


def _take(f, dim, idx):
    sl = [slice(None)] * f.ndim
    sl[dim] = idx
    return f[tuple(sl)]


def _fd4_first(f: np.ndarray, h: float, dim: int) -> np.ndarray:
    f = np.moveaxis(f, dim, 0)
    out = np.empty_like(f)
    out[2:-2] = (-f[4:] + 8.0 * f[3:-1] - 8.0 * f[1:-3] + f[:-4]) / (12.0 * h)
    out[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12.0 * h)
    out[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12.0 * h)
    out[-1] = (25 * f[-1] - 48 * f[-2] + 36 * f[-3] - 16 * f[-4] + 3 * f[-5]) / (12.0 * h)
    out[-2] = (3 * f[-1] + 10 * f[-2] - 18 * f[-3] + 6 * f[-4] - f[-5]) / (12.0 * h)
    return np.moveaxis(out, 0, dim)


def _fd4_second(f: np.ndarray, h: float, dim: int) -> np.ndarray:
    f = np.moveaxis(f, dim, 0)
    out = np.empty_like(f)
    h2 = 12.0 * h * h
    out[2:-2] = (-f[4:] + 16.0 * f[3:-1] - 30.0 * f[2:-2] + 16.0 * f[1:-3] - f[:-4]) / h2
    out[0] = (45 * f[0] - 154 * f[1] + 214 * f[2] - 156 * f[3] + 61 * f[4] - 10 * f[5]) / h2
    out[1] = (10 * f[0] - 15 * f[1] - 4 * f[2] + 14 * f[3] - 6 * f[4] + f[5]) / h2
    out[-1] = (45 * f[-1] - 154 * f[-2] + 214 * f[-3] - 156 * f[-4] + 61 * f[-5] - 10 * f[-6]) / h2
    out[-2] = (10 * f[-1] - 15 * f[-2] - 4 * f[-3] + 14 * f[-4] - 6 * f[-5] + f[-6]) / h2
    return np.moveaxis(out, 0, dim)


def derivative(values: np.ndarray, grid: Grid, name: str, order: int = 1,
               scheme: str | None = None) -> np.ndarray:
    """Array-level partial derivative along axis ``name``."""
    dim = grid.index(name)
    axis = grid.axes[dim]
    scheme = scheme or default_scheme(axis)
    if scheme == "spectral":
        return _spectral(values, axis, dim, order)
    if scheme != "fd4":
        raise ValueError(f"unknown derivative scheme {scheme!r}")
    h = axis.spacing
    if order == 1:
        return _fd4_first(values, h, dim)
    if order == 2:
        return _fd4_second(values, h, dim)
    out = values
    for _ in range(order // 2):
        out = _fd4_second(out, h, dim)
    if order % 2:
        out = _fd4_first(out, h, dim)
    return out


_SIXTH = np.array([1.0, -6.0, 15.0, -20.0, 15.0, -6.0, 1.0])


def sixth_difference(values: np.ndarray, grid: Grid, name: str) -> np.ndarray:
    """Undivided 6th difference along ``name`` on interior nodes, zero on the
    three nodes at each end.  Annihilates polynomials of degree <= 5; used as
    Kreiss-Oliger damping for non-periodic transport."""
    dim = grid.index(name)
    f = np.moveaxis(values, dim, 0)
    n = f.shape[0]
    out = np.zeros_like(f)
    if n > 6:
        out[3:-3] = sum(c * f[k:n - 6 + k] for k, c in enumerate(_SIXTH))
    return np.moveaxis(out, 0, dim)


def partial(field: Field, name: str, order: int = 1, scheme: str | None = None) -> Field:
    """Partial derivative of a field along the named axis."""
    if not np.all(np.isfinite(field.values)):
        raise FloatingPointError("cannot differentiate a non-finite field")
    return Field(field.grid, derivative(field.values, field.grid, name, order, scheme))


def max_wavenumber(axis: Axis, scheme: str | None = None) -> float:
    """Largest effective first-derivative eigenvalue magnitude (for CFL bounds)."""
    scheme = scheme or default_scheme(axis)
    if scheme == "spectral":
        return np.pi / axis.spacing
    # max over theta of |(8 sin t - sin 2t)/6| / h
    return 1.3722 / axis.spacing


def l1_distance(a: Field, b: Field) -> float:
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")
    return integrate(np.abs(a.values - b.values), a.grid)
