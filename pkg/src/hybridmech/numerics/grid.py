"""Rectangular grids and the sampled fields that live on them."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

DEFAULT_POINT_BUDGET = 2**24
AXIS_NAMES = ("q", "p", "x")
BOUNDARY_MODES = ("periodic", "clamped")


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class Axis:
    """One grid axis with cell-centred nodes ``min + (i + 1/2) * spacing``.

    Cell-centred nodes serve both boundary modes: for ``periodic`` they are a
    shifted periodic lattice, for ``clamped`` they are midpoint-rule nodes.
    """

    name: str
    min: float
    max: float
    points: int
    boundary: str = "periodic"

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise GridError(f"axis name must be one of {AXIS_NAMES}, got {self.name!r}")
        if self.boundary not in BOUNDARY_MODES:
            raise GridError(f"unknown boundary mode {self.boundary!r}")
        if int(self.points) != self.points or self.points < 8:
            raise GridError(f"axis {self.name}: need at least 8 points, got {self.points}")
        if not self.max > self.min:
            raise GridError(f"axis {self.name}: max must exceed min")

    @property
    def spacing(self) -> float:
        return (self.max - self.min) / self.points

    @property
    def length(self) -> float:
        return self.max - self.min

    @property
    def nodes(self) -> np.ndarray:
        return self.min + (np.arange(self.points) + 0.5) * self.spacing

    @property
    def wavenumbers(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.points, d=self.spacing)

    def scaled(self, factor: float) -> "Axis":
        """Same extent, ``factor`` times as many points (rounded to even)."""
        n = max(8, 2 * int(round(self.points * factor / 2)))
        return replace(self, points=n)

    def to_dict(self) -> dict:
        return {"name": self.name, "min": self.min, "max": self.max,
                "points": self.points, "boundary": self.boundary}


@dataclass(frozen=True)
class Grid:
    axes: tuple[Axis, ...]
    budget: int = DEFAULT_POINT_BUDGET

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise GridError(f"duplicate axis names {names}")
        if not self.axes:
            raise GridError("grid needs at least one axis")
        if self.size > self.budget:
            raise GridError(f"grid has {self.size} points, budget is {self.budget}")

    @classmethod
    def make(cls, *axes: Axis, budget: int = DEFAULT_POINT_BUDGET) -> "Grid":
        return cls(tuple(axes), budget=budget)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.points for a in self.axes)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def cell_volume(self) -> float:
        return float(np.prod([a.spacing for a in self.axes]))

    def has(self, name: str) -> bool:
        return name in self.names

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise GridError(f"grid {self.names} has no axis {name!r}") from None

    def axis(self, name: str) -> Axis:
        return self.axes[self.index(name)]

    def coord(self, name: str) -> np.ndarray:
        """Nodes of one axis shaped to broadcast against the full grid."""
        i = self.index(name)
        shape = [1] * len(self.axes)
        shape[i] = self.axes[i].points
        return self.axes[i].nodes.reshape(shape)

    def coords(self) -> dict[str, np.ndarray]:
        return {n: self.coord(n) for n in self.names}

    def sub(self, names: Iterable[str]) -> "Grid":
        return Grid(tuple(self.axis(n) for n in names), budget=self.budget)

    def scaled(self, factor: float) -> "Grid":
        return Grid(tuple(a.scaled(factor) for a in self.axes), budget=self.budget)

    def to_dict(self) -> dict:
        return {"axes": [a.to_dict() for a in self.axes]}

    @classmethod
    def from_dict(cls, d: dict) -> "Grid":
        return cls(tuple(Axis(**a) for a in d["axes"]))


class Field:
    """Immutable real or complex samples on a :class:`Grid`."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: Grid, values):
        arr = np.array(values, copy=True)
        if arr.dtype.kind not in "fc":
            arr = arr.astype(float)
        if arr.shape != grid.shape:
            arr = np.broadcast_to(arr, grid.shape).copy()
        if not np.all(np.isfinite(arr)):
            raise FloatingPointError("field contains non-finite values")
        arr.flags.writeable = False
        self.grid = grid
        self.values = arr

    @property
    def is_complex(self) -> bool:
        return self.values.dtype.kind == "c"

    def with_values(self, values) -> "Field":
        return Field(self.grid, values)

    def __repr__(self):
        kind = "ComplexField" if self.is_complex else "RealField"
        return f"{kind}(axes={self.grid.names}, shape={self.grid.shape})"

    # light arithmetic; results are new fields on the same grid
    def _other(self, other):
        if isinstance(other, Field):
            if other.grid != self.grid:
                raise GridError("fields live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return Field(self.grid, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Field(self.grid, self.values - self._other(other))

    def __rsub__(self, other):
        return Field(self.grid, self._other(other) - self.values)

    def __mul__(self, other):
        return Field(self.grid, self.values * self._other(other))

    __rmul__ = __mul__

    def __neg__(self):
        return Field(self.grid, -self.values)


RealField = Field
ComplexField = Field


def as_values(obj, grid: Grid | None = None) -> np.ndarray:
    """Raw array behind a field, array or scalar."""
    if isinstance(obj, Field):
        if grid is not None and obj.grid != grid:
            raise GridError("field lives on a different grid")
        return obj.values
    return np.asarray(obj)


def gaussian(grid: Grid, centre: Sequence[float], width: Sequence[float],
             names: Sequence[str] | None = None) -> Field:
    """Product Gaussian density, renormalised to unit discrete mass."""
    names = list(names or grid.names)
    vals = np.ones(grid.shape)
    for n, c, w in zip(names, centre, width):
        vals = vals * np.exp(-0.5 * ((grid.coord(n) - c) / w) ** 2)
    vals = vals / (vals.sum() * grid.cell_volume)
    return Field(grid, vals)
