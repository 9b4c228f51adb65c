"""External potentials V(q) for the classical sector."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics.calculus import derivative
from .numerics.grid import Field, Grid
from .numerics.poly import PolyPhaseFn, exact


@dataclass(frozen=True)
class Potential:
    """A potential in q, held either exactly as a polynomial or as a sampled field.

    Polynomials differentiate exactly; sampled fields use the grid derivative.
    """

    poly: PolyPhaseFn | None = None
    sampled: Field | None = None
    label: str = "custom"

    def __post_init__(self):
        if (self.poly is None) == (self.sampled is None):
            raise ValueError("give exactly one of poly or sampled")
        if self.poly is not None:
            for v in self.poly.variables:
                if v != "q" and self.poly.depends_on(v):
                    raise ValueError(f"potential may depend on q only, found {v!r}")

    @classmethod
    def none(cls) -> "Potential":
        return cls(poly=PolyPhaseFn({}, ("q", "p")), label="none")

    @classmethod
    def free_fall(cls, M: float, g: float) -> "Potential":
        return cls(poly=PolyPhaseFn.var("q") * (exact(M) * exact(g)), label="free_fall")

    @classmethod
    def harmonic(cls, M: float, omega: float) -> "Potential":
        return cls(poly=PolyPhaseFn.var("q") ** 2 * (exact(M) * exact(omega) ** 2 / 2),
                   label="harmonic")

    @classmethod
    def from_poly(cls, poly: PolyPhaseFn) -> "Potential":
        return cls(poly=poly, label="custom_poly")

    @property
    def is_zero(self) -> bool:
        return self.poly is not None and self.poly.is_zero()

    def _sampled_on(self, grid: Grid) -> np.ndarray:
        s = self.sampled
        if s.grid.names != ("q",):
            raise ValueError("sampled potential must live on a q-only grid")
        if s.grid.axis("q") != grid.axis("q"):
            raise ValueError("sampled potential grid does not match the q axis")
        shape = [1] * len(grid.names)
        shape[grid.index("q")] = s.grid.shape[0]
        return s.values.reshape(shape)

    def values(self, grid: Grid) -> np.ndarray:
        """V at the nodes, shaped to broadcast over ``grid``."""
        if self.poly is not None:
            return np.asarray(self.poly.evaluate(q=grid.coord("q")), dtype=float) \
                * np.ones([1] * len(grid.names))
        return self._sampled_on(grid)

    def gradient(self, grid: Grid) -> np.ndarray:
        """dV/dq at the nodes, shaped to broadcast over ``grid``."""
        if self.poly is not None:
            return np.asarray(self.poly.diff("q").evaluate(q=grid.coord("q")), dtype=float) \
                * np.ones([1] * len(grid.names))
        s = self.sampled
        d = derivative(s.values, s.grid, "q", 1)
        shape = [1] * len(grid.names)
        shape[grid.index("q")] = s.grid.shape[0]
        return d.reshape(shape)

    def __call__(self, qv):
        if self.poly is None:
            raise TypeError("sampled potential cannot be evaluated off-grid")
        return self.poly.evaluate(q=qv)

    def to_dict(self) -> dict:
        if self.poly is not None:
            return {"kind": self.label, "poly": str(self.poly)}
        return {"kind": "sampled"}


def as_potential(V) -> Potential:
    if V is None:
        return Potential.none()
    if isinstance(V, Potential):
        return V
    if isinstance(V, PolyPhaseFn):
        return Potential.from_poly(V)
    if isinstance(V, Field):
        return Potential(sampled=V)
    raise TypeError(f"cannot interpret {V!r} as a potential")

