"""Statistical ensembles on configuration space: a density P(q) with action S(q).

Dynamics is the coupled Hamilton-Jacobi and continuity system

    dS/dt = -(dS/dq)^2 / 2M - V
    dP/dt = -d/dq (P dS/dq / M)

integrated with method-of-lines RK4.  Observables are O_F = int P F(q, dS/dq).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CausticError, NormalizationDrift, StabilityError
from .numerics.calculus import derivative, max_wavenumber
from .numerics.grid import Field, Grid, gaussian
from .numerics.poly import PolyPhaseFn, sample
from .numerics.timestep import RK4_ADVECTION_LIMIT, rk4_step
from .potentials import Potential, as_potential

POSITIVITY_FLOOR = 1e-12
NORM_TOL = 1e-8
NORM_ABORT = 1e-6
SUPPORT_CUTOFF = 1e-8


def _dS(S: np.ndarray, grid: Grid, order: int = 1) -> np.ndarray:
    # actions are not periodic even on periodic grids; never wrap
    return derivative(S, grid, "q", order, scheme="fd4")


@dataclass(frozen=True)
class ConfigEnsemble:
    P: Field
    S: Field
    M: float = 1.0

    def __post_init__(self):
        if self.P.grid != self.S.grid:
            raise ValueError("P and S must share a grid")
        if self.P.grid.names != ("q",):
            raise ValueError("configuration ensembles live on a q-only grid")
        if self.M <= 0:
            raise ValueError("mass must be positive")

    @property
    def grid(self) -> Grid:
        return self.P.grid

    @property
    def norm(self) -> float:
        return float(self.P.values.sum() * self.grid.cell_volume)

    @property
    def velocity(self) -> np.ndarray:
        return _dS(self.S.values, self.grid) / self.M

    def validate(self, norm_tol: float = NORM_TOL) -> "ConfigEnsemble":
        if self.P.values.min() < -POSITIVITY_FLOOR:
            raise ValueError(f"P has negative values down to {self.P.values.min():.3e}")
        if abs(self.norm - 1.0) > norm_tol:
            raise ValueError(f"P is not normalized (integral {self.norm:.12f})")
        return self

    @classmethod
    def gaussian(cls, grid: Grid, q0: float, width: float, S: PolyPhaseFn | None = None,
                 M: float = 1.0) -> "ConfigEnsemble":
        P = gaussian(grid, [q0], [width])
        S = sample(S, grid) if S is not None else Field(grid, np.zeros(grid.shape))
        return cls(P, S, M)


# -- evolution -------------------------------------------------------------
def stable_dt(ens: ConfigEnsemble) -> float:
    """Largest step allowed by the advection bound dt * max|u| * k_max <= limit."""
    kmax = max_wavenumber(ens.grid.axis("q"))
    umax = float(np.abs(ens.velocity).max())
    return np.inf if umax == 0 else RK4_ADVECTION_LIMIT / (umax * kmax)


def _check_caustic(S: np.ndarray, P: np.ndarray, grid: Grid, M: float, dt: float,
                   threshold: float | None, step: int):
    support = P > SUPPORT_CUTOFF * P.max()
    curv = _dS(S, grid, 2)[support]
    if curv.size == 0:
        return
    # focusing rate -S''/M; a caustic forms within ~M/|S''| time units
    limit = threshold if threshold is not None else 0.25 * M / dt
    worst = float(-curv.min())
    if worst > limit:
        raise CausticError("characteristics are crossing: the action is about to become multivalued",
                           step=step, max_neg_curvature=worst, threshold=limit)


def evolve_ecs(ens: ConfigEnsemble, V=None, dt: float = 1e-3, steps: int = 1,
               caustic_threshold: float | None = None) -> ConfigEnsemble:
    """Advance (P, S) by ``steps`` RK4 steps of size ``dt``."""
    V = as_potential(V)
    grid = ens.grid
    M = ens.M
    Vv = V.values(grid)
    kmax = max_wavenumber(grid.axis("q"))
    m0 = ens.norm

    def rhs(state):
        P, S = state
        Sq = _dS(S, grid)
        return -derivative(P * Sq / M, grid, "q"), -0.5 * Sq**2 / M - Vv

    P, S = ens.P.values, ens.S.values
    for n in range(steps):
        umax = float(np.abs(_dS(S, grid)).max()) / M
        if dt * umax * kmax > RK4_ADVECTION_LIMIT:
            raise StabilityError("time step exceeds the advection bound", step=n, dt=dt,
                                 max_velocity=umax, k_max=kmax,
                                 dt_max=RK4_ADVECTION_LIMIT / (umax * kmax))
        _check_caustic(S, P, grid, M, dt, caustic_threshold, n)
        P, S = rk4_step((P, S), rhs, dt)
        drift = abs(P.sum() * grid.cell_volume - m0)
        if not np.isfinite(drift) or drift > NORM_ABORT:
            raise NormalizationDrift("total probability drifted", step=n, drift=float(drift))
    return ConfigEnsemble(Field(grid, P), Field(grid, S), M)


# -- observables and functional algebra -------------------------------------
def _F_on(F: PolyPhaseFn, ens: ConfigEnsemble) -> np.ndarray:
    qv = ens.grid.coord("q")
    pv = _dS(ens.S.values, ens.grid)
    return np.broadcast_to(F.evaluate(q=qv, p=pv), ens.grid.shape)


def observable_ecs(ens: ConfigEnsemble, F: PolyPhaseFn) -> float:
    """int P F(q, dS/dq) dq."""
    return float(np.sum(ens.P.values * _F_on(F, ens)) * ens.grid.cell_volume)


def ensemble_hamiltonian(ens: ConfigEnsemble, V=None) -> float:
    V = as_potential(V)
    u = _dS(ens.S.values, ens.grid)
    dens = 0.5 * u**2 / ens.M + V.values(ens.grid)
    return float(np.sum(ens.P.values * dens) * ens.grid.cell_volume)


def functional_derivatives_ecs(ens: ConfigEnsemble, F: PolyPhaseFn) -> tuple[Field, Field]:
    """(dO/dP, dO/dS) = (F(q,S'), -d/dq [P dF/dp(q,S')])."""
    grid = ens.grid
    dP = _F_on(F, ens)
    flux = ens.P.values * _F_on(F.diff("p"), ens)
    dS = -derivative(flux, grid, "q")
    return Field(grid, dP), Field(grid, dS)


def bracket_ecs(F: PolyPhaseFn, G: PolyPhaseFn, ens: ConfigEnsemble) -> float:
    """Functional Poisson bracket {O_F, O_G} on (P, S)."""
    fP, fS = functional_derivatives_ecs(ens, F)
    gP, gS = functional_derivatives_ecs(ens, G)
    integrand = fP.values * gS.values - fS.values * gP.values
    return float(integrand.sum() * ens.grid.cell_volume)


def bump_functional_derivatives(ens: ConfigEnsemble, F: PolyPhaseFn, centre: float,
                                width: float | None = None, eps: float = 1e-4) -> tuple[float, float]:
    """Central-difference response of O_F to a smooth bump added to P and to S.

    Returns the bump-weighted functional derivatives
    ``(int dO/dP b, int dO/dS b)`` estimated as ``[O(+eps b) - O(-eps b)] / 2 eps``.
    """
    grid = ens.grid
    width = width or 3 * grid.axis("q").spacing
    b = np.exp(-0.5 * ((grid.coord("q") - centre) / width) ** 2)

    def O(P, S):
        return observable_ecs(ConfigEnsemble(Field(grid, P), Field(grid, S), ens.M), F)

    P, S = ens.P.values, ens.S.values
    dP = (O(P + eps * b, S) - O(P - eps * b, S)) / (2 * eps)
    dS = (O(P, S + eps * b) - O(P, S - eps * b)) / (2 * eps)
    return dP, dS


def bump_weighted(field: Field, centre: float, width: float | None = None) -> float:
    grid = field.grid
    width = width or 3 * grid.axis("q").spacing
    b = np.exp(-0.5 * ((grid.coord("q") - centre) / width) ** 2)
    return float(np.sum(field.values * b) * grid.cell_volume)
