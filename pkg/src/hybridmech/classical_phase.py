"""Statistical ensembles on phase space: a density rho(q,p) with action sigma(q,p).

Both fields are transported along the Hamiltonian flow:

    d rho/dt   = -(p/M) d rho/dq + V'(q) d rho/dp
    d sigma/dt = -(p/M) d sigma/dq + V'(q) d sigma/dp + p^2/2M - V

The equations are uncoupled, so each has its own integrator and
:func:`evolve_liouville` simply runs both.  Observables use the full form
O_F = int rho [(F - p dF/dp) - {F, sigma}]; the reduced form int rho F
agrees with it once sigma satisfies rho (dsigma/dq - p) = 0, rho dsigma/dp = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .classical_config import ConfigEnsemble
from .errors import NegativeDensity, NormalizationDrift, StabilityError
from .numerics.calculus import derivative, max_wavenumber, sixth_difference
from .numerics.grid import Axis, Field, Grid, gaussian
from .numerics.poly import PolyPhaseFn, exact, poisson_bracket
from .numerics.timestep import RK4_ADVECTION_LIMIT, rk4_step
from .potentials import as_potential

NORM_TOL = 1e-8
NEGATIVE_ABORT = 1e-6
BOUNDARY_DECAY = 1e-8
# Nyquist damping per step and axis for sigma.  The one-sided closures feed
# growing edge modes into the domain under rotation without it.
SIGMA_DAMPING = 1.0


class BoundaryDecayError(ValueError):
    """The density is not negligible on the edge of the grid."""


def _ds(values, grid, name, order=1):
    return derivative(values, grid, name, order, scheme="fd4")


@dataclass(frozen=True)
class PhaseEnsemble:
    rho: Field
    sigma: Field
    M: float = 1.0

    def __post_init__(self):
        if self.rho.grid != self.sigma.grid:
            raise ValueError("rho and sigma must share a grid")
        if set(self.rho.grid.names) != {"q", "p"} or len(self.rho.grid.names) != 2:
            raise ValueError("phase ensembles live on a (q, p) grid")
        if self.M <= 0:
            raise ValueError("mass must be positive")

    @property
    def grid(self) -> Grid:
        return self.rho.grid

    @property
    def norm(self) -> float:
        return float(self.rho.values.sum() * self.grid.cell_volume)

    def validate(self, norm_tol: float = NORM_TOL) -> "PhaseEnsemble":
        if self.rho.values.min() < -1e-12:
            raise ValueError("rho has negative values")
        if abs(self.norm - 1) > norm_tol:
            raise ValueError(f"rho is not normalized (integral {self.norm:.12f})")
        return self

    @classmethod
    def gaussian(cls, grid: Grid, centre, width, sigma: PolyPhaseFn | None = None,
                 M: float = 1.0) -> "PhaseEnsemble":
        rho = gaussian(grid, centre, width, ("q", "p"))
        sig = _sample_qp(sigma, grid) if sigma is not None else Field(grid, np.zeros(grid.shape))
        return cls(rho, sig, M)


def _sample_qp(F: PolyPhaseFn, grid: Grid) -> Field:
    vals = F.evaluate(q=grid.coord("q"), p=grid.coord("p"))
    return Field(grid, np.broadcast_to(vals, grid.shape))


def phase_grid(q: Axis, p: Axis) -> Grid:
    return Grid.make(q, p)


# -- evolution -------------------------------------------------------------
def _advection_bound(grid: Grid, M: float, force: np.ndarray, scheme: str | None) -> float:
    pmax = float(np.abs(grid.axis("p").nodes).max())
    kq = max_wavenumber(grid.axis("q"), scheme)
    kp = max_wavenumber(grid.axis("p"), scheme)
    return pmax / M * kq + float(np.abs(force).max()) * kp


def stable_dt(grid: Grid, M: float, V=None, scheme: str | None = None) -> float:
    rate = _advection_bound(grid, M, as_potential(V).gradient(grid), scheme)
    return np.inf if rate == 0 else RK4_ADVECTION_LIMIT / rate


def _check_stability(grid, M, force, dt, scheme):
    rate = _advection_bound(grid, M, force, scheme)
    if dt * rate > RK4_ADVECTION_LIMIT:
        raise StabilityError("time step exceeds the phase-space advection bound", dt=dt,
                             dt_max=RK4_ADVECTION_LIMIT / rate)


def evolve_density(rho: Field, V=None, M: float = 1.0, dt: float = 1e-3, steps: int = 1) -> Field:
    """Liouville transport of rho; spectral on periodic axes, fd4 on clamped ones."""
    V = as_potential(V)
    grid = rho.grid
    force = V.gradient(grid)
    pv = grid.coord("p")
    _check_stability(grid, M, force, dt, None)

    def rhs(state):
        (r,) = state
        return (-(pv / M) * derivative(r, grid, "q") + force * derivative(r, grid, "p"),)

    r = rho.values
    m0 = r.sum() * grid.cell_volume
    for n in range(steps):
        (r,) = rk4_step((r,), rhs, dt)
        rmax = r.max()
        if r.min() < -NEGATIVE_ABORT * rmax:
            raise NegativeDensity("density developed a negative excursion", step=n,
                                  min=float(r.min()), max=float(rmax))
        drift = abs(r.sum() * grid.cell_volume - m0)
        if not np.isfinite(drift) or drift > 1e-6:
            raise NormalizationDrift("phase-space mass drifted", step=n, drift=float(drift))
    return Field(grid, r)


def evolve_action(sigma: Field, V=None, M: float = 1.0, dt: float = 1e-3, steps: int = 1,
                  damping: float = SIGMA_DAMPING) -> Field:
    """Transport of sigma with Lagrangian source p^2/2M - V (fd4, never wraps).

    A 6th-difference filter scaled by ``damping / dt`` removes grid-scale
    noise; it vanishes on polynomials up to degree 5.
    """
    V = as_potential(V)
    grid = sigma.grid
    force = V.gradient(grid)
    pv = grid.coord("p")
    source = pv**2 / (2 * M) - V.values(grid)
    _check_stability(grid, M, force, dt, "fd4")

    def rhs(state):
        (s,) = state
        out = -(pv / M) * _ds(s, grid, "q") + force * _ds(s, grid, "p") + source
        if damping:
            out = out + damping / (64 * dt) * (sixth_difference(s, grid, "q")
                                               + sixth_difference(s, grid, "p"))
        return (out,)

    s = sigma.values
    for _ in range(steps):
        (s,) = rk4_step((s,), rhs, dt)
    return Field(grid, s)


def evolve_liouville(ens: PhaseEnsemble, V=None, dt: float = 1e-3, steps: int = 1) -> PhaseEnsemble:
    """Co-evolve (rho, sigma); the two equations do not talk to each other."""
    rho = evolve_density(ens.rho, V, ens.M, dt, steps)
    sigma = evolve_action(ens.sigma, V, ens.M, dt, steps)
    return PhaseEnsemble(rho, sigma, ens.M)


# -- sigma from a single trajectory -----------------------------------------
class SigmaSpecError(ValueError):
    """The supplied (eta, tau, H) do not satisfy the required brackets."""


def lagrangian_of(H: PolyPhaseFn) -> PolyPhaseFn:
    """p dH/dp - H, which is p^2/2M - V for H = p^2/2M + V."""
    return PolyPhaseFn.var("p", H.variables) * H.diff("p") - H


@dataclass(frozen=True)
class TrajectorySigmaSpec:
    """Closed-form data for sigma = eta + H [tau - tau(q0,p0) - t].

    ``trajectory`` optionally gives the exact solution (q(t), p(t)) through
    (q0, p0) as polynomials in ``t``; it is needed only for the symbolic
    constraint check along the trajectory.
    """

    eta: PolyPhaseFn
    tau: PolyPhaseFn
    H: PolyPhaseFn
    q0: Fraction | int = 0
    p0: Fraction | int = 0
    trajectory: tuple[PolyPhaseFn, PolyPhaseFn] | None = field(default=None, compare=False)

    def __post_init__(self):
        th = poisson_bracket(self.tau, self.H)
        if th != 1:
            raise SigmaSpecError(f"{{tau, H}} = {th}, expected 1")
        res = self.eta_residual()
        if not res.is_zero():
            raise SigmaSpecError(f"{{eta, H}} - L = {res}, expected 0")

    def eta_residual(self) -> PolyPhaseFn:
        return poisson_bracket(self.eta, self.H) - lagrangian_of(self.H)

    def tau_at_start(self):
        return self.tau.substitute({"q": exact(self.q0), "p": exact(self.p0)}).constant


def free_fall_spec(M, g, q0, p0) -> TrajectorySigmaSpec:
    """eta = qp + p^3/(6 M^2 g), tau = -p/(M g), H = p^2/2M + M g q."""
    M, g, q0, p0 = (exact(v) for v in (M, g, q0, p0))
    qq = PolyPhaseFn.var("q")
    pp = PolyPhaseFn.var("p")
    H = pp**2 / (2 * M) + qq * (M * g)
    eta = qq * pp + pp**3 / (6 * M**2 * g)
    tau = pp * (Fraction(-1) / (M * g))
    t = PolyPhaseFn.var("t", ("t",))
    traj = (t**2 * (Fraction(-1, 2) * g) + t * (p0 / M) + q0, t * (-M * g) + p0)
    return TrajectorySigmaSpec(eta, tau, H, q0, p0, traj)


def sigma_trajectory(spec: TrajectorySigmaSpec, t=None) -> PolyPhaseFn:
    """Closed-form sigma; a polynomial in (q, p, t) when ``t`` is None."""
    tvar = PolyPhaseFn.var("t", ("q", "p", "t"))
    bracket = spec.tau - spec.tau_at_start() - tvar
    sigma = spec.eta + spec.H * bracket
    if t is not None:
        sigma = sigma.substitute({"t": exact(t)})
    return sigma


def trajectory_constraint_residuals(spec: TrajectorySigmaSpec) -> tuple[PolyPhaseFn, PolyPhaseFn]:
    """(dsigma/dq - p, dsigma/dp) evaluated on the trajectory, as polynomials in t."""
    if spec.trajectory is None:
        raise SigmaSpecError("spec carries no closed-form trajectory")
    sigma = sigma_trajectory(spec)
    qt, pt = spec.trajectory
    on = {"q": qt, "p": pt}
    r1 = (sigma.diff("q") - PolyPhaseFn.var("p", sigma.variables)).substitute(on)
    r2 = sigma.diff("p").substitute(on)
    return r1, r2


def trajectory_action_rate(spec: TrajectorySigmaSpec) -> PolyPhaseFn:
    """d sigma/dt along the flow, i.e. dsigma/dt + {sigma, H}; equals the Lagrangian."""
    sigma = sigma_trajectory(spec)
    return sigma.diff("t") + poisson_bracket(sigma, spec.H)


# -- lifting and constraints ------------------------------------------------
def lift_from_config(ens: ConfigEnsemble, p_axis: Axis, width: float | None = None) -> PhaseEnsemble:
    """rho = P(q) N(p; S'(q), width), sigma(q,p) = S(q).

    Each q-row of the momentum Gaussian is normalised on the grid, so the
    q-marginal reproduces P to rounding.
    """
    dp = p_axis.spacing
    width = 2 * dp if width is None else width
    if width < dp:
        raise ValueError(f"width {width} is below the momentum resolution {dp}")
    grid = Grid.make(ens.grid.axis("q"), p_axis)
    u = derivative(ens.S.values, ens.grid, "q", scheme="fd4")[:, None]
    pv = p_axis.nodes[None, :]
    kern = np.exp(-0.5 * ((pv - u) / width) ** 2)
    rowsum = kern.sum(axis=1, keepdims=True) * dp
    if np.any(rowsum == 0):
        raise ValueError("momentum axis does not cover dS/dq on the whole q grid")
    rho = ens.P.values[:, None] * kern / rowsum
    sigma = np.broadcast_to(ens.S.values[:, None], grid.shape)
    return PhaseEnsemble(Field(grid, rho), Field(grid, sigma), ens.M)


def check_sigma_constraints(ens: PhaseEnsemble) -> tuple[float, float]:
    """(int rho (dsigma/dq - p)^2, int rho (dsigma/dp)^2)."""
    g = ens.grid
    s = ens.sigma.values
    r = ens.rho.values
    r1 = np.sum(r * (_ds(s, g, "q") - g.coord("p")) ** 2) * g.cell_volume
    r2 = np.sum(r * _ds(s, g, "p") ** 2) * g.cell_volume
    return float(r1), float(r2)


# -- observables ------------------------------------------------------------
def _eval(F: PolyPhaseFn, grid: Grid) -> np.ndarray:
    return np.broadcast_to(F.evaluate(**{n: grid.coord(n) for n in ("q", "p")
                                         if F.depends_on(n)}), grid.shape)


def gamma_of(F: PolyPhaseFn) -> PolyPhaseFn:
    """F - p dF/dp."""
    return F - PolyPhaseFn.var("p", F.variables) * F.diff("p")


def observable_density(ens: PhaseEnsemble, F: PolyPhaseFn) -> np.ndarray:
    """(F - p dF/dp) - {F, sigma}: also the functional derivative of O_F by rho."""
    g = ens.grid
    s = ens.sigma.values
    br = _eval(F.diff("q"), g) * _ds(s, g, "p") - _eval(F.diff("p"), g) * _ds(s, g, "q")
    return _eval(gamma_of(F), g) - br


def observable_eps(ens: PhaseEnsemble, F: PolyPhaseFn) -> float:
    vals = ens.rho.values * observable_density(ens, F)
    return float(vals.sum() * ens.grid.cell_volume)


def observable_eps_reduced(ens: PhaseEnsemble, F: PolyPhaseFn) -> float:
    return float(np.sum(ens.rho.values * _eval(F, ens.grid)) * ens.grid.cell_volume)


def check_boundary_decay(ens: PhaseEnsemble, tol: float = BOUNDARY_DECAY):
    r = np.abs(ens.rho.values)
    edge = max(r[0].max(), r[-1].max(), r[:, 0].max(), r[:, -1].max())
    if edge > tol * r.max():
        raise BoundaryDecayError(f"density on the grid edge is {edge / r.max():.2e} of its peak")


def functional_derivatives_eps(ens: PhaseEnsemble, F: PolyPhaseFn) -> tuple[Field, Field]:
    """(dO/drho, dO/dsigma) = ((F - p F_p) - {F, sigma}, d_p(rho F_q) - d_q(rho F_p))."""
    g = ens.grid
    r = ens.rho.values
    dsig = derivative(r * _eval(F.diff("q"), g), g, "p") - derivative(r * _eval(F.diff("p"), g), g, "q")
    return Field(g, observable_density(ens, F)), Field(g, dsig)


def bracket_eps(F: PolyPhaseFn, G: PolyPhaseFn, ens: PhaseEnsemble, check_decay: bool = True) -> float:
    """Functional Poisson bracket {O_F, O_G} on (rho, sigma)."""
    if check_decay:
        check_boundary_decay(ens)
    fr, fs = functional_derivatives_eps(ens, F)
    gr, gs = functional_derivatives_eps(ens, G)
    vals = fr.values * gs.values - fs.values * gr.values
    return float(vals.sum() * ens.grid.cell_volume)


def moments(ens_or_rho, names=("q", "p")) -> dict:
    """Means and variances of the coordinates under rho."""
    rho = ens_or_rho.rho if isinstance(ens_or_rho, PhaseEnsemble) else ens_or_rho
    g = rho.grid
    w = rho.values * g.cell_volume
    mass = w.sum()
    out = {}
    for n in names:
        c = g.coord(n)
        mean = float((w * c).sum() / mass)
        out[n] = mean
        out[f"var_{n}"] = float((w * (c - mean) ** 2).sum() / mass)
    return out
