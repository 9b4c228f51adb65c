"""One classical particle (q or (q, p)) coupled to one quantum particle (x).

Two models are provided.

Configuration-space hybrid: a density P(q, x) and action S(q, x) obeying

    dS/dt = -S_q^2/2M - S_x^2/2m + (hbar^2/2m) (d_xx sqrt P)/sqrt P - V(q - x)
    dP/dt = -d_q(P S_q / M) - d_x(P S_x / m)

Evolution works on psi = sqrt(P) exp(iS/hbar): the quantum sector is linear
and solved exactly by FFT, and the classical sector is a local transport in q.  Working with log P is avoided: perturbations moving into the
Gaussian tails grow there by the bulk-to-tail amplitude ratio.

Phase-space hybrid: a wavefunction psi(q, p, x) with

    i hbar dpsi/dt = [V(q-x) - p^2/2M + i hbar (V'(q-x) d_p - (p/M) d_q) - (hbar^2/2m) d_xx] psi

whose Madelung pair (rho, sigma) obeys the phase-space hybrid ensemble
equations.  Evolution is Strang split: x-kinetic, phase, kick, drift, kick,
phase, x-kinetic; every piece is unitary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .classical_config import ConfigEnsemble
from .errors import CausticError, NormalizationDrift, StabilityError
from .numerics.calculus import derivative, max_wavenumber
from .numerics.grid import Axis, Field, Grid
from .numerics.poly import PolyPhaseFn, exact
from .numerics.timestep import RK4_ADVECTION_LIMIT, rk4_step

NORM_ABORT = 1e-6
DENSITY_MASK = 1e-14
VELOCITY_FLOOR = 1e-12
PHASE_FLOOR = 1e-24
SUPPORT_CUTOFF = 1e-8
RESIDUAL_MASK = 1e-8


def _fd(values, grid, name, order=1):
    return derivative(values, grid, name, order, scheme="fd4")


def _sp(values, grid, name, order=1):
    return derivative(values, grid, name, order, scheme="spectral")


# -- interaction -------------------------------------------------------------
class InteractionPotential:
    """V(|q - x|) given as an even polynomial in s = q - x or as callables.

    ``value(s)`` and ``slope(s) = dV/ds`` are used when no polynomial is given;
    evenness is then the caller's responsibility and is spot-checked.
    """

    def __init__(self, poly: PolyPhaseFn | None = None, strength: float = 1.0,
                 value: Callable | None = None, slope: Callable | None = None, label: str = "custom"):
        if poly is None and value is None:
            poly = PolyPhaseFn({}, ("s",))
        if poly is not None:
            if any(v != "s" and poly.depends_on(v) for v in poly.variables):
                raise ValueError("interaction polynomial must depend on s = q - x only")
            poly = poly.with_variables(("s",))
            i = poly.variables.index("s")
            if any(e[i] % 2 for e in poly.terms):
                raise ValueError("interaction must be even in s = q - x")
        else:
            if slope is None:
                raise ValueError("callable interaction needs both value and slope")
            s = np.linspace(0.1, 3.0, 7)
            if not np.allclose(value(s), value(-s)):
                raise ValueError("interaction must be even in s = q - x")
        self.poly = poly
        self.strength = strength
        self._value = value
        self._slope = slope
        self.label = label

    @classmethod
    def none(cls) -> "InteractionPotential":
        return cls(label="none")

    @classmethod
    def harmonic(cls, k: float) -> "InteractionPotential":
        s = PolyPhaseFn.var("s", ("s",))
        return cls(s**2 * (exact(k) / 2), label="hybrid_harmonic")

    @property
    def is_zero(self) -> bool:
        return self.poly is not None and (self.poly.is_zero() or self.strength == 0)

    def value(self, s):
        if self.poly is not None:
            return self.strength * np.asarray(self.poly.evaluate(s=s), dtype=float) * np.ones_like(s)
        return self.strength * self._value(s)

    def slope(self, s):
        if self.poly is not None:
            return self.strength * np.asarray(self.poly.diff("s").evaluate(s=s), dtype=float) * np.ones_like(s)
        return self.strength * self._slope(s)

    def separation(self, grid: Grid) -> np.ndarray:
        return grid.coord("q") - grid.coord("x")

    def values(self, grid: Grid) -> np.ndarray:
        return self.value(self.separation(grid))

    def grad_q(self, grid: Grid) -> np.ndarray:
        """dV/dq = V'(q - x); dV/dx is its negative."""
        return self.slope(self.separation(grid))

    def to_dict(self) -> dict:
        return {"kind": self.label, "poly": str(self.poly) if self.poly is not None else None,
                "strength": self.strength}


def _as_interaction(V) -> InteractionPotential:
    if V is None:
        return InteractionPotential.none()
    if isinstance(V, InteractionPotential):
        return V
    if isinstance(V, PolyPhaseFn):
        return InteractionPotential(V)
    raise TypeError(f"cannot interpret {V!r} as an interaction potential")


# -- configuration-space hybrid ---------------------------------------------
@dataclass(frozen=True)
class HybridConfigEnsemble:
    """Density P and action S on a (q, x) grid."""

    P: Field
    S: Field
    M: float = 1.0
    m: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if self.P.grid != self.S.grid:
            raise ValueError("P and S must share a grid")
        if self.P.grid.names != ("q", "x"):
            raise ValueError("configuration hybrids live on a (q, x) grid")

    @property
    def grid(self) -> Grid:
        return self.P.grid

    @property
    def norm(self) -> float:
        return float(self.P.values.sum() * self.grid.cell_volume)

    @property
    def psi(self) -> np.ndarray:
        """sqrt(P) exp(i S / hbar)."""
        return np.sqrt(np.clip(self.P.values, 0, None)) * np.exp(1j * self.S.values / self.hbar)

    def validate(self, norm_tol: float = 1e-8) -> "HybridConfigEnsemble":
        if self.P.values.min() < -1e-12:
            raise ValueError(f"P has negative values down to {self.P.values.min():.3e}")
        if abs(self.norm - 1) > norm_tol:
            raise ValueError(f"P is not normalized (integral {self.norm:.12f})")
        return self

    @classmethod
    def product_gaussian(cls, grid: Grid, q0, wq, x0, wx, S: PolyPhaseFn | None = None,
                         M=1.0, m=1.0, hbar=1.0) -> "HybridConfigEnsemble":
        """Product Gaussian P with standard deviations (wq, wx), normalised on the grid."""
        qv, xv = grid.coord("q"), grid.coord("x")
        P = np.exp(-0.5 * ((qv - q0) / wq) ** 2 - 0.5 * ((xv - x0) / wx) ** 2)
        P = P / (P.sum() * grid.cell_volume)
        Sv = np.zeros(grid.shape) if S is None else np.broadcast_to(S.evaluate(q=qv, x=xv), grid.shape)
        return cls(Field(grid, P), Field(grid, Sv), M, m, hbar)


def _classical_velocity(psi, grid, M, hbar, floor, scheme="fd4"):
    """u = S_q / M = hbar Im(conj psi psi_q) / (M (|psi|^2 + floor)).

    The floor bounds u by hbar |psi_q| / (2 M sqrt(floor)) where psi is at
    round-off level, so tail noise cannot break the advection bound.
    """
    psi_q = derivative(psi, grid, "q", 1, scheme=scheme)
    u = hbar * np.imag(np.conj(psi) * psi_q) / (M * (np.abs(psi) ** 2 + floor))
    return u, psi_q


def hybrid_ecs_stable_dt(ens: HybridConfigEnsemble) -> float:
    """RK4 bound for the classical transport sub-step (the quantum sub-step is exact)."""
    g = ens.grid
    psi = ens.psi
    u, _ = _classical_velocity(psi, g, ens.M, ens.hbar, VELOCITY_FLOOR * np.abs(psi).max() ** 2)
    umax = float(np.abs(u).max())
    rate = umax * max_wavenumber(g.axis("q"), "fd4") + ens.M * umax**2 / (2 * ens.hbar)
    return np.inf if rate == 0 else RK4_ADVECTION_LIMIT / rate


def evolve_hybrid_ecs(ens: HybridConfigEnsemble, V=None, dt: float = 1e-3, steps: int = 1,
                      caustic_threshold: float | None = None) -> HybridConfigEnsemble:
    """Advance the configuration-space hybrid by Strang splitting of psi = sqrt(P) exp(iS/hbar).

    Quantum half-steps (exact): -(hbar^2/2m) d_xx by FFT in x and the
    interaction phase exp(-i V dt / 2 hbar).  Together they carry the x-flux,
    the S_x^2/2m and Bohm terms and the interaction force on every q-slice.

    Classical full step (RK4, fourth-order differences in q): free
    Hamilton-Jacobi plus continuity at fixed x, which in psi reads

        psi_t = -(u psi_q + (u psi)_q) / 2 + i (M u^2 / 2 hbar) psi,   u = S_q / M.

    S is accumulated from per-step phase increments hbar * arg(psi_new / psi_old)
    so it stays continuous without unwrapping; where |psi|^2 is below
    PHASE_FLOOR of the peak the phase is round-off and S is left unchanged.
    """
    V = _as_interaction(V)
    g = ens.grid
    M, m, hbar = ens.M, ens.m, ens.hbar
    Vv = np.broadcast_to(V.values(g), g.shape)
    turn = float(np.abs(Vv).max()) * dt / hbar
    if turn > np.pi:
        raise StabilityError("interaction phase per step exceeds pi", dt=dt, phase_per_step=turn)
    half_phase = np.exp(-0.5j * dt * Vv / hbar)
    kx = g.axis("x").wavenumbers.reshape(1, -1)
    kin_half = np.exp(-1j * hbar * kx**2 * dt / (4 * m))
    psi = ens.psi
    S = ens.S.values.copy()
    n0 = np.sum(np.abs(psi) ** 2)
    floor = VELOCITY_FLOOR * np.abs(psi).max() ** 2

    def classical(state):
        (f,) = state
        u, f_q = _classical_velocity(f, g, M, hbar, floor)
        return (-0.5 * (u * f_q + _fd(u * f, g, "q")) + 0.5j * M * u**2 / hbar * f,)

    def kinetic_half(f):
        return np.fft.ifft(np.fft.fft(f, axis=1) * kin_half, axis=1)

    for n in range(steps):
        u, _ = _classical_velocity(psi, g, M, hbar, floor)
        umax = float(np.abs(u).max())
        rate = umax * max_wavenumber(g.axis("q"), "fd4") + M * umax**2 / (2 * hbar)
        if dt * rate > RK4_ADVECTION_LIMIT:
            raise StabilityError("time step exceeds the classical transport bound",
                                 step=n, dt=dt, dt_max=RK4_ADVECTION_LIMIT / rate)
        rho = np.abs(psi) ** 2
        support = rho > SUPPORT_CUTOFF * rho.max()
        focus = float(-_fd(u, g, "q")[support].min()) * M
        limit = caustic_threshold if caustic_threshold is not None else 0.25 * M / dt
        if focus > limit:
            raise CausticError("classical characteristics are crossing", step=n,
                               max_neg_curvature=focus, threshold=limit)
        new = kinetic_half(psi) * half_phase
        (new,) = rk4_step((new,), classical, dt)
        new = kinetic_half(new * half_phase)
        rn = np.abs(new) ** 2
        ok = (rn > PHASE_FLOOR * rn.max()) & (rho > PHASE_FLOOR * rho.max())
        S = np.where(ok, S + hbar * np.angle(new * np.conj(psi)), S)
        psi = new
        drift = abs(np.sum(np.abs(psi) ** 2) / n0 - 1)
        if not np.isfinite(drift) or drift > NORM_ABORT:
            raise NormalizationDrift("hybrid density drifted", step=n, drift=float(drift))
    return HybridConfigEnsemble(Field(g, np.abs(psi) ** 2), Field(g, S), M, m, hbar)


def hybrid_ecs_energy(ens: HybridConfigEnsemble, V=None) -> float:
    """int P [S_q^2/2M + V] + <psi| -hbar^2/2m d_xx |psi>.

    The last term equals int P [S_x^2/2m + (hbar^2/8m)(d_x log P)^2].
    """
    V = _as_interaction(V)
    g = ens.grid
    psi = ens.psi
    rho = np.abs(psi) ** 2
    u, _ = _classical_velocity(psi, g, ens.M, ens.hbar, VELOCITY_FLOOR * rho.max())
    classical = np.sum(rho * (0.5 * ens.M * u**2 + V.values(g))) * g.cell_volume
    quantum = _braket(psi, -ens.hbar**2 / (2 * ens.m) * _sp(psi, g, "x", 2), g).real
    return float(classical + quantum)


def hybrid_ecs_momentum(ens: HybridConfigEnsemble) -> float:
    """Total momentum int P (S_q + S_x) = hbar Im <psi| d_q + d_x |psi>."""
    g = ens.grid
    psi = ens.psi
    return _braket(psi, -1j * ens.hbar * (_sp(psi, g, "q") + _sp(psi, g, "x")), g).real


def free_schrodinger(psi: np.ndarray, axis: Axis, m: float, hbar: float, t: float) -> np.ndarray:
    """Exact free evolution of a 1D wavefunction on a periodic axis."""
    k = axis.wavenumbers
    return np.fft.ifft(np.fft.fft(psi) * np.exp(-1j * hbar * k**2 * t / (2 * m)))


def gaussian_variance_free(s0: float, m: float, hbar: float, t: float) -> float:
    """Variance of |psi|^2 for a free real Gaussian of initial variance s0^2."""
    return s0**2 * (1 + (hbar * t / (2 * m * s0**2)) ** 2)


# -- phase-space hybrid ------------------------------------------------------
@dataclass(frozen=True)
class HybridWavefunction:
    psi: Field
    M: float = 1.0
    m: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if set(self.psi.grid.names) != {"q", "p", "x"} or len(self.psi.grid.names) != 3:
            raise ValueError("hybrid wavefunctions live on a (q, p, x) grid")

    @property
    def grid(self) -> Grid:
        return self.psi.grid

    @property
    def rho(self) -> Field:
        return Field(self.grid, np.abs(self.psi.values) ** 2)

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.psi.values) ** 2) * self.grid.cell_volume)


@dataclass(frozen=True)
class HybridPhaseEnsemble:
    rho: Field
    sigma: Field
    M: float = 1.0
    m: float = 1.0
    hbar: float = 1.0

    @property
    def grid(self) -> Grid:
        return self.rho.grid

    def to_wavefunction(self) -> HybridWavefunction:
        amp = np.sqrt(np.clip(self.rho.values, 0, None))
        psi = amp * np.exp(1j * self.sigma.values / self.hbar)
        return HybridWavefunction(Field(self.grid, psi), self.M, self.m, self.hbar)


def lift_product(classical: ConfigEnsemble, psi_x: np.ndarray, p_axis: Axis, x_axis: Axis,
                 width: float | None = None, m: float = 1.0, hbar: float = 1.0) -> HybridPhaseEnsemble:
    """rho = P_C(q) N(p; S_C', w) |psi_Q(x)|^2, sigma = S_C(q) + hbar arg psi_Q(x).

    ``psi_x`` is the quantum factor sampled on ``x_axis`` (normalised there).
    """
    from .classical_phase import lift_from_config

    ce = lift_from_config(classical, p_axis, width)
    grid = Grid.make(ce.grid.axis("q"), p_axis, x_axis)
    px = np.abs(psi_x) ** 2
    px = px / (px.sum() * x_axis.spacing)
    sq = np.unwrap(np.angle(psi_x)) * hbar
    rho = ce.rho.values[:, :, None] * px[None, None, :]
    sigma = ce.sigma.values[:, :, None] + sq[None, None, :]
    return HybridPhaseEnsemble(Field(grid, rho), Field(grid, sigma), classical.M, m, hbar)


def _kinetic_x(grid: Grid, m: float, hbar: float, dt: float) -> np.ndarray:
    k = grid.axis("x").wavenumbers.reshape(1, 1, -1)
    return np.exp(-1j * hbar * k**2 * dt / (2 * m))


def evolve_hybrid_hilbert(wf: HybridWavefunction, V=None, dt: float = 1e-2,
                          steps: int = 1) -> HybridWavefunction:
    """Strang-split evolution of the hybrid wave equation on a (q, p, x) grid."""
    V = _as_interaction(V)
    g = wf.grid
    if g.names != ("q", "p", "x"):
        raise ValueError("expected axes ordered (q, p, x)")
    M, m, hbar = wf.M, wf.m, wf.hbar
    pv = g.coord("p")
    force = V.grad_q(g)  # shape (nq, 1, nx)
    gamma = V.values(g) - pv**2 / (2 * M)
    turn = float(np.abs(gamma).max()) * dt / hbar
    if turn > np.pi:
        raise StabilityError("phase advance per step exceeds pi", dt=dt, phase_per_step=turn)
    half_phase = np.exp(-0.5j * dt * gamma / hbar)
    kx_half = _kinetic_x(g, m, hbar, 0.5 * dt)
    kp = g.axis("p").wavenumbers.reshape(1, -1, 1)
    kq = g.axis("q").wavenumbers.reshape(-1, 1, 1)
    kick = np.exp(1j * kp * force * 0.5 * dt)  # psi(q, p + V' dt/2, x)
    drift = np.exp(-1j * kq * pv * dt / M)  # psi(q - p dt / M, p, x)
    psi = wf.psi.values.astype(complex)
    n0 = np.sum(np.abs(psi) ** 2)
    fft, ifft = np.fft.fft, np.fft.ifft
    for n in range(steps):
        psi = ifft(fft(psi, axis=2) * kx_half, axis=2)
        psi = psi * half_phase
        psi = ifft(fft(psi, axis=1) * kick, axis=1)
        psi = ifft(fft(psi, axis=0) * drift, axis=0)
        psi = ifft(fft(psi, axis=1) * kick, axis=1)
        psi = psi * half_phase
        psi = ifft(fft(psi, axis=2) * kx_half, axis=2)
        d = abs(np.sum(np.abs(psi) ** 2) / n0 - 1)
        if not np.isfinite(d) or d > NORM_ABORT:
            raise NormalizationDrift("hybrid wavefunction norm drifted", step=n, drift=float(d))
    return HybridWavefunction(Field(g, psi), M, m, hbar)


def apply_hamiltonian(wf: HybridWavefunction, V=None) -> np.ndarray:
    V = _as_interaction(V)
    g = wf.grid
    psi = wf.psi.values
    pv = g.coord("p")
    gamma = V.values(g) - pv**2 / (2 * wf.M)
    first = V.grad_q(g) * _sp(psi, g, "p") - (pv / wf.M) * _sp(psi, g, "q")
    return gamma * psi + 1j * wf.hbar * first - wf.hbar**2 / (2 * wf.m) * _sp(psi, g, "x", 2)


def _braket(psi, opsi, grid) -> complex:
    return complex(np.sum(np.conj(psi) * opsi) * grid.cell_volume)


def hybrid_energy(wf: HybridWavefunction, V=None) -> float:
    return _braket(wf.psi.values, apply_hamiltonian(wf, V), wf.grid).real


def hybrid_total_momentum(wf: HybridWavefunction) -> float:
    """<-i hbar (d_q + d_x)>: classical van Hove momentum plus quantum momentum."""
    g = wf.grid
    psi = wf.psi.values
    op = -1j * wf.hbar * (_sp(psi, g, "q") + _sp(psi, g, "x"))
    return _braket(psi, op, g).real


# -- marginals and observables ----------------------------------------------
def marginals(state) -> tuple[Field, Field]:
    """(classical marginal, quantum marginal) for any hybrid state."""
    if isinstance(state, HybridConfigEnsemble):
        g = state.grid
        P = state.P.values
        pc = P.sum(axis=1) * g.axis("x").spacing
        pq = P.sum(axis=0) * g.axis("q").spacing
        return Field(g.sub(["q"]), pc), Field(g.sub(["x"]), pq)
    if isinstance(state, (HybridWavefunction, HybridPhaseEnsemble)):
        rho = state.rho
    elif isinstance(state, Field):
        rho = state
    else:
        raise TypeError(f"no marginals for {type(state).__name__}")
    g = rho.grid
    ix = g.index("x")
    rc = rho.values.sum(axis=ix) * g.axis("x").spacing
    other = tuple(i for i in range(3) if i != ix)
    rq = rho.values.sum(axis=other) * g.axis("q").spacing * g.axis("p").spacing
    return Field(g.sub([n for n in g.names if n != "x"]), rc), Field(g.sub(["x"]), rq)


def mutual_information(rho: Field) -> float:
    """int rho log(rho / (rho_C rho_Q)) between the classical and quantum sectors."""
    rc, rq = marginals(rho)
    r = rho.values
    prod = rc.values[:, :, None] * rq.values[None, None, :]
    mask = (r > DENSITY_MASK * r.max()) & (prod > 0)
    return float(np.sum(r[mask] * np.log(r[mask] / prod[mask])) * rho.grid.cell_volume)


def _state_psi(state):
    """(psi, grid, hbar) for any hybrid state."""
    if isinstance(state, HybridWavefunction):
        return state.psi.values, state.grid, state.hbar
    if isinstance(state, HybridPhaseEnsemble):
        return state.to_wavefunction().psi.values, state.grid, state.hbar
    if isinstance(state, HybridConfigEnsemble):
        return state.psi, state.grid, state.hbar
    raise TypeError(f"unsupported hybrid state {type(state).__name__}")


QUANTUM_OPERATORS = ("x", "px", "x2", "px2", "HQ")


def quantum_observable_hybrid(state, op: str, m: float | None = None) -> float:
    """<psi| F |psi> for F in x, p_x, x^2, p_x^2, H_Q = p_x^2/2m acting on the x sector."""
    psi, g, hbar = _state_psi(state)
    m = getattr(state, "m", 1.0) if m is None else m
    xv = g.coord("x")
    if op == "x":
        opsi = xv * psi
    elif op == "x2":
        opsi = xv**2 * psi
    elif op == "px":
        opsi = -1j * hbar * _sp(psi, g, "x")
    elif op == "px2":
        opsi = -hbar**2 * _sp(psi, g, "x", 2)
    elif op == "HQ":
        opsi = -hbar**2 / (2 * m) * _sp(psi, g, "x", 2)
    else:
        raise ValueError(f"unknown quantum operator {op!r}; choose from {QUANTUM_OPERATORS}")
    return _braket(psi, opsi, g).real


def quantum_observable_kernel(state, op: str) -> float:
    """Double-sum kernel form sum psi*(x') F(x', x) psi(x) for x and p_x (cross-check)."""
    psi, g, hbar = _state_psi(state)
    ax = g.axis("x")
    n = ax.points
    if op == "x":
        K = np.diag(ax.nodes).astype(complex)
    elif op == "px":
        # dense spectral derivative matrix: column j differentiates the j-th unit vector
        D = np.fft.ifft(np.fft.fft(np.eye(n), axis=0) * (1j * ax.wavenumbers)[:, None], axis=0).real
        K = -1j * hbar * D
    else:
        raise ValueError("kernel form is provided for x and px")
    ix = g.index("x")
    ps = np.moveaxis(psi, ix, -1).reshape(-1, n)
    val = np.einsum("ai,ij,aj->", np.conj(ps), K, ps) * g.cell_volume
    return float(np.real(val))


def classical_observable_hybrid(state, F: PolyPhaseFn, reduced: bool = False) -> float:
    """O_F on a hybrid state; ``reduced`` gives int rho F, otherwise the full form.

    For a (q, x) configuration hybrid F is evaluated at p = S_q.
    """
    if isinstance(state, HybridConfigEnsemble):
        g = state.grid
        psi = state.psi
        P = np.abs(psi) ** 2
        u, _ = _classical_velocity(psi, g, 1.0, state.hbar, VELOCITY_FLOOR * P.max())
        Fv = F.evaluate(q=g.coord("q"), p=u)
        return float(np.sum(P * Fv) * g.cell_volume)
    if isinstance(state, HybridWavefunction):
        rho = np.abs(state.psi.values) ** 2
        sq, sp = phase_gradients(state)[:2]
    elif isinstance(state, HybridPhaseEnsemble):
        rho = state.rho.values
        sq = _fd(state.sigma.values, state.grid, "q")
        sp = _fd(state.sigma.values, state.grid, "p")
    else:
        raise TypeError(f"unsupported hybrid state {type(state).__name__}")
    g = state.grid
    qv, pv = g.coord("q"), g.coord("p")

    def ev(G):
        return np.asarray(G.evaluate(q=qv, p=pv), dtype=float)

    if reduced:
        return float(np.sum(rho * ev(F)) * g.cell_volume)
    gam = F - PolyPhaseFn.var("p", F.variables) * F.diff("p")
    dens = ev(gam) - (ev(F.diff("q")) * sp - ev(F.diff("p")) * sq)
    return float(np.sum(rho * dens) * g.cell_volume)


def phase_gradients(wf: HybridWavefunction, mask: float = 1e-12):
    """(sigma_q, sigma_p, sigma_x) from hbar Im(conj psi d psi) / |psi|^2 (no unwrapping)."""
    psi = wf.psi.values
    g = wf.grid
    rho = np.abs(psi) ** 2
    safe = np.where(rho > mask * rho.max(), rho, np.inf)
    return tuple(wf.hbar * np.imag(np.conj(psi) * _sp(psi, g, n)) / safe for n in ("q", "p", "x"))


# -- quantum potential energies ----------------------------------------------
def _log_dx(values, grid, floor):
    return _fd(np.log(np.clip(values, floor, None)), grid, "x")


def bohm_energy_ecs(P, m: float = 1.0, hbar: float = 1.0, eps_reg: float = DENSITY_MASK) -> float:
    """(hbar^2/8m) int P (d_x log P)^2 over a (q, x) density (or a HybridConfigEnsemble)."""
    if isinstance(P, HybridConfigEnsemble):
        P = P.P
    g = P.grid
    dens = P.values
    lx = _log_dx(dens, g, eps_reg * dens.max())
    mask = dens > eps_reg * dens.max()
    return float(hbar**2 / (8 * m) * np.sum((dens * lx**2)[mask]) * g.cell_volume)


def bohm_energy_eps(rho: Field, m: float = 1.0, hbar: float = 1.0, eps_reg: float = DENSITY_MASK) -> float:
    """(hbar^2/8m) int rho (d_x log rho)^2 over a (q, p, x) density."""
    return bohm_energy_ecs(rho, m, hbar, eps_reg)


def compare_hybrid_energies(rho: Field, m: float = 1.0, hbar: float = 1.0,
                            eps_reg: float = DENSITY_MASK) -> dict:
    """Q_EPS of rho, Q_ECS of its (q, x) marginal, and the two extra terms.

    With rho = P(q,x) P(p|q,x): Q_EPS = Q_ECS + conditional + cross where
    conditional = (hbar^2/8m) int rho (d_x log P(p|q,x))^2 and
    cross = (hbar^2/4m) int rho d_x log P(q,x) d_x log P(p|q,x).
    """
    g = rho.grid
    ip = g.index("p")
    r = rho.values
    Pqx = r.sum(axis=ip) * g.axis("p").spacing
    floor = eps_reg * r.max()
    mask = r > floor
    log_r = np.log(np.clip(r, floor, None))
    log_m = np.log(np.clip(Pqx, eps_reg * Pqx.max(), None))
    a = np.expand_dims(_fd(log_m, g.sub([n for n in g.names if n != "p"]), "x"), ip)
    total = _fd(log_r, g, "x")
    b = total - a
    c = hbar**2 / (8 * m)
    w = np.where(mask, r, 0.0) * g.cell_volume
    q_eps = c * float(np.sum(w * total**2))
    q_ecs_from_rho = c * float(np.sum(w * a**2))
    cond = c * float(np.sum(w * b**2))
    cross = 2 * c * float(np.sum(w * a * b))
    gm = g.sub([n for n in g.names if n != "p"])
    q_ecs = bohm_energy_ecs(Field(gm, Pqx), m, hbar, eps_reg)
    return {"Q_EPS": q_eps, "Q_ECS": q_ecs, "difference": q_eps - q_ecs,
            "conditional": cond, "cross": cross,
            "identity_residual": q_eps - q_ecs_from_rho - cond - cross,
            "marginal_consistency": q_ecs_from_rho - q_ecs}


def lambda_family(grid: Grid, lam: float) -> Field:
    """rho proportional to exp(-(q^2 + p^2 + x^2) - lam p x), normalised on the grid."""
    qv, pv, xv = grid.coord("q"), grid.coord("p"), grid.coord("x")
    r = np.exp(-(qv**2 + pv**2 + xv**2) - lam * pv * xv)
    return Field(grid, r / (r.sum() * grid.cell_volume))


def lambda_family_closed_form(lam: float, m: float = 1.0, hbar: float = 1.0) -> dict:
    """Closed-form quantum-potential energies of the lambda family (for reference)."""
    c = hbar**2 / (8 * m)
    q_eps = c * 2.0
    q_ecs = c * (4 - lam**2) / 2.0
    return {"Q_EPS": q_eps, "Q_ECS": q_ecs, "difference": q_eps - q_ecs}


# -- constraint and Madelung diagnostics ------------------------------------
def check_hybrid_sigma_constraints(state, sigma_t: np.ndarray | None = None, V=None,
                                   mask: float = 1e-12) -> dict:
    """rho-weighted residuals of (sigma_q - p), sigma_p and, given sigma_t, the eta equation.

    The eta-equation residual is sqrt(int rho r^2) with
    r = sigma_t + H + sigma_x^2/2m - (hbar^2/2m) d_xx sqrt(rho)/sqrt(rho),
    H = p^2/2M + V(q - x).
    """
    if isinstance(state, HybridWavefunction):
        rho = np.abs(state.psi.values) ** 2
        sq, sp, sx = phase_gradients(state, mask)
        bohm = _bohm_from_psi(state, mask)
    elif isinstance(state, HybridPhaseEnsemble):
        rho = state.rho.values
        g = state.grid
        sq, sp, sx = (_fd(state.sigma.values, g, n) for n in ("q", "p", "x"))
        bohm = _bohm_from_psi(state.to_wavefunction(), mask)
    else:
        raise TypeError("need a HybridWavefunction or HybridPhaseEnsemble")
    g = state.grid
    keep = rho > mask * rho.max()
    w = np.where(keep, rho, 0.0) * g.cell_volume
    pv = g.coord("p")
    out = {"r1": float(np.sum(w * np.where(keep, sq - pv, 0.0) ** 2)),
           "r2": float(np.sum(w * np.where(keep, sp, 0.0) ** 2))}
    if sigma_t is not None:
        Vi = _as_interaction(V)
        H = pv**2 / (2 * state.M) + Vi.values(g)
        r = sigma_t + H + sx**2 / (2 * state.m) - state.hbar**2 / (2 * state.m) * bohm
        out["eta"] = float(np.sqrt(np.sum(w * np.where(keep, r, 0.0) ** 2)))
    else:
        out["eta"] = None
    return out


def _bohm_from_psi(wf: HybridWavefunction, mask: float) -> np.ndarray:
    """d_xx |psi| / |psi| = Re(conj psi psi_xx)/|psi|^2 + (sigma_x / hbar)^2."""
    psi = wf.psi.values
    g = wf.grid
    rho = np.abs(psi) ** 2
    safe = np.where(rho > mask * rho.max(), rho, np.inf)
    sx = np.imag(np.conj(psi) * _sp(psi, g, "x")) / safe
    return np.real(np.conj(psi) * _sp(psi, g, "x", 2)) / safe + sx**2


def madelung_residuals(prev: HybridWavefunction, cur: HybridWavefunction, nxt: HybridWavefunction,
                       delta: float, V=None, mask: float = RESIDUAL_MASK) -> dict:
    """Residuals of the phase-space hybrid ensemble equations at the middle state.

    Time derivatives are central differences over ``delta``; spatial ones come
    from the wavefunction (phase gradients, no unwrapping).  Returned values:
    ``continuity`` = sqrt(int (r_rho / 2 sqrt(rho))^2), ``action`` =
    sqrt(int rho r_sigma^2), both restricted to rho > mask * max(rho).  Below about 1e-8 of the peak the
    amplitude sits near the FFT round-off floor and its phase carries no signal.
    """
    V = _as_interaction(V)
    g = cur.grid
    M, m, hbar = cur.M, cur.m, cur.hbar
    psi = cur.psi.values
    rho = np.abs(psi) ** 2
    keep = rho > mask * rho.max()
    rho_t = (np.abs(nxt.psi.values) ** 2 - np.abs(prev.psi.values) ** 2) / (2 * delta)
    sigma_t = hbar * np.angle(nxt.psi.values * np.conj(prev.psi.values)) / (2 * delta)
    sq, sp, sx = phase_gradients(cur, mask)
    pv = g.coord("p")
    Vq = V.grad_q(g)
    rq, rp = _sp(rho, g, "q"), _sp(rho, g, "p")
    # rho sigma_x = hbar Im(conj psi psi_x) needs no division by rho
    flux_x = _sp(hbar * np.imag(np.conj(psi) * _sp(psi, g, "x")), g, "x") / m
    r_rho = rho_t + rq * pv / M - rp * Vq + flux_x
    bohm = _bohm_from_psi(cur, mask)
    r_sig = (sigma_t + sq * pv / M - sp * Vq - pv**2 / (2 * M) + sx**2 / (2 * m)
             - hbar**2 / (2 * m) * bohm + V.values(g))
    dv = g.cell_volume
    amp_res = np.where(keep, r_rho / (2 * np.sqrt(np.where(keep, rho, 1.0))), 0.0)
    cont = float(np.sqrt(np.sum(amp_res**2) * dv))
    act = float(np.sqrt(np.sum(np.where(keep, rho * r_sig**2, 0.0)) * dv))
    return {"continuity": cont, "action": act, "sigma_t": sigma_t}


def madelung_residual_series(wf: HybridWavefunction, V=None, dt: float = 1e-2, steps: int = 100,
                             every: int = 10, delta: float | None = None,
                             mask: float = RESIDUAL_MASK) -> list[dict]:
    """Evolve and record Madelung residuals every ``every`` steps.

    Time derivatives at a sampled state come from one Strang step of +-delta
    (default dt/10) around it; the split step is time-reversible, so the
    central difference is second order in delta.
    """
    V = _as_interaction(V)
    delta = dt / 10 if delta is None else delta
    out = []
    cur = wf
    n = 0
    while True:
        back = evolve_hybrid_hilbert(cur, V, -delta, 1)
        fwd = evolve_hybrid_hilbert(cur, V, delta, 1)
        r = madelung_residuals(back, cur, fwd, delta, V, mask)
        c = check_hybrid_sigma_constraints(cur, r["sigma_t"], V, mask)
        out.append({"t": n * dt, "continuity": r["continuity"], "action": r["action"],
                    "r1": c["r1"], "r2": c["r2"], "eta": c["eta"]})
        if n >= steps:
            return out
        k = min(every, steps - n)
        cur = evolve_hybrid_hilbert(cur, V, dt, k)
        n += k


def _probe(wf: HybridWavefunction, V) -> np.ndarray:
    g = wf.grid
    rho = np.abs(wf.psi.values) ** 2 * g.cell_volume
    return np.array([np.sum(rho * g.coord("q")), np.sum(rho * g.coord("p")),
                     np.sum(rho * g.coord("x")), hybrid_energy(wf, V)])


def evolve_hybrid_hilbert_converged(wf: HybridWavefunction, V=None, T: float = 1.0, dt: float = 1e-2,
                                    tol: float = 1e-5, max_halvings: int = 4):
    """Evolve to time T, halving dt until <q>, <p>, <x> and the energy change by < tol.

    Returns (final state, dt used, last change).
    """
    V = _as_interaction(V)
    steps = max(1, int(round(T / dt)))
    prev = evolve_hybrid_hilbert(wf, V, T / steps, steps)
    change = np.inf
    for _ in range(max_halvings):
        steps *= 2
        cur = evolve_hybrid_hilbert(wf, V, T / steps, steps)
        change = float(np.max(np.abs(_probe(cur, V) - _probe(prev, V))))
        prev = cur
        if change < tol:
            break
    return prev, T / steps, change
