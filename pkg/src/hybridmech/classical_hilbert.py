"""Classical mechanics on a Hilbert space of phase-space wavefunctions phi(q, p).

The generator of time evolution is the van Hove operator of the Hamiltonian,
``i hbar dphi/dt = O_H phi`` with ``O_H = (V - p^2/2M) + i hbar (V' d/dp - (p/M) d/dq)``.
Writing ``phi = sqrt(rho) exp(i sigma / hbar)`` turns this into the Liouville
and action-transport equations, so hbar here is only a representation label.

Evolution uses Strang splitting into three exactly solvable pieces: a phase
rotation by the zeroth-order term, a momentum shift by V'(q) dt (the kick)
and a position shift by p dt / M (the drift).  Shifts are applied in Fourier
space, so every sub-step is unitary.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .classical_phase import PhaseEnsemble, bracket_eps, observable_eps
from .errors import NormalizationDrift, StabilityError
from .numerics.grid import Axis, Field, Grid
from .numerics.poly import PolyPhaseFn
from .potentials import as_potential
from .vanhove import (FirstOrderOperator, apply, commute, compose, expectation,  # noqa: F401
                      format_operator, identity, vanhove_of)

UNDEFINED_DENSITY = 1e-12
NORM_ABORT = 1e-6


@dataclass(frozen=True)
class ClassicalWavefunction:
    phi: Field
    hbar: float = 1.0

    def __post_init__(self):
        if self.hbar <= 0:
            raise ValueError("hbar must be positive")

    @property
    def grid(self) -> Grid:
        return self.phi.grid

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.phi.values) ** 2) * self.grid.cell_volume)

    @property
    def density(self) -> Field:
        return Field(self.grid, np.abs(self.phi.values) ** 2)


class MadelungSplit(NamedTuple):
    rho: Field
    sigma: Field
    defined: np.ndarray  # False where |phi|^2 is too small for a phase


def madelung_join(rho: Field, sigma: Field, hbar: float = 1.0) -> Field:
    """phi = sqrt(rho) exp(i sigma / hbar)."""
    if rho.grid != sigma.grid:
        raise ValueError("rho and sigma must share a grid")
    if rho.values.min() < -1e-12:
        raise ValueError("rho must be nonnegative")
    amp = np.sqrt(np.clip(rho.values, 0.0, None))
    return Field(rho.grid, amp * np.exp(1j * sigma.values / hbar))


def _wrap(a):
    return (a + np.pi) % (2 * np.pi) - np.pi


def unwrap_quality_guided(phase: np.ndarray, quality: np.ndarray, defined: np.ndarray) -> np.ndarray:
    """Unwrap a 2D phase map, always growing from the best-quality visited pixel.

    Starts at the pixel of highest ``quality``; each newly reached pixel takes
    its value from the neighbour that reached it plus the wrapped difference.
    """
    out = np.zeros_like(phase)
    seen = ~defined
    n0, n1 = phase.shape
    heap: list = []

    def push(i, j):
        for a, b in ((i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)):
            if 0 <= a < n0 and 0 <= b < n1 and not seen[a, b]:
                heapq.heappush(heap, (-quality[a, b], a, b, i, j))

    # disconnected islands of the defined set each start from their own best pixel
    while not seen.all():
        start = np.unravel_index(np.argmax(np.where(seen, -np.inf, quality)), phase.shape)
        out[start] = phase[start]
        seen[start] = True
        push(*start)
        while heap:
            _, a, b, i, j = heapq.heappop(heap)
            if seen[a, b]:
                continue
            out[a, b] = out[i, j] + _wrap(phase[a, b] - phase[i, j])
            seen[a, b] = True
            push(a, b)
    return out


def madelung_split(phi: Field, hbar: float = 1.0, anchor: float | None = None) -> MadelungSplit:
    """rho = |phi|^2 and an unwrapped sigma = hbar arg(phi).

    The additive 2 pi hbar ambiguity is fixed at the density maximum: sigma
    there is the principal value of ``hbar arg(phi)``, or the branch closest to
    ``anchor`` when one is given.  Points with |phi|^2 below 1e-12 carry no
    phase information and are reported as undefined (sigma set to 0).
    """
    vals = phi.values
    rho = np.abs(vals) ** 2
    defined = rho >= UNDEFINED_DENSITY
    if not defined.any():
        raise ValueError("wavefunction vanishes everywhere")
    arg = np.angle(vals)
    if vals.ndim == 1:
        top = int(np.argmax(rho))
        unwrapped = np.unwrap(arg)
        unwrapped = unwrapped - unwrapped[top] + arg[top]
    elif vals.ndim == 2:
        unwrapped = unwrap_quality_guided(arg, rho, defined)
    else:
        raise ValueError("madelung_split handles 1D and 2D grids")
    sigma = hbar * unwrapped
    imax = np.unravel_index(np.argmax(rho), rho.shape)
    if anchor is not None:
        k = np.round((anchor - sigma[imax]) / (2 * np.pi * hbar))
        sigma = sigma + 2 * np.pi * hbar * k
    sigma = np.where(defined, sigma, 0.0)
    return MadelungSplit(Field(phi.grid, rho), Field(phi.grid, sigma), defined)


def to_phase_ensemble(phi: Field, hbar: float = 1.0, M: float = 1.0,
                      anchor: float | None = None) -> PhaseEnsemble:
    split = madelung_split(phi, hbar, anchor)
    return PhaseEnsemble(split.rho, split.sigma, M)


# -- evolution -------------------------------------------------------------
def _shift_factor(axis: Axis, displacement: np.ndarray, dim: int, ndim: int) -> np.ndarray:
    """Fourier multiplier that maps f(x) to f(x - displacement)."""
    shape = [1] * ndim
    shape[dim] = axis.points
    k = axis.wavenumbers.reshape(shape)
    return np.exp(-1j * k * displacement)


def evolve_vanhove(phi, V=None, M: float = 1.0, hbar: float | None = None, dt: float = 1e-3,
                   steps: int = 1) -> ClassicalWavefunction:
    """Strang-split evolution under ``i hbar dphi/dt = O_H phi``."""
    if isinstance(phi, ClassicalWavefunction):
        hbar = phi.hbar if hbar is None else hbar
        phi = phi.phi
    hbar = 1.0 if hbar is None else hbar
    V = as_potential(V)
    grid = phi.grid
    iq, ip = grid.index("q"), grid.index("p")
    qa, pa = grid.axis("q"), grid.axis("p")
    pv = grid.coord("p")
    force = V.gradient(grid)
    gamma = V.values(grid) - pv**2 / (2 * M)
    max_turn = float(np.abs(gamma).max()) * dt / hbar
    if max_turn > np.pi:
        raise StabilityError("phase advance per step exceeds pi", dt=dt, phase_per_step=max_turn)
    half_phase = np.exp(-0.5j * dt * gamma / hbar)
    # kick solves dphi/dt = V' dphi/dp: phi(q, p + V' t)
    kick = _shift_factor(pa, -0.5 * dt * force, ip, 2)
    # drift solves dphi/dt = -(p/M) dphi/dq: phi(q - p t / M, p)
    drift = _shift_factor(qa, dt * pv / M, iq, 2)
    psi = phi.values.astype(complex)
    n0 = np.sum(np.abs(psi) ** 2)
    for n in range(steps):
        psi = psi * half_phase
        psi = np.fft.ifft(np.fft.fft(psi, axis=ip) * kick, axis=ip)
        psi = np.fft.ifft(np.fft.fft(psi, axis=iq) * drift, axis=iq)
        psi = np.fft.ifft(np.fft.fft(psi, axis=ip) * kick, axis=ip)
        psi = psi * half_phase
        drift_norm = abs(np.sum(np.abs(psi) ** 2) / n0 - 1)
        if not np.isfinite(drift_norm) or drift_norm > NORM_ABORT:
            raise NormalizationDrift("wavefunction norm drifted", step=n, drift=float(drift_norm))
    return ClassicalWavefunction(Field(grid, psi), hbar)


# -- brackets and the no-uncertainty construction ---------------------------
def expectation_value(F: PolyPhaseFn, phi: Field, hbar: float = 1.0) -> complex:
    return expectation(vanhove_of(F, hbar), phi, hbar)


def commutator_expectation(F: PolyPhaseFn, G: PolyPhaseFn, phi: Field, hbar: float = 1.0) -> complex:
    """(1 / i hbar) <phi| [O_F, O_G] phi>."""
    c = commute(vanhove_of(F, hbar), vanhove_of(G, hbar)).times_ihbar(-1)
    return expectation(c, phi, hbar)


def cross_bracket_check(F: PolyPhaseFn, G: PolyPhaseFn, phi: Field, hbar: float = 1.0,
                        M: float = 1.0) -> tuple[float, float]:
    """(bracket of O_F, O_G on the Madelung pair, commutator expectation)."""
    split = madelung_split(phi, hbar)
    mass = split.rho.values.sum()
    lost = split.rho.values[~split.defined].sum() / mass
    if lost > 0.01:
        raise ValueError(f"{lost:.2%} of the density sits where the phase is undefined")
    ens = PhaseEnsemble(split.rho, split.sigma, M)
    lhs = bracket_eps(F, G, ens)
    rhs = commutator_expectation(F, G, phi, hbar).real
    return lhs, rhs


def gaussian_wavefunction(grid: Grid, centre, widths, sigma: PolyPhaseFn | None = None,
                          hbar: float = 1.0) -> Field:
    """sqrt of a product Gaussian density with standard deviations ``widths``."""
    qv, pv = grid.coord("q"), grid.coord("p")
    rho = np.exp(-0.5 * ((qv - centre[0]) / widths[0]) ** 2 - 0.5 * ((pv - centre[1]) / widths[1]) ** 2)
    rho = rho / (rho.sum() * grid.cell_volume)
    sig = np.zeros(grid.shape) if sigma is None else np.broadcast_to(sigma.evaluate(q=qv, p=pv), grid.shape)
    return Field(grid, np.sqrt(rho) * np.exp(1j * sig / hbar))


def no_uncertainty_demo(widths=(0.05, 0.05), hbar: float = 1.0, points: int = 128) -> tuple[float, float]:
    """Var(q) Var(p) of a sharply localised phase-space state, next to hbar^2/4.

    ``widths`` are the standard deviations of |phi|^2 in q and p.  The state is
    built on its own grid spanning ten widths either side of the origin.
    """
    wq, wp = widths
    if wq <= 0 or wp <= 0:
        raise ValueError("widths must be positive")
    grid = Grid.make(Axis("q", -10 * wq, 10 * wq, points), Axis("p", -10 * wp, 10 * wp, points))
    if min(wq / grid.axis("q").spacing, wp / grid.axis("p").spacing) < 2:
        raise ValueError("widths are not resolved by the grid")
    phi = gaussian_wavefunction(grid, (0.0, 0.0), widths, hbar=hbar)
    rho = np.abs(phi.values) ** 2 * grid.cell_volume
    qv, pv = grid.coord("q"), grid.coord("p")
    var_q = float(np.sum(rho * qv**2) - np.sum(rho * qv) ** 2)
    var_p = float(np.sum(rho * pv**2) - np.sum(rho * pv) ** 2)
    return var_q * var_p, hbar**2 / 4
