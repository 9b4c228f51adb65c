"""Maps between representations.

Madelung split/join and the configuration-to-phase-space lift live with their
owning modules and are re-exported here.  The new piece is the decomposition
of a phase-space density into a mixture of configuration-space ensembles,
labelled by the parameter alpha of a complete Hamilton-Jacobi solution S(q, a):

    w(a)    = int dq |d2S/dq da| rho(q, dS/dq)
    P(q|a)  = |d2S/dq da| rho(q, dS/dq) / w(a)

and its inverse rho(q, p) = int da w(a) P(q|a) delta(p - dS/dq), with the
delta mollified by a Gaussian of finite width.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.ndimage import map_coordinates

from .classical_config import ConfigEnsemble, evolve_ecs
from .classical_hilbert import madelung_join, madelung_split  # noqa: F401
from .classical_phase import lift_from_config  # noqa: F401
from .numerics.calculus import derivative
from .numerics.grid import Axis, Field, Grid
from .numerics.io import field_from_dict, field_to_dict
from .numerics.poly import PolyPhaseFn

SUPPORT = 1e-10
WEIGHT_FLOOR = 1e-300


class DecompositionError(ValueError):
    pass


@dataclass(frozen=True)
class CompleteHJSolution:
    """A family S(q, alpha) of Hamilton-Jacobi solutions, polynomial in (q, alpha)."""

    S: PolyPhaseFn = field(default_factory=lambda: PolyPhaseFn.parse("alpha*q"))
    label: str = "free"

    def __post_init__(self):
        extra = [v for v in self.S.variables if v not in ("q", "alpha") and self.S.depends_on(v)]
        if extra:
            raise ValueError(f"S may depend on q and alpha only, found {extra}")
        object.__setattr__(self, "S", self.S.with_variables(("q", "alpha")))

    @classmethod
    def free(cls) -> "CompleteHJSolution":
        return cls()

    def momentum(self, q, alpha) -> np.ndarray:
        """p = dS/dq."""
        return np.asarray(self.S.diff("q").evaluate(q=q, alpha=alpha), dtype=float)

    def mixed(self, q, alpha) -> np.ndarray:
        """d2S/dq dalpha."""
        return np.asarray(self.S.diff("q").diff("alpha").evaluate(q=q, alpha=alpha), dtype=float)

    def action(self, q, alpha) -> np.ndarray:
        return np.asarray(self.S.evaluate(q=q, alpha=alpha), dtype=float)

    def check_invertible(self, q: np.ndarray, alpha: np.ndarray) -> None:
        Q, A = np.meshgrid(q, alpha, indexing="ij")
        J = np.broadcast_to(self.mixed(Q, A), Q.shape)
        if np.any(J == 0) or not (np.all(J > 0) or np.all(J < 0)):
            raise DecompositionError("d2S/dq dalpha vanishes or changes sign on the working domain")

    def to_dict(self) -> dict:
        return {"S": str(self.S), "label": self.label}


@dataclass(frozen=True)
class MixtureDecomposition:
    """Weights over alpha and one configuration ensemble (P(q|alpha), S_alpha) per member.

    ``actions`` starts as S(q, alpha) and is advanced by ``evolve_mixture``.
    """

    alpha: np.ndarray
    weights: np.ndarray
    conditionals: np.ndarray  # (n_alpha, n_q)
    actions: np.ndarray  # (n_alpha, n_q)
    q_axis: Axis
    hj: CompleteHJSolution
    M: float = 1.0
    t: float = 0.0
    mass_defect: float = 0.0

    @property
    def d_alpha(self) -> float:
        return float(self.alpha[1] - self.alpha[0]) if self.alpha.size > 1 else 1.0

    @property
    def q_grid(self) -> Grid:
        return Grid.make(self.q_axis)

    def member(self, j: int) -> ConfigEnsemble:
        g = self.q_grid
        return ConfigEnsemble(Field(g, self.conditionals[j]), Field(g, self.actions[j]), self.M)

    def validate(self, tol: float = 1e-8) -> "MixtureDecomposition":
        if np.any(self.weights < 0):
            raise DecompositionError("negative mixture weight")
        total = self.weights.sum() * self.d_alpha
        if abs(total - 1) > tol:
            raise DecompositionError(f"weights integrate to {total:.12f}")
        if self.conditionals.min() < -1e-12:
            raise DecompositionError("negative conditional density")
        norms = self.conditionals.sum(axis=1) * self.q_axis.spacing
        bad = np.abs(norms - 1) > tol
        if np.any(bad):
            raise DecompositionError(f"{int(bad.sum())} conditionals are not normalized")
        return self

    def mean_alpha(self) -> float:
        return float(np.sum(self.weights * self.alpha) * self.d_alpha)


def _interp(values: np.ndarray, grid: Grid, q, p) -> np.ndarray:
    """Cubic-spline value of a (q, p) field at arbitrary points (zero outside)."""
    qa, pa = grid.axis("q"), grid.axis("p")
    iq = (np.asarray(q) - qa.nodes[0]) / qa.spacing
    ip = (np.asarray(p) - pa.nodes[0]) / pa.spacing
    iq, ip = np.broadcast_arrays(iq, ip)
    out = map_coordinates(values, [iq.ravel(), ip.ravel()], order=3, mode="constant", cval=0.0)
    return out.reshape(iq.shape)


def decompose(rho: Field, hj: CompleteHJSolution | None = None, alpha=None,
              M: float = 1.0) -> MixtureDecomposition:
    """Split a phase-space density into a weighted family of configuration ensembles.

    ``alpha`` defaults to the nodes of the p axis, which for S = alpha q makes
    the sampling exact.  Members with zero weight get the q-marginal of rho as
    a placeholder conditional so every member stays a valid ensemble.
    """
    hj = hj or CompleteHJSolution.free()
    g = rho.grid
    if g.names != ("q", "p"):
        raise DecompositionError("decompose expects a density on a (q, p) grid")
    qa, pa = g.axis("q"), g.axis("p")
    alpha = pa.nodes if alpha is None else np.asarray(alpha, dtype=float)
    if alpha.size > 1 and not np.allclose(np.diff(alpha), alpha[1] - alpha[0]):
        raise DecompositionError("alpha grid must be uniform")
    q = qa.nodes
    hj.check_invertible(q, alpha)
    r = rho.values
    Q, A = np.meshgrid(q, alpha, indexing="ij")
    P_of = hj.momentum(Q, A) * np.ones_like(Q)
    # the alpha grid must reach every momentum where rho lives
    support = r > SUPPORT * r.max()
    lo, hi = P_of.min(axis=1), P_of.max(axis=1)
    pv = np.broadcast_to(pa.nodes[None, :], r.shape)
    uncovered = support & ((pv < lo[:, None] - pa.spacing) | (pv > hi[:, None] + pa.spacing))
    if np.any(uncovered):
        raise DecompositionError("alpha grid does not cover the momentum range of the support")
    J = np.abs(hj.mixed(Q, A)) * np.ones_like(Q)
    f = np.clip(_interp(r, g, Q, P_of), 0.0, None) * J  # (n_q, n_alpha)
    w = f.sum(axis=0) * qa.spacing
    d_alpha = float(alpha[1] - alpha[0]) if alpha.size > 1 else 1.0
    total = w.sum() * d_alpha
    marginal = r.sum(axis=1) * pa.spacing
    marginal = marginal / (marginal.sum() * qa.spacing)
    cond = np.empty((alpha.size, q.size))
    for j in range(alpha.size):
        cond[j] = f[:, j] / w[j] if w[j] > WEIGHT_FLOOR else marginal
    cond = cond / (cond.sum(axis=1, keepdims=True) * qa.spacing)
    actions = hj.action(Q, A).T * np.ones((alpha.size, q.size))
    return MixtureDecomposition(alpha=alpha, weights=w / total, conditionals=cond, actions=actions,
                                q_axis=qa, hj=hj, M=M, mass_defect=float(total - rho.values.sum() * g.cell_volume))


def recompose(mix: MixtureDecomposition, p_axis: Axis, width: float | None = None) -> Field:
    """rho(q, p) = sum_alpha w P(q|alpha) N(p; dS_alpha/dq, width) d_alpha.

    The Gaussian is normalised on the p grid row by row so mass is kept
    exactly.  ``width`` defaults to one p cell, the narrowest mollifier the
    grid resolves; the round-trip error scales as width^2 / Var(p).
    """
    dp = p_axis.spacing
    width = dp if width is None else width
    if width < dp:
        raise ValueError(f"mollifier width {width} is below the momentum resolution {dp}")
    g = Grid.make(mix.q_axis, p_axis)
    qg = mix.q_grid
    pv = p_axis.nodes[None, :]
    out = np.zeros(g.shape)
    for j in range(mix.alpha.size):
        wj = mix.weights[j] * mix.d_alpha
        if wj <= WEIGHT_FLOOR:
            continue
        u = derivative(mix.actions[j], qg, "q", scheme="fd4")[:, None]
        kern = np.exp(-0.5 * ((pv - u) / width) ** 2)
        rows = kern.sum(axis=1, keepdims=True) * dp
        kern = np.divide(kern, rows, out=np.zeros_like(kern), where=rows > 0)
        out += wj * mix.conditionals[j][:, None] * kern
    return Field(g, out)


def evolve_mixture(mix: MixtureDecomposition, V=None, dt: float = 1e-3, steps: int = 1,
                   caustic_threshold: float | None = None) -> MixtureDecomposition:
    """Evolve every member as a configuration-space ensemble; weights are untouched."""
    cond = np.empty_like(mix.conditionals)
    acts = np.empty_like(mix.actions)
    for j in range(mix.alpha.size):
        ens = evolve_ecs(mix.member(j), V, dt, steps, caustic_threshold)
        cond[j], acts[j] = ens.P.values, ens.S.values
    return replace(mix, conditionals=cond, actions=acts, t=mix.t + dt * steps)


def l1(a: Field, b: Field) -> float:
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")
    return float(np.abs(a.values - b.values).sum() * a.grid.cell_volume)


# -- archive ------------------------------------------------------------------
def save_mixture(mix: MixtureDecomposition, directory) -> Path:
    """JSON index plus one field snapshot per member."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    members = []
    g = mix.q_grid
    for j in range(mix.alpha.size):
        name = f"member_{j:04d}.json"
        snap = {"P": field_to_dict(Field(g, mix.conditionals[j]), "P"),
                "S": field_to_dict(Field(g, mix.actions[j]), "S")}
        (d / name).write_text(json.dumps(snap, sort_keys=True))
        members.append(name)
    index = {"schema_version": 1, "alpha": mix.alpha.tolist(), "weights": mix.weights.tolist(),
             "hj": mix.hj.to_dict(), "M": mix.M, "t": mix.t, "q_axis": mix.q_axis.to_dict(),
             "mass_defect": mix.mass_defect, "members": members}
    path = d / "index.json"
    path.write_text(json.dumps(index, sort_keys=True, indent=1))
    return path


def load_mixture(directory) -> MixtureDecomposition:
    d = Path(directory)
    index = json.loads((d / "index.json").read_text())
    cond, acts = [], []
    for name in index["members"]:
        snap = json.loads((d / name).read_text())
        cond.append(field_from_dict(snap["P"]).values)
        acts.append(field_from_dict(snap["S"]).values)
    hj = CompleteHJSolution(PolyPhaseFn.parse(index["hj"]["S"], ("q",)), index["hj"]["label"])
    return MixtureDecomposition(alpha=np.array(index["alpha"]), weights=np.array(index["weights"]),
                                conditionals=np.array(cond), actions=np.array(acts),
                                q_axis=Axis(**index["q_axis"]), hj=hj, M=index["M"], t=index["t"],
                                mass_defect=index["mass_defect"])
