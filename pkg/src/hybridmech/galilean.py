"""Galilei generators as phase-space functions, van Hove operators and ensemble functionals.

Every pairwise bracket of the ten generators H, Pi_i, L_i, G_i is compared
against the Lie algebra

    {H, Pi_i} = 0         {H, L_i} = 0          {Pi_i, Pi_j} = 0
    {L_i, Pi_j} = e_ijk Pi_k    {L_i, L_j} = e_ijk L_k    {L_i, G_j} = e_ijk G_k
    {G_i, G_j} = 0        {G_i, Pi_j} = M d_ij   {G_i, H} = Pi_i

Pairs not listed follow from antisymmetry.  Boosts G_i = M q_i - t p_i carry
time as a parameter; passing ``t="t"`` keeps it symbolic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .classical_config import ConfigEnsemble, bracket_ecs, observable_ecs
from .classical_hilbert import gaussian_wavefunction
from .classical_phase import PhaseEnsemble, bracket_eps, observable_eps
from .numerics.grid import Axis, Grid
from .numerics.poly import PHASE_VARS, PolyPhaseFn, exact, poisson_bracket
from .vanhove import commute, expectation, identity, vanhove_of

AXES = ("x", "y", "z")
REPRESENTATIONS = ("phase", "ecs", "eps", "vanhove")


def _eps(i, j, k) -> int:
    return int((i - j) * (j - k) * (k - i) / 2)


@dataclass
class GalileiGenerators:
    """Ten generators keyed ``H, Pi_x.., L_x.., G_x..`` in one representation."""

    representation: str
    M: object
    t: object
    generators: dict = field(default_factory=dict)

    def __getitem__(self, name):
        return self.generators[name]

    @property
    def names(self) -> list[str]:
        return list(self.generators)


def _time(t, variables):
    if isinstance(t, str):
        return PolyPhaseFn.var(t, variables + (t,))
    return exact(t)


def galilei_phase(M=1, t=0, dim: int = 3) -> GalileiGenerators:
    """H = |p|^2/2M, Pi_i = p_i, L_i = e_ijk q_j p_k, G_i = M q_i - t p_i."""
    if M <= 0:
        raise ValueError("mass must be positive")
    M = exact(M)
    names = PHASE_VARS[dim]
    qs = [PolyPhaseFn.var(n, names) for n in names[:dim]]
    ps = [PolyPhaseFn.var(n, names) for n in names[dim:]]
    tt = _time(t, names)
    gens = {"H": sum((pk**2 for pk in ps), PolyPhaseFn({}, names)) / (2 * M)}
    for i in range(dim):
        gens[f"Pi_{AXES[i]}"] = ps[i]
    if dim == 3:
        for i in range(3):
            j, k = (i + 1) % 3, (i + 2) % 3
            gens[f"L_{AXES[i]}"] = qs[j] * ps[k] - qs[k] * ps[j]
    for i in range(dim):
        gens[f"G_{AXES[i]}"] = qs[i] * M - ps[i] * tt
    return GalileiGenerators("phase", M, t, gens)


def expected_bracket(a: str, b: str, M) -> list[tuple[object, str | None]]:
    """Right-hand side of {a, b} as ``[(coefficient, generator or None), ...]``.

    ``None`` stands for the central element (the constant 1).
    """
    ka, ia = a.split("_")[0], a.split("_")[1] if "_" in a else None
    kb, ib = b.split("_")[0], b.split("_")[1] if "_" in b else None
    i = AXES.index(ia) if ia else None
    j = AXES.index(ib) if ib else None

    def eps_sum(kind):
        return [(_eps(i, j, k), f"{kind}_{AXES[k]}") for k in range(3) if _eps(i, j, k)]

    if ka == "L" and kb in ("Pi", "L", "G"):
        return eps_sum(kb)
    if kb == "L" and ka in ("Pi", "G"):
        i, j = j, i
        return [(-c, g) for c, g in eps_sum(ka)]
    if ka == "G" and kb == "Pi":
        return [(M, None)] if i == j else []
    if ka == "Pi" and kb == "G":
        return [(-M, None)] if i == j else []
    if ka == "G" and kb == "H":
        return [(1, f"Pi_{ia}")]
    if ka == "H" and kb == "G":
        return [(-1, f"Pi_{ib}")]
    return []


def _symbols(a, b) -> str:
    return f"{{{a},{b}}}"


def _rhs_text(rhs) -> str:
    if not rhs:
        return "0"
    parts = []
    for c, g in rhs:
        if g is None:
            parts.append(str(c))
        else:
            parts.append(g if c == 1 else f"-{g}" if c == -1 else f"{c}*{g}")
    return " + ".join(parts).replace("+ -", "- ")


def _record(rep, a, b, expected, got, residual, passed) -> dict:
    return {"representation": rep, "symbols": _symbols(a, b), "expected": expected,
            "got": got, "residual": residual, "passed": bool(passed)}


def check_galilei_symbolic(gen: GalileiGenerators) -> list[dict]:
    """All pairwise Poisson brackets of the phase-space generators, compared exactly."""
    if gen.representation != "phase":
        raise ValueError("symbolic check needs phase-space generators")
    out = []
    for a, b in combinations(gen.names, 2):
        got = poisson_bracket(gen[a], gen[b])
        want = PolyPhaseFn({}, got.variables)
        for c, g in expected_bracket(a, b, gen.M):
            want = want + (gen[g] * c if g else c)
        diff = got - want
        out.append(_record("phase", a, b, _rhs_text(expected_bracket(a, b, gen.M)), str(got),
                           0.0 if diff.is_zero() else float("inf"), diff.is_zero()))
    return out


def check_galilei_vanhove(hbar=1.0, t=0, M=1, grid_check: bool = True) -> list[dict]:
    """(1/i hbar)[A, B] for the van Hove images of all generators, compared exactly.

    With ``grid_check`` the 1D expectation <phi| (1/i hbar)[G, Pi] |phi> = M is
    also evaluated on a Gaussian phi.
    """
    gen = galilei_phase(M, t)
    ops = {k: vanhove_of(v, hbar) for k, v in gen.generators.items()}
    one = identity(3, hbar)
    out = []
    for a, b in combinations(gen.names, 2):
        got = commute(ops[a], ops[b]).times_ihbar(-1)
        want = None
        for c, g in expected_bracket(a, b, gen.M):
            term = ops[g].scale(c) if g else one.scale(c)
            want = term if want is None else want + term
        diff = got if want is None else got - want
        ok = diff.is_zero()
        out.append(_record("vanhove", a, b, _rhs_text(expected_bracket(a, b, gen.M)), str(got),
                           0.0 if ok else float("inf"), ok))
    if grid_check:
        g1 = galilei_phase(M, t, dim=1)
        grid = Grid.make(Axis("q", -8, 8, 64), Axis("p", -8, 8, 64))
        phi = gaussian_wavefunction(grid, (0.3, -0.2), (1.0, 0.9), hbar=hbar)
        op = commute(vanhove_of(g1["G_x"], hbar), vanhove_of(g1["Pi_x"], hbar)).times_ihbar(-1)
        val = expectation(op, phi, hbar)
        res = abs(val - float(M))
        out.append(_record("vanhove-grid", "G_x", "Pi_x", str(M), repr(val.real), res, res <= 1e-8))
    return out


def _functional_gens(M, t) -> dict:
    g = galilei_phase(M, t, dim=1)
    return {"H": g["H"], "Pi": g["Pi_x"], "G": g["G_x"]}


def check_galilei_functional(representation: str, ens, tol: float = 1e-5, t=0) -> list[dict]:
    """Functional brackets of the 1D generators {H, Pi, G} on an ensemble."""
    if representation == "ecs":
        if not isinstance(ens, ConfigEnsemble):
            raise TypeError("ecs check needs a ConfigEnsemble")
        bracket, observe = bracket_ecs, observable_ecs
    elif representation == "eps":
        if not isinstance(ens, PhaseEnsemble):
            raise TypeError("eps check needs a PhaseEnsemble")
        bracket, observe = bracket_eps, observable_eps
    else:
        raise ValueError(f"unknown functional representation {representation!r}")
    M = ens.M
    gens = _functional_gens(M, t)
    table = {("G", "Pi"): [(M, None)], ("H", "Pi"): [], ("G", "H"): [(1, "Pi")]}
    out = []
    for (a, b), rhs in table.items():
        got = bracket(gens[a], gens[b], ens)
        want = sum(c * (observe(ens, gens[g]) if g else 1.0) for c, g in rhs)
        res = abs(got - want)
        out.append(_record(representation, a, b, repr(float(want)), repr(float(got)), res, res <= tol))
    return out


def all_passed(records) -> bool:
    return all(r["passed"] for r in records)


def report_json(records) -> str:
    def clean(r):
        r = dict(r)
        if not np.isfinite(r["residual"]):
            r["residual"] = None
        return r

    return json.dumps([clean(r) for r in records], sort_keys=True, indent=1)
