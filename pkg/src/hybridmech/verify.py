"""Invariant suites behind ``hybridmech verify``.

Each suite returns a list of check records ``{suite, name, value, tol, passed}``.
Operators and brackets are looked up through their modules at call time, so a
patched implementation is what gets verified.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from . import bridge as br
from . import classical_config as cc
from . import classical_hilbert as ch
from . import classical_phase as cph
from . import config as cfgmod
from . import hybrid as hy
from . import runner
from . import vanhove as vh
from .battery import DEFAULT_SEED, observables, polynomial_pairs
from .numerics.grid import Axis, Grid
from .numerics.poly import PolyPhaseFn, poisson_bracket

SCHEMA_VERSION = 1
SUITES = ("classical", "algebra", "hybrid", "bridge")

BRACKET_TOL = 1e-5
CROSS_TOL = 1e-4
REDUCED_TOL = 1e-4
HBAR_SPREAD_TOL = 1e-5
EXPECTATION_TOL = 1e-8
HERMITIAN_TOL = 1e-8
LIOUVILLE_L1_TOL = 1e-4
NORM_TOL = 1e-8
ENERGY_TOL = 1e-4
MOMENTUM_TOL = 1e-5
MADELUNG_TOL = 1e-3
ROUND_TRIP_TOL = 0.02
TWO_PATH_TOL = 0.025
HBARS = (0.5, 1.0, 2.0)


def _rec(suite, name, value, tol, passed=None) -> dict:
    value = float(value)
    ok = (np.isfinite(value) and abs(value) <= tol) if passed is None else bool(passed)
    return {"suite": suite, "name": name, "value": value, "tol": float(tol), "passed": bool(ok)}


# -- shared test ensembles ------------------------------------------------------
def ecs_ensembles() -> list[cc.ConfigEnsemble]:
    """Localised configuration ensembles whose tails vanish well inside [-8, 8]."""
    g = Grid.make(Axis("q", -8, 8, 160))
    specs = [("q/2", 0.3, 0.8, 1.0), ("-q/3 + q^2/10", -0.5, 0.6, 2.0), ("q^3/30", 0.0, 0.7, 1.0)]
    return [cc.ConfigEnsemble.gaussian(g, q0, w, PolyPhaseFn.parse(S), M) for S, q0, w, M in specs]


def eps_ensembles() -> list[cph.PhaseEnsemble]:
    g = Grid.make(Axis("q", -8, 8, 96), Axis("p", -8, 8, 96))
    specs = [((0.3, 0.2), (0.8, 0.7), "q*p"), ((-0.4, 0.5), (0.6, 0.9), "q*p/2 + q^2/5"),
             ((0.0, 0.0), (0.7, 0.7), "p^2/3 - q")]
    return [cph.PhaseEnsemble.gaussian(g, c, w, PolyPhaseFn.parse(s)) for c, w, s in specs]


def lifted_ensemble() -> cph.PhaseEnsemble:
    """A configuration ensemble lifted onto a narrow momentum window around S' = 1/2."""
    qg = Grid.make(Axis("q", -6, 6, 128))
    ens = cc.ConfigEnsemble.gaussian(qg, 0.3, 0.8, PolyPhaseFn.parse("q/2"))
    pa = Axis("p", 0.48, 0.52, 64)
    return cph.lift_from_config(ens, pa, pa.spacing)


def probe_wavefunction(hbar: float = 1.0):
    g = Grid.make(Axis("q", -8, 8, 96), Axis("p", -8, 8, 96))
    return ch.gaussian_wavefunction(g, (0.3, -0.2), (0.9, 0.8), PolyPhaseFn.parse("q*p/2 + q^2/4"), hbar)


def _short(name: str, T: float) -> cfgmod.ScenarioConfig:
    cfg = cfgmod.load(name)
    return dataclasses.replace(cfg, integrator=dataclasses.replace(cfg.integrator, T=T))


# -- classical -------------------------------------------------------------------
def suite_classical(seed: int = DEFAULT_SEED) -> list[dict]:
    S = "classical"
    pairs = polynomial_pairs(seed)
    out = []
    err = max(abs(cc.bracket_ecs(F, G, e) - cc.observable_ecs(e, poisson_bracket(F, G)))
              for e in ecs_ensembles() for F, G in pairs)
    out.append(_rec(S, "ecs bracket matches observable of Poisson bracket", err, BRACKET_TOL))
    err = max(abs(cph.bracket_eps(F, G, e) - cph.observable_eps(e, poisson_bracket(F, G)))
              for e in eps_ensembles() for F, G in pairs)
    out.append(_rec(S, "eps bracket matches observable of Poisson bracket", err, BRACKET_TOL))

    phi = probe_wavefunction()
    err = 0.0
    for F, G in pairs:
        lhs, rhs = ch.cross_bracket_check(F, G, phi)
        err = max(err, abs(lhs - rhs))
    out.append(_rec(S, "eps bracket equals commutator expectation", err, CROSS_TOL))

    other = ch.gaussian_wavefunction(phi.grid, (-0.2, 0.4), (0.7, 1.0), PolyPhaseFn.parse("q - p^2/5"))
    dv = phi.grid.cell_volume
    err = 0.0
    for F in observables(seed):
        op = vh.vanhove_of(F, 1.0)
        a = np.vdot(phi.values, vh.apply(op, other).values) * dv
        b = np.vdot(vh.apply(op, phi).values, other.values) * dv
        err = max(err, abs(a - b) / max(1.0, abs(a)))
    out.append(_rec(S, "van Hove operators are Hermitian", err, HERMITIAN_TOL))

    ens = eps_ensembles()[0]
    err = 0.0
    for hbar in HBARS:
        psi = ch.madelung_join(ens.rho, ens.sigma, hbar)
        for F in observables(seed)[:10]:
            err = max(err, abs(ch.expectation_value(F, psi, hbar) - cph.observable_eps(ens, F)))
    out.append(_rec(S, "van Hove expectation equals eps observable", err, EXPECTATION_TOL))

    lift = lifted_ensemble()
    err = max(abs(cph.observable_eps(lift, F) - cph.observable_eps_reduced(lift, F))
              for F in observables(seed))
    out.append(_rec(S, "full and reduced observables agree on a lifted ensemble", err, REDUCED_TOL))
    spread = 0.0
    for F in observables(seed):
        vals = [ch.expectation_value(F, ch.madelung_join(lift.rho, lift.sigma, h), h).real for h in HBARS]
        spread = max(spread, max(vals) - min(vals))
    out.append(_rec(S, "observables are hbar independent", spread, HBAR_SPREAD_TOL))

    spec = cph.free_fall_spec(1, 1, 0, 1)
    r1, r2 = cph.trajectory_constraint_residuals(spec)
    out.append(_rec(S, "free-fall sigma satisfies the constraints on the trajectory", 0.0, 0.0,
                    r1.is_zero() and r2.is_zero()))
    rate = cph.trajectory_action_rate(spec) - cph.lagrangian_of(spec.H).with_variables(
        cph.trajectory_action_rate(spec).variables)
    out.append(_rec(S, "free-fall sigma advances by the Lagrangian", 0.0, 0.0, rate.is_zero()))

    res = runner.run(cfgmod.load("free_fall_vanhove"))
    out.append(_rec(S, "free-fall |phi|^2 matches Liouville (L1)", res.report["summary"]["liouville_l1"],
                    LIOUVILLE_L1_TOL))
    out.append(_rec(S, "free-fall van Hove norm drift", res.report["summary"]["norm_drift"], NORM_TOL))
    res = runner.run(cfgmod.load("free_ecs"))
    last = res.series[-1]
    cfg = cfgmod.load("free_ecs")
    expected = cfg.initial["q0"] + last["t"] * 1.0 / cfg.M
    out.append(_rec(S, "free ecs translates at dS/dq / M", last["mean_q"] - expected, 1e-6))
    out.append(_rec(S, "free ecs energy drift", res.report["summary"]["energy_drift"], ENERGY_TOL))
    res = runner.run(_short("harmonic_eps", 1.0))
    out.append(_rec(S, "Liouville mass conservation", res.report["summary"]["norm_drift"], NORM_TOL))
    out.append(_rec(S, "Liouville energy drift", res.report["summary"]["energy_drift"], ENERGY_TOL))
    return out


# -- operator algebra ------------------------------------------------------------
def _displays(hbar=1.0) -> dict[str, vh.FirstOrderOperator]:
    q = PolyPhaseFn.var("q")
    return {
        "OqOq": vh.FirstOrderOperator({((0, 0), 0): q * q, ((0, 1), 1): q * 2, ((0, 2), 2): 1}, 1, hbar),
        "OpOp": vh.FirstOrderOperator({((2, 0), 2): 1}, 1, hbar),
    }


def suite_algebra(seed: int = DEFAULT_SEED) -> list[dict]:
    S = "algebra"
    out = []
    pairs = polynomial_pairs(seed)
    bad = 0
    for F, G in pairs:
        try:
            bad += not vh.isomorphism_residual(F, G).is_zero()
        except vh.OperatorAlgebraError:
            bad += 1
    out.append(_rec(S, f"[O_F, O_G] = i hbar O_{{F,G}} on {len(pairs)} pairs", bad, 0))

    Oq = vh.vanhove_of(PolyPhaseFn.var("q"))
    Op = vh.vanhove_of(PolyPhaseFn.var("p"))
    try:
        ccr = vh.commute(Oq, Op) - vh.identity().times_ihbar(1)
        ok = ccr.is_zero()
    except vh.OperatorAlgebraError:
        ok = False
    out.append(_rec(S, "[Oq, Op] = i hbar", 0.0, 0.0, ok))
    disp = _displays()
    out.append(_rec(S, "Oq Oq = q^2 + 2 i hbar q d/dp - hbar^2 d2/dp2", 0.0, 0.0,
                    (vh.compose(Oq, Oq) - disp["OqOq"]).is_zero()))
    out.append(_rec(S, "Op Op = -hbar^2 d2/dq2", 0.0, 0.0, (vh.compose(Op, Op) - disp["OpOp"]).is_zero()))

    prod, bound = ch.no_uncertainty_demo()
    out.append(_rec(S, "localised state beats hbar^2/100", prod, bound / 25))

    bad = 0
    obs = observables(seed)[:9]
    for A, B, C in zip(obs[0::3], obs[1::3], obs[2::3]):
        a, b, c = (vh.vanhove_of(X) for X in (A, B, C))
        try:
            jac = (vh.commute(vh.commute(a, b), c) + vh.commute(vh.commute(b, c), a)
                   + vh.commute(vh.commute(c, a), b))
            bad += not jac.is_zero()
        except vh.OperatorAlgebraError:
            bad += 1
    out.append(_rec(S, "Jacobi identity for van Hove commutators", bad, 0))

    groups: dict[tuple, list[dict]] = {}
    for r in runner.galilei_records():
        groups.setdefault((r["representation"], str(r["t"])), []).append(r)
    for (rep, t), recs in groups.items():
        tol = runner.FUNCTIONAL_TOL if rep in ("ecs", "eps") else 0.0
        vals = [abs(r["residual"]) for r in recs if r["residual"] is not None and np.isfinite(r["residual"])]
        out.append(_rec(S, f"galilei table, {rep} representation, t={t} ({len(recs)} brackets)",
                        max(vals, default=0.0), tol, all(r["passed"] for r in recs)))
    return out


# -- hybrid ------------------------------------------------------------------------
def lambda_oracle(lam: float, m: float = 1.0, hbar: float = 1.0) -> float:
    """Q_EPS - Q_ECS for the correlated Gaussian family."""
    return hbar**2 * lam**2 / (16 * m)


def lambda_mutual_information(lam: float) -> float:
    """Mutual information of the Gaussian family: correlation -lam/2 between p and x."""
    return -0.5 * np.log(1 - lam**2 / 4)


def suite_hybrid(seed: int = DEFAULT_SEED) -> list[dict]:
    S = "hybrid"
    out = []
    cfg = cfgmod.load("hybrid_lambda_sweep")
    res = runner.run(cfg)
    for c in res.report["checks"]:
        out.append(_rec(S, f"lambda family {c['name']}", c["value"], c["tol"]))
    for row in res.series:
        lam = row["lambda"]
        if lam:
            rel = (row["difference"] - lambda_oracle(lam, cfg.m, cfg.hbar)) / lambda_oracle(lam, cfg.m, cfg.hbar)
            out.append(_rec(S, f"Q_EPS - Q_ECS at lambda={lam:g} matches closed form (rel)", rel, 1e-4))
    g = cfg.grid
    for lam in (0.0, 0.4):
        mi = hy.mutual_information(hy.lambda_family(g, lam))
        out.append(_rec(S, f"mutual information at lambda={lam:g}", mi - lambda_mutual_information(lam), 1e-6))

    res = runner.run(_short("hybrid_harmonic_ecs", 0.5))
    s = res.report["summary"]
    out.append(_rec(S, "hybrid ecs norm drift", s["norm_drift"], NORM_TOL))
    out.append(_rec(S, "hybrid ecs energy drift", s["energy_drift"], ENERGY_TOL))
    out.append(_rec(S, "hybrid ecs total momentum drift", s["momentum_drift"], MOMENTUM_TOL))

    res = runner.run(_short("hybrid_harmonic_hilbert", 0.5))
    s = res.report["summary"]
    out.append(_rec(S, "hybrid wavefunction norm drift", s["norm_drift"], NORM_TOL))
    out.append(_rec(S, "hybrid wavefunction energy drift", s["energy_drift"], ENERGY_TOL))
    out.append(_rec(S, "hybrid wavefunction total momentum drift", s["momentum_drift"], MOMENTUM_TOL))
    out.append(_rec(S, "Madelung continuity residual", s["max_continuity"], MADELUNG_TOL))
    out.append(_rec(S, "Madelung action residual", s["max_action"], MADELUNG_TOL))
    return out


# -- bridge ------------------------------------------------------------------------
def suite_bridge(seed: int = DEFAULT_SEED) -> list[dict]:
    S = "bridge"
    out = []
    cfg = cfgmod.load("bridge_free_fall")
    s = runner.bridge_analysis(cfg).report["summary"]
    out.append(_rec(S, "mixture weights are normalised", s["mass_defect"], NORM_TOL))
    out.append(_rec(S, "mean label equals mean momentum", s["mean_alpha_error"], NORM_TOL))
    out.append(_rec(S, "decompose then recompose (L1)", s["round_trip_l1"], ROUND_TRIP_TOL))
    out.append(_rec(S, "evolved mixture matches direct Liouville (L1)", s["two_path_l1"], TWO_PATH_TOL))
    out.append(_rec(S, "weights are constants of the motion", 0.0, 0.0, s["weights_unchanged"]))

    # a non-linear complete solution: p = dS/dq = alpha + alpha^3/3
    ens = runner.build_phase_ensemble(cfg)
    hj = br.CompleteHJSolution(PolyPhaseFn.parse("(alpha + alpha^3/3)*q", ("q", "alpha")), "cubic")
    mix = br.decompose(ens.rho, hj, np.linspace(-2.2, 2.2, 221), cfg.M).validate()
    qv = mix.q_axis.nodes
    mean_p = sum(w * np.sum(P * hj.momentum(qv, a)) * mix.q_axis.spacing
                 for a, w, P in zip(mix.alpha, mix.weights, mix.conditionals)) * mix.d_alpha
    out.append(_rec(S, "cubic labelling preserves mean momentum", mean_p - cfg.initial["centre"][1], 1e-6))
    return out


SUITE_FUNCS = {"classical": suite_classical, "algebra": suite_algebra, "hybrid": suite_hybrid,
               "bridge": suite_bridge}


def run_suite(suite: str, seed: int = DEFAULT_SEED) -> dict:
    names = SUITES if suite == "all" else (suite,)
    checks = []
    for n in names:
        checks += SUITE_FUNCS[n](seed)
    return {"schema_version": SCHEMA_VERSION, "suite": suite, "seed": seed, "checks": checks,
            "passed": all(c["passed"] for c in checks)}
