import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from hybridmech import classical_config as cc
from hybridmech import classical_hilbert as ch
from hybridmech import classical_phase as cph
from hybridmech.errors import CausticError, StabilityError
from hybridmech.numerics import Axis, Field, Grid, PolyPhaseFn
from hybridmech.potentials import Potential

Q, P = PolyPhaseFn.var("q"), PolyPhaseFn.var("p")


@pytest.fixture(scope="module")
def qgrid():
    return Grid.make(Axis("q", -8, 8, 256))


# -- configuration space -----------------------------------------------------------
def test_free_ecs_translates_rigidly(qgrid):
    ens = cc.ConfigEnsemble.gaussian(qgrid, -1.0, 0.7, PolyPhaseFn.parse("q"))
    out = cc.evolve_ecs(ens, None, 0.005, 400)
    assert cc.observable_ecs(out, Q) == pytest.approx(1.0, abs=1e-9)
    shifted = cc.ConfigEnsemble.gaussian(qgrid, 1.0, 0.7)
    assert np.abs(out.P.values - shifted.P.values).sum() * qgrid.cell_volume < 1e-6


def test_harmonic_ecs_mean_follows_characteristics(qgrid):
    ens = cc.ConfigEnsemble.gaussian(qgrid, 1.0, 0.8, PolyPhaseFn.parse("q/2"))
    V = Potential.harmonic(1.0, 1.0)
    out = cc.evolve_ecs(ens, V, 0.002, 600)
    qv = qgrid.axis("q").nodes
    w = ens.P.values
    keep = w > 1e-14 * w.max()
    want = oracles.ecs_mean_q(qv[keep], w[keep], lambda x: 0.5 + 0 * x, lambda x: x, 1.2)
    assert cc.observable_ecs(out, Q) == pytest.approx(want, abs=1e-3)
    assert cc.ensemble_hamiltonian(out, V) == pytest.approx(cc.ensemble_hamiltonian(ens, V), abs=1e-6)


def test_focusing_action_raises_caustic(qgrid):
    # every characteristic reaches q = 0 at t = 2; -S'' = 1/(2 - t) passes 1 at t = 1
    ens = cc.ConfigEnsemble.gaussian(qgrid, 0.0, 1.0, PolyPhaseFn.parse("-q^2/4"))
    with pytest.raises(CausticError) as exc:
        cc.evolve_ecs(ens, None, 0.004, 400, caustic_threshold=1.0)
    assert exc.value.diagnostic["error"] == "CausticError"
    assert 240 <= exc.value.diagnostic["step"] <= 260


def test_ecs_step_bound(qgrid):
    ens = cc.ConfigEnsemble.gaussian(qgrid, 0.0, 1.0, PolyPhaseFn.parse("40*q"))
    with pytest.raises(StabilityError):
        cc.evolve_ecs(ens, None, 0.1, 1)


def test_ecs_functional_derivatives_match_bumps():
    F = PolyPhaseFn.parse("q*p^2 + p")
    rel = []
    for n in (160, 320):
        g = Grid.make(Axis("q", -8, 8, n))
        ens = cc.ConfigEnsemble.gaussian(g, 0.3, 0.8, PolyPhaseFn.parse("q/2 + q^2/10"))
        dP, dS = cc.functional_derivatives_ecs(ens, F)
        errs = []
        for c in (-0.5, 0.4, 1.0):
            bP, bS = cc.bump_functional_derivatives(ens, F, c, 0.3)
            assert bP == pytest.approx(cc.bump_weighted(dP, c, 0.3), rel=1e-9)
            errs.append(abs(bS / cc.bump_weighted(dS, c, 0.3) - 1))
        rel.append(max(errs))
    # the response differentiates S with fd4, dS is spectral: agreement improves at 4th order
    assert rel[1] < 2e-5 and rel[0] / rel[1] > 12


def test_ecs_bracket_of_q_and_p_is_one():
    g = Grid.make(Axis("q", -8, 8, 160))
    ens = cc.ConfigEnsemble.gaussian(g, 0.3, 0.8, PolyPhaseFn.parse("q^2/4"))
    assert cc.bracket_ecs(Q, P, ens) == pytest.approx(1.0, abs=1e-10)


# -- phase space ------------------------------------------------------------------
def test_liouville_free_fall_matches_characteristics():
    g = Grid.make(Axis("q", -8, 8, 96), Axis("p", -6, 6, 96))
    ens = cph.PhaseEnsemble.gaussian(g, (0.0, 1.0), (0.8, 0.6), PolyPhaseFn.parse("q*p"))
    rho = cph.evolve_density(ens.rho, Potential.free_fall(1.0, 1.0), 1.0, 0.01, 200)
    want = oracles.free_fall_density(g.coord("q"), g.coord("p"), 2.0, (0.0, 1.0), (0.8, 0.6))
    assert np.abs(rho.values - want).sum() * g.cell_volume < 1e-5


def test_liouville_step_bound():
    g = Grid.make(Axis("q", -8, 8, 96), Axis("p", -6, 6, 96))
    rho = cph.PhaseEnsemble.gaussian(g, (0, 0), (1, 1)).rho
    with pytest.raises(StabilityError):
        cph.evolve_density(rho, Potential.harmonic(1.0, 3.0), 1.0, 0.05, 1)


def test_sigma_survives_a_full_harmonic_period():
    g = Grid.make(Axis("q", -6, 6, 96), Axis("p", -6, 6, 96))
    sigma0 = Field(g, (g.coord("q") * g.coord("p")) * np.ones(g.shape))
    w = np.pi / 2
    s = cph.evolve_action(sigma0, Potential.harmonic(1.0, w), 1.0, 0.004, 1000)
    # after one period every point returns; sigma gains the action of its closed orbit,
    # which for H = p^2/2 + w^2 q^2/2 averages the Lagrangian to zero
    inner = (np.abs(g.coord("q")) < 4) & (np.abs(g.coord("p")) < 4)
    err = np.abs(s.values - sigma0.values)[np.broadcast_to(inner, g.shape)]
    assert err.max() < 1e-5


def test_trajectory_sigma_is_exact():
    spec = cph.free_fall_spec(2, 3, 1, -1)
    r1, r2 = cph.trajectory_constraint_residuals(spec)
    assert r1.is_zero() and r2.is_zero()
    L = cph.lagrangian_of(spec.H)
    rate = cph.trajectory_action_rate(spec)
    assert (rate - L.with_variables(rate.variables)).is_zero()


def test_bad_trajectory_spec_is_rejected():
    with pytest.raises(cph.SigmaSpecError):
        cph.TrajectorySigmaSpec(Q * P, P, P * P / 2)


def test_lift_reproduces_configuration_marginal():
    qg = Grid.make(Axis("q", -6, 6, 128))
    ens = cc.ConfigEnsemble.gaussian(qg, 0.3, 0.8, PolyPhaseFn.parse("q/2"))
    pa = Axis("p", -1, 2, 96)
    lift = cph.lift_from_config(ens, pa)
    marg = lift.rho.values.sum(axis=1) * pa.spacing
    np.testing.assert_allclose(marg, ens.P.values, atol=1e-12)
    with pytest.raises(ValueError):
        cph.lift_from_config(ens, pa, pa.spacing / 2)


@settings(max_examples=15, deadline=None)
@given(st.floats(-0.5, 0.5), st.floats(-0.5, 0.5), st.floats(0.6, 1.0))
def test_eps_bracket_of_canonical_pair(q0, p0, w):
    g = Grid.make(Axis("q", -8, 8, 64), Axis("p", -8, 8, 64))
    ens = cph.PhaseEnsemble.gaussian(g, (q0, p0), (w, w), PolyPhaseFn.parse("q*p/3"))
    assert cph.bracket_eps(Q, P, ens) == pytest.approx(1.0, abs=1e-8)


def test_wide_ensemble_trips_boundary_decay():
    g = Grid.make(Axis("q", -3, 3, 48), Axis("p", -3, 3, 48))
    ens = cph.PhaseEnsemble.gaussian(g, (0, 0), (1.2, 1.2))
    with pytest.raises(cph.BoundaryDecayError):
        cph.bracket_eps(Q, P, ens)


# -- classical wavefunctions ----------------------------------------------------------
@pytest.fixture(scope="module")
def pgrid():
    return Grid.make(Axis("q", -8, 8, 96), Axis("p", -8, 8, 96))


def test_madelung_round_trip(pgrid):
    ens = cph.PhaseEnsemble.gaussian(pgrid, (0.3, -0.2), (0.9, 0.8), PolyPhaseFn.parse("q*p/2"))
    phi = ch.madelung_join(ens.rho, ens.sigma, 0.7)
    split = ch.madelung_split(phi, 0.7)
    np.testing.assert_allclose(split.rho.values, ens.rho.values, atol=1e-15)
    d = split.defined
    diff = split.sigma.values[d] - ens.sigma.values[d]
    assert np.ptp(diff) < 1e-9


@pytest.mark.parametrize("hbar", [0.5, 1.0, 2.0])
def test_expectation_equals_phase_space_observable(pgrid, hbar):
    ens = cph.PhaseEnsemble.gaussian(pgrid, (0.3, 0.2), (0.8, 0.7), PolyPhaseFn.parse("q*p"))
    phi = ch.madelung_join(ens.rho, ens.sigma, hbar)
    for F in (Q, P, PolyPhaseFn.parse("q^2*p - p^3/3 + 2*q")):
        v = ch.expectation_value(F, phi, hbar)
        assert abs(v.imag) < 1e-10
        assert v.real == pytest.approx(cph.observable_eps(ens, F), abs=1e-10)


def test_vanhove_free_fall_matches_liouville(pgrid):
    g = Grid.make(Axis("q", -8, 8, 96), Axis("p", -6, 6, 96))
    ens = cph.PhaseEnsemble.gaussian(g, (0.0, 1.0), (0.8, 0.6))
    V = Potential.free_fall(1.0, 1.0)
    phi = ch.evolve_vanhove(ch.madelung_join(ens.rho, ens.sigma), V, 1.0, 1.0, 0.01, 100)
    rho = cph.evolve_density(ens.rho, V, 1.0, 0.01, 100)
    assert np.abs(np.abs(phi.phi.values) ** 2 - rho.values).sum() * g.cell_volume < 1e-4
    assert phi.norm == pytest.approx(1.0, abs=1e-10)


def test_no_uncertainty_bound():
    prod, quarter = ch.no_uncertainty_demo((0.05, 0.05), 1.0)
    assert quarter == 0.25
    assert prod < 1e-2 * 1.0
    assert prod == pytest.approx(0.05**4, rel=1e-3)
    with pytest.raises(ValueError):
        ch.no_uncertainty_demo((0.05, 0.05), 1.0, points=8)


def test_cross_bracket_commutator(pgrid):
    phi = ch.gaussian_wavefunction(pgrid, (0.3, -0.2), (0.9, 0.8), PolyPhaseFn.parse("q*p/2 + q^2/4"))
    lhs, rhs = ch.cross_bracket_check(PolyPhaseFn.parse("q^2*p"), PolyPhaseFn.parse("p^2 - q"), phi)
    assert lhs == pytest.approx(rhs, abs=1e-4)
