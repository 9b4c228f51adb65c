import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from hybridmech import classical_config as cc
from hybridmech import hybrid as hy
from hybridmech import runner
from hybridmech.errors import StabilityError
from hybridmech.numerics import Axis, Field, Grid, PolyPhaseFn
from hybridmech.verify import _short


@pytest.fixture(scope="module")
def cube():
    return Grid.make(*(Axis(n, -6, 6, 64) for n in ("q", "p", "x")))


# -- correlated Gaussian family ----------------------------------------------------------
def test_gauss_hermite_oracle_reproduces_frozen_value():
    assert oracles.lambda_family_energies(0.4)["difference"] == pytest.approx(oracles.LAMBDA_04_DIFFERENCE,
                                                                               rel=1e-12)
    assert oracles.lambda_family_energies(0.0)["difference"] == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("lam", [0.0, 0.2, 0.4])
def test_lambda_family_energies_match_quadrature(cube, lam):
    got = hy.compare_hybrid_energies(hy.lambda_family(cube, lam))
    want = oracles.lambda_family_energies(lam)
    assert got["Q_EPS"] == pytest.approx(want["Q_EPS"], rel=1e-5)
    assert got["Q_ECS"] == pytest.approx(want["Q_ECS"], rel=1e-5)
    assert got["identity_residual"] == pytest.approx(0, abs=1e-6)
    closed = hy.lambda_family_closed_form(lam)
    assert closed["difference"] == pytest.approx(want["difference"], rel=1e-10, abs=1e-14)


@settings(max_examples=6, deadline=None)
@given(st.floats(0.0, 0.8))
def test_energy_split_identity_closes(lam):
    g = Grid.make(*(Axis(n, -6, 6, 40) for n in ("q", "p", "x")))
    e = hy.compare_hybrid_energies(hy.lambda_family(g, lam))
    assert abs(e["identity_residual"]) < 1e-8 * e["Q_EPS"]
    assert e["difference"] >= -1e-6


@pytest.mark.parametrize("lam", [0.0, 0.4, 0.8])
def test_mutual_information_closed_form(cube, lam):
    assert hy.mutual_information(hy.lambda_family(cube, lam)) == pytest.approx(
        -0.5 * np.log(1 - lam**2 / 4), abs=1e-8)


# -- interactions ---------------------------------------------------------------------
def test_interaction_must_be_even():
    s = PolyPhaseFn.var("s", ("s",))
    with pytest.raises(ValueError):
        hy.InteractionPotential(s**3)
    with pytest.raises(ValueError):
        hy.InteractionPotential(value=lambda s: s, slope=lambda s: 1 + 0 * s)
    V = hy.InteractionPotential.harmonic(2.0)
    assert V.slope(np.array([0.5]))[0] == pytest.approx(1.0)


# -- Hilbert-space hybrid ---------------------------------------------------------------
def _product(m=1.0, wx=0.5, x_axis=Axis("x", -12, 12, 128), q0=0.0, S=None):
    qg = Grid.make(Axis("q", -6, 6, 32))
    classical = cc.ConfigEnsemble.gaussian(qg, q0, 0.6, S)
    psi_x = runner.quantum_factor(x_axis, 0.0, wx)
    ens = hy.lift_product(classical, psi_x, Axis("p", -4, 4, 32), x_axis, 0.5, m)
    return ens.to_wavefunction()


def _x_variance(wf):
    _, rq = hy.marginals(wf)
    x = rq.grid.axis("x").nodes
    w = rq.values * rq.grid.cell_volume
    mean = np.sum(w * x)
    return np.sum(w * (x - mean) ** 2)


def test_uncoupled_quantum_sector_spreads_freely():
    wf = _product()
    out = hy.evolve_hybrid_hilbert(wf, None, 0.01, 100)
    assert _x_variance(out) == pytest.approx(oracles.free_gaussian_variance(0.5, 1.0, 1.0, 1.0), rel=1e-6)
    assert hy.gaussian_variance_free(0.5, 1.0, 1.0, 1.0) == pytest.approx(
        oracles.free_gaussian_variance(0.5, 1.0, 1.0, 1.0))


def test_hilbert_hybrid_conserves_norm_energy_momentum():
    V = hy.InteractionPotential.harmonic(0.5)
    wf = _product(m=4.0, x_axis=Axis("x", -6, 6, 48), q0=0.3, S=PolyPhaseFn.parse("q/2"))
    e0, p0 = hy.hybrid_energy(wf, V), hy.hybrid_total_momentum(wf)
    out = hy.evolve_hybrid_hilbert(wf, V, 0.01, 100)
    assert out.norm == pytest.approx(wf.norm, abs=1e-10)
    assert hy.hybrid_energy(out, V) == pytest.approx(e0, abs=1e-4)
    assert hy.hybrid_total_momentum(out) == pytest.approx(p0, abs=1e-5)


def test_hilbert_step_bound():
    wf = _product(x_axis=Axis("x", -6, 6, 32))
    with pytest.raises(StabilityError):
        hy.evolve_hybrid_hilbert(wf, hy.InteractionPotential.harmonic(50.0), 1.0, 1)


def test_madelung_residuals_are_small():
    cfg = _short("hybrid_harmonic_hilbert", 0.2)
    wf = runner.build_hybrid_wavefunction(cfg)
    rows = hy.madelung_residual_series(wf, runner.interaction(cfg), 0.01, 20, every=10)
    assert len(rows) == 3
    assert max(r["continuity"] for r in rows) < 1e-3
    assert max(r["action"] for r in rows) < 1e-3


# -- configuration-space hybrid ---------------------------------------------------------
def test_ecs_hybrid_conserves():
    res = runner.run(_short("hybrid_harmonic_ecs", 0.5))
    s = res.report["summary"]
    assert s["norm_drift"] < 1e-8
    assert s["energy_drift"] < 1e-4
    assert s["momentum_drift"] < 1e-5


def test_ecs_hybrid_rejects_wrong_grid():
    g = Grid.make(Axis("q", -4, 4, 16), Axis("p", -4, 4, 16))
    f = Field(g, np.ones(g.shape))
    with pytest.raises(ValueError):
        hy.HybridConfigEnsemble(f, f)
