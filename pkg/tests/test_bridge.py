import numpy as np
import pytest

from hybridmech import bridge as br
from hybridmech import classical_phase as cph
from hybridmech.numerics import Axis, Grid, PolyPhaseFn
from hybridmech.potentials import Potential


@pytest.fixture(scope="module")
def rho():
    g = Grid.make(Axis("q", -8, 8, 96), Axis("p", -5, 5, 96))
    return cph.PhaseEnsemble.gaussian(g, (0.0, 1.0), (0.8, 0.6)).rho


@pytest.fixture(scope="module")
def mix(rho):
    return br.decompose(rho).validate()


def test_weights_are_the_momentum_marginal(rho, mix):
    marg = rho.values.sum(axis=0) * rho.grid.axis("q").spacing
    np.testing.assert_allclose(mix.weights, marg / (marg.sum() * mix.d_alpha), atol=1e-9)
    assert mix.mean_alpha() == pytest.approx(1.0, abs=1e-8)
    assert abs(mix.mass_defect) < 1e-10


def test_round_trip_error_shrinks_with_width(rho, mix):
    pa = rho.grid.axis("p")
    errs = [br.l1(br.recompose(mix, pa, w), rho) for w in (4 * pa.spacing, 2 * pa.spacing, pa.spacing)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 0.02
    with pytest.raises(ValueError):
        br.recompose(mix, pa, pa.spacing / 2)


def test_recompose_keeps_mass(rho, mix):
    out = br.recompose(mix, rho.grid.axis("p"))
    assert out.values.sum() * out.grid.cell_volume == pytest.approx(1.0, abs=1e-10)


def test_mixture_evolution_leaves_weights(mix):
    out = br.evolve_mixture(mix, Potential.free_fall(1.0, 1.0), 0.01, 20)
    assert np.array_equal(out.weights, mix.weights)
    assert out.t == pytest.approx(0.2)
    out.validate()


def test_archive_round_trip(tmp_path, mix):
    br.save_mixture(mix, tmp_path / "m")
    back = br.load_mixture(tmp_path / "m")
    np.testing.assert_array_equal(back.weights, mix.weights)
    np.testing.assert_array_equal(back.conditionals, mix.conditionals)
    np.testing.assert_array_equal(back.actions, mix.actions)
    assert back.hj.S == mix.hj.S and back.q_axis == mix.q_axis


def test_nonlinear_family_recovers_mean_momentum():
    g = Grid.make(Axis("q", -8, 8, 96), Axis("p", -5, 5, 96))
    rho = cph.PhaseEnsemble.gaussian(g, (0.0, 1.0), (0.8, 0.6)).rho
    hj = br.CompleteHJSolution(PolyPhaseFn.parse("(alpha + alpha^3/3)*q", ("q", "alpha")))
    mix = br.decompose(rho, hj, np.linspace(-2.2, 2.2, 221)).validate()
    mean_p = np.sum(mix.weights * (mix.alpha + mix.alpha**3 / 3)) * mix.d_alpha
    assert mean_p == pytest.approx(1.0, abs=1e-5)


def test_decomposition_errors(rho):
    with pytest.raises(br.DecompositionError):
        br.decompose(rho, alpha=np.linspace(-1, 1, 21))  # misses the support
    with pytest.raises(br.DecompositionError):
        br.decompose(rho, alpha=np.array([0.0, 0.1, 0.3]))
    with pytest.raises(br.DecompositionError):
        br.decompose(rho, br.CompleteHJSolution(PolyPhaseFn.parse("alpha^2*q", ("q", "alpha"))),
                     np.linspace(-3, 3, 61))
    with pytest.raises(ValueError):
        br.CompleteHJSolution(PolyPhaseFn.parse("alpha*q*p", ("q", "p", "alpha")))
