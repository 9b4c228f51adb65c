import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

import oracles
from hybridmech import galilean as gal
from hybridmech import vanhove as vh
from hybridmech.battery import observables, polynomial_pairs, random_poly
from hybridmech.classical_hilbert import gaussian_wavefunction
from hybridmech.numerics import Axis, Grid, PolyPhaseFn, poisson_bracket

Q, P = PolyPhaseFn.var("q"), PolyPhaseFn.var("p")


def test_battery_is_deterministic():
    a = [(str(F), str(G)) for F, G in polynomial_pairs(7)]
    assert a == [(str(F), str(G)) for F, G in polynomial_pairs(7)]
    assert a != [(str(F), str(G)) for F, G in polynomial_pairs(8)]
    assert len(a) == 20 and all(not PolyPhaseFn.parse(f).is_constant() for f, _ in a)


def _apply_sym(op: vh.FirstOrderOperator, g):
    """Apply an operator to a sympy expression through its exact coefficients."""
    out = 0
    for (alpha, k), c in op.terms.items():
        d = g
        for var, e in zip((oracles.q_, oracles.p_), alpha):
            d = sp.diff(d, var, e)
        out += oracles.sympy_of(c) * (sp.I * oracles.hbar_) ** k * d
    return out


@pytest.mark.parametrize("F", observables()[:8], ids=str)
def test_vanhove_of_matches_sympy_action(F):
    op = vh.vanhove_of(F, oracles.hbar_)
    got = _apply_sym(op, oracles.f_)
    want = oracles.sym_vanhove(oracles.sympy_of(F), oracles.f_)
    assert sp.expand(got - want) == 0


def test_isomorphism_on_battery_agrees_with_sympy():
    for F, G in polynomial_pairs():
        assert vh.isomorphism_residual(F, G).is_zero()
        assert oracles.sym_isomorphism_residual(oracles.sympy_of(F), oracles.sympy_of(G)) == 0


def test_oracle_rejects_wrong_sign():
    F, G = oracles.sympy_of(Q * Q), oracles.sympy_of(P * P)
    wrong = sp.expand(oracles.sym_vanhove(F, oracles.sym_vanhove(G, oracles.f_))
                      - oracles.sym_vanhove(G, oracles.sym_vanhove(F, oracles.f_))
                      + sp.I * oracles.hbar_ * oracles.sym_vanhove(oracles.sym_bracket(F, G), oracles.f_))
    assert wrong != 0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_isomorphism_random_polynomials(seed):
    rng = np.random.default_rng(seed)
    F, G = random_poly(rng, 4, 5), random_poly(rng, 4, 5)
    assert vh.isomorphism_residual(F, G, hbar=0.37).is_zero()


def test_canonical_commutator_and_displays():
    Oq, Op = vh.vanhove_of(Q), vh.vanhove_of(P)
    assert (vh.commute(Oq, Op) - vh.identity().times_ihbar(1)).is_zero()
    assert vh.format_operator(vh.compose(Oq, Oq)) == "q^2 + 2*q*i*hbar*d/dp - hbar^2*d^2/dp^2"
    got = sp.expand(_apply_sym(vh.compose(Oq, Oq), oracles.f_))
    f, q, p, h = oracles.f_, oracles.q_, oracles.p_, oracles.hbar_
    assert got == sp.expand(q**2 * f + 2 * sp.I * h * q * sp.diff(f, p) - h**2 * sp.diff(f, p, 2))
    got = sp.expand(_apply_sym(vh.compose(Op, Op), oracles.f_))
    assert got == sp.expand(-oracles.hbar_**2 * sp.diff(oracles.f_, oracles.q_, 2))


def test_second_order_operator_needs_explicit_opt_in():
    g = Grid.make(Axis("q", -8, 8, 64), Axis("p", -8, 8, 64))
    phi = gaussian_wavefunction(g, (0, 0), (1, 1))
    square = vh.compose(vh.vanhove_of(Q), vh.vanhove_of(Q))
    assert square.order == 2
    with pytest.raises(vh.OperatorAlgebraError):
        vh.apply(square, phi)
    assert np.isfinite(vh.apply(square, phi, allow_higher_order=True).values).all()


def test_apply_matches_sympy_on_grid():
    g = Grid.make(Axis("q", -8, 8, 96), Axis("p", -8, 8, 96))
    phi = gaussian_wavefunction(g, (0.3, -0.2), (0.9, 0.8), PolyPhaseFn.parse("q*p/2"), hbar=1.0)
    F = PolyPhaseFn.parse("q^2*p - 2*p^2 + q")
    expr = (sp.exp(-(oracles.q_ - sp.Rational(3, 10))**2 / (4 * sp.Rational(81, 100))
                   - (oracles.p_ + sp.Rational(1, 5))**2 / (4 * sp.Rational(64, 100))
                   + sp.I * oracles.q_ * oracles.p_ / 2))
    out = oracles.sym_vanhove(oracles.sympy_of(F), expr).subs(oracles.hbar_, 1)
    fn = sp.lambdify((oracles.q_, oracles.p_), out, "numpy")
    base = sp.lambdify((oracles.q_, oracles.p_), expr, "numpy")
    scale = phi.values[48, 48] / base(g.axis("q").nodes[48], g.axis("p").nodes[48])
    want = fn(g.coord("q"), g.coord("p")) * scale
    got = vh.apply(vh.vanhove_of(F), phi).values
    # the packet is ~1e-9 at the box edge; compare away from the wrap
    inner = (np.abs(g.coord("q")) < 6) & (np.abs(g.coord("p")) < 6)
    assert np.abs(got - want)[inner].max() < 1e-6 * np.abs(want).max()


def test_expectation_of_commutator_is_bracket_expectation():
    g = Grid.make(Axis("q", -8, 8, 96), Axis("p", -8, 8, 96))
    phi = gaussian_wavefunction(g, (0.1, 0.4), (0.8, 0.9), PolyPhaseFn.parse("q^2/3"))
    F, G = PolyPhaseFn.parse("q*p"), PolyPhaseFn.parse("p^2 + q^3")
    lhs = vh.expectation(vh.commute(vh.vanhove_of(F), vh.vanhove_of(G)).times_ihbar(-1), phi)
    rhs = vh.expectation(vh.vanhove_of(poisson_bracket(F, G)), phi)
    assert lhs == pytest.approx(rhs, abs=1e-10)


# -- Galilei -------------------------------------------------------------------------
@pytest.mark.parametrize("t", [0, 0.5, "t"])
def test_galilei_phase_table(t):
    recs = gal.check_galilei_symbolic(gal.galilei_phase(2, t))
    assert len(recs) == 45 and gal.all_passed(recs)


def test_galilei_vanhove_table():
    recs = gal.check_galilei_vanhove(1.0, 0.5, 2)
    assert gal.all_passed(recs)
    assert any(r["representation"] == "vanhove-grid" for r in recs)


def test_galilei_detects_wrong_mass():
    gen = gal.galilei_phase(2, 0)
    gen.generators["G_x"] = gen.generators["G_x"] * 2
    assert not gal.all_passed(gal.check_galilei_symbolic(gen))


def test_galilei_report_is_json():
    import json

    recs = gal.check_galilei_symbolic(gal.galilei_phase(1, 0))
    data = json.loads(gal.report_json(recs))
    assert len(data["records"] if isinstance(data, dict) else data) == 45
