import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hybridmech.numerics import (Axis, Field, Grid, GridError, PolyPhaseFn, derivative, field_from_dict,
                                 field_to_dict, integrate, load_field, poisson_bracket, save_field,
                                 sixth_difference)
from hybridmech.numerics.timestep import rk4_step

coeffs = st.integers(-4, 4)
monomial = st.tuples(st.integers(0, 3), st.integers(0, 3))
polys = st.dictionaries(monomial, coeffs, max_size=5).map(lambda d: PolyPhaseFn(d, ("q", "p")))


def test_axis_nodes_are_cell_centred():
    a = Axis("q", -1.0, 1.0, 8)
    assert a.spacing == 0.25
    np.testing.assert_allclose(a.nodes, -1 + 0.125 + 0.25 * np.arange(8))
    assert a.scaled(1.5).points == 12


@pytest.mark.parametrize("kwargs", [dict(name="y", min=0, max=1, points=8), dict(name="q", min=0, max=1, points=4),
                                    dict(name="q", min=1, max=0, points=8),
                                    dict(name="q", min=0, max=1, points=8, boundary="open")])
def test_axis_rejects_bad_input(kwargs):
    with pytest.raises(GridError):
        Axis(**kwargs)


def test_grid_budget_and_duplicates():
    a = Axis("q", 0, 1, 16)
    with pytest.raises(GridError):
        Grid.make(a, a)
    with pytest.raises(GridError):
        Grid.make(a, Axis("p", 0, 1, 16), budget=100)


def test_field_is_immutable_and_finite():
    g = Grid.make(Axis("q", 0, 1, 8))
    f = Field(g, np.ones(8))
    with pytest.raises(ValueError):
        f.values[0] = 2.0
    with pytest.raises(FloatingPointError):
        Field(g, np.full(8, np.nan))


def test_spectral_derivative_of_periodic_function():
    g = Grid.make(Axis("q", 0, 2 * np.pi, 32))
    x = g.coord("q")
    np.testing.assert_allclose(derivative(np.sin(3 * x), g, "q"), 3 * np.cos(3 * x), atol=1e-12)
    np.testing.assert_allclose(derivative(np.sin(3 * x), g, "q", 2), -9 * np.sin(3 * x), atol=1e-11)


def test_fd4_converges_at_fourth_order():
    errs = []
    for n in (32, 64):
        g = Grid.make(Axis("q", -1, 2, n))
        x = g.coord("q")
        errs.append(np.abs(derivative(np.exp(x), g, "q", scheme="fd4") - np.exp(x)).max())
    assert errs[0] / errs[1] > 12


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=6, max_size=6))
def test_sixth_difference_annihilates_quintics(c):
    g = Grid.make(Axis("q", -2, 2, 24), Axis("p", -1, 1, 12))
    x = g.coord("q") * np.ones(g.shape)
    vals = sum(ci * x**i for i, ci in enumerate(c))
    assert np.abs(sixth_difference(vals, g, "q")).max() <= 1e-9 * (1 + np.abs(vals).max())
    assert np.all(sixth_difference(vals, g, "q")[:3] == 0)


def test_integrate_gaussian():
    g = Grid.make(Axis("q", -10, 10, 200))
    x = g.coord("q")
    assert integrate(Field(g, np.exp(-x**2))) == pytest.approx(np.sqrt(np.pi), rel=1e-12)


def test_rk4_exponential():
    y = (np.array([1.0]),)
    for _ in range(10):
        y = rk4_step(y, lambda s: (-s[0],), 0.1)
    assert y[0][0] == pytest.approx(np.exp(-1), rel=1e-6)


# -- polynomials ----------------------------------------------------------------
def test_parse_and_print():
    F = PolyPhaseFn.parse("p^2/(2*M) + M*g*q", M=2, g=Fraction(1, 2))
    assert F == PolyPhaseFn({(0, 2): Fraction(1, 4), (1, 0): 1})
    assert PolyPhaseFn.parse(str(F)) == F


def test_canonical_bracket():
    q, p = PolyPhaseFn.var("q"), PolyPhaseFn.var("p")
    assert poisson_bracket(q, p) == 1
    assert poisson_bracket(q * q, p) == q * 2


@settings(max_examples=40, deadline=None)
@given(polys, polys)
def test_bracket_antisymmetry(F, G):
    assert (poisson_bracket(F, G) + poisson_bracket(G, F)).is_zero()


@settings(max_examples=25, deadline=None)
@given(polys, polys, polys)
def test_bracket_jacobi_and_leibniz(F, G, H):
    jac = (poisson_bracket(F, poisson_bracket(G, H)) + poisson_bracket(G, poisson_bracket(H, F))
           + poisson_bracket(H, poisson_bracket(F, G)))
    assert jac.is_zero()
    assert poisson_bracket(F, G * H) == poisson_bracket(F, G) * H + G * poisson_bracket(F, H)


@settings(max_examples=30, deadline=None)
@given(polys, st.floats(-2, 2), st.floats(-2, 2))
def test_evaluate_matches_sympy_route(F, a, b):
    import sympy as sp

    expr = sp.sympify(str(F).replace("^", "**"))
    want = float(expr.subs({"q": a, "p": b}))
    assert F.evaluate(q=a, p=b) == pytest.approx(want, rel=1e-12, abs=1e-12)


def test_field_io_round_trip(tmp_path):
    g = Grid.make(Axis("q", -1, 1, 8), Axis("p", 0, 2, 10))
    f = Field(g, np.random.default_rng(0).normal(size=g.shape))
    back = load_field(save_field(f, tmp_path / "f.json", "rho"))
    assert back.grid == g
    np.testing.assert_array_equal(back.values, f.values)
    c = Field(g, np.exp(1j * g.coord("q")) * np.ones(g.shape))
    d = json.loads(json.dumps(field_to_dict(c, "psi")))
    np.testing.assert_array_equal(field_from_dict(d).values, c.values)
