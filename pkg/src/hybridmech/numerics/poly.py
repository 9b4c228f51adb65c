"""Exact multivariate polynomials on phase space.

A :class:`PolyPhaseFn` is a sparse map from exponent tuples to coefficients.
Coefficients are kept in whatever exact type they arrive in (``int`` or
``Fraction``) so sums, products, derivatives and Poisson brackets of such
polynomials are exact.  Floats are accepted and then behave like floats.

Variables are named.  The phase-space variables are ``q, p`` in one
dimension and ``q1..q3, p1..p3`` in three; extra names (``t`` for time,
``s`` for a separation) are treated as parameters by the Poisson bracket.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Number
from typing import Mapping

import numpy as np

PHASE_VARS = {1: ("q", "p"), 3: ("q1", "q2", "q3", "p1", "p2", "p3")}
_ORDER = ("q", "q1", "q2", "q3", "p", "p1", "p2", "p3", "x")


def _var_key(name: str):
    return (_ORDER.index(name), "") if name in _ORDER else (len(_ORDER), name)


def _canonical_vars(names) -> tuple[str, ...]:
    return tuple(sorted(set(names), key=_var_key))


def exact(c):
    """Convert a float to the exact rational it represents; leave ints alone."""
    if isinstance(c, float):
        return Fraction(c)
    return c


class PolyPhaseFn:
    __slots__ = ("variables", "terms")

    def __init__(self, terms: Mapping[tuple, Number] | None = None,
                 variables: tuple[str, ...] = PHASE_VARS[1]):
        variables = tuple(variables)
        if len(set(variables)) != len(variables):
            raise ValueError(f"duplicate variables {variables}")
        canon = _canonical_vars(variables)
        perm = [variables.index(v) for v in canon]
        clean = {}
        for exps, c in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != len(variables) or min(exps, default=0) < 0:
                raise ValueError(f"bad exponent tuple {exps} for variables {variables}")
            key = tuple(exps[i] for i in perm)
            c = clean.get(key, 0) + c
            clean[key] = c
        self.variables = canon
        self.terms = {k: c for k, c in clean.items() if c != 0}

    # -- constructors -------------------------------------------------
    @classmethod
    def var(cls, name: str, variables: tuple[str, ...] | None = None) -> "PolyPhaseFn":
        variables = tuple(variables) if variables else _default_vars_for(name)
        if name not in variables:
            variables = variables + (name,)
        exps = tuple(1 if v == name else 0 for v in variables)
        return cls({exps: 1}, variables)

    @classmethod
    def const(cls, c, variables: tuple[str, ...] = PHASE_VARS[1]) -> "PolyPhaseFn":
        return cls({(0,) * len(variables): c}, variables)

    @classmethod
    def from_terms(cls, terms, variables=PHASE_VARS[1]) -> "PolyPhaseFn":
        """Build from ``[[coeff, [e1, e2, ...]], ...]`` lists (config format)."""
        return cls({tuple(e): c for c, e in terms}, variables)

    @classmethod
    def parse(cls, text: str, variables=PHASE_VARS[1], **params) -> "PolyPhaseFn":
        """Parse an expression such as ``"p^2/(2*M) + M*g*q"``.

        Named parameters are substituted as exact rationals; any other free
        symbol (``x``, ``s``, ``t``) is added to the variables.
        """
        import sympy

        syms = {v: sympy.Symbol(v) for v in variables}
        local = dict(syms)
        local.update({k: sympy.Rational(exact(v)) if isinstance(v, float) else v
                      for k, v in params.items()})
        expr = sympy.sympify(text.replace("^", "**"), locals=local)
        extra = sorted(str(s) for s in expr.free_symbols if str(s) not in syms)
        if extra:
            variables = _canonical_vars(tuple(variables) + tuple(extra))
            syms = {v: sympy.Symbol(v) for v in variables}
        poly = sympy.Poly(sympy.expand(expr), *[syms[v] for v in variables])
        terms = {}
        for monom, coeff in poly.terms():
            if coeff.is_Integer:
                c = int(coeff)
            elif coeff.is_Rational:
                c = Fraction(int(coeff.p), int(coeff.q))
            else:
                c = float(coeff)
            terms[monom] = c
        return cls(terms, tuple(variables))

    # -- structure ----------------------------------------------------
    @property
    def dim(self) -> int:
        if all(v in self.variables for v in PHASE_VARS[3][:1]) or "p1" in self.variables:
            return 3
        return 1

    @property
    def phase_pairs(self) -> list[tuple[str, str]]:
        d = self.dim
        names = PHASE_VARS[d]
        return list(zip(names[:d], names[d:]))

    def with_variables(self, variables) -> "PolyPhaseFn":
        variables = _canonical_vars(tuple(variables) + self.variables)
        idx = [variables.index(v) for v in self.variables]
        terms = {}
        for exps, c in self.terms.items():
            new = [0] * len(variables)
            for i, e in zip(idx, exps):
                new[i] = e
            terms[tuple(new)] = c
        return PolyPhaseFn(terms, variables)

    def _unify(self, other: "PolyPhaseFn"):
        if self.variables == other.variables:
            return self, other
        names = self.variables + other.variables
        return self.with_variables(names), other.with_variables(names)

    def _coerce(self, other) -> "PolyPhaseFn":
        if isinstance(other, PolyPhaseFn):
            return other
        if isinstance(other, Number):
            return PolyPhaseFn.const(other, self.variables)
        return NotImplemented

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self.terms)

    @property
    def constant(self):
        return self.terms.get((0,) * len(self.variables), 0)

    def depends_on(self, name: str) -> bool:
        if name not in self.variables:
            return False
        i = self.variables.index(name)
        return any(e[i] for e in self.terms)

    def to_terms(self) -> list:
        return [[c, list(e)] for e, c in sorted(self.terms.items())]

    # -- arithmetic ---------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self._unify(other)
        terms = dict(a.terms)
        for e, c in b.terms.items():
            terms[e] = terms.get(e, 0) + c
        return PolyPhaseFn(terms, a.variables)

    __radd__ = __add__

    def __neg__(self):
        return PolyPhaseFn({e: -c for e, c in self.terms.items()}, self.variables)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Number):
            return PolyPhaseFn({e: c * other for e, c in self.terms.items()}, self.variables)
        if not isinstance(other, PolyPhaseFn):
            return NotImplemented
        a, b = self._unify(other)
        terms: dict = {}
        for e1, c1 in a.terms.items():
            for e2, c2 in b.terms.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                terms[e] = terms.get(e, 0) + c1 * c2
        return PolyPhaseFn(terms, a.variables)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Number):
            return NotImplemented
        if isinstance(other, int):
            other = Fraction(other)
        return self * (1 / other)

    def __pow__(self, n: int):
        if int(n) != n or n < 0:
            raise ValueError("only non-negative integer powers")
        out = PolyPhaseFn.const(1, self.variables)
        base = self
        n = int(n)
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, Number):
            other = PolyPhaseFn.const(other, self.variables)
        if not isinstance(other, PolyPhaseFn):
            return NotImplemented
        a, b = self._unify(other)
        return a.terms == b.terms

    def __hash__(self):
        return hash((self.variables, frozenset(self.terms.items())))

    # -- calculus -----------------------------------------------------
    def diff(self, name: str) -> "PolyPhaseFn":
        if name not in self.variables:
            return PolyPhaseFn({}, self.variables)
        i = self.variables.index(name)
        terms = {}
        for e, c in self.terms.items():
            if e[i]:
                new = list(e)
                new[i] -= 1
                terms[tuple(new)] = c * e[i]
        return PolyPhaseFn(terms, self.variables)

    def substitute(self, mapping: Mapping[str, "PolyPhaseFn | Number"]) -> "PolyPhaseFn":
        """Replace variables by polynomials (or numbers); exact."""
        keep = tuple(v for v in self.variables if v not in mapping)
        repl = {}
        target_vars = keep
        for v, r in mapping.items():
            if isinstance(r, PolyPhaseFn):
                target_vars = target_vars + r.variables
        target_vars = _canonical_vars(target_vars)
        for v in self.variables:
            if v in mapping:
                r = mapping[v]
                repl[v] = r.with_variables(target_vars) if isinstance(r, PolyPhaseFn) \
                    else PolyPhaseFn.const(r, target_vars)
            else:
                repl[v] = PolyPhaseFn.var(v, target_vars)
        out = PolyPhaseFn({}, target_vars)
        cache: dict = {}
        for e, c in self.terms.items():
            term = PolyPhaseFn.const(c, target_vars)
            for v, k in zip(self.variables, e):
                if k:
                    key = (v, k)
                    if key not in cache:
                        cache[key] = repl[v] ** k
                    term = term * cache[key]
            out = out + term
        return out

    def evaluate(self, *args, **kwargs):
        """Pointwise evaluation with numpy broadcasting.

        Positional arguments follow ``self.variables``; keywords name them.
        Variables the polynomial does not depend on may be omitted.
        """
        values = dict(zip(self.variables, args))
        values.update(kwargs)
        result = 0
        powers: dict = {}
        for e, c in self.terms.items():
            term = float(c) if isinstance(c, Fraction) else c
            for v, k in zip(self.variables, e):
                if k:
                    if v not in values:
                        raise KeyError(f"value for variable {v!r} required")
                    key = (v, k)
                    if key not in powers:
                        powers[key] = np.asarray(values[v]) ** k
                    term = term * powers[key]
            result = result + term
        if isinstance(result, int):
            result = float(result)
        return result

    __call__ = evaluate

    # -- printing -----------------------------------------------------
    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in sorted(self.terms.items(), key=lambda kv: (-sum(kv[0]), [-x for x in kv[0]])):
            mono = "*".join(v if k == 1 else f"{v}^{k}" for v, k in zip(self.variables, e) if k)
            parts.append(_format_term(c, mono))
        s = " + ".join(parts)
        return s.replace("+ -", "- ")

    def __repr__(self):
        return f"PolyPhaseFn({self})"


def _format_coeff(c) -> str:
    if isinstance(c, Fraction) and c.denominator == 1:
        c = c.numerator
    if isinstance(c, float) and c.is_integer() and abs(c) < 1e15:
        return str(int(c)) if math.copysign(1, c) > 0 or c != 0 else "0"
    return str(c)


def _format_term(c, mono: str) -> str:
    if not mono:
        return _format_coeff(c)
    if c == 1:
        return mono
    if c == -1:
        return "-" + mono
    return f"{_format_coeff(c)}*{mono}"


def _default_vars_for(name: str) -> tuple[str, ...]:
    if name in PHASE_VARS[1]:
        return PHASE_VARS[1]
    if name in PHASE_VARS[3]:
        return PHASE_VARS[3]
    return (name,)


def q(variables=PHASE_VARS[1]) -> PolyPhaseFn:
    return PolyPhaseFn.var("q", variables)


def p(variables=PHASE_VARS[1]) -> PolyPhaseFn:
    return PolyPhaseFn.var("p", variables)


def poisson_bracket(F: PolyPhaseFn, G: PolyPhaseFn) -> PolyPhaseFn:
    """{F, G} = sum_k dF/dq_k dG/dp_k - dF/dp_k dG/dq_k (exact)."""
    if F.dim != G.dim:
        raise ValueError(f"dimension mismatch: {F.dim} vs {G.dim}")
    F, G = F._unify(G)
    out = PolyPhaseFn({}, F.variables)
    for qn, pn in F.phase_pairs:
        out = out + F.diff(qn) * G.diff(pn) - F.diff(pn) * G.diff(qn)
    return out


def sample(F: PolyPhaseFn, grid) -> "Field":
    """Evaluate ``F`` at every node of ``grid``."""
    from .grid import Field

    values = {}
    for v in F.variables:
        if grid.has(v):
            values[v] = grid.coord(v)
        elif F.depends_on(v):
            raise ValueError(f"grid {grid.names} does not cover variable {v!r}")
    vals = F.evaluate(**values)
    return Field(grid, np.broadcast_to(vals, grid.shape))
