"""Exact algebra of differential operators on phase space.

An operator is stored as a sum of terms ``c(q,p) * (i hbar)^k * d^alpha``
where ``alpha`` is a derivative multi-index over the phase-space variables
and ``k`` a power of the formal factor ``i*hbar``.  Keeping ``i*hbar`` formal
makes commutator identities exact for every value of hbar at once; numerical
values are only produced when an operator is applied to a sampled field.

Operators built by :func:`vanhove_of` are first order.  Products produced by
:func:`compose` may carry second-order terms; :func:`commute` checks that
those cancel.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb

import numpy as np

from .numerics.calculus import derivative
from .numerics.grid import Field
from .numerics.poly import PHASE_VARS, PolyPhaseFn, exact


class OperatorAlgebraError(ArithmeticError):
    """A symbolic identity that must hold exactly did not."""


def _phase_names(dim: int) -> tuple[str, ...]:
    return PHASE_VARS[dim]


def _ipow(k: int, hbar) -> complex:
    return (1j * hbar) ** k


class FirstOrderOperator:
    """Sum of ``coeff * (i hbar)^k * d^alpha`` terms with exact polynomial coefficients.

    ``terms`` maps ``(alpha, k)`` to a :class:`PolyPhaseFn`; ``alpha`` has one
    entry per phase-space variable (``q, p`` or ``q1..q3, p1..p3``).
    ``hbar`` is only used when a numerical value is asked for.
    """

    __slots__ = ("dim", "terms", "hbar")

    def __init__(self, terms: dict, dim: int = 1, hbar=1.0):
        self.dim = dim
        self.hbar = hbar
        clean = {}
        n = 2 * dim
        for (alpha, k), c in terms.items():
            alpha = tuple(alpha)
            if len(alpha) != n:
                raise ValueError(f"derivative index {alpha} has wrong length for dim {dim}")
            if not isinstance(c, PolyPhaseFn):
                c = PolyPhaseFn.const(c, _phase_names(dim))
            key = (alpha, int(k))
            clean[key] = clean[key] + c if key in clean else c
        self.terms = {key: c for key, c in clean.items() if not c.is_zero()}

    # -- views --------------------------------------------------------
    def _unit(self, i: int | None) -> tuple[int, ...]:
        a = [0] * (2 * self.dim)
        if i is not None:
            a[i] = 1
        return tuple(a)

    def coefficient(self, alpha) -> dict[int, PolyPhaseFn]:
        """Coefficient of ``d^alpha`` as ``{k: poly}`` meaning ``sum (i hbar)^k poly``."""
        alpha = tuple(alpha)
        return {k: c for (a, k), c in self.terms.items() if a == alpha}

    def re_im(self, alpha, hbar=None) -> tuple[PolyPhaseFn, PolyPhaseFn]:
        """Real and imaginary polynomial parts of the ``d^alpha`` coefficient at ``hbar``."""
        h = exact(self.hbar if hbar is None else hbar)
        names = _phase_names(self.dim)
        re = PolyPhaseFn({}, names)
        im = PolyPhaseFn({}, names)
        for k, c in self.coefficient(alpha).items():
            scaled = c * (h ** k) * (-1) ** (k // 2)
            if k % 2:
                im = im + scaled
            else:
                re = re + scaled
        return re, im

    @property
    def zeroth(self):
        return self.re_im(self._unit(None))

    def dq_coeff(self, i: int = 0):
        return self.re_im(self._unit(i))

    def dp_coeff(self, i: int = 0):
        return self.re_im(self._unit(self.dim + i))

    @property
    def second_order(self) -> list:
        """``[(coeff (re, im), axis pair), ...]`` for every derivative of order two or more."""
        names = _phase_names(self.dim)
        out = []
        for alpha in sorted({a for (a, _k) in self.terms if sum(a) >= 2}):
            axes = tuple(n for n, e in zip(names, alpha) for _ in range(e))
            out.append((self.re_im(alpha), axes))
        return out

    @property
    def order(self) -> int:
        return max((sum(a) for (a, _k) in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    # -- arithmetic ---------------------------------------------------
    def _check(self, other):
        if not isinstance(other, FirstOrderOperator):
            raise TypeError("expected FirstOrderOperator")
        if other.dim != self.dim:
            raise ValueError("operators act on different phase spaces")

    def __add__(self, other):
        self._check(other)
        terms = dict(self.terms)
        for key, c in other.terms.items():
            terms[key] = terms[key] + c if key in terms else c
        return FirstOrderOperator(terms, self.dim, self.hbar)

    def __neg__(self):
        return FirstOrderOperator({k: -c for k, c in self.terms.items()}, self.dim, self.hbar)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor) -> "FirstOrderOperator":
        """Multiply by a real number or polynomial (on the left)."""
        return FirstOrderOperator({key: factor * c if isinstance(factor, PolyPhaseFn) else c * factor
                                   for key, c in self.terms.items()}, self.dim, self.hbar)

    def times_ihbar(self, n: int = 1) -> "FirstOrderOperator":
        """Multiply by ``(i hbar)^n``; negative ``n`` divides and must stay exact."""
        terms = {}
        for (a, k), c in self.terms.items():
            if k + n < 0:
                raise OperatorAlgebraError("division by i*hbar leaves a negative power")
            terms[(a, k + n)] = c
        return FirstOrderOperator(terms, self.dim, self.hbar)

    def __eq__(self, other):
        if not isinstance(other, FirstOrderOperator):
            return NotImplemented
        return self.dim == other.dim and (self - other).is_zero()

    def __hash__(self):
        return hash((self.dim, frozenset(self.terms)))

    def __matmul__(self, other):
        return compose(self, other)

    # -- numerics -----------------------------------------------------
    def apply(self, phi: Field, allow_higher_order: bool = False) -> Field:
        return apply(self, phi, allow_higher_order)

    def __str__(self):
        return format_operator(self)

    def __repr__(self):
        return f"FirstOrderOperator({self})"


def vanhove_of(F: PolyPhaseFn, hbar=1.0) -> FirstOrderOperator:
    """``(F - p.dF/dp) + i hbar (dF/dq . d/dp - dF/dp . d/dq)``."""
    dim = F.dim
    names = _phase_names(dim)
    F = F.with_variables(names)
    qs, ps = names[:dim], names[dim:]
    zeroth = F
    for pn in ps:
        zeroth = zeroth - PolyPhaseFn.var(pn, F.variables) * F.diff(pn)
    terms = {((0,) * (2 * dim), 0): zeroth}
    for i in range(dim):
        dp = [0] * (2 * dim)
        dp[dim + i] = 1
        dq = [0] * (2 * dim)
        dq[i] = 1
        terms[(tuple(dp), 1)] = F.diff(qs[i])
        terms[(tuple(dq), 1)] = -F.diff(ps[i])
    return FirstOrderOperator(terms, dim, hbar)


def identity(dim: int = 1, hbar=1.0) -> FirstOrderOperator:
    return FirstOrderOperator({((0,) * (2 * dim), 0): 1}, dim, hbar)


def _diff_multi(c: PolyPhaseFn, gamma, names) -> PolyPhaseFn:
    for n, e in zip(names, gamma):
        for _ in range(e):
            c = c.diff(n)
    return c


def _sub_indices(alpha):
    if not alpha:
        yield ()
        return
    for g in range(alpha[0] + 1):
        for rest in _sub_indices(alpha[1:]):
            yield (g,) + rest


def compose(A: FirstOrderOperator, B: FirstOrderOperator) -> FirstOrderOperator:
    """Operator product ``A B`` (apply B first) by the Leibniz rule; exact."""
    A._check(B)
    names = _phase_names(A.dim)
    terms: dict = {}
    for (alpha, k), a in A.terms.items():
        for (beta, l), b in B.terms.items():
            for gamma in _sub_indices(alpha):
                mult = 1
                for ai, gi in zip(alpha, gamma):
                    mult *= comb(ai, gi)
                db = _diff_multi(b, gamma, names)
                if db.is_zero():
                    continue
                new_alpha = tuple(ai - gi + bi for ai, gi, bi in zip(alpha, gamma, beta))
                key = (new_alpha, k + l)
                val = a * db * mult
                terms[key] = terms[key] + val if key in terms else val
    return FirstOrderOperator(terms, A.dim, A.hbar)


def commute(A: FirstOrderOperator, B: FirstOrderOperator, hbar=None) -> FirstOrderOperator:
    """``[A, B] = AB - BA``.

    For genuine van Hove operators every second-order term must cancel; a
    survivor means the algebra is broken and is reported as an error.
    """
    first_order = A.order <= 1 and B.order <= 1
    out = compose(A, B) - compose(B, A)
    if hbar is not None:
        out.hbar = hbar
    if first_order and out.order > 1:
        raise OperatorAlgebraError(f"second-order terms survived the commutator: {out}")
    return out


def isomorphism_residual(F: PolyPhaseFn, G: PolyPhaseFn, hbar=1.0) -> FirstOrderOperator:
    """``[O_F, O_G] - i hbar O_{F,G}``; the zero operator when the algebra is right."""
    from .numerics.poly import poisson_bracket

    lhs = commute(vanhove_of(F, hbar), vanhove_of(G, hbar))
    return lhs - vanhove_of(poisson_bracket(F, G), hbar).times_ihbar(1)


# -- numerical action ------------------------------------------------------
def _coefficient_values(op: FirstOrderOperator, alpha, grid, hbar) -> np.ndarray | complex:
    coords = {n: grid.coord(n) for n in grid.names}
    total = 0
    for k, c in op.coefficient(alpha).items():
        vals = c.evaluate(**{n: coords[n] for n in c.variables if n in coords})
        total = total + _ipow(k, hbar) * np.asarray(vals)
    return total


def apply(op: FirstOrderOperator, phi: Field, allow_higher_order: bool = False,
          hbar=None) -> Field:
    """Evaluate ``op phi`` on a 1D phase-space grid; derivatives of phi are spectral."""
    if op.dim != 1:
        raise ValueError("grid application is available for one-dimensional phase space")
    if op.order > 1 and not allow_higher_order:
        raise OperatorAlgebraError("operator has second-order terms; pass allow_higher_order=True")
    hbar = op.hbar if hbar is None else hbar
    grid = phi.grid
    vals = phi.values.astype(complex)
    out = np.zeros(grid.shape, dtype=complex)
    for alpha in sorted({a for (a, _k) in op.terms}):
        d = vals
        for name, e in zip(("q", "p"), alpha):
            if e:
                d = derivative(d, grid, name, e)
        out = out + _coefficient_values(op, alpha, grid, hbar) * d
    return Field(grid, out)


def expectation(op: FirstOrderOperator, phi: Field, hbar=None) -> complex:
    """``<phi| op phi>`` by quadrature."""
    opphi = apply(op, phi, allow_higher_order=True, hbar=hbar)
    return complex(np.sum(np.conj(phi.values) * opphi.values) * phi.grid.cell_volume)


# -- printing --------------------------------------------------------------
def _scalar_str(k: int) -> tuple[int, str]:
    sign = -1 if (k // 2) % 2 else 1
    if k == 0:
        return sign, ""
    h = "hbar" if k == 1 else f"hbar^{k}"
    return sign, ("i*" + h) if k % 2 else h


def _deriv_str(alpha, names) -> str:
    order = sum(alpha)
    if order == 0:
        return ""
    parts = "".join(f"d{n}" if e == 1 else f"d{n}^{e}" for n, e in zip(names, alpha) if e)
    return ("d/" if order == 1 else f"d^{order}/") + parts


def format_operator(op: FirstOrderOperator) -> str:
    """Canonical text form, e.g. ``q + i*hbar*d/dp`` or ``-hbar^2*d^2/dp^2``."""
    if op.is_zero():
        return "0"
    names = _phase_names(op.dim)
    pieces = []
    for (alpha, k) in sorted(op.terms, key=lambda t: (sum(t[0]), tuple(-x for x in t[0]), t[1])):
        c = op.terms[(alpha, k)]
        sign, scal = _scalar_str(k)
        c = c * sign
        deriv = _deriv_str(alpha, names)
        tail = "*".join(s for s in (scal, deriv) if s)
        if c.is_constant():
            val = c.constant
            if tail and val in (1, -1):
                body = ("-" if val == -1 else "") + tail
            else:
                body = "*".join(s for s in (str(PolyPhaseFn.const(val, c.variables)), tail) if s)
        else:
            cs = str(c)
            if len(c.terms) > 1 and tail:
                cs = f"({cs})"
            body = "*".join(s for s in (cs, tail) if s)
        pieces.append(body)
    s = " + ".join(pieces)
    return s.replace("+ -", "- ")


def hbar_exact(hbar) -> Fraction:
    return Fraction(exact(hbar))
