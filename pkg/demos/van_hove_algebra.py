"""Van Hove operators: a faithful bracket representation that is not closed under products.

Run: python demos/van_hove_algebra.py
"""

from hybridmech import classical_hilbert as ch
from hybridmech import vanhove as vh
from hybridmech.battery import polynomial_pairs
from hybridmech.numerics import PolyPhaseFn

q, p = PolyPhaseFn.var("q"), PolyPhaseFn.var("p")

# commutators reproduce Poisson brackets, coefficient by coefficient
pairs = polynomial_pairs()
exact = sum(vh.isomorphism_residual(F, G).is_zero() for F, G in pairs)
print(f"[O_F, O_G] = i hbar O_{{F,G}} holds exactly on {exact}/{len(pairs)} random polynomial pairs")

Oq, Op = vh.vanhove_of(q), vh.vanhove_of(p)
print("O_q =", vh.format_operator(Oq))
print("O_p =", vh.format_operator(Op))
print("[O_q, O_p] =", vh.format_operator(vh.commute(Oq, Op)))

# ... yet the squares leave the first-order family
print("O_q O_q =", vh.format_operator(vh.compose(Oq, Oq)))
print("O_p O_p =", vh.format_operator(vh.compose(Op, Op)))

# a non-vanishing commutator does not force an uncertainty relation
prod, quarter = ch.no_uncertainty_demo((0.05, 0.05), hbar=1.0)
print(f"Var(q) Var(p) = {prod:.2e}  (a quantum state needs at least {quarter} hbar^2)")
