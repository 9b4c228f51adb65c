"""Seeded battery of random polynomial observables used by the invariant checks."""

from __future__ import annotations

from itertools import product

import numpy as np

from .numerics.poly import PHASE_VARS, PolyPhaseFn

DEFAULT_SEED = 20240611
PAIRS = 20
MAX_DEGREE = 3
COEFF_RANGE = 3

_MONOMIALS = [(a, b) for a, b in product(range(MAX_DEGREE + 1), repeat=2) if a + b <= MAX_DEGREE]


def random_poly(rng: np.random.Generator, max_degree: int = MAX_DEGREE, max_terms: int = 4,
                coeff_range: int = COEFF_RANGE) -> PolyPhaseFn:
    """Random polynomial in (q, p) with nonzero integer coefficients and at least one q or p."""
    monos = [m for m in _MONOMIALS if sum(m) <= max_degree]
    nonconst = [m for m in monos if sum(m)]
    n = int(rng.integers(1, max_terms + 1))
    picks = {nonconst[int(rng.integers(len(nonconst)))]}
    while len(picks) < n:
        picks.add(monos[int(rng.integers(len(monos)))])
    coeffs = [c for c in range(-coeff_range, coeff_range + 1) if c]
    terms = {m: coeffs[int(rng.integers(len(coeffs)))] for m in sorted(picks)}
    return PolyPhaseFn(terms, PHASE_VARS[1])


def polynomial_pairs(seed: int = DEFAULT_SEED, n: int = PAIRS, max_degree: int = MAX_DEGREE,
                     max_terms: int = 4) -> list[tuple[PolyPhaseFn, PolyPhaseFn]]:
    """Fixed list of ``n`` (F, G) pairs; identical for identical arguments."""
    rng = np.random.default_rng(seed)
    return [(random_poly(rng, max_degree, max_terms), random_poly(rng, max_degree, max_terms))
            for _ in range(n)]


def observables(seed: int = DEFAULT_SEED, n: int = PAIRS) -> list[PolyPhaseFn]:
    """The distinct members of the pair battery, in order of first appearance."""
    out, seen = [], set()
    for F, G in polynomial_pairs(seed, n):
        for X in (F, G):
            key = str(X)
            if key not in seen:
                seen.add(key)
                out.append(X)
    return out
