"""Classic fourth-order Runge-Kutta on tuples of arrays."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

State = tuple[np.ndarray, ...]


def rk4_step(state: Sequence[np.ndarray], rhs: Callable[[State], State], dt: float) -> State:
    state = tuple(state)
    k1 = rhs(state)
    k2 = rhs(tuple(s + 0.5 * dt * k for s, k in zip(state, k1)))
    k3 = rhs(tuple(s + 0.5 * dt * k for s, k in zip(state, k2)))
    k4 = rhs(tuple(s + dt * k for s, k in zip(state, k3)))
    return tuple(s + dt / 6.0 * (a + 2 * b + 2 * c + d)
                 for s, a, b, c, d in zip(state, k1, k2, k3, k4))


# stability radius of RK4 on the imaginary axis is 2*sqrt(2); keep a margin
RK4_ADVECTION_LIMIT = 2.5
