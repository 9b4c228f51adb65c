"""Two hybrid models, two quantum potentials: the correlated Gaussian family.

rho ~ exp(-(q^2 + p^2 + x^2) - lam p x) correlates the classical momentum with
the quantum position.  The phase-space model sees that correlation in its
quantum-potential energy; the configuration-space model, which only has the
(q, x) marginal, does not.

Run: python demos/hybrid_quantum_potential.py
"""

import numpy as np

from hybridmech import hybrid as hy
from hybridmech.numerics import Axis, Grid

g = Grid.make(*(Axis(n, -6, 6, 64) for n in ("q", "p", "x")))
print(" lam     Q_EPS     Q_ECS     diff      lam^2/16   MI        -ln(1-lam^2/4)/2")
for lam in (0.0, 0.1, 0.2, 0.4, 0.8):
    rho = hy.lambda_family(g, lam)
    e = hy.compare_hybrid_energies(rho)
    mi = hy.mutual_information(rho)
    print(f" {lam:.1f}  {e['Q_EPS']:.6f}  {e['Q_ECS']:.6f}  {e['difference']:.6f}  {lam**2 / 16:.6f}  "
          f"{mi:.6f}  {-0.5 * np.log(1 - lam**2 / 4):.6f}")
