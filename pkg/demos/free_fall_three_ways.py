"""One free-fall ensemble evolved three ways: Liouville, van Hove wavefunction, HJ mixture.

Run: python demos/free_fall_three_ways.py
"""

import numpy as np

from hybridmech import bridge as br
from hybridmech import classical_hilbert as ch
from hybridmech import classical_phase as cph
from hybridmech.numerics import Axis, Field, Grid
from hybridmech.potentials import Potential

g = Grid.make(Axis("q", -8, 8, 96), Axis("p", -5, 5, 96))
V = Potential.free_fall(M=1.0, g=1.0)
ens = cph.PhaseEnsemble.gaussian(g, (0.0, 1.0), (0.8, 0.6))
dt, steps = 0.01, 100

rho_liouville = cph.evolve_density(ens.rho, V, 1.0, dt, steps)

phi = ch.evolve_vanhove(ch.madelung_join(ens.rho, ens.sigma), V, 1.0, 1.0, dt, steps)
rho_vanhove = Field(g, np.abs(phi.phi.values) ** 2)

mix = br.decompose(ens.rho).validate()
mix_T = br.evolve_mixture(mix, V, dt, steps)
rho_mixture = br.recompose(mix_T, g.axis("p"))

print(f"mixture of {mix.alpha.size} configuration ensembles, mean label {mix.mean_alpha():.6f}")
print(f"L1(|phi|^2, Liouville)  = {br.l1(rho_vanhove, rho_liouville):.2e}")
print(f"L1(mixture, Liouville)  = {br.l1(rho_mixture, rho_liouville):.3f}  (finite mollifier width)")
mean_p = np.sum(rho_liouville.values * g.coord("p")) * g.cell_volume
print(f"<p>(T=1) = {mean_p:.6f}, expected 1 - g T = 0")
