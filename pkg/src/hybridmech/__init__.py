"""Classical and hybrid classical-quantum ensembles on configuration and phase space.

Submodules:

``numerics``           grids, fields, derivatives, exact polynomials
``classical_config``   configuration-space ensembles (P, S)
``classical_phase``    phase-space ensembles (rho, sigma) and Liouville transport
``vanhove``            first-order operators O_F and their exact algebra
``classical_hilbert``  classical wavefunctions on phase space
``galilean``           Galilei generators in every representation
``hybrid``             hybrid ensembles, quantum-potential energies, Madelung checks
``bridge``             phase-space densities as mixtures of configuration ensembles
``config``, ``runner``, ``verify``, ``cli``   scenario files and the command line
"""

from .errors import (CausticError, ConfigError, NegativeDensity, NormalizationDrift, NumericalAbort,
                     StabilityError)

__version__ = "0.1.0"

__all__ = ["CausticError", "ConfigError", "NegativeDensity", "NormalizationDrift", "NumericalAbort",
           "StabilityError", "__version__"]
