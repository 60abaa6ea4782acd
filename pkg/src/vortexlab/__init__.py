"""Stochastic vortex particles with boundary creation, and the tools to check them.

Subpackage map:

* :mod:`vortexlab.geometry` -- domains, boundary parametrization, reflection
* :mod:`vortexlab.fields`   -- node-lattice fields and fast transforms
* :mod:`vortexlab.heat`     -- zero-flux heat kernel, semigroup, smoothing
* :mod:`vortexlab.biot_savart` -- stream function, velocity, capped drift
* :mod:`vortexlab.particles` -- generation grid and reflected dynamics
* :mod:`vortexlab.pde`      -- pseudo-spectral reference solver
* :mod:`vortexlab.norms`    -- error norms and trajectory comparisons
* :mod:`vortexlab.cli`      -- subcommands, sweeps, persistence
"""

__version__ = "0.1.0"

from .geometry import DomainSpec
from .fields import Grid, ScalarField
from .heat import KernelParams

__all__ = ["DomainSpec", "Grid", "ScalarField", "KernelParams", "__version__"]
