"""Numerical laboratory for predator-prey systems with prey-density-
dependent motility and prey-taxis on 1D intervals.

Modules by role:
  model        kinetics/motility families, steady states, stability regimes
  linstab      dispersion relation, bifurcation curves, instability bands
  solver       conservative finite-volume method-of-lines integrator
  diagnostics  Lyapunov functionals, pattern classification, decay fits
  cli          config-driven subcommands emitting CSV + manifest
"""

__version__ = "0.1.0"

from . import diagnostics, linstab, model, solver  # noqa: F401,E402
