"""Dirichlet-to-Neumann maps for the inverse-square Bessel operator on a half-line.

Modules: ``specfun`` (Gamma and Bessel functions), ``transforms`` (Hankel and
Mellin tools), ``fpint`` (finite-part integrals), ``multcalc`` (multiplier
chains), ``scatter`` (DN values and expansions), ``oracle`` (mode ODE solver),
``pde_sim`` (time-domain simulator), ``inverse`` (layer stripping) and
``cli_io`` (command line).
"""

__version__ = "0.1.0"
