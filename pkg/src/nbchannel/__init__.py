"""Finite-difference study of the 2D Newton-Boussinesq equations in a channel.

Vorticity-streamfunction form on the truncated strip (0, L) x (-Y, Y) with
homogeneous Dirichlet data.  The modules build on one another:

``core``            grid, state, quadrature and norms
``operators``       Laplacian, central differences, Arakawa Jacobian
``poisson``         sine-transform Poisson / Helmholtz solver
``timestepper``     CNAB2 integrator with optional CFL adaptivity
``diagnostics``     monitored functionals and cutoff tails
``inequality_lab``  empirical constants of the functional inequalities
``persistence``     checkpoints and CSV series
``experiments``     runnable scenarios behind the ``nbchannel`` CLI
"""

from .core import GridSpec, Params, State, make_grid
from .poisson import SolverError, make_plan, solve_helmholtz, solve_poisson
from .timestepper import (
    NumericalBlowup,
    StepperConfig,
    StepperMemory,
    integrate,
    make_state,
    step,
)

__all__ = [
    "GridSpec",
    "NumericalBlowup",
    "Params",
    "SolverError",
    "State",
    "StepperConfig",
    "StepperMemory",
    "integrate",
    "make_grid",
    "make_plan",
    "make_state",
    "solve_helmholtz",
    "solve_poisson",
    "step",
]

__version__ = "0.1.0"
