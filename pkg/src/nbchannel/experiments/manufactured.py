"""Manufactured solutions for convergence studies.

The exact fields are built from Dirichlet sine modes so that ``xi*`` and
``theta*`` vanish on the boundary and ``laplacian(psi*) = xi*`` holds by
construction::

    psi*   = cos(t) [s11 + 0.5 s21]
    theta* = cos(t) s12
    s_mn   = sin(m pi x / L) sin(n pi (y + Y) / 2Y)

Two source flavours are offered.  :func:`symbolic_sources` differentiates
the continuum equations with sympy, so the discrete solution carries both
space and time error.  :func:`discrete_sources` applies the discrete
operators to the sampled exact fields instead; the exact fields then solve
the semi-discrete system exactly and only the time error remains.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import sympy as sp

from ..core import Field, GridSpec, Params
from ..operators import ddx, jacobian, laplacian
from ..poisson import SolverPlan, make_plan, solve_poisson

FieldFn = Callable[[float], Field]


@dataclass
class Manufactured:
    xi: FieldFn
    theta: FieldFn
    f: FieldFn
    g: FieldFn


def _exact_exprs(L: float, Y: float, steady: bool):
    x, y, t = sp.symbols("x y t", real=True)
    eta = (y + Y) / (2 * Y)

    def s(m, n):
        return sp.sin(m * sp.pi * x / L) * sp.sin(n * sp.pi * eta)

    amp = sp.Integer(1) if steady else sp.cos(t)
    psi = amp * (s(1, 1) + sp.Rational(1, 2) * s(2, 1))
    xi = sp.diff(psi, x, 2) + sp.diff(psi, y, 2)
    theta = amp * s(1, 2)
    return x, y, t, psi, xi, theta


def _jac(u, v, x, y):
    # J(u, v) = u_y v_x - u_x v_y
    return sp.diff(u, y) * sp.diff(v, x) - sp.diff(u, x) * sp.diff(v, y)


def _field_fn(grid: GridSpec, expr, x, y, t) -> FieldFn:
    fn = sp.lambdify((x, y, t), expr, "numpy")
    X, Yc = grid.mesh()
    return lambda tt: np.asarray(fn(X, Yc, float(tt)), dtype=float) * np.ones(grid.shape)


def symbolic_sources(grid: GridSpec, Pr: float, Ra: float, steady: bool = False) -> Manufactured:
    x, y, t, psi, xi, theta = _exact_exprs(grid.L, grid.Y, steady)
    lap = lambda a: sp.diff(a, x, 2) + sp.diff(a, y, 2)  # noqa: E731
    f = sp.diff(xi, t) - lap(xi) + _jac(psi, xi, x, y) + (Ra / Pr) * sp.diff(theta, x)
    g = sp.diff(theta, t) - lap(theta) / Pr + _jac(psi, theta, x, y)
    return Manufactured(*(_field_fn(grid, e, x, y, t) for e in (xi, theta, f, g)))


def discrete_sources(grid: GridSpec, Pr: float, Ra: float, steady: bool = False,
                     plan: SolverPlan | None = None) -> Manufactured:
    """Sources from the discrete operators applied to the sampled exact fields."""
    plan = plan or make_plan(grid)
    x, y, t, _, xi, theta = _exact_exprs(grid.L, grid.Y, steady)
    xi_fn, th_fn = _field_fn(grid, xi, x, y, t), _field_fn(grid, theta, x, y, t)
    xi_t, th_t = (_field_fn(grid, sp.diff(e, t), x, y, t) for e in (xi, theta))

    def f(tt: float) -> Field:
        a, b = xi_fn(tt), th_fn(tt)
        psi = solve_poisson(plan, a)
        return xi_t(tt) - laplacian(grid, a) + jacobian(grid, psi, a) + (Ra / Pr) * ddx(grid, b)

    def g(tt: float) -> Field:
        a, b = xi_fn(tt), th_fn(tt)
        psi = solve_poisson(plan, a)
        return th_t(tt) - laplacian(grid, b) / Pr + jacobian(grid, psi, b)

    return Manufactured(xi_fn, th_fn, f, g)


def mms_params(ms: Manufactured, Pr: float, Ra: float) -> Params:
    return Params(Pr=Pr, Ra=Ra, f=ms.f, g=ms.g)
