"""CNAB2 time integration: Crank-Nicolson diffusion, Adams-Bashforth advection.

Vorticity update::

    (I - dt/2 Lap) xi+ = (I + dt/2 Lap) xi + dt (c1 F(xi) + c0 F(xi-))

with ``c1 = 1 + w/2``, ``c0 = -w/2`` and ``w = dt / dt_prev`` (``w = 1``
gives the classic 3/2, -1/2 weights).  Temperature is analogous with
diffusivity ``1/Pr``.  The streamfunction is re-solved from the new
vorticity after every step.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from .core import Field, GridSpec, Params, State
from .operators import ddx, jacobian, laplacian, velocity
from .poisson import SolverPlan, make_plan, solve_helmholtz, solve_poisson

log = logging.getLogger(__name__)

DT_FLOOR = 1e-8


class NumericalBlowup(FloatingPointError):
    """A non-finite value appeared; ``node`` is the first offending ``(i, j)``."""

    def __init__(self, what: str, node: tuple[int, int], t: float):
        self.what, self.node, self.t = what, node, t
        super().__init__(f"non-finite {what} at node (i={node[0]}, j={node[1]}), t={t:.6g}")


def _check_finite(what: str, a: Field, t: float) -> None:
    if not np.all(np.isfinite(a)):
        j, i = np.argwhere(~np.isfinite(a))[0]
        raise NumericalBlowup(what, (int(i), int(j)), t)


@dataclass
class StepperConfig:
    dt: float
    t_end: float = 0.0
    cfl_target: float = 0.4
    adaptive: bool = False
    dt_max: Optional[float] = None

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not 0 < self.cfl_target < 1:
            raise ValueError(f"cfl_target must lie in (0, 1), got {self.cfl_target}")
        if self.dt_max is None:
            self.dt_max = self.dt


@dataclass
class StepperMemory:
    """Explicit tendencies from the previous step (for AB2)."""

    f_xi: Optional[Field] = None
    f_theta: Optional[Field] = None
    dt: Optional[float] = None
    valid: bool = False

    def clear(self) -> None:
        self.f_xi = self.f_theta = self.dt = None
        self.valid = False


def make_state(grid: GridSpec, xi: Field, theta: Field, t: float = 0.0,
               plan: Optional[SolverPlan] = None) -> State:
    """Build a state whose streamfunction solves ``laplacian(psi) = xi``."""
    plan = plan or make_plan(grid)
    xi = np.array(xi, dtype=float)
    theta = np.array(theta, dtype=float)
    return State(t=float(t), xi=xi, theta=theta, psi=solve_poisson(plan, xi), grid=grid)


def explicit_tendency(state: State, params: Params) -> tuple[Field, Field]:
    """Advection, buoyancy and forcing terms (diffusion excluded)."""
    g = state.grid
    f, gsrc = params.forcing(g, state.t)
    f_xi = -jacobian(g, state.psi, state.xi) - (params.Ra / params.Pr) * ddx(g, state.theta) + f
    f_th = -jacobian(g, state.psi, state.theta) + gsrc
    _check_finite("vorticity tendency", f_xi, state.t)
    _check_finite("temperature tendency", f_th, state.t)
    return f_xi, f_th


def step(state: State, params: Params, cfg: StepperConfig, mem: StepperMemory,
         plan: Optional[SolverPlan] = None, dt: Optional[float] = None) -> State:
    """Advance one CNAB2 step; the first step after a reset is forward Euler."""
    g = state.grid
    plan = plan or make_plan(g)
    dt = cfg.dt if dt is None else dt
    f_xi, f_th = explicit_tendency(state, params)

    if mem.valid and abs(dt - mem.dt) > 0.1 * mem.dt:
        mem.clear()
    if mem.valid:
        w = dt / mem.dt
        c1, c0 = 1.0 + 0.5 * w, -0.5 * w
        ex_xi = c1 * f_xi + c0 * mem.f_xi
        ex_th = c1 * f_th + c0 * mem.f_theta
    else:
        ex_xi, ex_th = f_xi, f_th

    kappa = 1.0 / params.Pr
    rhs_xi = state.xi + (0.5 * dt) * laplacian(g, state.xi) + dt * ex_xi
    rhs_th = state.theta + (0.5 * dt * kappa) * laplacian(g, state.theta) + dt * ex_th
    xi = solve_helmholtz(plan, 1.0, 0.5 * dt, rhs_xi)
    theta = solve_helmholtz(plan, 1.0, 0.5 * dt * kappa, rhs_th)
    _check_finite("vorticity", xi, state.t + dt)
    _check_finite("temperature", theta, state.t + dt)
    psi = solve_poisson(plan, xi)

    mem.f_xi, mem.f_theta, mem.dt, mem.valid = f_xi, f_th, dt, True
    return State(t=state.t + dt, xi=xi, theta=theta, psi=psi, grid=g)


def cfl_dt(state: State, cfg: StepperConfig) -> float:
    """``cfl_target * min(dx/max|u|, dy/max|v|)`` clamped to ``[1e-8, dt_max]``."""
    g = state.grid
    u, v = velocity(g, state.psi)
    umax, vmax = float(np.max(np.abs(u))), float(np.max(np.abs(v)))
    limits = []
    if umax > 0:
        limits.append(g.dx / umax)
    if vmax > 0:
        limits.append(g.dy / vmax)
    if not limits:
        return cfg.dt_max
    return float(min(max(cfg.cfl_target * min(limits), DT_FLOOR), cfg.dt_max))


Observer = Callable[[int, State], None]


def _adapt(dt: float, state: State, cfg: StepperConfig) -> float:
    # Power-of-two ladder below dt_max keeps the factorisation cache small
    # and only resets the AB2 memory on genuine changes.
    limit = cfl_dt(state, cfg)
    while dt > limit and dt > DT_FLOOR:
        dt *= 0.5
    while 2.0 * dt <= cfg.dt_max and 2.0 * dt <= 0.8 * limit:
        dt *= 2.0
    return dt


def integrate(state: State, params: Params, cfg: StepperConfig,
              observers: Iterable[Observer] = (), mem: Optional[StepperMemory] = None,
              plan: Optional[SolverPlan] = None) -> State:
    """Step from ``state.t`` to ``cfg.t_end``.

    Each observer is called as ``obs(step_index, state)`` at step 0 and at
    every ``obs.every``-th step afterwards (default every step); observers
    must not modify the state.  Pass the same ``mem`` across calls to
    continue an AB2 history exactly.
    """
    plan = plan or make_plan(state.grid)
    mem = mem if mem is not None else StepperMemory()
    observers = list(observers)
    every = [max(1, int(getattr(obs, "every", 1))) for obs in observers]

    def notify(n: int, s: State) -> None:
        for obs, k in zip(observers, every):
            if n % k == 0:
                obs(n, s)

    notify(0, state)
    n = 0
    dt = cfg.dt_max if cfg.adaptive else cfg.dt
    tol = 1e-9 * cfg.dt
    while cfg.t_end - state.t > tol:
        if cfg.adaptive:
            dt = _adapt(dt, state, cfg)
        remaining = cfg.t_end - state.t
        h = dt
        if remaining < dt - tol:
            h = remaining
        state = step(state, params, cfg, mem, plan, dt=h)
        n += 1
        notify(n, state)
    return state


