"""Monitored functionals: norms, cutoff tails, energy-law residuals, windows."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import GridSpec, Params, State, grad_sq, inner_product, l2_norm
from .operators import ddx, laplacian
from .timestepper import explicit_tendency

BASE_COLUMNS = (
    "t",
    "l2_xi",
    "l2_theta",
    "h1_xi",
    "h1_theta",
    "lap_xi",
    "lap_theta",
    "dxi_dt",
    "dtheta_dt",
    "energy_residual_theta",
    "energy_residual_xi",
)


def cutoff_phi(s):
    """Quintic smoothstep cutoff: 0 for ``|s| <= 1``, 1 for ``|s| >= 2``."""
    tau = np.clip(np.abs(np.asarray(s, dtype=float)) - 1.0, 0.0, 1.0)
    out = tau**3 * (10.0 + tau * (-15.0 + 6.0 * tau))
    return float(out) if out.ndim == 0 else out


def cutoff_dphi(s):
    tau = np.clip(np.abs(np.asarray(s, dtype=float)) - 1.0, 0.0, 1.0)
    out = 30.0 * tau**2 * (1.0 - tau) ** 2 * np.sign(s)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class CutoffSpec:
    k: float

    def weight(self, grid: GridSpec) -> np.ndarray:
        """``phi(y^2/k^2)`` on every node, shape ``(ny, nx)``."""
        w = cutoff_phi(grid.y**2 / self.k**2)
        return np.broadcast_to(w[:, None], grid.shape)


def tail_mass(state: State, k: float) -> float:
    """``sum phi^2(y^2/k^2) (xi^2 + theta^2) dx dy`` over the interior."""
    if not k > 0:
        raise ValueError(f"tail radius must be positive, got k={k}")
    g = state.grid
    w2 = cutoff_phi(g.y**2 / k**2) ** 2
    dens = np.sum(state.xi**2 + state.theta**2, axis=1)
    return float(np.dot(w2, dens)) * g.cell_area


def column_names(ks: Sequence[float]) -> list[str]:
    return list(BASE_COLUMNS) + [f"tail_k={k!r}" for k in sorted(ks)]


@dataclass
class DiagRecord:
    t: float
    l2_xi: float
    l2_theta: float
    h1_xi: float
    h1_theta: float
    lap_xi: float
    lap_theta: float
    dxi_dt: Optional[float] = None
    dtheta_dt: Optional[float] = None
    energy_residual_theta: Optional[float] = None
    energy_residual_xi: Optional[float] = None
    tail: list[tuple[float, float]] = field(default_factory=list)
    # right-hand-side evaluation of the time derivatives, for cross-checking
    dxi_dt_rhs: Optional[float] = None
    dtheta_dt_rhs: Optional[float] = None

    @property
    def has_derivatives(self) -> bool:
        return self.dxi_dt is not None

    @property
    def ks(self) -> list[float]:
        return [k for k, _ in self.tail]

    def columns(self) -> list[str]:
        return column_names(self.ks)

    def values(self) -> list[Optional[float]]:
        base = [getattr(self, name) for name in BASE_COLUMNS]
        return base + [m for _, m in sorted(self.tail)]

    def tail_at(self, k: float) -> float:
        for kk, m in self.tail:
            if kk == k:
                return m
        raise KeyError(k)


def sample(state: State, prev: Optional[State], params: Params,
           ks: Iterable[float] = ()) -> DiagRecord:
    """Evaluate every monitored functional at ``state``.

    With ``prev`` (the state one step earlier) the time derivatives are
    backward differences and the energy residuals compare the change of
    ``||.||^2`` with the dissipation and forcing terms averaged over the two
    time levels, which is second order in the step.  Without ``prev`` those
    fields stay ``None``.
    """
    g = state.grid
    lap_xi = laplacian(g, state.xi)
    lap_th = laplacian(g, state.theta)
    rec = DiagRecord(
        t=state.t,
        l2_xi=l2_norm(g, state.xi),
        l2_theta=l2_norm(g, state.theta),
        h1_xi=float(np.sqrt(grad_sq(g, state.xi))),
        h1_theta=float(np.sqrt(grad_sq(g, state.theta))),
        lap_xi=l2_norm(g, lap_xi),
        lap_theta=l2_norm(g, lap_th),
        tail=[(float(k), tail_mass(state, k)) for k in sorted(ks)],
    )
    f_xi, f_th = explicit_tendency(state, params)
    rec.dxi_dt_rhs = l2_norm(g, lap_xi + f_xi)
    rec.dtheta_dt_rhs = l2_norm(g, lap_th / params.Pr + f_th)
    if prev is None:
        return rec
    if prev.grid != g:
        raise ValueError("previous state lives on a different grid")
    dt = state.t - prev.t
    if not dt > 0:
        raise ValueError(f"previous state must be earlier, got dt={dt}")

    rec.dxi_dt = l2_norm(g, state.xi - prev.xi) / dt
    rec.dtheta_dt = l2_norm(g, state.theta - prev.theta) / dt

    f_now, g_now = params.forcing(g, state.t)
    f_prev, g_prev = params.forcing(g, prev.t)
    dE_th = (rec.l2_theta**2 - l2_norm(g, prev.theta) ** 2) / (2.0 * dt)
    diss_th = 0.5 * (grad_sq(g, state.theta) + grad_sq(g, prev.theta)) / params.Pr
    src_th = 0.5 * (inner_product(g, g_now, state.theta) + inner_product(g, g_prev, prev.theta))
    rec.energy_residual_theta = abs(dE_th + diss_th - src_th)

    dE_xi = (rec.l2_xi**2 - l2_norm(g, prev.xi) ** 2) / (2.0 * dt)
    diss_xi = 0.5 * (grad_sq(g, state.xi) + grad_sq(g, prev.xi))
    buoy = 0.5 * (
        inner_product(g, ddx(g, state.theta), state.xi)
        + inner_product(g, ddx(g, prev.theta), prev.xi)
    )
    src_xi = 0.5 * (inner_product(g, f_now, state.xi) + inner_product(g, f_prev, prev.xi))
    rec.energy_residual_xi = abs(dE_xi + diss_xi + (params.Ra / params.Pr) * buoy - src_xi)
    return rec


class Recorder:
    """Integration observer that samples a :class:`DiagRecord` every few steps.

    It watches every step so the previous state is always at hand for the
    backward differences, but only samples on multiples of ``sample_every``.
    ``sink`` (if given) receives each record, e.g. a CSV appender.
    """

    every = 1

    def __init__(self, params: Params, ks: Iterable[float] = (), sample_every: int = 1,
                 sink=None):
        self.params = params
        self.ks = sorted(float(k) for k in ks)
        self.sample_every = max(1, int(sample_every))
        self.sink = sink
        self.records: list[DiagRecord] = []
        self.states_seen = 0
        self._prev: Optional[State] = None

    def __call__(self, n: int, state: State) -> None:
        if n % self.sample_every == 0:
            prev = self._prev if self._prev is not None and self._prev.t < state.t else None
            rec = sample(state, prev, self.params, self.ks)
            self.records.append(rec)
            if self.sink is not None:
                self.sink(rec)
        self._prev = state
        self.states_seen += 1

    def series(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        recs = [r for r in self.records if getattr(r, name) is not None]
        return (np.array([r.t for r in recs]), np.array([getattr(r, name) for r in recs]))


def windowed_integral(series, t0: float, width: float = 1.0) -> float:
    """Trapezoid-rule integral of a sampled series over ``[t0, t0 + width]``.

    ``series`` is a sequence of ``(t, value)`` pairs or a ``(times, values)``
    pair of arrays, sorted in time.  Window ends falling between samples are
    linearly interpolated.
    """
    t, v = _as_arrays(series)
    t1 = t0 + width
    slack = 1e-9 * max(1.0, abs(t1))
    if t.size < 2 or t[0] > t0 + slack or t[-1] < t1 - slack:
        raise ValueError(f"series does not cover the window [{t0}, {t1}]")
    inside = (t > t0) & (t < t1)
    tt = np.concatenate(([t0], t[inside], [t1]))
    vv = np.concatenate(([np.interp(t0, t, v)], v[inside], [np.interp(t1, t, v)]))
    return float(np.trapezoid(vv, tt))


def _as_arrays(series) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(series, tuple) and len(series) == 2 and np.ndim(series[0]) == 1:
        t, v = np.asarray(series[0], float), np.asarray(series[1], float)
    else:
        arr = np.asarray(list(series), dtype=float).reshape(-1, 2)
        t, v = arr[:, 0], arr[:, 1]
    if t.shape != v.shape:
        raise ValueError("times and values differ in length")
    return t, v
