"""Direct Dirichlet solves for ``laplacian(psi) = rhs`` and ``(a - b laplacian) w = rhs``.

A type-I discrete sine transform diagonalises the x second difference;
each x-mode then leaves a tridiagonal system in y.  All modes are stacked
into one block-tridiagonal band (zero coupling between blocks) so a single
LAPACK ``gttrf``/``gttrs`` pair handles every mode at once.
"""

from __future__ import annotations

import threading

import numpy as np
from scipy.fft import dst
from scipy.linalg.lapack import dgttrf, dgttrs

from .core import Field, GridSpec


class SolverError(RuntimeError):
    pass


class SolverPlan:
    """Precomputed x-mode eigenvalues and cached factorisations for one grid.

    Factorisations are keyed by ``(a, b)`` and immutable once built; the
    plan may be shared between threads.
    """

    def __init__(self, grid: GridSpec):
        self.grid = grid
        m = np.arange(1, grid.nx + 1)
        self.eig_x = -(4.0 / grid.dx**2) * np.sin(m * np.pi / (2.0 * (grid.nx + 1))) ** 2
        if not np.all(self.eig_x < 0):
            raise SolverError("x-mode eigenvalues must be strictly negative")
        self._factors: dict[tuple[float, float], tuple] = {}
        self._lock = threading.Lock()

    def _factor(self, a: float, b: float):
        key = (float(a), float(b))
        fac = self._factors.get(key)
        if fac is not None:
            return fac
        nx, ny, dy2 = self.grid.nx, self.grid.ny, self.grid.dy**2
        diag = np.repeat(a - b * self.eig_x + 2.0 * b / dy2, ny)
        off = np.full(nx * ny - 1, -b / dy2)
        off[ny - 1 :: ny] = 0.0  # decouple consecutive x-modes
        dl, d, du, du2, ipiv, info = dgttrf(off.copy(), diag, off.copy())
        if info != 0:
            raise SolverError(f"tridiagonal factorisation failed (info={info})")
        fac = (dl, d, du, du2, ipiv)
        with self._lock:
            if len(self._factors) > 16:
                self._factors.clear()
            self._factors[key] = fac
        return fac

    def solve_operator(self, a: float, b: float, rhs: Field) -> Field:
        """Solve ``(a I - b laplacian) w = rhs`` with zero Dirichlet data."""
        self.grid.check(rhs)
        if not np.all(np.isfinite(rhs)):
            raise SolverError("non-finite value in right-hand side")
        nx, ny = self.grid.nx, self.grid.ny
        fac = self._factor(a, b)
        hat = dst(rhs, type=1, axis=1, norm="ortho")
        col = np.ascontiguousarray(hat.T).reshape(-1)
        w, info = dgttrs(*fac, col)
        if info != 0:
            raise SolverError(f"tridiagonal solve failed (info={info})")
        hat = w.reshape(nx, ny).T
        return dst(hat, type=1, axis=1, norm="ortho")


def make_plan(grid: GridSpec) -> SolverPlan:
    return SolverPlan(grid)


def solve_poisson(plan: SolverPlan, rhs: Field) -> Field:
    """Return psi with ``laplacian(psi) = rhs`` and psi = 0 on the walls."""
    return plan.solve_operator(0.0, -1.0, rhs)


def solve_helmholtz(plan: SolverPlan, a: float, b: float, rhs: Field) -> Field:
    """Return w with ``a w - b laplacian(w) = rhs``; requires a > 0, b >= 0."""
    if not a > 0:
        raise ValueError(f"Helmholtz shift must be positive, got a={a}")
    if b < 0:
        raise ValueError(f"diffusion coefficient must be non-negative, got b={b}")
    if b == 0:
        plan.grid.check(rhs)
        return rhs / a
    return plan.solve_operator(a, b, rhs)
