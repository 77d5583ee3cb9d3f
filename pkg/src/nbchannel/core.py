"""Grid, state containers, quadrature and norms for the truncated channel.

The channel (0, L) x R is truncated to (0, L) x (-Y, Y) with homogeneous
Dirichlet data on all four sides.  Only interior nodes are stored; a field
is a float64 array of shape ``(ny, nx)`` indexed ``[j, i]`` (row-major by y
then x).  Every stencil that reaches a boundary node reads zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

Field = np.ndarray
Forcing = Union[Field, Callable[[float], Field]]

SUPPORTED_P = (2, 3, 4, 6)


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid of interior nodes on (0, L) x (-Y, Y).

    Node ``(i, j)`` sits at ``x = (i+1) dx``, ``y = -Y + (j+1) dy``.  The
    sine transforms in :mod:`nbchannel.poisson` are fastest when ``nx + 1``
    is a product of small primes (powers of two are ideal).
    """

    L: float
    Y: float
    nx: int
    ny: int

    @property
    def dx(self) -> float:
        return self.L / (self.nx + 1)

    @property
    def dy(self) -> float:
        return 2.0 * self.Y / (self.ny + 1)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    @property
    def x(self) -> np.ndarray:
        return self.dx * np.arange(1, self.nx + 1)

    @property
    def y(self) -> np.ndarray:
        return -self.Y + self.dy * np.arange(1, self.ny + 1)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(X, Y)`` coordinate arrays of shape ``(ny, nx)``."""
        return np.meshgrid(self.x, self.y, indexing="xy")

    def zeros(self) -> Field:
        return np.zeros(self.shape)

    def sample(self, fn: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> Field:
        """Evaluate ``fn(x, y)`` on the interior nodes."""
        X, Yc = self.mesh()
        return np.asarray(fn(X, Yc), dtype=float) * np.ones(self.shape)

    def eigenmode(self, m: int = 1, n: int = 1) -> Field:
        """Dirichlet sine mode ``sin(m pi x / L) sin(n pi (y + Y) / 2Y)``."""
        sx = np.sin(m * np.pi * self.x / self.L)
        sy = np.sin(n * np.pi * (self.y + self.Y) / (2.0 * self.Y))
        return np.outer(sy, sx)

    def mode_eigenvalue(self, m: int = 1, n: int = 1) -> float:
        """Eigenvalue of ``-laplacian`` (5-point stencil) for :meth:`eigenmode`."""
        dx, dy = self.dx, self.dy
        return (4.0 / dx**2) * np.sin(m * np.pi * dx / (2.0 * self.L)) ** 2 + (
            4.0 / dy**2
        ) * np.sin(n * np.pi * dy / (4.0 * self.Y)) ** 2

    @property
    def mu1(self) -> float:
        """Principal eigenvalue of the discrete Dirichlet ``-laplacian``."""
        return self.mode_eigenvalue(1, 1)

    @property
    def mu1_continuum(self) -> float:
        return (np.pi / self.L) ** 2 + (np.pi / (2.0 * self.Y)) ** 2

    def check(self, *fields: Field) -> None:
        for a in fields:
            if np.shape(a) != self.shape:
                raise ValueError(
                    f"field of shape {np.shape(a)} does not live on grid {self.shape}"
                )


def make_grid(L: float, Y: float, nx: int, ny: int) -> GridSpec:
    if not (L > 0 and Y > 0):
        raise ValueError(f"channel extents must be positive, got L={L}, Y={Y}")
    if int(nx) != nx or int(ny) != ny or nx < 3 or ny < 3:
        raise ValueError(f"need integer nx, ny >= 3, got nx={nx}, ny={ny}")
    return GridSpec(float(L), float(Y), int(nx), int(ny))


@dataclass
class Params:
    """Physical data.  ``f`` and ``g`` are arrays or callables of time."""

    Pr: float
    Ra: float
    f: Optional[Forcing] = None
    g: Optional[Forcing] = None
    lambda_est: Optional[float] = None

    def __post_init__(self):
        if not (self.Pr > 0 and self.Ra > 0):
            raise ValueError(f"Pr and Ra must be positive, got Pr={self.Pr}, Ra={self.Ra}")

    def forcing(self, grid: GridSpec, t: float) -> tuple[Field, Field]:
        return _eval_forcing(grid, self.f, t), _eval_forcing(grid, self.g, t)


def _eval_forcing(grid: GridSpec, src: Optional[Forcing], t: float) -> Field:
    if src is None:
        return grid.zeros()
    val = src(t) if callable(src) else src
    grid.check(val)
    return val


@dataclass(frozen=True)
class State:
    """Snapshot ``(t, xi, theta, psi)``; velocities are derived from psi."""

    t: float
    xi: Field
    theta: Field
    psi: Field
    grid: GridSpec = field(repr=False)

    def __post_init__(self):
        self.grid.check(self.xi, self.theta, self.psi)

    def replace(self, **changes) -> "State":
        kw = dict(t=self.t, xi=self.xi, theta=self.theta, psi=self.psi, grid=self.grid)
        kw.update(changes)
        return State(**kw)


# -- quadrature and norms ---------------------------------------------------


def inner_product(grid: GridSpec, a: Field, b: Field) -> float:
    """Discrete L2 pairing: sum of ``a * b * dx * dy`` over interior nodes."""
    grid.check(a, b)
    return float(np.sum(a * b)) * grid.cell_area


def l2_norm(grid: GridSpec, a: Field) -> float:
    return float(np.sqrt(inner_product(grid, a, a)))


def _padded(a: Field) -> np.ndarray:
    return np.pad(a, 1)


def grad_sq(grid: GridSpec, a: Field) -> float:
    """Squared gradient norm from forward differences over every grid edge.

    Edges joining an interior node to the boundary are included, so
    ``inner_product(laplacian(a), a) == -grad_sq(a)`` holds by summation
    by parts.
    """
    grid.check(a)
    ap = _padded(a)
    ex = np.diff(ap[1:-1, :], axis=1)
    ey = np.diff(ap[:, 1:-1], axis=0)
    sx = float(np.sum(ex * ex)) / grid.dx**2
    sy = float(np.sum(ey * ey)) / grid.dy**2
    return (sx + sy) * grid.cell_area


def h1_seminorm(grid: GridSpec, a: Field) -> float:
    return float(np.sqrt(grad_sq(grid, a)))


def h1_norm(grid: GridSpec, a: Field) -> float:
    """Full H1 norm ``sqrt(||a||^2 + ||grad a||^2)``."""
    return float(np.sqrt(inner_product(grid, a, a) + grad_sq(grid, a)))


def lp_norm(grid: GridSpec, a: Field, p: int) -> float:
    if p not in SUPPORTED_P:
        raise ValueError(f"unsupported exponent p={p}; choose from {SUPPORTED_P}")
    grid.check(a)
    s = float(np.sum(np.abs(a) ** p)) * grid.cell_area
    return s ** (1.0 / p)
