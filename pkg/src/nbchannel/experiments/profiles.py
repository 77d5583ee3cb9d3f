"""Analytic forcing and initial-condition profiles for the scenarios."""

from __future__ import annotations

import numpy as np

from ..core import Field, GridSpec, l2_norm
from ..inequality_lab import random_field
from .config import ForcingCfg, ICCfg


def bump(y, width: float):
    """Smooth bump ``exp(1 - 1/(1 - (y/w)^2))`` on ``|y| < w``, zero outside."""
    s = np.asarray(y, dtype=float) / width
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


def compact_profile(grid: GridSpec, mode: int, width: float) -> Field:
    """``sin(mode pi x / L) * bump(y, width)``, compactly supported in y."""
    sx = np.sin(mode * np.pi * grid.x / grid.L)
    return np.outer(bump(grid.y, width), sx)


def build_forcing(grid: GridSpec, cfg: ForcingCfg) -> tuple[Field | None, Field | None]:
    if cfg.kind == "none" or (cfg.amp == 0 and not cfg.amp_g):
        return None, None
    amp_g = cfg.amp if cfg.amp_g is None else cfg.amp_g
    f = cfg.amp * compact_profile(grid, cfg.mode_f, cfg.width)
    g = amp_g * compact_profile(grid, cfg.mode_g, cfg.width)
    return f, g


def normalized(grid: GridSpec, a: Field, R: float) -> Field:
    n = l2_norm(grid, a)
    if n == 0 or R == 0:
        return grid.zeros()
    return a * (R / n)


def gaussian_bump(grid: GridSpec, center, width: float) -> Field:
    cx = center[0] * grid.L
    cy = center[1]
    return grid.sample(lambda x, y: np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2 * width**2)))


def build_ic(grid: GridSpec, cfg: ICCfg, R: float | None = None,
             seed: int | None = None) -> tuple[Field, Field]:
    """Initial ``(xi, theta)``, each scaled to L2 norm ``R``.

    ``eigenmode`` puts the mode in xi with theta zero.  ``random`` draws xi
    from ``seed`` and theta from ``seed + 1``.
    """
    R = cfg.R if R is None else float(R)
    seed = cfg.seed if seed is None else int(seed)
    kind = cfg.kind
    if kind == "zero" or R == 0:
        return grid.zeros(), grid.zeros()
    if kind == "eigenmode":
        return normalized(grid, grid.eigenmode(cfg.m, cfg.n), R), grid.zeros()
    if kind == "gaussian-bump":
        b = gaussian_bump(grid, cfg.center, cfg.width)
        return normalized(grid, b, R), normalized(grid, b, R)
    if kind == "compact-bump":
        b = compact_profile(grid, cfg.m, cfg.width)
        return normalized(grid, b, R), normalized(grid, b, R)
    if kind == "random":
        return (normalized(grid, random_field(seed, grid), R),
                normalized(grid, random_field(seed + 1, grid), R))
    raise ValueError(f"unknown initial condition kind {kind!r}")
