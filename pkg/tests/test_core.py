import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from nbchannel.core import (
    GridSpec,
    Params,
    State,
    grad_sq,
    h1_norm,
    h1_seminorm,
    inner_product,
    l2_norm,
    lp_norm,
    make_grid,
)

from .conftest import rand_field


@pytest.mark.parametrize(
    "args, dx, dy",
    [
        ((math.pi, math.pi / 2, 127, 127), math.pi / 128, math.pi / 128),
        ((1, 1, 3, 3), 0.25, 0.5),
        ((2 * math.pi, 4, 255, 511), 2 * math.pi / 256, 8 / 512),
    ],
)
def test_make_grid_spacing(args, dx, dy):
    g = make_grid(*args)
    assert g.dx == pytest.approx(dx, rel=1e-15)
    assert g.dy == pytest.approx(dy, rel=1e-15)
    assert g.shape == (args[3], args[2])


@pytest.mark.parametrize("args", [(0, 1, 7, 7), (1, -1, 7, 7), (1, 1, 2, 7), (1, 1, 7, 2), (1, 1, 7.5, 7)])
def test_make_grid_rejects(args):
    with pytest.raises(ValueError):
        make_grid(*args)


def test_node_positions(grid_small):
    g = grid_small
    assert g.x[0] == pytest.approx(g.dx) and g.x[-1] == pytest.approx(g.L - g.dx)
    assert g.y[0] == pytest.approx(-g.Y + g.dy) and g.y[-1] == pytest.approx(g.Y - g.dy)
    X, Y = g.mesh()
    assert X.shape == g.shape and np.all(X[0] == g.x) and np.all(Y[:, 0] == g.y)


def test_inner_product_zero_and_symmetry(grid64, rng):
    a, b = rand_field(rng, grid64), rand_field(rng, grid64)
    assert inner_product(grid64, grid64.zeros(), b) == 0.0
    assert inner_product(grid64, a, b) == pytest.approx(inner_product(grid64, b, a), rel=1e-15)
    assert inner_product(grid64, a, a) >= 0


def test_inner_product_eigenmode_closed_form():
    g = GridSpec(math.pi, math.pi / 2, 127, 127)
    e = g.eigenmode()
    # integral of sin^2 sin^2 over (0,L)x(-Y,Y) is (L/2) Y
    assert inner_product(g, e, e) == pytest.approx(g.L * g.Y / 2, rel=1e-2)


def test_quadrature_second_order():
    # independent oracle: scipy dblquad of a smooth integrand vanishing on the walls
    L, Y = 2.0, 1.0
    fn = lambda x, y: x * (L - x) * (Y**2 - y**2) * np.exp(0.3 * x - 0.5 * y)  # noqa: E731
    exact, _ = integrate.dblquad(lambda y, x: fn(x, y), 0, L, -Y, Y, epsabs=1e-13, epsrel=1e-13)
    errs = []
    for n in (15, 31, 63, 127):
        g = GridSpec(L, Y, n, n)
        one = g.sample(lambda x, y: 1.0 + 0 * x)
        errs.append(abs(inner_product(g, g.sample(fn), one) - exact))
    slopes = np.log2(np.array(errs[:-1]) / errs[1:])
    assert np.all(slopes >= 1.9)


def test_grid_mismatch_raises(grid64, grid_small):
    with pytest.raises(ValueError):
        inner_product(grid64, grid64.zeros(), grid_small.zeros())


def test_norms_of_zero(grid64):
    z = grid64.zeros()
    assert l2_norm(grid64, z) == 0 and h1_seminorm(grid64, z) == 0 and h1_norm(grid64, z) == 0
    for p in (2, 3, 4, 6):
        assert lp_norm(grid64, z, p) == 0


def test_lp_rejects_unsupported(grid64):
    with pytest.raises(ValueError):
        lp_norm(grid64, grid64.zeros(), 5)


def test_l2_is_sqrt_inner(grid64, rng):
    a = rand_field(rng, grid64)
    assert l2_norm(grid64, a) ** 2 == pytest.approx(inner_product(grid64, a, a), rel=1e-14)
    assert lp_norm(grid64, a, 2) == pytest.approx(l2_norm(grid64, a), rel=1e-14)


def test_rayleigh_quotient_of_eigenmode():
    g = GridSpec(math.pi, math.pi / 2, 255, 255)
    e = g.eigenmode()
    q = h1_seminorm(g, e) ** 2 / l2_norm(g, e) ** 2
    assert q == pytest.approx(g.mu1_continuum, rel=5e-3)
    # discrete identity: the forward-difference quotient is exactly mu_h
    assert q == pytest.approx(g.mu1, rel=1e-12)


def test_l4_of_constant_field():
    g = GridSpec(2.0, 1.0, 255, 255)
    one = g.sample(lambda x, y: 1.0 + 0 * x)
    # interior nodes only: the boundary layer costs O(dx) of the area
    assert lp_norm(g, one, 4) == pytest.approx((g.L * 2 * g.Y) ** 0.25, rel=5e-3)


def test_mu1_formula():
    g = GridSpec(math.pi, math.pi / 2, 127, 127)
    dx, dy = g.dx, g.dy
    mu = (4 / dx**2) * math.sin(math.pi * dx / (2 * g.L)) ** 2 + (4 / dy**2) * math.sin(math.pi * dy / (4 * g.Y)) ** 2
    assert g.mu1 == pytest.approx(mu, rel=1e-15)
    assert g.mu1_continuum == pytest.approx(2.0, rel=1e-15)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), scale=st.floats(0.1, 10.0))
def test_triangle_and_homogeneity(seed, scale):
    g = GridSpec(1.0, 0.5, 12, 9)
    rng = np.random.default_rng(seed)
    a, b = rng.standard_normal(g.shape), rng.standard_normal(g.shape)
    assert l2_norm(g, a + b) <= l2_norm(g, a) + l2_norm(g, b) * (1 + 1e-14)
    assert l2_norm(g, scale * a) == pytest.approx(scale * l2_norm(g, a), rel=1e-13)
    assert grad_sq(g, scale * a) == pytest.approx(scale**2 * grad_sq(g, a), rel=1e-13)


def test_params_validation_and_forcing(grid_small):
    with pytest.raises(ValueError):
        Params(Pr=0.0, Ra=1.0)
    with pytest.raises(ValueError):
        Params(Pr=1.0, Ra=-1.0)
    f = np.ones(grid_small.shape)
    p = Params(1.0, 1.0, f=f, g=lambda t: t * f)
    ff, gg = p.forcing(grid_small, 2.0)
    assert np.all(ff == 1) and np.all(gg == 2)
    fz, gz = Params(1.0, 1.0).forcing(grid_small, 0.0)
    assert not fz.any() and not gz.any()
    with pytest.raises(ValueError):
        Params(1.0, 1.0, f=np.ones((3, 3))).forcing(grid_small, 0.0)


def test_state_checks_shapes(grid_small):
    z = grid_small.zeros()
    s = State(0.0, z, z, z, grid_small)
    assert s.replace(t=1.0).t == 1.0
    with pytest.raises(ValueError):
        State(0.0, z, np.zeros((2, 2)), z, grid_small)
