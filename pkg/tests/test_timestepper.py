import math

import numpy as np
import pytest

from nbchannel.core import GridSpec, Params, State, inner_product, l2_norm
from nbchannel.operators import ddx, laplacian
from nbchannel.poisson import make_plan
from nbchannel.timestepper import (
    DT_FLOOR,
    NumericalBlowup,
    StepperConfig,
    StepperMemory,
    cfl_dt,
    explicit_tendency,
    integrate,
    make_state,
    step,
)

from .conftest import rand_field


@pytest.fixture
def g():
    return GridSpec(math.pi, math.pi / 2, 31, 31)


def test_config_validation():
    with pytest.raises(ValueError):
        StepperConfig(dt=0.0)
    with pytest.raises(ValueError):
        StepperConfig(dt=0.1, cfl_target=1.0)
    assert StepperConfig(dt=0.1).dt_max == 0.1


def test_make_state_solves_poisson(g, rng):
    xi = rand_field(rng, g)
    s = make_state(g, xi, g.zeros())
    assert np.max(np.abs(laplacian(g, s.psi) - xi)) <= 1e-10 * np.max(np.abs(xi))


def test_tendency_zero_state(g):
    fx, ft = explicit_tendency(make_state(g, g.zeros(), g.zeros()), Params(1.0, 5.0))
    assert not fx.any() and not ft.any()


def test_tendency_buoyancy_only(g, rng):
    th = g.eigenmode()
    gsrc = rand_field(rng, g)
    p = Params(Pr=2.0, Ra=7.0, g=gsrc)
    fx, ft = explicit_tendency(make_state(g, g.zeros(), th), p)
    assert np.array_equal(fx, -(7.0 / 2.0) * ddx(g, th))
    assert np.array_equal(ft, gsrc)


def test_tendency_advection_does_no_work(g, rng):
    gsrc = rand_field(rng, g)
    s = make_state(g, rand_field(rng, g), rand_field(rng, g))
    _, ft = explicit_tendency(s, Params(1.0, 3.0, g=gsrc))
    work = inner_product(g, ft - gsrc, s.theta)
    assert abs(work) <= 1e-12 * l2_norm(g, ft - gsrc) * l2_norm(g, s.theta)


def test_nan_reports_first_node(g):
    th = g.zeros()
    th[4, 7] = np.nan
    s = State(0.0, g.zeros(), th, g.zeros(), g)
    with pytest.raises(NumericalBlowup) as info:
        explicit_tendency(s, Params(1.0, 1.0))
    # ddx spreads the NaN to columns 6 and 8 of row 4; the first is (i=6, j=4)
    assert info.value.node == (6, 4)


def test_zero_state_stays_zero(g):
    s = make_state(g, g.zeros(), g.zeros())
    out = step(s, Params(1.0, 10.0), StepperConfig(dt=0.1), StepperMemory())
    assert not out.xi.any() and not out.theta.any() and out.t == pytest.approx(0.1)


def test_eigenmode_matches_scalar_cn_recurrence(g):
    dt, n = 0.05, 40
    mu = g.mu1
    s = make_state(g, g.eigenmode(), g.zeros())
    out = integrate(s, Params(1.0, 10.0), StepperConfig(dt=dt, t_end=n * dt))
    factor = (1 - 0.5 * dt * mu) / (1 + 0.5 * dt * mu)
    expect = factor**n * l2_norm(g, g.eigenmode())
    assert l2_norm(g, out.xi) == pytest.approx(expect, rel=1e-12)
    assert not out.theta.any()


def test_first_step_is_forward_euler(g, rng):
    s = make_state(g, rand_field(rng, g), rand_field(rng, g))
    p = Params(1.0, 4.0)
    dt = 0.01
    mem = StepperMemory()
    out = step(s, p, StepperConfig(dt=dt), mem)
    fx, ft = explicit_tendency(s, p)
    # CN residual with an Euler explicit part
    res = out.xi - 0.5 * dt * laplacian(g, out.xi) - (s.xi + 0.5 * dt * laplacian(g, s.xi) + dt * fx)
    assert np.max(np.abs(res)) <= 1e-10 * np.max(np.abs(s.xi))
    assert mem.valid and mem.dt == dt


def test_second_step_uses_ab2(g, rng):
    s0 = make_state(g, rand_field(rng, g), rand_field(rng, g))
    p = Params(1.0, 4.0)
    dt = 0.01
    mem = StepperMemory()
    s1 = step(s0, p, StepperConfig(dt=dt), mem)
    s2 = step(s1, p, StepperConfig(dt=dt), mem)
    f0, _ = explicit_tendency(s0, p)
    f1, _ = explicit_tendency(s1, p)
    res = (s2.xi - 0.5 * dt * laplacian(g, s2.xi)
           - (s1.xi + 0.5 * dt * laplacian(g, s1.xi) + dt * (1.5 * f1 - 0.5 * f0)))
    assert np.max(np.abs(res)) <= 1e-10 * np.max(np.abs(s1.xi))


def test_memory_cleared_on_dt_change(g, rng):
    s = make_state(g, rand_field(rng, g), g.zeros())
    p = Params(1.0, 1.0)
    mem = StepperMemory()
    step(s, p, StepperConfig(dt=0.01), mem)
    a = step(s, p, StepperConfig(dt=0.02), mem)
    b = step(s, p, StepperConfig(dt=0.02), StepperMemory())
    assert np.array_equal(a.xi, b.xi)


def test_cfl_dt(g, rng):
    cfg = StepperConfig(dt=0.5, cfl_target=0.4)
    assert cfl_dt(make_state(g, g.zeros(), g.zeros()), cfg) == 0.5
    s = make_state(g, 50 * rand_field(rng, g), g.zeros())
    d1 = cfl_dt(s, cfg)
    d2 = cfl_dt(make_state(g, 100 * s.xi, g.zeros()), cfg)
    assert d2 == pytest.approx(d1 / 100, rel=1e-12)
    huge = make_state(g, 1e12 * s.xi, g.zeros())
    assert cfl_dt(huge, cfg) == DT_FLOOR


def test_integrate_identity_when_t_end_equals_t0(g, rng):
    s = make_state(g, rand_field(rng, g), rand_field(rng, g))
    out = integrate(s, Params(1.0, 1.0), StepperConfig(dt=0.1, t_end=0.0))
    assert out is s


def test_two_halves_equal_one_run(g, rng):
    s = make_state(g, rand_field(rng, g), rand_field(rng, g))
    p = Params(1.0, 10.0)
    full = integrate(s, p, StepperConfig(dt=0.01, t_end=0.2))
    mem = StepperMemory()
    half = integrate(s, p, StepperConfig(dt=0.01, t_end=0.1), mem=mem)
    half = integrate(half, p, StepperConfig(dt=0.01, t_end=0.2), mem=mem)
    assert np.array_equal(full.xi, half.xi) and np.array_equal(full.theta, half.theta)


def test_observers_called_every_k(g):
    calls = []

    class Obs:
        every = 3

        def __call__(self, n, state):
            calls.append(n)

    s = make_state(g, g.eigenmode(), g.zeros())
    integrate(s, Params(1.0, 1.0), StepperConfig(dt=0.1, t_end=1.0), [Obs()])
    assert calls == [0, 3, 6, 9]


def test_final_step_lands_on_t_end(g):
    s = make_state(g, g.eigenmode(), g.zeros())
    out = integrate(s, Params(1.0, 1.0), StepperConfig(dt=0.3, t_end=1.0))
    assert out.t == pytest.approx(1.0, abs=1e-12)


def test_adaptive_run_stays_finite(g, rng):
    s = make_state(g, 20 * rand_field(rng, g), rand_field(rng, g))
    out = integrate(s, Params(1.0, 10.0), StepperConfig(dt=0.05, t_end=0.5, adaptive=True))
    assert out.t == pytest.approx(0.5) and np.all(np.isfinite(out.xi))


def test_diffusion_alone_never_increases_norm(g, rng):
    # advection switched off by zeroing psi; theta = 0 removes buoyancy
    s = make_state(g, rand_field(rng, g), g.zeros())
    p = Params(1.0, 1.0)
    mem = StepperMemory()
    cfg = StepperConfig(dt=5.0)
    prev = l2_norm(g, s.xi)
    for _ in range(5):
        mem.clear()  # Euler explicit part so each step is a pure CN contraction
        s = step(s.replace(psi=np.zeros(g.shape)), p, cfg, mem)
        now = l2_norm(g, s.xi)
        assert now <= prev
        prev = now


def test_theta_energy_residual_is_second_order():
    from nbchannel.diagnostics import sample

    g = GridSpec(math.pi, math.pi / 2, 31, 31)
    p = Params(1.0, 5.0)
    res = []
    for dt in (0.02, 0.01, 0.005):
        s = make_state(g, g.zeros(), g.eigenmode(1, 1) + 0.5 * g.eigenmode(2, 1))
        mem, plan = StepperMemory(), make_plan(g)
        cfg = StepperConfig(dt=dt)
        prev = None
        while s.t < 0.2 - 1e-12:
            prev, s = s, step(s, p, cfg, mem, plan)
        res.append(sample(s, prev, p).energy_residual_theta)
    slopes = np.log2(np.array(res[:-1]) / res[1:])
    assert np.all(slopes >= 1.8)
