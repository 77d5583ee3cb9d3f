import json
import math

import numpy as np
import pytest
from scipy import integrate

from nbchannel.core import GridSpec, grad_sq, l2_norm
from nbchannel import inequality_lab as lab


@pytest.fixture
def g():
    return GridSpec(math.pi, math.pi / 2, 63, 63)


def test_random_field_deterministic(g):
    assert np.array_equal(lab.random_field(5, g), lab.random_field(5, g))
    assert not np.array_equal(lab.random_field(5, g), lab.random_field(6, g))
    with pytest.raises(ValueError):
        lab.random_field(0, g, modes=0)


def test_random_field_series_oracle(g):
    # independent direct evaluation of the sine series
    rng = np.random.default_rng(11)
    amp = rng.standard_normal((3, 3))
    X, Yc = g.mesh()
    ref = np.zeros(g.shape)
    for n in range(1, 4):
        for m in range(1, 4):
            ref += amp[n - 1, m - 1] * (m * m + n * n) ** -1.0 * np.sin(m * np.pi * X / g.L) \
                * np.sin(n * np.pi * (Yc + g.Y) / (2 * g.Y))
    assert np.allclose(lab.random_field(11, g, modes=3, decay=2.0), ref, atol=1e-14)


def test_single_mode_field_is_eigenmode(g):
    u = lab.random_field(3, g, modes=1)
    assert grad_sq(g, u) / l2_norm(g, u) ** 2 == pytest.approx(g.mu1, rel=1e-12)


def test_decay2_gradient_ratio_bounded(g):
    ratios = [math.sqrt(grad_sq(g, u)) / l2_norm(g, u)
              for _, u in lab.field_family(g, range(50), decay=2.0)]
    # bounded by the largest mode in the series
    assert max(ratios) <= math.sqrt(g.mode_eigenvalue(6, 6))


def test_ladyzhenskaya_homogeneous_and_oracle(g):
    u = lab.random_field(1, g)
    assert lab.ladyzhenskaya_constant(g, 3.0 * u) == pytest.approx(lab.ladyzhenskaya_constant(g, u), rel=1e-13)
    # eigenmode sin(x)cos(y): continuum norms by quadrature
    L, Y = g.L, g.Y
    l4 = integrate.dblquad(lambda y, x: (np.sin(x) * np.cos(y)) ** 4, 0, L, -Y, Y)[0] ** 0.25
    l2 = math.sqrt(L * Y / 2)
    h1 = math.sqrt(l2**2 * (1 + 2))
    oracle = l4 / math.sqrt(h1 * l2)
    fine = GridSpec(L, Y, 255, 255)
    assert lab.ladyzhenskaya_constant(fine, fine.eigenmode()) == pytest.approx(oracle, rel=5e-3)


def test_ladyzhenskaya_report(g):
    fields = lab.field_family(g, range(20)) + [(99, g.zeros())]
    rep = lab.check_ladyzhenskaya(g, fields)
    assert rep.n == 20 and rep.passed and rep.bound == pytest.approx(0.6)
    js = rep.to_json()
    assert set(js) == {"id", "n", "max_constant", "argmax_seed", "bound", "pass"}
    json.dumps(js)


def test_poincare_sharpness(g):
    rep = lab.check_poincare(g, [(0, g.eigenmode())])
    assert abs(rep.max_constant - 1 / math.sqrt(g.mu1)) <= 1e-10
    rep = lab.check_poincare(g, lab.field_family(g, range(30)))
    assert rep.passed and rep.max_constant <= 1 / math.sqrt(g.mu1) * (1 + 1e-10)
    hi = lab.check_poincare(g, [(0, g.eigenmode(5, 7))])
    assert hi.max_constant < 1 / math.sqrt(g.mu1)


def test_argmax_tie_lowest_seed(g):
    e = g.eigenmode()
    rep = lab.check_poincare(g, [(7, e), (3, e), (5, 0.5 * e)])
    assert rep.argmax_seed == 3


def test_cutoff_poincare(g):
    k = g.Y / 4
    # support inside |y| < k: weighted terms vanish
    inner = g.sample(lambda x, y: np.sin(x) * np.where(np.abs(y) < 0.9 * k, np.cos(np.pi * y / (1.8 * k)) ** 2, 0))
    G, A, B = lab.cutoff_integrals(g, inner, k)
    assert A == 0 and G == 0 and B > 0
    rep = lab.check_cutoff_poincare(g, [(0, g.eigenmode())], k)
    assert rep.passed and math.isfinite(rep.max_constant)
    r1 = lab.check_cutoff_poincare(g, [(0, g.eigenmode())], k)
    r2 = lab.check_cutoff_poincare(g, [(0, 2 * g.eigenmode())], k)
    assert r1.max_constant == pytest.approx(r2.max_constant, rel=1e-12, abs=1e-15)
    assert r1.extra["beta_grid_min"] == r2.extra["beta_grid_min"]
    with pytest.raises(ValueError):
        lab.check_cutoff_poincare(g, [], 0.0)
    with pytest.warns(UserWarning):
        lab.check_cutoff_poincare(g, [(0, g.eigenmode())], g.Y)


def test_cutoff_integrals_oracle():
    # independent quadrature of the three integrals for the eigenmode, k = Y/4
    L, Y = math.pi, math.pi / 2
    g = GridSpec(L, Y, 255, 255)
    k = Y / 4
    G, A, B = lab.cutoff_integrals(g, g.eigenmode(), k)
    w = lambda y: lab.cutoff_phi(y**2 / k**2) ** 2  # noqa: E731
    pts = [-Y, -math.sqrt(2) * k, -k, k, math.sqrt(2) * k, Y]
    iy = lambda f: sum(integrate.quad(f, a, b, epsabs=1e-13)[0] for a, b in zip(pts, pts[1:]))  # noqa: E731
    A_ref = (L / 2) * iy(lambda y: w(y) * np.cos(y) ** 2)
    G_ref = (L / 2) * iy(lambda y: w(y) * (np.cos(y) ** 2 + np.sin(y) ** 2))
    B_ref = (L * Y / 2) / k**2
    assert A == pytest.approx(A_ref, rel=1e-3)
    assert G == pytest.approx(G_ref, rel=1e-2)
    assert B == pytest.approx(B_ref, rel=1e-3)


def test_jacobian_bounds(g):
    u = lab.random_field(1, g)
    v = lab.random_field(2, g)
    assert lab.jacobian_ratio(g, u, u, "jacobian_h2h2") == 0.0
    assert lab.jacobian_ratio(g, u, v, "jacobian_h2h2") == pytest.approx(
        lab.jacobian_ratio(g, v, u, "jacobian_h2h2"), rel=1e-14)
    assert lab.jacobian_ratio(g, g.zeros(), v, "jacobian_h3h1") is None
    with pytest.raises(ValueError):
        lab.jacobian_ratio(g, u, v, "nope")
    rep = lab.check_jacobian_bounds(g, lab.pair_family(g, range(20)), "jacobian_h3h1")
    assert rep.passed and rep.n == 20
    bare = lab.check_jacobian_bounds(g, [(u, v), (v, u)], "jacobian_h2h2")
    assert bare.n == 2 and bare.argmax_seed in (0, 1)


def test_jacobian_bound_refinement():
    seeds = range(500)
    maxima = []
    for n in (63, 127):
        gg = GridSpec(math.pi, math.pi / 2, n, n)
        maxima.append(lab.check_jacobian_bounds(gg, lab.pair_family(gg, seeds), "jacobian_h2h2").max_constant)
    assert abs(maxima[1] / maxima[0] - 1) < 0.10


def test_scale_invariance_per_sample(g):
    u, v = lab.random_field(4, g), lab.random_field(5, g)
    for which in lab.JACOBIAN_BOUNDS:
        assert lab.jacobian_ratio(g, 4 * u, 0.5 * v, which) == pytest.approx(
            lab.jacobian_ratio(g, u, v, which), rel=1e-13)


def test_reports_deterministic(g):
    a = lab.check_ladyzhenskaya(g, lab.field_family(g, range(10))).to_json()
    b = lab.check_ladyzhenskaya(g, lab.field_family(g, range(10))).to_json()
    assert a == b


def test_calibration_fixture():
    cal = lab.load_calibration()
    assert cal["n"] == 1000 and cal["grid"]["nx"] == 255
    for key in ("ladyzhenskaya", "jacobian_h2h2", "jacobian_h3h1"):
        assert cal["bounds"][key] >= cal["observed_max"][key]
    assert lab.default_bound("ladyzhenskaya") == pytest.approx(0.6)


def test_calibration_sweep_reproducible():
    small = lab.calibration_sweep(n=5, nx=31, ny=31)
    again = lab.calibration_sweep(n=5, nx=31, ny=31)
    assert small == again
