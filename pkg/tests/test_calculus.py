"""Extended-point derivatives, the Ito Laplacian, and Lie brackets."""

import numpy as np
import pytest

from ousym import (ConstantForce, build_ou_system, derivative,
                   extended_coords, gbm_process, ito_laplacian, lie_bracket,
                   point, sample_probes, stack_probes)
from ousym.calculus import ito_laplacian_components


def _sys(n=1, beta=(1.0,), mu=(1.0,), c=(0.0,)):
    return build_ou_system(n, list(beta), list(mu), ConstantForce(list(c)))


def test_derivative_orders():
    p = point(x=[3.0], v=[0.0])
    f = lambda q: q.x[0] * q.x[0]
    assert derivative(f, p, ("x", 0)) == pytest.approx(6.0, abs=1e-13)
    assert derivative(f, p, ("x", 0), order=2) == pytest.approx(2.0,
                                                                abs=1e-13)
    g = lambda q: q.x[0] * q.v[0]
    p2 = point(x=[1.7], v=[-0.4])
    assert derivative(g, p2, ("x", 0), coord2=("v", 0)) == pytest.approx(
        1.0, abs=1e-13)


def test_dual_and_fd_engines_agree():
    import ousym.duals as duals
    p = point(x=[0.7], v=[-0.3], t=0.4, w=[0.2])

    def f(q):
        return duals.sin(q.x[0] * q.v[0]) + duals.exp(-q.t) * q.w[0]

    for c in [("x", 0), ("v", 0), ("t", 0), ("w", 0)]:
        d_dual = derivative(f, p, c, engine="dual")
        d_fd = derivative(f, p, c, engine="fd")
        assert d_fd == pytest.approx(d_dual, rel=1e-6, abs=1e-8)
    d2_dual = derivative(f, p, ("x", 0), coord2=("v", 0), engine="dual")
    d2_fd = derivative(f, p, ("x", 0), coord2=("v", 0), engine="fd")
    assert d2_fd == pytest.approx(d2_dual, rel=1e-4, abs=1e-6)


def test_ito_laplacian_oracles():
    # Delta(v1 w1) = 2 sigma_{v1,w1} = 2 mu
    sys2 = _sys(mu=(2.0,))
    p = point(x=[0.3], v=[0.5], t=0.1, w=[0.2])
    assert ito_laplacian(lambda q: q.v[0] * q.w[0], sys2, p) == \
        pytest.approx(4.0, abs=1e-12)
    # Delta(v1^2) = 2 mu^2
    sys3 = _sys(mu=(3.0,))
    assert ito_laplacian(lambda q: q.v[0] * q.v[0], sys3, p) == \
        pytest.approx(18.0, abs=1e-12)
    # Delta(w1^2) = 2 from the pure Wiener second derivative
    assert ito_laplacian(lambda q: q.w[0] * q.w[0], sys3, p) == \
        pytest.approx(2.0, abs=1e-12)
    # x coordinates carry no diffusion at all
    assert ito_laplacian(lambda q: q.x[0] * q.x[0], sys3, p) == \
        pytest.approx(0.0, abs=1e-14)


def test_ito_laplacian_linearity():
    sys1 = _sys(mu=(2.0,))
    p = point(x=[0.1], v=[-0.7], t=0.0, w=[1.1])
    f = lambda q: q.v[0] * q.w[0]
    g = lambda q: q.v[0] * q.v[0]
    lhs = ito_laplacian(lambda q: 2.0 * f(q) - 3.0 * g(q), sys1, p)
    rhs = 2.0 * ito_laplacian(f, sys1, p) - 3.0 * ito_laplacian(g, sys1, p)
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_ito_laplacian_on_custom_process():
    # GBM: Delta f = b^2 x^2 f'' for state-only f
    gbm = gbm_process(1.0, 0.5)
    p = point(x=[2.0])
    val = ito_laplacian(lambda q: q.x[0] ** 3, gbm, p)
    assert val == pytest.approx(0.25 * 4.0 * 6.0 * 2.0, rel=1e-12)


def test_ito_laplacian_components_batched():
    sys1 = _sys(mu=(2.0,))
    probes = sample_probes(sys1, count=7, seed=0)
    stacked = stack_probes(probes)

    def fvec(q):
        return [q.v[0] * q.w[0], q.v[0] * q.v[0]]

    lap = ito_laplacian_components(fvec, sys1, stacked)
    assert np.allclose(np.asarray(lap[0]), 4.0)
    assert np.allclose(np.asarray(lap[1]), 8.0)


def test_lie_bracket_textbook():
    # [d/dx, x d/dx] = d/dx on the extended space
    sys1 = _sys()
    coords = extended_coords(point(x=[0.0], v=[0.0]))
    nc = len(coords)
    ix = coords.index(("x", 0))

    def X(p):
        out = [0.0] * nc
        out[ix] = 1.0
        return out

    def Y(p):
        out = [0.0] * nc
        out[ix] = p.x[0]
        return out

    p = point(x=[0.8], v=[0.1], t=0.2, w=[0.4])
    br = lie_bracket(X, Y, p)
    expected = [0.0] * nc
    expected[ix] = 1.0
    assert np.allclose([float(np.asarray(b)) for b in br], expected,
                       atol=1e-13)


def test_lie_bracket_antisymmetry_and_jacobi():
    sys1 = _sys()
    p0 = point(x=[0.8], v=[0.1], t=0.2, w=[0.4])
    coords = extended_coords(p0)
    nc = len(coords)
    import ousym.duals as duals

    rng = np.random.default_rng(2)

    def make_field(seed):
        r = np.random.default_rng(seed)
        picks = r.integers(0, nc, size=2)
        coeffs = r.uniform(-1, 1, size=2)

        def F(p):
            vals = [p.coord(c) for c in coords]
            out = [0.0] * nc
            out[int(picks[0])] = coeffs[0] * duals.sin(vals[int(picks[1])])
            out[int(picks[1])] = coeffs[1] * vals[int(picks[0])] ** 2
            return out

        return F

    X, Y, Z = make_field(1), make_field(2), make_field(3)

    def as_floats(vec):
        return np.array([float(np.asarray(e)) for e in vec])

    br_xy = as_floats(lie_bracket(X, Y, p0))
    br_yx = as_floats(lie_bracket(Y, X, p0))
    assert np.allclose(br_xy, -br_yx, atol=1e-10)

    # Jacobi via nested numerical brackets (fd on the outer level)
    def bracket_field(A, B):
        def F(p):
            return lie_bracket(A, B, p, engine="dual")
        return F

    j1 = as_floats(lie_bracket(X, bracket_field(Y, Z), p0, engine="fd"))
    j2 = as_floats(lie_bracket(Y, bracket_field(Z, X), p0, engine="fd"))
    j3 = as_floats(lie_bracket(Z, bracket_field(X, Y), p0, engine="fd"))
    assert np.max(np.abs(j1 + j2 + j3)) < 1e-5


def test_sample_probes_shape_and_range():
    sys2 = build_ou_system(2, [1.0, 2.0], [1.0, 1.0],
                           ConstantForce([0.0, 0.0]))
    probes = sample_probes(sys2, count=10, seed=4)
    assert len(probes) == 10
    for p in probes:
        assert len(p.x) == 2 and len(p.v) == 2
        assert len(p.w) == 2 and len(p.z) == 2
        assert all(abs(c) <= 2.0 for c in p.x + p.v + p.w)
        assert 0.0 <= p.t <= 2.0
        assert all(c == 0.0 for c in p.z)


def test_chi_values():
    sys1 = build_ou_system(1, [1.0], [2.0], ConstantForce([0.5]))
    p = point(x=[1.0], v=[2.0], t=3.0, w=[4.0])
    # chi = w - v/mu - (beta/mu) x + (c/mu) t
    assert p.chi(sys1, 0) == pytest.approx(4.0 - 1.0 - 0.5 + 0.75)
