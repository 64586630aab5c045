"""Differentiation engine on the extended space (x, v, t; w, z).

Coordinates are addressed by (block, index) pairs, e.g. ("x", 0), ("v", 2),
("w", 1), ("z", 0), or ("t", 0). Scalar fields are plain callables on
ExtendedPoint; vector fields on the extended space return one component per
entry of extended_coords(p), in the order x-block, v-block, t, w-block,
z-block.

The primary engine is hyper-dual numbers (exact to rounding); central finite
differences are available as an independent cross-check.
"""

import numpy as np

from dataclasses import dataclass

from .duals import HyperDual, value
from .errors import NonFiniteResult, WrongForceClass
from .model import ConstantForce

_CBRT_EPS = float(np.finfo(float).eps) ** (1.0 / 3.0)


@dataclass(frozen=True)
class ExtendedPoint:
    """A point of the extended space; coordinates may be floats, arrays
    (batched points), or HyperDuals (during differentiation)."""

    x: tuple
    v: tuple
    t: object
    w: tuple
    z: tuple

    def coord(self, c):
        block, i = c
        if block == "t":
            return self.t
        return getattr(self, block)[i]

    def with_coord(self, c, val):
        block, i = c
        if block == "t":
            return ExtendedPoint(self.x, self.v, val, self.w, self.z)
        items = list(getattr(self, block))
        items[i] = val
        kwargs = {"x": self.x, "v": self.v, "t": self.t, "w": self.w,
                  "z": self.z}
        kwargs[block] = tuple(items)
        return ExtendedPoint(**kwargs)

    # characteristic combinations of the OU system

    def zeta(self, sys, i):
        """zeta_i = w_i - v_i / mu_i."""
        return self.w[i] - self.v[i] / sys.mu[i]

    def u_char(self, sys, i):
        """u_i = zeta_i - (beta_i / mu_i) x_i."""
        return self.zeta(sys, i) - (sys.beta[i] / sys.mu[i]) * self.x[i]

    def chi(self, sys, i):
        """chi_i = u_i + rho_i t with rho_i = c_i / mu_i (constant force)."""
        if not isinstance(sys.force, ConstantForce):
            raise WrongForceClass("chi is defined for constant-force systems")
        rho_i = sys.force.c[i] / sys.mu[i]
        return self.u_char(sys, i) + rho_i * self.t


def point(x=(), v=(), t=0.0, w=None, z=None):
    """Convenience constructor with tuple normalization and ghost defaults."""
    x = tuple(x)
    v = tuple(v)
    w = tuple(w) if w is not None else tuple(0.0 for _ in x)
    z = tuple(z) if z is not None else tuple(0.0 for _ in w)
    return ExtendedPoint(x=x, v=v, t=t, w=w, z=z)


def extended_coords(p):
    """Coordinate addresses of p in canonical order."""
    return ([("x", i) for i in range(len(p.x))]
            + [("v", i) for i in range(len(p.v))]
            + [("t", 0)]
            + [("w", i) for i in range(len(p.w))]
            + [("z", i) for i in range(len(p.z))])


def sample_probes(proc, count=32, seed=0, box=(-2.0, 2.0),
                  t_range=(0.0, 2.0), x_box=None):
    """Seeded uniform probe points for residual certification.

    x, v, w are uniform in `box` (x optionally in `x_box`), t uniform in
    `t_range`, ghosts z fixed at zero. Deterministic in (seed, count).
    """
    nx = sum(1 for c in proc.state_coords if c[0] == "x")
    nv = sum(1 for c in proc.state_coords if c[0] == "v")
    nw = sum(1 for c in proc.wiener_coords if c[0] == "w")
    nz = sum(1 for c in proc.wiener_coords if c[0] == "z")
    xlo, xhi = x_box if x_box is not None else box
    lo, hi = box
    rng = np.random.default_rng(seed)
    probes = []
    for _ in range(count):
        x = tuple(rng.uniform(xlo, xhi, nx))
        v = tuple(rng.uniform(lo, hi, nv))
        t = float(rng.uniform(*t_range))
        w = tuple(rng.uniform(lo, hi, nw))
        probes.append(ExtendedPoint(x=x, v=v, t=t, w=w,
                                    z=tuple(0.0 for _ in range(nz))))
    return probes


def stack_probes(probes):
    """Bundle a probe list into one ExtendedPoint with array coordinates."""
    first = probes[0]
    def col(block, i):
        return np.array([float(p.coord((block, i))) for p in probes])
    return ExtendedPoint(
        x=tuple(col("x", i) for i in range(len(first.x))),
        v=tuple(col("v", i) for i in range(len(first.v))),
        t=np.array([float(p.t) for p in probes]),
        w=tuple(col("w", i) for i in range(len(first.w))),
        z=tuple(col("z", i) for i in range(len(first.z))))


def _seed_point(p, c1, c2=None):
    if c2 is None:
        return p.with_coord(c1, HyperDual(p.coord(c1), 1.0, 0.0, 0.0))
    if c2 == c1:
        return p.with_coord(c1, HyperDual(p.coord(c1), 1.0, 1.0, 0.0))
    q = p.with_coord(c1, HyperDual(p.coord(c1), 1.0, 0.0, 0.0))
    return q.with_coord(c2, HyperDual(q.coord(c2), 0.0, 1.0, 0.0))


def _d1(r):
    return r.f1 if isinstance(r, HyperDual) else (np.zeros_like(r) if isinstance(r, np.ndarray) else 0.0)


def _d12(r):
    return r.f12 if isinstance(r, HyperDual) else (np.zeros_like(r) if isinstance(r, np.ndarray) else 0.0)


def _check_finite(out, what):
    arr = np.asarray(out)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteResult(f"{what} is not finite")
    return out


def _fd_step(val):
    return _CBRT_EPS * np.maximum(1.0, np.abs(val))


def derivative(f, p, coord, order=1, coord2=None, engine="dual"):
    """First or second derivative of a scalar field at p.

    coord/coord2 are (block, index) pairs; giving coord2 means the mixed
    second derivative. engine "dual" is exact to rounding; engine "fd"
    uses central differences with step cbrt(machine eps) * max(1, |coord|).
    """
    if coord2 is not None:
        order = 2
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if engine == "dual":
        if order == 1:
            out = _d1(f(_seed_point(p, coord)))
        else:
            out = _d12(f(_seed_point(p, coord, coord2 or coord)))
        return _check_finite(out, "derivative")
    if engine != "fd":
        raise ValueError(f"unknown engine {engine!r}")
    c1 = coord
    v1 = p.coord(c1)
    h1 = _fd_step(value(v1))
    if order == 1:
        out = (f(p.with_coord(c1, v1 + h1)) - f(p.with_coord(c1, v1 - h1))) / (2 * h1)
        return _check_finite(out, "derivative")
    c2 = coord2 or c1
    if c2 == c1:
        out = (f(p.with_coord(c1, v1 + h1)) - 2 * f(p)
               + f(p.with_coord(c1, v1 - h1))) / (h1 * h1)
        return _check_finite(out, "derivative")
    v2 = p.coord(c2)
    h2 = _fd_step(value(v2))
    pp = f(p.with_coord(c1, v1 + h1).with_coord(c2, v2 + h2))
    pm = f(p.with_coord(c1, v1 + h1).with_coord(c2, v2 - h2))
    mp = f(p.with_coord(c1, v1 - h1).with_coord(c2, v2 + h2))
    mm = f(p.with_coord(c1, v1 - h1).with_coord(c2, v2 - h2))
    out = (pp - pm - mp + mm) / (4 * h1 * h2)
    return _check_finite(out, "derivative")


def grad_components(fvec, p, coord):
    """d/d(coord) of every component of a vector-valued callable, one pass."""
    r = fvec(_seed_point(p, coord))
    return [_d1(ri) for ri in r]


def second_components(fvec, p, c1, c2):
    """Mixed second derivative of every component, one pass."""
    r = fvec(_seed_point(p, c1, c2))
    return [_d12(ri) for ri in r]


def _sigma_values(proc, p):
    sig = proc.sigma(p)
    return [[value(e) for e in row] for row in sig]


def _is_zero(coef):
    return np.all(np.asarray(coef) == 0.0)


def ito_laplacian_components(fvec, proc, p):
    """Ito Laplacian applied to each component of a vector-valued callable.

    Delta f = sum_k d2f/dW_k dW_k + 2 sum_{j,k} sigma_{jk} d2f/dS_j dW_k
              + sum_{j,l} (sigma sigma^T)_{jl} d2f/dS_j dS_l
    with S over the full state and W over the full (active + ghost) Wiener
    coordinates; structurally zero coefficients are skipped.
    """
    S = list(proc.state_coords)
    W = list(proc.wiener_coords)
    sig = _sigma_values(proc, p)
    probe = fvec(p)
    total = [r * 0.0 for r in (value(c) for c in probe)]

    for k, Wk in enumerate(W):
        d2 = second_components(fvec, p, Wk, Wk)
        total = [a + b for a, b in zip(total, d2)]
    for j, Sj in enumerate(S):
        for k, Wk in enumerate(W):
            coef = sig[j][k]
            if _is_zero(coef):
                continue
            d2 = second_components(fvec, p, Sj, Wk)
            total = [a + 2.0 * coef * b for a, b in zip(total, d2)]
    for j, Sj in enumerate(S):
        for l, Sl in enumerate(S):
            coef = sum(sig[j][k] * sig[l][k] for k in range(len(W)))
            if _is_zero(coef):
                continue
            d2 = second_components(fvec, p, Sj, Sl)
            total = [a + coef * b for a, b in zip(total, d2)]
    for entry in total:
        _check_finite(entry, "ito_laplacian")
    return total


def ito_laplacian(f, sys, p):
    """Ito Laplacian of a scalar field for the given process at p."""
    return ito_laplacian_components(lambda q: [f(q)], sys, p)[0]


def lie_bracket(X, Y, p, engine="dual"):
    """Commutator [X, Y] = (X . grad) Y - (Y . grad) X at p.

    X and Y are vector fields over extended_coords(p); the result is a list
    in that same coordinate order.
    """
    coords = extended_coords(p)
    Xv = [value(c) for c in X(p)]
    Yv = [value(c) for c in Y(p)]
    if len(Xv) != len(coords) or len(Yv) != len(coords):
        raise NonFiniteResult(
            f"vector fields must have {len(coords)} components")
    out = [xv * 0.0 for xv in Xv]
    for b, cb in enumerate(coords):
        if _is_zero(Xv[b]) and _is_zero(Yv[b]):
            continue
        if engine == "dual":
            dY = grad_components(Y, p, cb)
            dX = grad_components(X, p, cb)
        else:
            dY = [derivative(lambda q, a=a: Y(q)[a], p, cb, engine="fd")
                  for a in range(len(coords))]
            dX = [derivative(lambda q, a=a: X(q)[a], p, cb, engine="fd")
                  for a in range(len(coords))]
        for a in range(len(coords)):
            out[a] = out[a] + Xv[b] * dY[a] - Yv[b] * dX[a]
    for entry in out:
        _check_finite(entry, "lie_bracket")
    return out
