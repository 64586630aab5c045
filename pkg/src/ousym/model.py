"""System definitions: force fields, the OU system, and force classification.

The dynamics integrated and analysed everywhere in this package are

    dx^i = v^i dt
    dv^i = (F^i(x) - beta_i v^i) dt + mu_i dw^i

with beta_i > 0 and mu_i != 0. The state has dimension 2n; the driving Wiener
space is formally 2n-dimensional, with n active processes w and n ghost
processes z that never enter the equations. The diffusion matrix is therefore
block-degenerate: zero rows for the x components, diagonal mu on the v rows,
zero columns for the ghosts.
"""

from dataclasses import dataclass

import numpy as np

from . import duals
from .duals import HyperDual
from .errors import (DimensionMismatch, EmptyProbeSet, NonFiniteEvaluation,
                     NonPositiveFriction, UnclassifiableForce, ZeroNoise)
from .expressions import parse_components


def default_x_probes(n, count=32, seed=0, low=-2.0, high=2.0):
    """Deterministic probe points in [low, high]^n for force classification."""
    rng = np.random.default_rng(seed)
    return [tuple(row) for row in rng.uniform(low, high, size=(count, n))]


def _seeded(x, j, k=None):
    """Copy of coordinate list with hyper-dual seeds on slots j and k."""
    xs = list(x)
    if k is None or k == j:
        xs[j] = HyperDual(xs[j], 1.0, 1.0 if k == j else 0.0, 0.0)
    else:
        xs[j] = HyperDual(xs[j], 1.0, 0.0, 0.0)
        xs[k] = HyperDual(xs[k], 0.0, 1.0, 0.0)
    return xs


class ForceField:
    """Base class: a map R^n -> R^n with derivative access.

    evaluate() accepts plain floats, numpy arrays (batched points), or
    HyperDual coordinates, and returns one entry per component.
    """

    n = 0

    def evaluate(self, x):
        raise NotImplementedError

    def jacobian(self, x):
        """dF^i/dx^j at a plain float point, exact via hyper-duals."""
        J = np.zeros((self.n, self.n))
        for j in range(self.n):
            F = self.evaluate(_seeded(x, j))
            for i, Fi in enumerate(F):
                J[i, j] = Fi.f1 if isinstance(Fi, HyperDual) else 0.0
        return J

    def hessians(self, x):
        """List of the n symmetric matrices (H_i)_{jk} = d2 F^i / dx^j dx^k."""
        H = np.zeros((self.n, self.n, self.n))
        for j in range(self.n):
            for k in range(j, self.n):
                F = self.evaluate(_seeded(x, j, k))
                for i, Fi in enumerate(F):
                    d2 = Fi.f12 if isinstance(Fi, HyperDual) else 0.0
                    H[i, j, k] = d2
                    H[i, k, j] = d2
        return [H[i] for i in range(self.n)]


class ConstantForce(ForceField):
    """F(x) = c. Jacobian is exactly zero."""

    def __init__(self, c):
        self.c = tuple(float(ci) for ci in c)
        self.n = len(self.c)

    def evaluate(self, x):
        return list(self.c)

    def jacobian(self, x):
        return np.zeros((self.n, self.n))

    def hessians(self, x):
        return [np.zeros((self.n, self.n)) for _ in range(self.n)]

    def __repr__(self):
        return f"ConstantForce(c={list(self.c)})"


class LinearForce(ForceField):
    """F(x) = L x + K. The Jacobian returned is L itself, exactly."""

    def __init__(self, L, K=None):
        self.L = np.array(L, dtype=float)
        if self.L.ndim != 2 or self.L.shape[0] != self.L.shape[1]:
            raise DimensionMismatch("L must be a square matrix")
        self.n = self.L.shape[0]
        self.K = np.zeros(self.n) if K is None else np.array(K, dtype=float)
        if self.K.shape != (self.n,):
            raise DimensionMismatch("K length must match L")

    def evaluate(self, x):
        out = []
        for i in range(self.n):
            acc = self.K[i]
            for j in range(self.n):
                if self.L[i, j] != 0.0:
                    acc = acc + self.L[i, j] * x[j]
            out.append(acc)
        return out

    def jacobian(self, x):
        return self.L.copy()

    def hessians(self, x):
        return [np.zeros((self.n, self.n)) for _ in range(self.n)]

    def __repr__(self):
        return f"LinearForce(L={self.L.tolist()}, K={self.K.tolist()})"


class ExpressionForce(ForceField):
    """F given by parsed component expressions over x1..xn."""

    def __init__(self, n, trees, source=None):
        if len(trees) != n:
            raise DimensionMismatch(
                f"{len(trees)} component trees for dimension {n}")
        self.n = n
        self.trees = tuple(trees)
        self.source = source

    def evaluate(self, x):
        xs = list(x)
        return [tree.evaluate(xs) for tree in self.trees]

    def __repr__(self):
        src = self.source or "; ".join(t.render() for t in self.trees)
        return f"ExpressionForce(n={self.n}, {src!r})"


@dataclass(frozen=True)
class ForceClass:
    """Outcome of the regularity decision tree, with witnesses."""

    tag: str  # Constant | LinearRegular | LinearDegenerate |
              # NonlinearSecondOrderRegular | NonlinearSecondOrderDegenerate
    L: np.ndarray | None = None
    rank: int | None = None
    probes: tuple = ()
    hessian_regular: tuple = ()  # per-probe booleans for nonlinear tags
    detail: str = ""


def _smallest_relative_sv(M, tol):
    s = np.linalg.svd(M, compute_uv=False)
    top = s[0] if s.size else 0.0
    if top == 0.0:
        return 0.0, True
    return s[-1] / top, (s[-1] / top) < tol


def classify_force(force, probes=None, tol=1e-8):
    """Classify a force field at probe points.

    Decision tree: zero Jacobian at every probe -> Constant; zero Hessians
    with nonsingular (resp. singular) Jacobian -> LinearRegular (resp.
    LinearDegenerate); otherwise second-order regularity is decided by
    invertibility of all n component Hessian matrices at every probe.
    Probes that disagree raise UnclassifiableForce.
    """
    if probes is None:
        probes = default_x_probes(force.n)
    probes = [tuple(float(c) for c in p) for p in probes]
    if len(probes) == 0:
        raise EmptyProbeSet("classify_force needs at least one probe")
    if tol <= 0:
        raise ValueError("tol must be positive")
    for p in probes:
        if len(p) != force.n:
            raise DimensionMismatch(
                f"probe of length {len(p)} for dimension {force.n}")
        if not all(np.isfinite(c) for c in p):
            raise NonFiniteEvaluation(f"non-finite probe {p}")

    values, jacobians, hessian_sets = [], [], []
    for p in probes:
        F = [duals.value(c) for c in force.evaluate(list(p))]
        if not all(np.isfinite(fi) for fi in F):
            raise NonFiniteEvaluation(f"force non-finite at probe {p}")
        J = force.jacobian(list(p))
        H = force.hessians(list(p))
        if not (np.all(np.isfinite(J)) and all(np.all(np.isfinite(h)) for h in H)):
            raise NonFiniteEvaluation(f"force derivatives non-finite at {p}")
        values.append(F)
        jacobians.append(J)
        hessian_sets.append(H)

    scale = max(1.0, max(float(np.max(np.abs(F))) for F in values),
                max(float(np.max(np.abs(J))) for J in jacobians))
    atol = tol * scale

    jac_zero = [bool(np.max(np.abs(J)) <= atol) for J in jacobians]
    hess_zero = [bool(max(np.max(np.abs(h)) for h in H) <= atol)
                 for H in hessian_sets]

    if all(jac_zero):
        return ForceClass(tag="Constant", probes=tuple(probes),
                          detail="zero Jacobian at all probes")
    if any(jac_zero):
        raise UnclassifiableForce(
            "Jacobian vanishes at some probes but not others")

    if all(hess_zero):
        L = jacobians[0]
        spread = max(float(np.max(np.abs(J - L))) for J in jacobians)
        if spread > atol:
            raise UnclassifiableForce(
                "zero Hessians but probe-dependent Jacobian")
        rel, singular = _smallest_relative_sv(L, tol)
        rank = int(np.linalg.matrix_rank(L, tol=tol * max(1.0, float(np.max(np.abs(L))))))
        tag = "LinearDegenerate" if singular else "LinearRegular"
        return ForceClass(tag=tag, L=L.copy(), rank=rank, probes=tuple(probes),
                          detail=f"smallest relative singular value {rel:.3e}")
    if any(hess_zero):
        raise UnclassifiableForce(
            "Hessians vanish at some probes but not others")

    regular = []
    for H in hessian_sets:
        ok = True
        for Hi in H:
            _, singular = _smallest_relative_sv(Hi, tol)
            if singular:
                ok = False
                break
        regular.append(ok)
    if all(regular):
        tag = "NonlinearSecondOrderRegular"
    elif not any(regular):
        tag = "NonlinearSecondOrderDegenerate"
    else:
        raise UnclassifiableForce(
            "Hessian regularity differs between probes: "
            f"{sum(regular)}/{len(regular)} probes regular")
    return ForceClass(tag=tag, probes=tuple(probes),
                      hessian_regular=tuple(regular),
                      detail="all component Hessians tested at every probe")


class OUSystem:
    """The 2n-dimensional OU system with degenerate diffusion.

    State coordinate order is (x1..xn, v1..vn); Wiener coordinate order is
    (w1..wn, z1..zn) with the ghosts z last. sigma() is constant: mu_i sits
    at row v_i, column w_i, everything else is zero.
    """

    sigma_is_constant = True

    def __init__(self, n, beta, mu, force):
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise DimensionMismatch(f"n must be a positive integer, got {n!r}")
        beta = tuple(float(b) for b in beta)
        mu = tuple(float(m) for m in mu)
        if len(beta) != n or len(mu) != n:
            raise DimensionMismatch(
                f"beta/mu lengths {len(beta)}/{len(mu)} do not match n={n}")
        if force.n != n:
            raise DimensionMismatch(
                f"force dimension {force.n} does not match n={n}")
        if any(b <= 0.0 for b in beta):
            raise NonPositiveFriction(f"beta must be positive, got {beta}")
        if any(m == 0.0 for m in mu):
            raise ZeroNoise(f"mu must be nonzero, got {mu}")
        self.n = int(n)
        self.beta = beta
        self.mu = mu
        self.force = force
        self.isotropic = (len(set(beta)) == 1) and (len(set(mu)) == 1)
        self.state_coords = tuple([("x", i) for i in range(n)]
                                  + [("v", i) for i in range(n)])
        self.wiener_coords = tuple([("w", i) for i in range(n)]
                                   + [("z", i) for i in range(n)])
        self.active_wiener_coords = self.wiener_coords[:n]
        self._sigma = np.zeros((2 * n, 2 * n))
        for i in range(n):
            self._sigma[n + i, i] = mu[i]

    def drift(self, p):
        """Drift over state coords at an extended point (dual-friendly)."""
        F = self.force.evaluate(p.x)
        out = list(p.v)
        for i in range(self.n):
            out.append(F[i] - self.beta[i] * p.v[i])
        return out

    def sigma(self, p=None):
        """Constant diffusion matrix over (state) x (wiener) coordinates."""
        return self._sigma

    @property
    def sigma_active(self):
        """The 2n x n block that multiplies the active increments dw."""
        return self._sigma[:, :self.n].copy()

    def rho(self):
        """Drift rates rho_i = c_i / mu_i of the chi variables (constant force)."""
        from .errors import WrongForceClass
        if not isinstance(self.force, ConstantForce):
            raise WrongForceClass("rho is defined for constant force only")
        return tuple(self.force.c[i] / self.mu[i] for i in range(self.n))

    def __repr__(self):
        return (f"OUSystem(n={self.n}, beta={list(self.beta)}, "
                f"mu={list(self.mu)}, force={self.force!r}, "
                f"isotropic={self.isotropic})")


def build_ou_system(n, beta, mu, force):
    """Validated constructor for OUSystem."""
    return OUSystem(n, beta, mu, force)


class CustomItoProcess:
    """A general Ito process dx = f dt + sigma dw for reference fixtures.

    State coords are ("x", i); Wiener coords ("w", k); no velocities, no
    ghosts. drift_fn and sigma_fn must accept extended points whose
    coordinates may be HyperDual.
    """

    sigma_is_constant = False

    def __init__(self, n_state, n_wiener, drift_fn, sigma_fn, name="custom"):
        self.n_state = n_state
        self.n_wiener = n_wiener
        self._drift_fn = drift_fn
        self._sigma_fn = sigma_fn
        self.name = name
        self.state_coords = tuple(("x", i) for i in range(n_state))
        self.wiener_coords = tuple(("w", k) for k in range(n_wiener))
        self.active_wiener_coords = self.wiener_coords

    def drift(self, p):
        return self._drift_fn(p)

    def sigma(self, p):
        return self._sigma_fn(p)


def gbm_process(a, b):
    """dx = a x dt + b x dw."""
    return CustomItoProcess(
        1, 1,
        drift_fn=lambda p: [a * p.x[0]],
        sigma_fn=lambda p: [[b * p.x[0]]],
        name=f"gbm(a={a}, b={b})")


def kozlov_exp_process():
    """dy = (exp(-y) - exp(-2y)/2) dt + exp(-y) dw."""
    return CustomItoProcess(
        1, 1,
        drift_fn=lambda p: [duals.exp(-p.x[0]) - 0.5 * duals.exp(-2.0 * p.x[0])],
        sigma_fn=lambda p: [[duals.exp(-p.x[0])]],
        name="kozlov_exp")


# --- JSON system schema ---

def system_from_json(data):
    """Build an OUSystem from the documented JSON dict schema.

    {"n": int, "beta": [...], "mu": [...],
     "force": {"type": "constant", "c": [...]}
            | {"type": "linear", "L": [[...]], "K": [...]}
            | {"type": "expr", "components": [".."] or "e1; e2"}}
    """
    try:
        n = data["n"]
        beta = data["beta"]
        mu = data["mu"]
        fdata = data["force"]
        ftype = fdata["type"]
    except (KeyError, TypeError) as exc:
        raise DimensionMismatch(f"malformed system spec: missing {exc}") from None
    if ftype == "constant":
        force = ConstantForce(fdata["c"])
    elif ftype == "linear":
        force = LinearForce(fdata["L"], fdata.get("K"))
    elif ftype == "expr":
        comps = fdata["components"]
        text = comps if isinstance(comps, str) else "; ".join(comps)
        force = ExpressionForce(n, parse_components(text, n), source=text)
    else:
        raise DimensionMismatch(f"unknown force type {ftype!r}")
    return build_ou_system(n, beta, mu, force)


def system_to_json(sys):
    """Serialize an OUSystem back to the JSON dict schema."""
    if isinstance(sys.force, ConstantForce):
        fdata = {"type": "constant", "c": list(sys.force.c)}
    elif isinstance(sys.force, LinearForce):
        fdata = {"type": "linear", "L": sys.force.L.tolist(),
                 "K": sys.force.K.tolist()}
    elif isinstance(sys.force, ExpressionForce):
        fdata = {"type": "expr",
                 "components": [t.render() for t in sys.force.trees]}
    else:
        raise DimensionMismatch(f"unserializable force {sys.force!r}")
    return {"n": sys.n, "beta": list(sys.beta), "mu": list(sys.mu),
            "force": fdata}
