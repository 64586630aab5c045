"""Symmetry generators and the numerical determining-equation machinery.

A simple W-symmetry of an Ito system dx = f dt + sigma dw is a vector field
phi over the state plus a constant matrix R = D + S (diagonal plus
skew-symmetric) acting on the Wiener processes, with no action on time. It
must satisfy two determining blocks at every point:

    (dt)  d_t phi^i + (f^j d_j phi^i - phi^j d_j f^i) + (1/2) Delta phi^i = 0
    (dw)  dhat_k phi^i + (sigma^j_k d_j phi^i - phi^j d_j sigma^i_k)
          - sigma^i_m R^m_k = 0

where d_j runs over state coordinates, dhat_k over Wiener coordinates, and
Delta is the Ito Laplacian. A scalar function Theta(x, t; w) is an invariant
(d Theta = 0 along the dynamics) iff n+1 conditions hold: one per active
Wiener process and one for the dt coefficient.

Everything here is evaluated pointwise at probes with exact forward-mode
derivatives; nothing is trusted symbolically.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space

from . import duals
from .calculus import (ExtendedPoint, grad_components,
                       ito_laplacian_components, sample_probes, stack_probes)
from .duals import value
from .errors import DimensionMismatch, NotAnInvariant
from .model import ConstantForce


def _is_zero(coef):
    return np.all(np.asarray(coef) == 0.0)


# --- structured family tags ---

@dataclass(frozen=True)
class ExpDecay:
    """exp(-kappa t) (d/dx_i - kappa d/dv_i)."""
    i: int
    kappa: float


@dataclass(frozen=True)
class Translation:
    """d/dx_i."""
    i: int


@dataclass(frozen=True)
class LinearMode:
    """Real or imaginary part of column M exp(-kappa t), complex kappa allowed."""
    kappa: complex
    part: str  # "re" | "im"


@dataclass(frozen=True)
class ModuleScaled:
    base: object
    scaling: str


GENERIC = "Generic"


def _complex_profile(C, kappa, part):
    """Closure t -> part of C exp(-kappa t), for a complex constant vector C.

    Re: e^{-at} (Re C cos bt + Im C sin bt)
    Im: e^{-at} (Im C cos bt - Re C sin bt)
    for kappa = a + i b. Works with HyperDual t.
    """
    a, b = float(np.real(kappa)), float(np.imag(kappa))
    Cr = [float(np.real(c)) for c in C]
    Ci = [float(np.imag(c)) for c in C]

    def profile(t):
        envelope = duals.exp(-a * t)
        if b == 0.0:
            if part == "re":
                return [envelope * cr for cr in Cr]
            return [envelope * ci for ci in Ci]
        cosb = duals.cos(b * t)
        sinb = duals.sin(b * t)
        if part == "re":
            return [envelope * (cr * cosb + ci * sinb)
                    for cr, ci in zip(Cr, Ci)]
        return [envelope * (ci * cosb - cr * sinb)
                for cr, ci in zip(Cr, Ci)]

    return profile


class SymmetryGenerator:
    """Coefficient bundle phi over the state plus the constant W-matrix R."""

    def __init__(self, phi, state_dim, wiener_dim, R=None, family=GENERIC,
                 label="generator"):
        self.phi = phi
        self.state_dim = state_dim
        self.wiener_dim = wiener_dim
        self.R = (np.zeros((wiener_dim, wiener_dim)) if R is None
                  else np.array(R, dtype=float))
        if self.R.shape != (wiener_dim, wiener_dim):
            raise DimensionMismatch(
                f"R must be {wiener_dim}x{wiener_dim}, got {self.R.shape}")
        offdiag = self.R - np.diag(np.diag(self.R))
        asym = np.max(np.abs(offdiag + offdiag.T)) if wiener_dim else 0.0
        if asym > 1e-12 * max(1.0, float(np.max(np.abs(self.R)))):
            raise DimensionMismatch(
                "off-diagonal part of R must be skew-symmetric")
        self.family = family
        self.label = label

    def __repr__(self):
        return f"SymmetryGenerator({self.label})"

    def as_extended_field(self, proc):
        """Vector field over extended_coords: phi, 0 on t, R w on Wiener."""
        R = self.R

        def field(p):
            comps = list(self.phi(p))
            comps.append(0.0)  # no action on time
            wcoords = [p.coord(c) for c in proc.wiener_coords]
            for k in range(len(wcoords)):
                h = 0.0
                for m in range(len(wcoords)):
                    if R[k, m] != 0.0:
                        h = h + R[k, m] * wcoords[m]
                comps.append(h)
            return comps

        return field

    # -- closed-form families on the OU system (state dim 2n) --

    @staticmethod
    def exp_decay(i, kappa, n, R=None):
        """exp(-kappa t) (d/dx_i - kappa d/dv_i) on an n-dim OU system."""
        idx = i - 1
        if not 0 <= idx < n:
            raise DimensionMismatch(f"component i={i} outside 1..{n}")

        def phi(p):
            g = duals.exp(-kappa * p.t)
            out = [0.0] * (2 * n)
            out[idx] = g
            out[n + idx] = -kappa * g
            return out

        return SymmetryGenerator(
            phi, 2 * n, 2 * n, R=R, family=ExpDecay(i=i, kappa=kappa),
            label=_render_expdecay(i, kappa))

    @staticmethod
    def translation(i, n, R=None):
        """d/dx_i on an n-dim OU system."""
        idx = i - 1
        if not 0 <= idx < n:
            raise DimensionMismatch(f"component i={i} outside 1..{n}")

        def phi(p):
            out = [0.0] * (2 * n)
            out[idx] = 1.0
            return out

        return SymmetryGenerator(
            phi, 2 * n, 2 * n, R=R, family=Translation(i=i),
            label=f"d/dx{i}")

    @staticmethod
    def linear_mode(column, kappa, n, part="re"):
        """Mode field xi = part[M e^{-kappa t}], eta = part[-kappa M e^{-kappa t}]."""
        column = np.asarray(column, dtype=complex)
        if column.shape != (n,):
            raise DimensionMismatch(f"column must have length {n}")
        xi_profile = _complex_profile(column, kappa, part)
        eta_profile = _complex_profile(-kappa * column, kappa, part)

        def phi(p):
            return xi_profile(p.t) + eta_profile(p.t)

        return SymmetryGenerator(
            phi, 2 * n, 2 * n, family=LinearMode(kappa=complex(kappa), part=part),
            label=_render_linear_mode(column, kappa, part, n))

    def scaled(self, alpha_fn, scaling_label):
        """alpha-scaled copy (used by scale_by_invariant after validation)."""
        base_phi = self.phi

        def phi(p):
            a = alpha_fn(p)
            return [a * c for c in base_phi(p)]

        if np.any(self.R != 0.0):
            raise DimensionMismatch(
                "scaling a generator with nonzero R is not supported: "
                "R must remain a constant matrix")
        return SymmetryGenerator(
            phi, self.state_dim, self.wiener_dim, R=None,
            family=ModuleScaled(base=self.family, scaling=scaling_label),
            label=f"{scaling_label}*[{self.label}]")


def _fmt(x):
    return f"{x:.10g}"


def _exp_head(rate):
    """Render exp(rate*t) with unit rates compressed."""
    if rate == 1.0:
        return "exp(t)"
    if rate == -1.0:
        return "exp(-t)"
    return f"exp({_fmt(rate)}t)"


def _render_expdecay(i, kappa):
    head = _exp_head(-kappa) if kappa != 0 else "1"
    sign = "-" if kappa >= 0 else "+"
    return f"{head}*(d/dx{i} {sign} {_fmt(abs(kappa))}*d/dv{i})"


def _coef_str(c, complex_mode):
    c = complex(c)
    if complex_mode:
        return f"({_fmt(c.real)}{c.imag:+.10g}i)*"
    if c.real == 1.0:
        return ""
    if c.real == -1.0:
        return "-"
    return f"{_fmt(c.real)}*"


def _render_linear_mode(column, kappa, part, n):
    kappa = complex(kappa)
    complex_mode = (kappa.imag != 0.0) or bool(np.any(np.imag(column) != 0))
    terms = []
    for k in range(n):
        c = complex(column[k])
        if c != 0:
            terms.append(f"{_coef_str(c, complex_mode)}d/dx{k + 1}")
    for k in range(n):
        c = -kappa * complex(column[k])
        if c != 0:
            terms.append(f"{_coef_str(c, complex_mode)}d/dv{k + 1}")
    if not terms:
        core = "0"
    else:
        core = terms[0]
        for term in terms[1:]:
            if term.startswith("-"):
                core += " - " + term[1:]
            else:
                core += " + " + term
    if complex_mode:
        tag = "Re" if part == "re" else "Im"
        return (f"{tag}[exp(-({_fmt(kappa.real)}{kappa.imag:+.10g}i)t)"
                f"*({core})]")
    return f"{_exp_head(-kappa.real)}*({core})"


# --- invariant candidates ---

@dataclass(frozen=True)
class AffineRecord:
    """Theta = a_x . x + a_v . v + a_w . w + a_t t + a_0."""
    a_x: tuple
    a_v: tuple
    a_w: tuple
    a_t: float
    a_0: float = 0.0


class InvariantCandidate:
    """A scalar field Theta(x, v, t; w), optionally with an affine record."""

    def __init__(self, theta=None, affine=None, label="Theta"):
        if theta is None and affine is None:
            raise DimensionMismatch("need a callable or an affine record")
        self.affine = affine
        self.label = label
        if theta is not None:
            self.theta = theta
        else:
            self.theta = _affine_callable(affine)

    def evaluate(self, p):
        return self.theta(p)

    def __call__(self, p):
        return self.theta(p)

    @staticmethod
    def from_affine(affine, label="Theta"):
        return InvariantCandidate(affine=affine, label=label)

    @staticmethod
    def chi(sys, i):
        """chi_i = w_i - v_i/mu_i - (beta_i/mu_i) x_i + (c_i/mu_i) t."""
        if not isinstance(sys.force, ConstantForce):
            from .errors import WrongForceClass
            raise WrongForceClass("chi invariants require a constant force")
        n = sys.n
        idx = i - 1
        mu_i, beta_i, c_i = sys.mu[idx], sys.beta[idx], sys.force.c[idx]
        affine = AffineRecord(
            a_x=tuple(-(beta_i / mu_i) if j == idx else 0.0 for j in range(n)),
            a_v=tuple(-1.0 / mu_i if j == idx else 0.0 for j in range(n)),
            a_w=tuple(1.0 if j == idx else 0.0 for j in range(n)),
            a_t=c_i / mu_i,
            a_0=0.0)
        return InvariantCandidate(affine=affine, label=f"chi{i}")

    def render(self):
        if self.affine is None:
            return self.label
        return render_affine(self.affine)


def _affine_callable(affine):
    def theta(p):
        acc = affine.a_0 + affine.a_t * p.t
        for blockname, coeffs in (("x", affine.a_x), ("v", affine.a_v),
                                  ("w", affine.a_w)):
            block = getattr(p, blockname)
            for c, val in zip(coeffs, block):
                if c != 0.0:
                    acc = acc + c * val
        return acc
    return theta


def render_affine(affine):
    parts = []
    for coeffs, stem in ((affine.a_w, "w"), (affine.a_v, "v"),
                         (affine.a_x, "x")):
        for j, c in enumerate(coeffs):
            if c != 0.0:
                parts.append((c, f"{stem}{j + 1}"))
    if affine.a_t != 0.0:
        parts.append((affine.a_t, "t"))
    if affine.a_0 != 0.0 or not parts:
        parts.append((affine.a_0, ""))
    out = ""
    for k, (c, name) in enumerate(parts):
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        term = name if (mag == 1.0 and name) else (
            f"{_fmt(mag)}*{name}" if name else _fmt(mag))
        if k == 0:
            out = f"-{term}" if c < 0 else term
        else:
            out += f" {sign} {term}"
    return out


# --- residual evaluation ---

@dataclass(frozen=True)
class ResidualReport:
    point: ExtendedPoint
    f_residual: np.ndarray
    sigma_residual: np.ndarray
    max_abs: float


def _sigma_value_matrix(proc, p):
    return [[value(e) for e in row] for row in proc.sigma(p)]


def f_residual(X, sys, p):
    """Left side of the dt determining block, one entry per state coord."""
    S = list(sys.state_coords)
    phi_at = [value(c) for c in X.phi(p)]
    if len(phi_at) != len(S):
        raise DimensionMismatch(
            f"generator has {len(phi_at)} components for state dim {len(S)}")
    dphi_dt = grad_components(X.phi, p, ("t", 0))
    dphi_dS = [grad_components(X.phi, p, Sj) for Sj in S]
    fvals = [value(c) for c in sys.drift(p)]
    ddrift_dS = [grad_components(sys.drift, p, Sj) for Sj in S]
    lap = ito_laplacian_components(X.phi, sys, p)
    out = []
    for i in range(len(S)):
        acc = dphi_dt[i] + 0.5 * lap[i]
        for j in range(len(S)):
            acc = acc + fvals[j] * dphi_dS[j][i] - phi_at[j] * ddrift_dS[j][i]
        out.append(acc)
    return out


def sigma_residual(X, sys, p):
    """Left side of the dw determining block: state rows, Wiener columns."""
    S = list(sys.state_coords)
    W = list(sys.wiener_coords)
    sig = _sigma_value_matrix(sys, p)
    phi_at = [value(c) for c in X.phi(p)]
    dphi_dS = [grad_components(X.phi, p, Sj) for Sj in S]
    dsig_dS = None
    if not sys.sigma_is_constant:
        def sig_flat(q):
            return [e for row in sys.sigma(q) for e in row]
        dsig_dS = [grad_components(sig_flat, p, Sj) for Sj in S]
    R = X.R
    rows = [[None] * len(W) for _ in range(len(S))]
    for k, Wk in enumerate(W):
        dphi_dWk = grad_components(X.phi, p, Wk)
        for i in range(len(S)):
            acc = dphi_dWk[i]
            for j in range(len(S)):
                acc = acc + sig[j][k] * dphi_dS[j][i]
            if dsig_dS is not None:
                for j in range(len(S)):
                    acc = acc - phi_at[j] * dsig_dS[j][i * len(W) + k]
            for m in range(len(W)):
                if R[m, k] != 0.0:
                    acc = acc - sig[i][m] * R[m, k]
            rows[i][k] = acc
    return rows


def invariant_residual(theta, sys, p):
    """n+1 invariance conditions: active dw coefficients, then the dt one."""
    th = theta.evaluate if isinstance(theta, InvariantCandidate) else theta
    S = list(sys.state_coords)
    W = list(sys.wiener_coords)
    active_cols = [W.index(c) for c in sys.active_wiener_coords]
    sig = _sigma_value_matrix(sys, p)

    def th_vec(q):
        return [th(q)]

    dth_dS = [grad_components(th_vec, p, Sj)[0] for Sj in S]
    out = []
    for k in active_cols:
        acc = grad_components(th_vec, p, W[k])[0]
        for j in range(len(S)):
            if not _is_zero(sig[j][k]):
                acc = acc + dth_dS[j] * sig[j][k]
        out.append(acc)
    fvals = [value(c) for c in sys.drift(p)]
    acc = grad_components(th_vec, p, ("t", 0))[0]
    acc = acc + 0.5 * ito_laplacian_components(th_vec, sys, p)[0]
    for j in range(len(S)):
        acc = acc + dth_dS[j] * fvals[j]
    out.append(acc)
    return out


def residual_report(X, sys, p):
    """Both determining blocks at one plain-float point."""
    fres = np.array([float(e) for e in f_residual(X, sys, p)])
    sres = np.array([[float(e) for e in row] for row in sigma_residual(X, sys, p)])
    max_abs = max(float(np.max(np.abs(fres))), float(np.max(np.abs(sres))))
    return ResidualReport(point=p, f_residual=fres, sigma_residual=sres,
                          max_abs=max_abs)


def _entry_max(entries):
    return max(float(np.max(np.abs(np.asarray(e)))) for e in entries)


def max_residuals(X, sys, probes):
    """Max |f-residual| and |sigma-residual| over a probe set (batched)."""
    p = stack_probes(probes)
    fres = f_residual(X, sys, p)
    sres = sigma_residual(X, sys, p)
    return _entry_max(fres), _entry_max(e for row in sres for e in row)


def max_invariant_residual(theta, sys, probes):
    p = stack_probes(probes)
    return _entry_max(invariant_residual(theta, sys, p))


def scale_by_invariant(X, alpha, sys, probes=None, tol=1e-8):
    """Multiply a generator by an invariant; validates alpha first."""
    if probes is None:
        probes = sample_probes(sys, count=50, seed=7)
    worst = max_invariant_residual(alpha, sys, probes)
    if worst > tol:
        raise NotAnInvariant(
            f"{getattr(alpha, 'label', 'alpha')} fails the invariance "
            f"conditions: max residual {worst:.3e} > {tol:.1e}")
    alpha_fn = alpha.evaluate if isinstance(alpha, InvariantCandidate) else alpha
    return X.scaled(alpha_fn, getattr(alpha, "label", "alpha"))


# --- linear W-symmetry constraint ---

def solve_wsym_linear_constraint(L, B):
    """Basis of solutions R of  L R = B R - R B  (B diagonal).

    Vectorized column-major: [(I kron L) - (I kron B) + (B^T kron I)] vec R = 0;
    the null space is computed by SVD. Empty list means only R = 0 solves.
    """
    L = np.asarray(L, dtype=float)
    B = np.asarray(B, dtype=float)
    if L.shape != B.shape or L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise DimensionMismatch("L and B must be square of equal size")
    if np.max(np.abs(B - np.diag(np.diag(B)))) > 0.0:
        raise DimensionMismatch("B must be diagonal")
    n = L.shape[0]
    eye = np.eye(n)
    M = np.kron(eye, L) - np.kron(eye, B) + np.kron(B.T, eye)
    ns = null_space(M)
    return [ns[:, k].reshape((n, n), order="F") for k in range(ns.shape[1])]


# --- affine invariant solver ---

def _elementary_records(n):
    records = []
    for block in ("a_x", "a_v", "a_w"):
        for i in range(n):
            kwargs = {"a_x": (0.0,) * n, "a_v": (0.0,) * n,
                      "a_w": (0.0,) * n, "a_t": 0.0, "a_0": 0.0}
            kwargs[block] = tuple(1.0 if j == i else 0.0 for j in range(n))
            records.append(AffineRecord(**kwargs))
    records.append(AffineRecord(a_x=(0.0,) * n, a_v=(0.0,) * n,
                                a_w=(0.0,) * n, a_t=1.0, a_0=0.0))
    return records


def affine_invariant_nullspace(sys, probes=None, rcond=1e-9):
    """Solve the invariance conditions over affine Theta (constant excluded).

    Coefficients are ordered (a_x, a_v, a_w, a_t); a_0 never enters any
    condition, so constants are quotiented out. Returns (dimension, list of
    AffineRecord basis elements).
    """
    n = sys.n
    if probes is None:
        probes = sample_probes(sys, count=max(32, 3 * n + 4), seed=11)
    p = stack_probes(probes)
    count = len(probes)
    records = _elementary_records(n)
    columns = []
    for rec in records:
        res = invariant_residual(InvariantCandidate(affine=rec), sys, p)
        rows = []
        for entry in res:
            arr = np.broadcast_to(np.asarray(entry, dtype=float), (count,))
            rows.append(np.array(arr, dtype=float))
        columns.append(np.concatenate(rows))
    A = np.column_stack(columns)
    ns = null_space(A, rcond=rcond)
    basis = []
    for k in range(ns.shape[1]):
        vec = ns[:, k]
        basis.append(AffineRecord(
            a_x=tuple(vec[0:n]), a_v=tuple(vec[n:2 * n]),
            a_w=tuple(vec[2 * n:3 * n]), a_t=float(vec[3 * n]), a_0=0.0))
    return ns.shape[1], basis
