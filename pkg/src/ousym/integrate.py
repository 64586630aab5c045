"""Path generation: Wiener grids, Euler-Maruyama, exact rectified solvers,
strong-convergence studies, reference fixtures, and CSV output.

Randomness is counter-based (Philox keyed by (seed, path_index)), so every
path is reproducible in isolation and results do not depend on how work is
split across threads. Coarsening a grid sums consecutive increments, which
is what lets an exact solution on a fine grid serve as the reference for
Euler-Maruyama on coarser rungs driven by the same noise.
"""

import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .classify import mode_rates
from .errors import (DimensionMismatch, DomainExit, InvalidGrid,
                     NonFiniteState, NotDiagonalizable, OusymError,
                     WrongForceClass)
from .model import ConstantForce, LinearForce

BLOWUP_GUARD = 1e12


def thread_count():
    """Worker count for path ensembles: OUSYM_THREADS or the CPU count."""
    raw = os.environ.get("OUSYM_THREADS", "").strip()
    if raw:
        try:
            k = int(raw)
        except ValueError:
            raise InvalidGrid(f"OUSYM_THREADS is not an integer: {raw!r}")
        if k < 1:
            raise InvalidGrid("OUSYM_THREADS must be >= 1")
        return k
    return os.cpu_count() or 1


# --- Wiener grids ---

@dataclass(frozen=True)
class WienerGrid:
    t0: float
    t1: float
    steps: int
    n_proc: int
    seed: int
    path_index: int
    increments: np.ndarray  # (n_proc, steps), N(0, dt) entries
    derivation: str

    @property
    def dt(self):
        return (self.t1 - self.t0) / self.steps

    @property
    def times(self):
        return np.linspace(self.t0, self.t1, self.steps + 1)

    def cumulative(self):
        """w values at grid times, (n_proc, steps + 1), w(t0) = 0."""
        out = np.zeros((self.n_proc, self.steps + 1))
        np.cumsum(self.increments, axis=1, out=out[:, 1:])
        return out


def sample_wiener(n_proc, t0, t1, steps, seed=0, path_index=0):
    """Draw one path's increments with a counter-based generator.

    The key is (seed, path_index): any path of any ensemble can be
    regenerated alone, and ensembles are identical however the path loop is
    scheduled.
    """
    if not isinstance(steps, (int, np.integer)) or steps < 1:
        raise InvalidGrid(f"steps must be a positive integer, got {steps!r}")
    if not (np.isfinite(t0) and np.isfinite(t1)) or not t1 > t0:
        raise InvalidGrid(f"need finite t1 > t0, got [{t0}, {t1}]")
    if n_proc < 1:
        raise InvalidGrid("n_proc must be >= 1")
    if not isinstance(seed, (int, np.integer)) or seed < 0:
        raise InvalidGrid("seed must be a non-negative integer")
    if not isinstance(path_index, (int, np.integer)) or path_index < 0:
        raise InvalidGrid("path_index must be a non-negative integer")
    dt = (t1 - t0) / steps
    gen = np.random.Generator(np.random.Philox(key=[seed, path_index]))
    inc = gen.standard_normal((n_proc, int(steps))) * np.sqrt(dt)
    return WienerGrid(
        t0=float(t0), t1=float(t1), steps=int(steps), n_proc=int(n_proc),
        seed=int(seed), path_index=int(path_index), increments=inc,
        derivation="philox(key=(seed, path_index)); row-major draws of "
                   "shape (n_proc, steps) scaled by sqrt(dt)")


def coarsen(grid, factor):
    """Sum consecutive increments: same Brownian path on a coarser grid."""
    if not isinstance(factor, (int, np.integer)) or factor < 1:
        raise InvalidGrid(f"coarsening factor must be a positive integer, "
                          f"got {factor!r}")
    if grid.steps % factor != 0:
        raise InvalidGrid(f"{grid.steps} steps cannot be coarsened by "
                          f"{factor}")
    if factor == 1:
        return grid
    coarse = grid.increments.reshape(
        grid.n_proc, grid.steps // factor, int(factor)).sum(axis=2)
    return WienerGrid(
        t0=grid.t0, t1=grid.t1, steps=grid.steps // int(factor),
        n_proc=grid.n_proc, seed=grid.seed, path_index=grid.path_index,
        increments=coarse,
        derivation=grid.derivation + f" | coarsened x{int(factor)}")


# --- paths ---

@dataclass(frozen=True)
class Path:
    times: np.ndarray          # (steps + 1,)
    states: np.ndarray         # (steps + 1, d)
    labels: tuple              # d column names
    meta: dict                 # provenance: seed, path_index, steps, scheme

    def terminal(self):
        return self.states[-1]


def _split_state(n, x0):
    """Accept (x_vec, v_vec) or a flat length-2n sequence."""
    if (isinstance(x0, (tuple, list)) and len(x0) == 2
            and not np.isscalar(x0[0])
            and len(np.atleast_1d(x0[0])) == n):
        x = np.asarray(x0[0], dtype=float)
        v = np.asarray(x0[1], dtype=float)
    else:
        flat = np.asarray(x0, dtype=float).ravel()
        if flat.shape[0] != 2 * n:
            raise DimensionMismatch(
                f"initial state needs 2n = {2 * n} entries, got "
                f"{flat.shape[0]}")
        x, v = flat[:n].copy(), flat[n:].copy()
    if x.shape != (n,) or v.shape != (n,):
        raise DimensionMismatch("initial state has wrong block lengths")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
        raise NonFiniteState("initial state is not finite")
    return x, v


def _ou_labels(n):
    return tuple(f"x{i + 1}" for i in range(n)) + tuple(
        f"v{i + 1}" for i in range(n))


def _force_fn(force, n):
    """Vectorized force on an (n,) array; fast paths for closed forms."""
    if isinstance(force, ConstantForce):
        c = np.asarray(force.c, dtype=float)
        return lambda x: c
    if isinstance(force, LinearForce):
        L = np.asarray(force.L, dtype=float)
        K = np.asarray(force.K, dtype=float)
        return lambda x: L @ x + K
    return lambda x: np.asarray(force.evaluate(list(x)), dtype=float)


def _force_fn_batch(force, n):
    """Force on a (paths, n) batch of positions."""
    if isinstance(force, ConstantForce):
        c = np.asarray(force.c, dtype=float)
        return lambda x: np.broadcast_to(c, x.shape)
    if isinstance(force, LinearForce):
        L = np.asarray(force.L, dtype=float)
        K = np.asarray(force.K, dtype=float)
        return lambda x: x @ L.T + K
    def batch(x):
        cols = force.evaluate([x[:, j] for j in range(n)])
        return np.column_stack([np.broadcast_to(col, x.shape[:1])
                                for col in cols])
    return batch


def _grid_meta(grid, scheme):
    return {"seed": grid.seed, "path_index": grid.path_index,
            "steps": grid.steps, "t0": grid.t0, "t1": grid.t1,
            "scheme": scheme, "derivation": grid.derivation}


def euler_maruyama(sys, x0, grid, guard=BLOWUP_GUARD):
    """Explicit first-order scheme:
        x_{k+1} = x_k + v_k dt
        v_{k+1} = v_k + (F(x_k) - beta v_k) dt + mu dw_k
    """
    n = sys.n
    if grid.n_proc != n:
        raise DimensionMismatch(
            f"grid drives {grid.n_proc} processes, system has n = {n}")
    x, v = _split_state(n, x0)
    beta = np.asarray(sys.beta, dtype=float)
    mu = np.asarray(sys.mu, dtype=float)
    F = _force_fn(sys.force, n)
    dt = grid.dt
    inc = grid.increments
    states = np.empty((grid.steps + 1, 2 * n))
    states[0, :n] = x
    states[0, n:] = v
    for k in range(grid.steps):
        force_val = F(x)
        x, v = x + v * dt, v + (force_val - beta * v) * dt + mu * inc[:, k]
        if max(np.max(np.abs(x)), np.max(np.abs(v))) > guard:
            raise NonFiniteState(
                f"path blew up at step {k + 1} (t = {grid.t0 + (k + 1) * dt})")
        states[k + 1, :n] = x
        states[k + 1, n:] = v
    return Path(times=grid.times, states=states, labels=_ou_labels(n),
                meta=_grid_meta(grid, "euler-maruyama"))


def euler_maruyama_general(drift, sigma, x0, grid, labels=None,
                           guard=BLOWUP_GUARD):
    """Euler-Maruyama for a plain Ito system given as callables.

    drift(x) -> (d,), sigma(x) -> (d, n_proc), x0 length d.
    """
    x = np.asarray(x0, dtype=float).ravel()
    d = x.shape[0]
    dt = grid.dt
    inc = grid.increments
    states = np.empty((grid.steps + 1, d))
    states[0] = x
    for k in range(grid.steps):
        f = np.asarray(drift(x), dtype=float)
        s = np.asarray(sigma(x), dtype=float).reshape(d, grid.n_proc)
        x = x + f * dt + s @ inc[:, k]
        if np.max(np.abs(x)) > guard or not np.all(np.isfinite(x)):
            raise NonFiniteState(f"path blew up at step {k + 1}")
        states[k + 1] = x
    if labels is None:
        labels = tuple(f"x{i + 1}" for i in range(d))
    return Path(times=grid.times, states=states, labels=tuple(labels),
                meta=_grid_meta(grid, "euler-maruyama"))


def _chunk_ranges(total, chunk):
    return [(i, min(i + chunk, total)) for i in range(0, total, chunk)]


def euler_maruyama_ensemble(sys, x0, t0, t1, steps, n_paths, seed=0,
                            chunk=512, guard=BLOWUP_GUARD):
    """Terminal states of n_paths Euler-Maruyama paths, (n_paths, 2n).

    Paths are keyed (seed, index); chunks of paths are advanced together
    and may run on several threads, each writing a disjoint output slice,
    so the result is identical for any OUSYM_THREADS.
    """
    n = sys.n
    x_init, v_init = _split_state(n, x0)
    beta = np.asarray(sys.beta, dtype=float)
    mu = np.asarray(sys.mu, dtype=float)
    Fb = _force_fn_batch(sys.force, n)
    if not isinstance(steps, (int, np.integer)) or steps < 1:
        raise InvalidGrid("steps must be a positive integer")
    if n_paths < 1:
        raise InvalidGrid("n_paths must be >= 1")
    dt = (t1 - t0) / steps
    sq = np.sqrt(dt)
    out = np.empty((n_paths, 2 * n))

    def run_chunk(bounds):
        i0, i1 = bounds
        m = i1 - i0
        inc = np.empty((m, n, steps))
        for j in range(m):
            gen = np.random.Generator(np.random.Philox(key=[seed, i0 + j]))
            inc[j] = gen.standard_normal((n, steps))
        inc *= sq
        x = np.broadcast_to(x_init, (m, n)).copy()
        v = np.broadcast_to(v_init, (m, n)).copy()
        for k in range(steps):
            f = Fb(x)
            x, v = x + v * dt, v + (f - beta * v) * dt + inc[:, :, k]
            if np.max(np.abs(v)) > guard or np.max(np.abs(x)) > guard:
                raise NonFiniteState(
                    f"ensemble chunk [{i0}, {i1}) blew up at step {k + 1}")
        out[i0:i1, :n] = x
        out[i0:i1, n:] = v

    ranges = _chunk_ranges(n_paths, chunk)
    workers = min(thread_count(), len(ranges))
    if workers <= 1:
        for b in ranges:
            run_chunk(b)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run_chunk, ranges))
    return out


# --- Ito integrals ---

def ito_integral(a, grid, proc=0):
    """Left-endpoint sums of int a(t) dw along one driving process.

    Returns an array of length steps + 1; entry k is the integral over
    [t0, t_k], so the first entry is 0.
    """
    ts = grid.times[:-1]
    try:
        vals = np.asarray(a(ts), dtype=float)
        if vals.shape != ts.shape:
            raise TypeError
    except (TypeError, ValueError):
        vals = np.array([float(a(t)) for t in ts])
    out = np.zeros(grid.steps + 1)
    np.cumsum(vals * grid.increments[proc], out=out[1:])
    return out


# --- exact solvers ---

def exact_solve_constant(sys, x0, grid):
    """Exact constant-force solution through the rectifying variables

        y_i = x_i + v_i / beta_i          (straight line plus scaled noise)
        z_i = -(exp(beta_i t) / beta_i) v_i

    which reduce both equations to pure quadrature.
    """
    if not isinstance(sys.force, ConstantForce):
        raise WrongForceClass("exact_solve_constant needs a constant force")
    n = sys.n
    if grid.n_proc != n:
        raise DimensionMismatch(
            f"grid drives {grid.n_proc} processes, system has n = {n}")
    x, v = _split_state(n, x0)
    t = grid.times
    cums = grid.cumulative()
    states = np.empty((grid.steps + 1, 2 * n))
    for i in range(n):
        b, m, c = sys.beta[i], sys.mu[i], sys.force.c[i]
        # I(t_k) = sum_{j<k} exp(b t_j) dw_j, the quadrature for z
        integ = np.zeros(grid.steps + 1)
        np.cumsum(np.exp(b * t[:-1]) * grid.increments[i], out=integ[1:])
        z0 = -np.exp(b * grid.t0) / b * v[i]
        y0 = x[i] + v[i] / b
        z = z0 - (c / b ** 2) * (np.exp(b * t) - np.exp(b * grid.t0)) \
            - (m / b) * integ
        y = y0 + (c / b) * (t - grid.t0) + (m / b) * cums[i]
        vi = -b * np.exp(-b * t) * z
        states[:, n + i] = vi
        states[:, i] = y - vi / b
    return Path(times=t, states=states, labels=_ou_labels(n),
                meta=_grid_meta(grid, "exact-rectified"))


def exact_solve_linear(sys, x0, grid, imag_tol=1e-10):
    """Exact solution for a regular linear force (n = 1 or isotropic).

    In eigenmode coordinates q = M^-1 x each mode splits into two processes
        y_pm = exp(kappa_pm t) (kappa_mp q + p) / (kappa_mp - kappa_pm)
    whose drift vanishes identically, leaving the quadratures
        dy_pm = mu exp(kappa_pm t) / (kappa_mp - kappa_pm) dW~.
    Complex eigenvalues are carried in complex arithmetic and the imaginary
    part of the reassembled state is checked against imag_tol.
    """
    if not isinstance(sys.force, LinearForce):
        raise WrongForceClass("exact_solve_linear needs a linear force")
    n = sys.n
    if n > 1 and not sys.isotropic:
        raise WrongForceClass(
            "the exact linear solver covers n = 1 or isotropic systems")
    if grid.n_proc != n:
        raise DimensionMismatch(
            f"grid drives {grid.n_proc} processes, system has n = {n}")
    x, v = _split_state(n, x0)
    L = np.asarray(sys.force.L, dtype=float)
    K = np.asarray(sys.force.K, dtype=float)
    if np.any(K != 0.0):
        try:
            shift = np.linalg.solve(L, K)
        except np.linalg.LinAlgError:
            raise WrongForceClass(
                "affine offset needs a regular matrix to absorb")
    else:
        shift = np.zeros(n)
    beta = sys.beta[0]
    mu = sys.mu[0]

    lams, M = np.linalg.eig(L)
    lams = lams.astype(complex)
    M = M.astype(complex)
    svals = np.linalg.svd(M, compute_uv=False)
    if svals[-1] < 1e-10 * svals[0]:
        raise NotDiagonalizable(
            "force matrix is defective: eigenvector matrix is singular")
    Minv = np.linalg.inv(M)

    s0 = x + shift
    q0 = Minv @ s0.astype(complex)
    p0 = Minv @ v.astype(complex)
    dW = Minv @ grid.increments.astype(complex)  # per-mode noise, (n, steps)

    t = grid.times
    q = np.empty((n, grid.steps + 1), dtype=complex)
    p = np.empty((n, grid.steps + 1), dtype=complex)
    for i in range(n):
        kp, km = mode_rates(beta, lams[i])
        yp0 = np.exp(kp * grid.t0) * (km * q0[i] + p0[i]) / (km - kp)
        ym0 = np.exp(km * grid.t0) * (kp * q0[i] + p0[i]) / (kp - km)
        ap = mu * np.exp(kp * t[:-1]) / (km - kp)
        am = mu * np.exp(km * t[:-1]) / (kp - km)
        yp = np.empty(grid.steps + 1, dtype=complex)
        ym = np.empty(grid.steps + 1, dtype=complex)
        yp[0] = yp0
        ym[0] = ym0
        np.cumsum(ap * dW[i], out=yp[1:])
        yp[1:] += yp0
        np.cumsum(am * dW[i], out=ym[1:])
        ym[1:] += ym0
        ep = np.exp(-kp * t)
        em = np.exp(-km * t)
        q[i] = ep * yp + em * ym
        p[i] = -kp * ep * yp - km * em * ym
    s_path = (M @ q).T  # (steps + 1, n)
    v_path = (M @ p).T
    worst_imag = max(float(np.max(np.abs(s_path.imag))),
                     float(np.max(np.abs(v_path.imag))))
    if worst_imag > imag_tol:
        raise NonFiniteState(
            f"imaginary leakage {worst_imag:.3e} exceeds {imag_tol:.1e}")
    states = np.empty((grid.steps + 1, 2 * n))
    states[:, :n] = s_path.real - shift
    states[:, n:] = v_path.real
    meta = _grid_meta(grid, "exact-eigenmodes")
    meta["max_imag_leakage"] = worst_imag
    return Path(times=t, states=states, labels=_ou_labels(n), meta=meta)


# --- convergence studies ---

@dataclass(frozen=True)
class ConvergenceReport:
    problem: str
    ladder_steps: tuple
    dts: tuple
    errors: tuple              # mean strong error per rung
    fitted_order: float
    n_paths: int
    used_paths: int
    skipped_paths: int
    seed: int
    refine: int

    def to_json(self):
        return {"problem": self.problem,
                "ladder_steps": list(self.ladder_steps),
                "dts": list(self.dts), "errors": list(self.errors),
                "fitted_order": self.fitted_order, "n_paths": self.n_paths,
                "used_paths": self.used_paths,
                "skipped_paths": self.skipped_paths, "seed": self.seed,
                "refine": self.refine}


class OUConvergenceProblem:
    """Adapter pairing the OU exact solver with Euler-Maruyama."""

    def __init__(self, sys):
        self.sys = sys
        self.n_proc = sys.n
        if isinstance(sys.force, ConstantForce):
            self._exact = exact_solve_constant
            self.name = "ou-constant"
        elif isinstance(sys.force, LinearForce):
            self._exact = exact_solve_linear
            self.name = "ou-linear"
        else:
            raise WrongForceClass(
                "no exact solver for this force class; nothing to compare")

    def exact_terminal(self, x0, grid):
        return self._exact(self.sys, x0, grid).terminal()

    def em_terminal(self, x0, grid):
        return euler_maruyama(self.sys, x0, grid).terminal()


class GBMConvergenceProblem:
    """dx = a x dt + b x dw with the exponential closed form."""

    def __init__(self, a, b):
        self.a, self.b = float(a), float(b)
        self.n_proc = 1
        self.name = "gbm"

    def exact_terminal(self, x0, grid):
        w = grid.cumulative()[0, -1]
        T = grid.t1 - grid.t0
        return np.array([float(x0[0]) * np.exp(
            (self.a - 0.5 * self.b ** 2) * T + self.b * w)])

    def em_terminal(self, x0, grid):
        a, b = self.a, self.b
        path = euler_maruyama_general(
            lambda x: a * x, lambda x: (b * x).reshape(1, 1), x0, grid)
        return path.terminal()


class KozlovConvergenceProblem:
    """dy = (exp(-y) - exp(-2y)/2) dt + exp(-y) dw, solvable through
    x = exp(y)."""

    n_proc = 1
    name = "kozlov-exp"

    def exact_terminal(self, x0, grid):
        acc = np.exp(float(x0[0])) + (grid.times - grid.t0) \
            + grid.cumulative()[0]
        if np.min(acc) <= 1e-9:
            raise DomainExit("transformed state hit the domain floor")
        return np.array([np.log(acc[-1])])

    def em_terminal(self, x0, grid):
        # exp(-y) overflows once a path dives far negative; the blow-up
        # guard turns the resulting non-finite state into NonFiniteState,
        # so silence the intermediate warnings
        def drift(y):
            with np.errstate(over="ignore", invalid="ignore"):
                return np.exp(-y) - 0.5 * np.exp(-2.0 * y)

        def sigma(y):
            with np.errstate(over="ignore"):
                return np.exp(-y).reshape(1, 1)

        return euler_maruyama_general(drift, sigma, x0, grid).terminal()


def convergence_study(problem, x0, t0, t1, ladder_steps, n_paths=200,
                      seed=0, refine=64):
    """Strong error of Euler-Maruyama against the exact solution.

    The reference uses the exact solver on a refine-times-finer grid; each
    rung re-drives Euler-Maruyama with the coarsened copy of the same
    noise. Paths where any solver exits its domain or blows up are skipped
    whole (deterministically, by path index) and counted.
    """
    ladder = [int(s) for s in ladder_steps]
    if not ladder or any(s < 1 for s in ladder):
        raise InvalidGrid("ladder_steps must be positive integers")
    if sorted(set(ladder)) != ladder:
        raise InvalidGrid("ladder_steps must be strictly increasing")
    if not isinstance(refine, int) or refine < 1:
        raise InvalidGrid("refine must be a positive integer")
    finest = ladder[-1] * refine
    for s in ladder:
        if finest % s != 0:
            raise InvalidGrid(
                f"rung {s} does not divide the finest grid {finest}")
    rungs = len(ladder)
    errs = np.zeros((n_paths, rungs))
    skip = np.zeros(n_paths, dtype=bool)

    def run_path(idx):
        fine = sample_wiener(problem.n_proc, t0, t1, finest, seed=seed,
                             path_index=idx)
        try:
            ref = problem.exact_terminal(x0, fine)
            for r, s in enumerate(ladder):
                g = coarsen(fine, finest // s)
                em = problem.em_terminal(x0, g)
                errs[idx, r] = float(np.max(np.abs(em - ref)))
        except (DomainExit, NonFiniteState):
            skip[idx] = True

    workers = min(thread_count(), n_paths)
    if workers <= 1:
        for idx in range(n_paths):
            run_path(idx)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run_path, range(n_paths)))

    used = int(np.sum(~skip))
    if used == 0:
        raise OusymError("every path was skipped; nothing to average")
    means = errs[~skip].mean(axis=0)
    dts = [(t1 - t0) / s for s in ladder]
    slope = np.polyfit(np.log(dts), np.log(means), 1)[0]
    return ConvergenceReport(
        problem=problem.name, ladder_steps=tuple(ladder), dts=tuple(dts),
        errors=tuple(float(e) for e in means), fitted_order=float(slope),
        n_paths=n_paths, used_paths=used,
        skipped_paths=int(n_paths - used), seed=seed, refine=refine)


# --- reference fixtures ---

def solve_reference_problem(problem_id, params, grid):
    """Closed-form path plus a self-check certificate for the fixtures.

    "gbm": params a, b, x0. The path is x0 exp[(a - b^2/2)(t - t0) + b w];
    the certificate evaluates the known invariant
    Theta = x exp[-(a - b^2/2)(t - t0) - b w] along the path and reports its
    worst deviation from x0.

    "kozlovexp": params y0. The path is y = log(exp(y0) + (t - t0) + w);
    DomainExit if the transformed state touches 1e-9. The certificate
    re-applies the transform and reports the worst defect plus the domain
    margin.
    """
    pid = str(problem_id).strip().lower()
    t = grid.times
    w = grid.cumulative()[0]
    if pid == "gbm":
        a = float(params["a"])
        b = float(params["b"])
        x0 = float(params.get("x0", 1.0))
        drift_term = (a - 0.5 * b ** 2) * (t - grid.t0)
        xs = x0 * np.exp(drift_term + b * w)
        theta = xs * np.exp(-drift_term - b * w)
        cert = {"problem": "gbm",
                "invariant": "x*exp(-(a - b^2/2)*(t - t0) - b*w)",
                "max_invariant_deviation": float(np.max(np.abs(theta - x0)))}
        path = Path(times=t, states=xs.reshape(-1, 1), labels=("x1",),
                    meta=_grid_meta(grid, "exact-gbm"))
        return path, cert
    if pid == "kozlovexp":
        y0 = float(params.get("y0", 2.0))
        acc = np.exp(y0) + (t - grid.t0) + w
        if np.min(acc) <= 1e-9:
            k = int(np.argmax(acc <= 1e-9))
            raise DomainExit(
                f"transformed state reached the floor at t = {t[k]}")
        ys = np.log(acc)
        defect = np.exp(ys) - acc
        cert = {"problem": "kozlovexp",
                "transform": "x = exp(y), dx = dt + dw",
                "max_transform_defect": float(np.max(np.abs(defect))),
                "domain_margin": float(np.min(acc))}
        path = Path(times=t, states=ys.reshape(-1, 1), labels=("y1",),
                    meta=_grid_meta(grid, "exact-kozlov"))
        return path, cert
    raise OusymError(f"unknown reference problem: {problem_id!r} "
                     f"(known: gbm, kozlovexp)")


# --- CSV output ---

def _open_dest(dest):
    if hasattr(dest, "write"):
        return dest, False
    return open(dest, "w", newline=""), True


def write_path_csv(path, dest, extra_meta=None):
    """Comment header with provenance, then t plus one column per label."""
    meta = dict(path.meta)
    if extra_meta:
        meta.update(extra_meta)
    fh, owned = _open_dest(dest)
    try:
        for key in sorted(meta):
            fh.write(f"# {key}={meta[key]}\n")
        fh.write("t," + ",".join(path.labels) + "\n")
        for k in range(path.times.shape[0]):
            row = [repr(float(path.times[k]))]
            row += [repr(float(val)) for val in path.states[k]]
            fh.write(",".join(row) + "\n")
    finally:
        if owned:
            fh.close()


def write_convergence_csv(report, dest):
    fh, owned = _open_dest(dest)
    try:
        fh.write(f"# problem={report.problem}\n")
        fh.write(f"# seed={report.seed}\n")
        fh.write(f"# n_paths={report.n_paths}\n")
        fh.write(f"# used_paths={report.used_paths}\n")
        fh.write(f"# refine={report.refine}\n")
        fh.write("dt,strong_error\n")
        for dt, err in zip(report.dts, report.errors):
            fh.write(f"{repr(float(dt))},{repr(float(err))}\n")
        fh.write(f"# fitted_order={repr(float(report.fitted_order))}\n")
    finally:
        if owned:
            fh.close()


def read_path_csv(src):
    """Inverse of write_path_csv; returns (meta, labels, times, states)."""
    if hasattr(src, "read"):
        text = src.read()
    else:
        with open(src) as fh:
            text = fh.read()
    meta = {}
    labels = None
    times = []
    rows = []
    for line in io.StringIO(text):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                k, _, val = body.partition("=")
                meta[k.strip()] = val.strip()
            continue
        cells = line.split(",")
        if labels is None:
            labels = tuple(cells[1:])
            continue
        times.append(float(cells[0]))
        rows.append([float(c) for c in cells[1:]])
    return meta, labels, np.asarray(times), np.asarray(rows)
