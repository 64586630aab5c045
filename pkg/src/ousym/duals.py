"""Hyper-dual numbers: forward-mode first and second derivatives.

A HyperDual carries four components (f, f1, f2, f12) representing
f(p) + f1*e1 + f2*e2 + f12*e1*e2 with e1^2 = e2^2 = 0. Seeding e1 on one
coordinate and e2 on another (or the same one) yields exact first, second,
and mixed derivatives in a single evaluation, with no truncation error.

Components may be floats or numpy arrays; arithmetic broadcasts, which is what
makes batched residual evaluation over probe grids cheap.
"""

import numpy as np

from .errors import EvaluationDomainError


class HyperDual:
    __slots__ = ("f", "f1", "f2", "f12")

    # Refuse numpy's elementwise handling so ndarray <op> HyperDual falls back
    # to our reflected methods instead of producing object arrays.
    __array_ufunc__ = None
    __array_priority__ = 1000

    def __init__(self, f, f1=0.0, f2=0.0, f12=0.0):
        self.f = f
        self.f1 = f1
        self.f2 = f2
        self.f12 = f12

    def __repr__(self):
        return f"HyperDual({self.f!r}, {self.f1!r}, {self.f2!r}, {self.f12!r})"

    # -- arithmetic --

    def __add__(self, other):
        if isinstance(other, HyperDual):
            return HyperDual(self.f + other.f, self.f1 + other.f1,
                             self.f2 + other.f2, self.f12 + other.f12)
        return HyperDual(self.f + other, self.f1, self.f2, self.f12)

    __radd__ = __add__

    def __neg__(self):
        return HyperDual(-self.f, -self.f1, -self.f2, -self.f12)

    def __sub__(self, other):
        if isinstance(other, HyperDual):
            return HyperDual(self.f - other.f, self.f1 - other.f1,
                             self.f2 - other.f2, self.f12 - other.f12)
        return HyperDual(self.f - other, self.f1, self.f2, self.f12)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, HyperDual):
            return HyperDual(
                self.f * other.f,
                self.f1 * other.f + self.f * other.f1,
                self.f2 * other.f + self.f * other.f2,
                self.f12 * other.f + self.f1 * other.f2
                + self.f2 * other.f1 + self.f * other.f12,
            )
        return HyperDual(self.f * other, self.f1 * other,
                         self.f2 * other, self.f12 * other)

    __rmul__ = __mul__

    def _reciprocal(self):
        inv = 1.0 / self.f
        return _chain(self, inv, -inv * inv, 2.0 * inv * inv * inv)

    def __truediv__(self, other):
        if isinstance(other, HyperDual):
            return self * other._reciprocal()
        return self * (1.0 / other)

    def __rtruediv__(self, other):
        return self._reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, HyperDual):
            # x^y = exp(y log x); requires x > 0
            return exp(p * log(self))
        if p == 0:
            one = np.ones_like(self.f) if isinstance(self.f, np.ndarray) else 1.0
            return HyperDual(one)
        if p == 1:
            return HyperDual(self.f, self.f1, self.f2, self.f12)
        if p == 2:
            return self * self
        if not float(p).is_integer() and np.any(self.f < 0):
            raise EvaluationDomainError(
                "fractional power of a negative base")
        v = self.f ** p
        d1 = p * self.f ** (p - 1)
        d2 = p * (p - 1) * self.f ** (p - 2)
        return _chain(self, v, d1, d2)

    def __rpow__(self, base):
        return exp(self * log(base))

    def __abs__(self):
        s = np.sign(self.f)
        return _chain(self, np.abs(self.f), s, 0.0)

    # Comparisons act on the value part (used for domain checks).

    def __lt__(self, other):
        return self.f < _value(other)

    def __le__(self, other):
        return self.f <= _value(other)

    def __gt__(self, other):
        return self.f > _value(other)

    def __ge__(self, other):
        return self.f >= _value(other)


def _value(x):
    return x.f if isinstance(x, HyperDual) else x


def value(x):
    """Value part of a scalar-or-HyperDual."""
    return _value(x)


def _chain(x, v, d1, d2):
    # unary chain rule: g(x) for g with value v, derivatives d1, d2 at x.f
    return HyperDual(v, d1 * x.f1, d1 * x.f2, d1 * x.f12 + d2 * x.f1 * x.f2)


# -- math facade: accepts floats, numpy arrays, or HyperDuals --

def exp(x):
    if isinstance(x, HyperDual):
        v = np.exp(x.f)
        return _chain(x, v, v, v)
    return np.exp(x)


def log(x):
    if np.any(_value(x) <= 0.0):
        raise EvaluationDomainError("log argument must be positive")
    if isinstance(x, HyperDual):
        inv = 1.0 / x.f
        return _chain(x, np.log(x.f), inv, -inv * inv)
    return np.log(x)


def sqrt(x):
    if np.any(_value(x) < 0.0):
        raise EvaluationDomainError("sqrt argument must be nonnegative")
    if isinstance(x, HyperDual):
        v = np.sqrt(x.f)
        return _chain(x, v, 0.5 / v, -0.25 / (v * x.f))
    return np.sqrt(x)


def sin(x):
    if isinstance(x, HyperDual):
        return _chain(x, np.sin(x.f), np.cos(x.f), -np.sin(x.f))
    return np.sin(x)


def cos(x):
    if isinstance(x, HyperDual):
        return _chain(x, np.cos(x.f), -np.sin(x.f), -np.cos(x.f))
    return np.cos(x)


def absolute(x):
    if isinstance(x, HyperDual):
        return abs(x)
    return np.abs(x)
