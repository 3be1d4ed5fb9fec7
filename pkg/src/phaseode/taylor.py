"""Truncated Taylor arithmetic for exact derivatives of coefficient matrices.

A :class:`Jet` stores normalized Taylor coefficients ``f^(m)(t0) / m!`` for
``m = 0..order`` over a batch of expansion points.  Writing ``A(t)`` with jet
arithmetic yields all derivatives needed by the reduction to machine precision,
without finite differences.
"""

from __future__ import annotations

import math

import numpy as np


class Jet:
    __slots__ = ("c",)
    __array_priority__ = 1000

    def __init__(self, c):
        self.c = c

    @classmethod
    def variable(cls, t, order):
        t = np.asarray(t, dtype=float)
        c = np.zeros((order + 1,) + t.shape, dtype=np.complex128)
        c[0] = t
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    @property
    def order(self):
        return self.c.shape[0] - 1

    def derivatives(self):
        fact = np.array([math.factorial(m) for m in range(self.order + 1)], dtype=float)
        return self.c * fact.reshape((-1,) + (1,) * (self.c.ndim - 1))

    def _lift(self, other):
        if isinstance(other, Jet):
            return other.c
        c = np.zeros_like(self.c)
        c[0] = other
        return c

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.c + other.c)
        c = self.c.copy()
        c[0] = c[0] + other
        return Jet(c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c * other)
        return Jet(_cauchy(self.c, other.c))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c / other)
        return Jet(_divide(self.c, other.c))

    def __rtruediv__(self, other):
        return Jet(_divide(self._lift(other), self.c))

    def __pow__(self, p):
        if isinstance(p, int) and p >= 0:
            out = Jet(self._lift(1.0))
            base = self
            while p:
                if p & 1:
                    out = out * base
                base = base * base
                p >>= 1
            return out
        return exp(log(self) * p)


def _cauchy(a, b):
    n = a.shape[0]
    out = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=np.complex128)
    for m in range(n):
        for l in range(m + 1):
            out[m] += a[l] * b[m - l]
    return out


def _divide(a, b):
    n = a.shape[0]
    h = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=np.complex128)
    for m in range(n):
        acc = a[m].copy() if np.ndim(a[m]) else a[m]
        for l in range(1, m + 1):
            acc = acc - b[l] * h[m - l]
        h[m] = acc / b[0]
    return h


def exp(x):
    if not isinstance(x, Jet):
        return np.exp(x)
    f = x.c
    h = np.zeros_like(f)
    h[0] = np.exp(f[0])
    for m in range(1, f.shape[0]):
        for l in range(1, m + 1):
            h[m] += l * f[l] * h[m - l]
        h[m] /= m
    return Jet(h)


def log(x):
    if not isinstance(x, Jet):
        return np.log(x)
    f = x.c
    h = np.zeros_like(f)
    h[0] = np.log(f[0])
    for m in range(1, f.shape[0]):
        acc = m * f[m]
        for l in range(1, m):
            acc = acc - l * h[l] * f[m - l]
        h[m] = acc / (m * f[0])
    return Jet(h)


def _sincos(x):
    f = x.c
    s = np.zeros_like(f)
    c = np.zeros_like(f)
    s[0] = np.sin(f[0])
    c[0] = np.cos(f[0])
    for m in range(1, f.shape[0]):
        for l in range(1, m + 1):
            s[m] += l * f[l] * c[m - l]
            c[m] -= l * f[l] * s[m - l]
        s[m] /= m
        c[m] /= m
    return s, c


def sin(x):
    if not isinstance(x, Jet):
        return np.sin(x)
    return Jet(_sincos(x)[0])


def cos(x):
    if not isinstance(x, Jet):
        return np.cos(x)
    return Jet(_sincos(x)[1])


def sqrt(x):
    if not isinstance(x, Jet):
        return np.sqrt(x)
    f = x.c
    h = np.zeros_like(f)
    h[0] = np.sqrt(f[0])
    for m in range(1, f.shape[0]):
        acc = f[m].copy()
        for l in range(1, m):
            acc = acc - h[l] * h[m - l]
        h[m] = acc / (2.0 * h[0])
    return Jet(h)


def matrix_jet(entries, t, order):
    """Evaluate a nested list of jet expressions into derivative arrays.

    ``entries(t)`` receives a :class:`Jet` variable and returns an n-by-n
    nested list whose items are jets or plain constants.  The result has
    shape ``(order + 1, len(t), n, n)`` holding ``A, A', ..., A^(order)``.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    var = Jet.variable(t, order)
    rows = entries(var)
    n = len(rows)
    out = np.zeros((order + 1, t.shape[0], n, n), dtype=np.complex128)
    for i, row in enumerate(rows):
        for j, item in enumerate(row):
            if isinstance(item, Jet):
                out[:, :, i, j] = item.derivatives()
            else:
                out[0, :, i, j] = item
    return out
