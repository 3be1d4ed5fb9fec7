"""Conventional reference solver and the relative error metric.

The reference integrates the fundamental matrix with an s-stage
Gauss-Legendre collocation method (order 2s) under step-doubling error
control.  It shares nothing with the phase pipeline beyond ``A(t)`` itself,
and its cost grows with the frequency of the system.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ArgumentError, SingularSystemError, StiffError

STAGES = 12
CHUNK = 1024


@lru_cache(maxsize=None)
def gauss_tableau(s):
    """Butcher tableau ``(a, b, c)`` of the s-stage Gauss-Legendre method."""
    x, w = np.polynomial.legendre.leggauss(s)
    c = 0.5 * (x + 1.0)
    b = 0.5 * w
    # a[i, j] = integral_0^{c_i} l_j(tau) d tau, by Gauss quadrature on [0, c_i]
    a = np.empty((s, s))
    for i in range(s):
        tau = c[i] * c
        for j in range(s):
            others = np.delete(c, j)
            lj = np.prod((tau[:, None] - others[None, :]) / (c[j] - others)[None, :], axis=1)
            a[i, j] = c[i] * (b @ lj)
    return a, b, c


def transitions(spec, t_start, h, stages=STAGES):
    """Propagators ``P`` with ``y(t + h) = P y(t)``; batched over ``t_start``, ``h``."""
    a, b, c = gauss_tableau(stages)
    t_start = np.atleast_1d(np.asarray(t_start, dtype=float))
    h = np.broadcast_to(np.asarray(h, dtype=float), t_start.shape)
    m = t_start.shape[0]
    n = spec.n
    s = stages
    tau = (t_start[:, None] + h[:, None] * c[None, :]).ravel()
    amat = spec.matrix(tau).reshape(m, s, n, n)
    # block (i, j) of the stage system: delta_ij I - h a_ij A_i
    sys = -(h[:, None, None, None, None] * a[None, :, :, None, None]
            * amat[:, :, None, :, :])
    sys = np.transpose(sys, (0, 1, 3, 2, 4)).reshape(m, s * n, s * n)
    sys += np.eye(s * n)
    rhs = amat.reshape(m, s * n, n)
    k = np.linalg.solve(sys, rhs).reshape(m, s, n, n)
    return np.eye(n) + h[:, None, None] * np.einsum("i,mipq->mpq", b, k)


@dataclass(frozen=True)
class ReferenceSolution:
    """Dense reference ``y(t) = Y(t) c`` with ``Y`` the propagator from ``t0``."""

    spec: object
    t0: float
    nodes: np.ndarray
    ymats: np.ndarray
    c: np.ndarray
    tol: float
    stages: int = STAGES

    @property
    def steps(self):
        return self.nodes.shape[0] - 1

    def fundamental(self, t):
        tt = np.asarray(t, dtype=float)
        t1 = np.atleast_1d(tt)
        a, b = self.spec.interval
        if np.any(t1 < a) or np.any(t1 > b):
            raise ArgumentError(f"evaluation point outside [{a}, {b}]")
        right = np.searchsorted(self.nodes, t1, side="right") - 1
        left = np.searchsorted(self.nodes, t1, side="left")
        idx = np.where(t1 >= self.t0, right, left)
        idx = np.clip(idx, 0, self.nodes.shape[0] - 1)
        out = np.empty((t1.shape[0], self.spec.n, self.spec.n), dtype=np.complex128)
        for lo in range(0, t1.shape[0], CHUNK):
            sl = slice(lo, lo + CHUNK)
            start = self.nodes[idx[sl]]
            p = transitions(self.spec, start, t1[sl] - start, self.stages)
            out[sl] = p @ self.ymats[idx[sl]]
        return out[0] if tt.ndim == 0 else out

    def __call__(self, t):
        return self.fundamental(t) @ self.c


def _march(spec, t0, end, tol, stages, h0):
    """Accepted nodes and propagators from ``t0`` toward ``end``."""
    length = spec.interval[1] - spec.interval[0]
    hmin = length * 2.0 ** -40
    sign = 1.0 if end > t0 else -1.0
    t = t0
    y = np.eye(spec.n, dtype=np.complex128)
    nodes, mats = [], []
    h = h0
    order = 2 * stages
    while sign * (end - t) > 0:
        h = min(h, sign * (end - t))
        hs = sign * np.array([h, 0.5 * h, 0.5 * h])
        starts = np.array([t, t, t + 0.5 * hs[0]])
        p = transitions(spec, starts, hs, stages)
        fine = p[2] @ p[1]
        err = np.max(np.abs(fine - p[0])) / max(1.0, np.max(np.abs(fine)))
        if err <= tol:
            t = end if sign * (end - (t + hs[0])) <= 0 else t + hs[0]
            y = fine @ y
            nodes.append(t)
            mats.append(y)
            fac = 2.0 if err == 0 else min(2.0, 0.9 * (tol / err) ** (1.0 / (order + 1)))
            h = h * max(fac, 0.2)
        else:
            h = h * max(0.2, 0.9 * (tol / err) ** (1.0 / (order + 1)))
            if h < hmin:
                raise StiffError(f"reference step size underflow near t={t!r}", location=t)
    return nodes, mats


def fundamental_reference(spec, t0, tol=1e-13, stages=STAGES):
    a, b = spec.interval
    if not a <= t0 <= b:
        raise ArgumentError(f"t0={t0} outside [{a}, {b}]")
    h0 = (b - a) / 64
    rn, rm = _march(spec, t0, b, tol, stages, h0)
    ln, lm = _march(spec, t0, a, tol, stages, h0)
    nodes = np.array(ln[::-1] + [t0] + rn)
    mats = np.array(lm[::-1] + [np.eye(spec.n, dtype=np.complex128)] + rm)
    return nodes, mats


def reference_ivp(spec, t0, y0, tol=1e-13, stages=STAGES) -> ReferenceSolution:
    """Reference solution with ``y(t0) = y0``."""
    y0 = np.asarray(y0, dtype=np.complex128)
    if y0.shape != (spec.n,):
        raise ArgumentError(f"y0 must have length {spec.n}")
    nodes, mats = fundamental_reference(spec, float(t0), tol, stages)
    return ReferenceSolution(spec, float(t0), nodes, mats, y0, tol, stages)


def reference_bvp(spec, ba, bb, g, tol=1e-13, stages=STAGES) -> ReferenceSolution:
    """Reference solution with ``Ba y(a) + Bb y(b) = g`` by superposition from ``a``."""
    a, b = spec.interval
    nodes, mats = fundamental_reference(spec, a, tol, stages)
    mat = np.asarray(ba) @ mats[0] + np.asarray(bb) @ mats[-1]
    u, s, vh = np.linalg.svd(mat)
    if s[-1] <= 1e-14 * s[0]:
        raise SingularSystemError(
            f"boundary conditions are numerically singular (cond {s[0] / max(s[-1], 1e-300):.3e})")
    c = vh.conj().T @ ((u.conj().T @ np.asarray(g, dtype=np.complex128)) / s)
    return ReferenceSolution(spec, float(a), nodes, mats, c, tol, stages)


def error_metric(y, z, interval=None, m=10000):
    """``max_i |y(t_i) - z(t_i)| / |z(t_i)|`` at ``m`` equispaced points.

    ``y`` and ``z`` map a 1-d array of points to an array of shape (m, n).
    """
    if interval is None:
        interval = z.spec.interval if isinstance(z, ReferenceSolution) else y.fm.interval
    a, b = interval
    if m < 2:
        raise ArgumentError("need at least two evaluation points")
    t = a + (b - a) * np.arange(m) / (m - 1)
    yv = np.asarray(y(t))
    zv = np.asarray(z(t))
    zn = np.linalg.norm(zv, axis=-1)
    if np.any(zn == 0):
        raise ArgumentError("reference solution vanishes at an evaluation point")
    return float(np.max(np.linalg.norm(yv - zv, axis=-1) / zn))
