"""Cyclic-vector reduction of ``y' = A(t) y`` to a scalar equation.

With a constant vector ``v`` the rows of ``Phi(t)`` are ``D^i[v]`` where
``D[w] = w' + A^T w``.  Then ``B = Phi' Phi^{-1} + Phi A Phi^{-1}`` is a
companion matrix whose last row is ``-(q_0, ..., q_{n-1})``, and
``x = Phi y`` turns the system into the scalar equation
``x^(n) + q_{n-1} x^(n-1) + ... + q_0 x = 0`` for its first component.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Callable

import numpy as np

from . import chebkit
from .errors import ArgumentError, IllConditionedError

COND_LIMIT = 1e8
PINV_RTOL = 1e-14
ZERO_TOL = 1e-12


@dataclass(frozen=True)
class SystemSpec:
    """A linear system ``y' = A(t) y`` on ``interval``.

    ``jet(t, order)`` takes a 1-d array of points and returns an array of
    shape ``(order + 1, len(t), n, n)`` with ``A, A', ..., A^(order)``.
    """

    n: int
    interval: tuple
    jet: Callable

    def __post_init__(self):
        if self.n < 1:
            raise ArgumentError("dimension must be positive")
        chebkit._check_interval(self.interval)

    def matrix(self, t):
        """``A(t)`` for scalar or 1-d ``t``; shape ``(n, n)`` or ``(len(t), n, n)``."""
        tt = np.asarray(t, dtype=float)
        out = self.jet(np.atleast_1d(tt), 0)[0]
        return out[0] if tt.ndim == 0 else out


@dataclass(frozen=True)
class CyclicVector:
    v: np.ndarray

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.v, dtype=np.complex128))
        if v.ndim != 1 or not np.any(v):
            raise ArgumentError("cyclic vector must be a nonzero 1-d vector")
        object.__setattr__(self, "v", v)


def _as_vector(v, n):
    cv = v if isinstance(v, CyclicVector) else CyclicVector(v)
    if cv.v.shape[0] != n:
        raise ArgumentError(f"cyclic vector has length {cv.v.shape[0]}, system has n={n}")
    return cv.v


def _d_iterates(spec, v, t):
    """Derivative jets of ``D^i[v]`` at points ``t``.

    Returns a list ``w`` with ``w[i]`` of shape ``(n + 1 - i, len(t), n)``
    holding ``D^i[v]`` and its derivatives.
    """
    n = spec.n
    a = spec.jet(t, max(n - 1, 0))
    at = np.swapaxes(a, -1, -2)
    w0 = np.zeros((n + 1, t.shape[0], n), dtype=np.complex128)
    w0[0] = v
    out = [w0]
    for i in range(n):
        prev = out[-1]
        levels = prev.shape[0] - 1
        nxt = np.empty((levels,) + prev.shape[1:], dtype=np.complex128)
        for j in range(levels):
            acc = prev[j + 1].copy()
            for l in range(j + 1):
                acc += comb(j, l) * np.einsum("pab,pb->pa", at[l], prev[j - l])
            nxt[j] = acc
        out.append(nxt)
    return out


def phi_jet(spec: SystemSpec, v, t):
    """``(Phi(t), Phi'(t))``, exact up to rounding; vectorized over 1-d ``t``."""
    vv = _as_vector(v, spec.n)
    tt = np.asarray(t, dtype=float)
    w = _d_iterates(spec, vv, np.atleast_1d(tt))
    n = spec.n
    phi = np.stack([w[i][0] for i in range(n)], axis=-2)
    dphi = np.stack([w[i][1] for i in range(n)], axis=-2)
    if tt.ndim == 0:
        return phi[0], dphi[0]
    return phi, dphi


def _equilibrated_inverse(phi):
    """Pseudo-inverse of a stack of matrices via SVD after row scaling.

    Returns ``(inverse, cond)`` where ``cond`` is the 2-norm condition number
    of the row-equilibrated matrix.
    """
    scale = 1.0 / np.linalg.norm(phi, axis=-1)
    ps = phi * scale[..., :, None]
    u, s, vh = np.linalg.svd(ps)
    smax = s[..., :1]
    keep = s > PINV_RTOL * smax
    sinv = np.where(keep, 1.0 / np.where(keep, s, 1.0), 0.0)
    inv_s = np.einsum("...ji,...j,...kj->...ik", vh.conj(), sinv, u.conj())
    inv = inv_s * scale[..., None, :]
    with np.errstate(divide="ignore"):
        cond = np.where(s[..., -1] > 0, s[..., 0] / s[..., -1], np.inf)
    return inv, cond


def _transform_at(spec, vv, t):
    phi, dphi = phi_jet(spec, vv, t)
    a = spec.matrix(t)
    inv, cond = _equilibrated_inverse(phi)
    b = (dphi + phi @ a) @ inv
    return b, inv, cond


def scalar_coeffs_at(spec: SystemSpec, v, t, cond_limit=COND_LIMIT):
    """Scalar coefficients ``q``, ``Phi^{-1}`` and the condition number at ``t``.

    Vectorized: for 1-d ``t`` returns arrays of shapes ``(len(t), n)``,
    ``(len(t), n, n)`` and ``(len(t),)``.
    """
    vv = _as_vector(v, spec.n)
    tt = np.asarray(t, dtype=float)
    t1 = np.atleast_1d(tt)
    b, inv, cond = _transform_at(spec, vv, t1)
    bad = np.flatnonzero(~(cond <= cond_limit))
    if bad.size:
        i = bad[np.argmax(np.where(np.isfinite(cond[bad]), cond[bad], np.inf))]
        raise IllConditionedError(
            f"cyclic-vector transform has condition {cond[i]:.3e} at t={t1[i]!r} "
            f"(limit {cond_limit:.1e}); try another v", t=float(t1[i]), cond=float(cond[i]))
    q = -b[:, -1, :]
    if tt.ndim == 0:
        return q[0], inv[0], float(cond[0])
    return q, inv, cond


def companion_residual(spec: SystemSpec, v, t):
    """Max deviation of rows ``0..n-2`` of ``B(t)`` from the shifted identity, relative to ``max|B|``."""
    vv = _as_vector(v, spec.n)
    t1 = np.atleast_1d(np.asarray(t, dtype=float))
    b, _, _ = _transform_at(spec, vv, t1)
    n = spec.n
    target = np.eye(n, k=1)[: n - 1]
    dev = np.max(np.abs(b[:, : n - 1, :] - target), axis=(-2, -1))
    return dev / np.max(np.abs(b), axis=(-2, -1))


@dataclass(frozen=True)
class ReducedSystem:
    """Piecewise expansions of ``Phi^{-1}`` entries and ``q_0..q_{n-1}`` on one partition."""

    n: int
    v: np.ndarray
    phi_inv: tuple  # n*n PiecewiseCheb, row-major
    q: tuple  # n PiecewiseCheb
    cond_max: float
    breakpoints: np.ndarray
    k: int
    _dphi_inv: list = field(default_factory=list, repr=False, compare=False)

    @property
    def interval(self):
        return float(self.breakpoints[0]), float(self.breakpoints[-1])

    def q_at(self, t):
        """Coefficients at points ``t``; shape ``(n, len(t))``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.stack([chebkit.evaluate(e, t) for e in self.q])

    def phi_inv_at(self, t):
        """Interpolated ``Phi^{-1}`` at points ``t``; shape ``(len(t), n, n)``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        vals = np.stack([chebkit.evaluate(e, t) for e in self.phi_inv], axis=-1)
        return vals.reshape(t.shape[0], self.n, self.n)

    def dphi_inv_at(self, t):
        """Derivative of the interpolated ``Phi^{-1}``; shape ``(len(t), n, n)``."""
        if not self._dphi_inv:
            self._dphi_inv.extend(chebkit.differentiate(e) for e in self.phi_inv)
        t = np.atleast_1d(np.asarray(t, dtype=float))
        vals = np.stack([chebkit.evaluate(e, t) for e in self._dphi_inv], axis=-1)
        return vals.reshape(t.shape[0], self.n, self.n)

    def expansions(self):
        return list(self.phi_inv) + list(self.q)

    def coeff_count(self):
        """Coefficients in the ``Phi^{-1}`` expansions (the q's are internal)."""
        return chebkit.total_coefficients(self.phi_inv)


def discretize(spec: SystemSpec, v, k=30, eps_disc=1e-12, cond_limit=COND_LIMIT):
    """Adaptively expand ``Phi^{-1}`` and ``q`` over the system's interval.

    A piece is accepted when every component passes the relative tail test.
    Entries that are zero up to rounding are judged against a floor instead:
    the largest entry in the same column of ``Phi^{-1}``, and for ``q_j``
    ``ZERO_TOL * s^(n-j)`` with the root scale ``s = max_j |q_j|^(1/(n-j))``.
    """
    vv = _as_vector(v, spec.n)
    n = spec.n
    conds = {}

    def sampler(t):
        q, inv, cond = scalar_coeffs_at(spec, vv, t, cond_limit)
        conds[(t[0], t[-1])] = float(np.max(cond))
        return np.concatenate([inv.reshape(t.shape[0], n * n).T, q.T])

    def floor(vals):
        inv = np.abs(vals[: n * n]).reshape(n, n, -1)
        col = np.max(inv, axis=(0, 2))
        inv_floor = np.tile(col, n)
        q = np.abs(vals[n * n:])
        j = np.arange(n)
        s = np.max(np.max(q, axis=1) ** (1.0 / (n - j)))
        return np.concatenate([inv_floor, ZERO_TOL * s ** (n - j)])

    bp, exps = chebkit.adaptive_partition(sampler, spec.interval, k, eps_disc, floor=floor)
    cond_max = max(conds.get((chebkit.map_nodes(k, bp[i], bp[i + 1])[0],
                              chebkit.map_nodes(k, bp[i], bp[i + 1])[-1]), 0.0)
                   for i in range(bp.shape[0] - 1))
    return ReducedSystem(n=n, v=vv, phi_inv=tuple(exps[: n * n]), q=tuple(exps[n * n:]),
                         cond_max=cond_max, breakpoints=bp, k=k)
