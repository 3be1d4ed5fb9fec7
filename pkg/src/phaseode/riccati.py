"""Riccati form of the scalar equation and its linearization.

If ``x = exp(psi)`` solves ``x^(n) + q_{n-1} x^(n-1) + ... + q_0 x = 0`` and
``r = psi'``, then ``x^(j) = d_j x`` with ``d_0 = 1``, ``d_1 = r`` and
``d_{j+1} = d_j' + r d_j``; substituting gives the residual
``d_n + q_{n-1} d_{n-1} + ... + q_1 d_1 + q_0``.

Internally every quantity is a *derivative jet*: an array whose row ``m``
holds the m-th derivative at the grid nodes.  Products use the Leibniz rule,
so only the top derivative of ``r`` ever needs spectral differentiation.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from . import chebkit
from .errors import ArgumentError


@dataclass(frozen=True)
class RJet:
    """``r, r', ..., r^(n-2)`` sampled on a Chebyshev grid (shape ``(n-1, k)``)."""

    grid: chebkit.ChebGrid
    levels: np.ndarray

    def __post_init__(self):
        lv = np.atleast_2d(np.asarray(self.levels, dtype=np.complex128))
        if lv.shape[1] != self.grid.k:
            raise ArgumentError(f"levels have {lv.shape[1]} samples, grid has {self.grid.k}")
        object.__setattr__(self, "levels", lv)

    @property
    def order(self):
        """Scalar-equation order ``n``."""
        return self.levels.shape[0] + 1

    def full_levels(self):
        """All derivatives ``r..r^(n-1)``; the top one by spectral differentiation."""
        dm = chebkit.diff_matrix(self.grid.k, self.grid.interval)
        return np.concatenate([self.levels, (dm @ self.levels[-1])[None]], axis=0)

    def consistency(self):
        """Max relative mismatch between spectral derivatives of each level and the next."""
        if self.levels.shape[0] < 2:
            return 0.0
        dm = chebkit.diff_matrix(self.grid.k, self.grid.interval)
        worst = 0.0
        for m in range(self.levels.shape[0] - 1):
            ref = np.max(np.abs(self.levels[m + 1])) or 1.0
            worst = max(worst, np.max(np.abs(dm @ self.levels[m] - self.levels[m + 1])) / ref)
        return float(worst)


def leibniz(a, b, levels):
    """First ``levels`` derivative levels of the product of two derivative jets."""
    out = np.zeros((levels,) + np.broadcast_shapes(a.shape[1:], b.shape[1:]),
                   dtype=np.complex128)
    for m in range(levels):
        for l in range(m + 1):
            out[m] += comb(m, l) * a[l] * b[m - l]
    return out


def d_jets(r):
    """Jets of ``d_1..d_L`` from the jet ``r`` with ``L`` levels.

    ``d_j`` keeps ``L - j + 1`` levels; the list has ``L`` entries.
    """
    nlev = r.shape[0]
    out = [r]
    for j in range(1, nlev):
        prev = out[-1]
        keep = prev.shape[0] - 1
        out.append(prev[1:] + leibniz(r, prev, keep))
    return out


def _check_q(q, n, k):
    q = np.asarray(q, dtype=np.complex128)
    if q.shape != (n, k):
        raise ArgumentError(f"q must have shape ({n}, {k}), got {q.shape}")
    return q


def root_scale(q):
    """``max_j max_t |q_j|^(1/(n-j))``: the magnitude of the characteristic roots."""
    q = np.abs(np.asarray(q))
    n = q.shape[0]
    flat = q.reshape(n, -1).max(axis=1)
    return float(np.max(flat ** (1.0 / (n - np.arange(n)))))


def derivative_floor(levels, width, q):
    """Per-level magnitudes ``max|r| * rho^m`` with ``rho = max(2/width, root scale)``.

    Solutions of the equation vary on the scale of its characteristic roots,
    so ``r^(m)`` only needs accuracy relative to that scale.
    """
    rho = max(2.0 / width, root_scale(q))
    return np.max(np.abs(levels[0])) * rho ** np.arange(levels.shape[0])


def fit_ok(levels, width, q, eps):
    """Tail test on every level, against ``max(total energy, floor^2)``."""
    alpha = chebkit.vals_to_coeffs_array(levels)
    energy = np.abs(alpha) ** 2
    total = energy.sum(axis=1)
    tail = energy[:, -chebkit.TAIL:].sum(axis=1)
    floor = derivative_floor(levels, width, q)
    return bool(np.all(tail < eps * eps * np.maximum(total, floor ** 2)))


def residual_levels(r, q):
    """Residual and the pointwise sum of its term magnitudes.

    ``r`` holds ``n`` derivative levels, ``q`` has shape ``(n, ...)``.
    """
    n = r.shape[0]
    d = d_jets(r)
    res = d[n - 1][0] + q[0]
    scale = np.abs(d[n - 1][0]) + np.abs(q[0])
    for j in range(1, n):
        term = q[j] * d[j - 1][0]
        res = res + term
        scale = scale + np.abs(term)
    return res, scale


def linearization_levels(r, q):
    """Coefficients ``c_0..c_{n-1}`` of ``L[h] = sum_m c_m h^(m)``.

    Tracks each ``delta d_j`` as a jet-valued combination of ``h, h', ...``:
    ``E[j][p][m]`` is the p-th derivative of the coefficient of ``h^(m)``.
    Uses ``delta d_{j+1} = (delta d_j)' + h d_j + r delta d_j``.
    """
    n = r.shape[0]
    k = r.shape[1:]
    d = d_jets(r)
    # delta d_1 = h, carried with n derivative levels
    e = np.zeros((n, n) + k, dtype=np.complex128)
    e[0, 0] = 1.0
    coeff = [e]
    for j in range(1, n):
        prev = coeff[-1]
        keep = prev.shape[0] - 1
        nxt = np.zeros((keep, n) + k, dtype=np.complex128)
        for m in range(n):
            # derivative of sum_m E_m h^(m): E_m' h^(m) + E_m h^(m+1)
            nxt[:, m] += prev[1:, m]
            if m >= 1:
                nxt[:, m] += prev[:keep, m - 1]
            # r * delta d_j
            nxt[:, m] += leibniz(r, prev[:, m], keep)
        # h * d_j adds d_j to the coefficient of h itself
        nxt[:, 0] += d[j - 1][:keep]
        coeff.append(nxt)
    c = coeff[n - 1][0].copy()
    for j in range(1, n):
        c += q[j] * coeff[j - 1][0]
    return c


def d_sequence(rjet: RJet):
    """``d_1..d_n`` at the grid nodes, shape ``(n, k)``."""
    d = d_jets(rjet.full_levels())
    return np.stack([dj[0] for dj in d])


def residual(rjet: RJet, q):
    """``d_n + q_{n-1} d_{n-1} + ... + q_1 d_1 + q_0`` at the grid nodes."""
    q = _check_q(q, rjet.order, rjet.grid.k)
    return residual_levels(rjet.full_levels(), q)[0]


def linearize(rjet: RJet, q):
    """Coefficients ``c_0..c_{n-1}`` (shape ``(n, k)``) of the Newton operator."""
    q = _check_q(q, rjet.order, rjet.grid.k)
    return linearization_levels(rjet.full_levels(), q)
