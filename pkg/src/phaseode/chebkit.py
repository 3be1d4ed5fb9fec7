"""Chebyshev grids, transforms and piecewise expansions.

All expansions are of order ``k - 1`` on the k-point extremal (Lobatto)
Chebyshev grid.  Transforms are dense ``O(k^2)`` matrix products; at the
default ``k = 30`` that is cheaper than any FFT setup.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .errors import ArgumentError, DomainError, RefinementError

TAIL = 4


@dataclass(frozen=True)
class ChebGrid:
    k: int
    interval: tuple
    nodes: np.ndarray


@dataclass(frozen=True)
class ChebCoeffs:
    """Chebyshev series ``sum_j alpha[j] T_j`` on ``interval`` (mapped to [-1, 1])."""

    interval: tuple
    alpha: np.ndarray

    @property
    def k(self):
        return self.alpha.shape[0]

    def __call__(self, t):
        return evaluate(self, t)


def _check_interval(interval):
    c, d = float(interval[0]), float(interval[1])
    if not (np.isfinite(c) and np.isfinite(d)) or not c < d:
        raise ArgumentError(f"invalid interval ({c}, {d})")
    return c, d


@lru_cache(maxsize=None)
def standard_nodes(k: int) -> np.ndarray:
    """Extremal Chebyshev points on [-1, 1], increasing, exactly antisymmetric."""
    j = np.arange(k)
    x = np.sin(np.pi * (2.0 * j - (k - 1)) / (2.0 * (k - 1)))
    x[0], x[-1] = -1.0, 1.0
    x.setflags(write=False)
    return x


def cheb_nodes(k: int, interval) -> ChebGrid:
    """k-point extremal grid ``t_j = (d-c)/2 cos(pi (k-j)/(k-1)) + (d+c)/2``."""
    if int(k) != k or k < 2:
        raise ArgumentError(f"need k >= 2, got {k}")
    k = int(k)
    c, d = _check_interval(interval)
    x = standard_nodes(k)
    t = 0.5 * (d - c) * x + 0.5 * (d + c)
    t[0], t[-1] = c, d
    return ChebGrid(k, (c, d), t)


def map_nodes(k, c, d):
    t = 0.5 * (d - c) * standard_nodes(k) + 0.5 * (d + c)
    t[0], t[-1] = c, d
    return t


@lru_cache(maxsize=None)
def _c2v(k):
    theta = np.pi * np.arange(k - 1, -1, -1) / (k - 1)
    m = np.cos(np.outer(theta, np.arange(k)))
    m.setflags(write=False)
    return m


@lru_cache(maxsize=None)
def _v2c(k):
    # discrete orthogonality of T_j on the extremal grid (DCT-I)
    theta = np.pi * np.arange(k - 1, -1, -1) / (k - 1)
    m = np.cos(np.outer(np.arange(k), theta)) * (2.0 / (k - 1))
    m[:, 0] *= 0.5
    m[:, -1] *= 0.5
    m[0, :] *= 0.5
    m[-1, :] *= 0.5
    m.setflags(write=False)
    return m


def vals_to_coeffs_array(values):
    """Coefficients along the last axis of ``values`` (samples at the grid)."""
    values = np.asarray(values)
    return values @ _v2c(values.shape[-1]).T


def coeffs_to_vals_array(alpha):
    alpha = np.asarray(alpha)
    return alpha @ _c2v(alpha.shape[-1]).T


def vals_to_coeffs(values, grid: ChebGrid) -> ChebCoeffs:
    values = np.asarray(values, dtype=np.complex128)
    if values.ndim != 1 or values.shape[0] != grid.k:
        raise ArgumentError(f"expected {grid.k} samples, got shape {values.shape}")
    return ChebCoeffs(grid.interval, vals_to_coeffs_array(values))


def coeffs_to_vals(expansion: ChebCoeffs) -> np.ndarray:
    return coeffs_to_vals_array(expansion.alpha)


@lru_cache(maxsize=None)
def _std_diff_matrix(k):
    x = standard_nodes(k)
    w = (-1.0) ** np.arange(k)
    w[0] *= 0.5
    w[-1] *= 0.5
    dx = x[:, None] - x[None, :]
    np.fill_diagonal(dx, 1.0)
    dm = (w[None, :] / w[:, None]) / dx
    np.fill_diagonal(dm, 0.0)
    np.fill_diagonal(dm, -dm.sum(axis=1))
    dm.setflags(write=False)
    return dm


def diff_matrix(k, interval):
    """Spectral differentiation matrix on the extremal grid of ``interval``."""
    c, d = interval
    return _std_diff_matrix(k) * (2.0 / (d - c))


@lru_cache(maxsize=None)
def _std_int_matrix(k):
    # integrate the interpolant exactly: k coefficients -> k+1, zero at x = -1
    icoef = np.zeros((k + 1, k))
    for j in range(k):
        e = np.zeros(k)
        e[j] = 1.0
        icoef[:, j] = _integrate_coeffs(e)
    theta = np.pi * np.arange(k - 1, -1, -1) / (k - 1)
    tmat = np.cos(np.outer(theta, np.arange(k + 1)))
    km = tmat @ icoef @ _v2c(k)
    km.setflags(write=False)
    return km


def int_matrix(k, interval, base="left"):
    """Matrix mapping samples of f to samples of the integral of f from an endpoint."""
    c, d = interval
    km = _std_int_matrix(k) * (0.5 * (d - c))
    if base == "left":
        return km
    if base == "right":
        return km - km[-1][None, :]
    raise ArgumentError(f"base must be 'left' or 'right', got {base!r}")


def _integrate_coeffs(alpha):
    """Antiderivative coefficients (length k+1) on [-1, 1], vanishing at -1."""
    k = alpha.shape[-1]
    a = np.zeros(alpha.shape[:-1] + (k + 2,), dtype=np.result_type(alpha, float))
    a[..., :k] = alpha
    out = np.zeros(alpha.shape[:-1] + (k + 1,), dtype=a.dtype)
    out[..., 1] = a[..., 0] - 0.5 * a[..., 2]
    for j in range(2, k + 1):
        out[..., j] = (a[..., j - 1] - a[..., j + 1]) / (2.0 * j)
    signs = (-1.0) ** np.arange(k + 1)
    out[..., 0] = -(out[..., 1:] * signs[1:]).sum(axis=-1)
    return out


def _differentiate_coeffs(alpha):
    k = alpha.shape[-1]
    out = np.zeros_like(alpha)
    if k < 2:
        return out
    out[..., k - 2] = 2.0 * (k - 1) * alpha[..., k - 1]
    for j in range(k - 3, -1, -1):
        nxt = out[..., j + 2] if j + 2 < k else 0.0
        out[..., j] = nxt + 2.0 * (j + 1) * alpha[..., j + 1]
    out[..., 0] *= 0.5
    return out


def fit_metric(alpha) -> float:
    """Tail-to-total coefficient energy; the tail is the last four coefficients."""
    alpha = np.asarray(alpha.alpha if isinstance(alpha, ChebCoeffs) else alpha)
    energy = np.abs(alpha) ** 2
    total = energy.sum(axis=-1)
    tail = energy[..., -TAIL:].sum(axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(total > 0, tail / np.where(total > 0, total, 1.0), 0.0)
    return float(out) if out.ndim == 0 else out


class PiecewiseCheb:
    """Piecewise Chebyshev expansion on a partition ``a = x_0 < ... < x_m = b``.

    Pieces are half-open ``[x_i, x_{i+1})`` except the last, which is closed.
    """

    __slots__ = ("breakpoints", "coeffs")

    def __init__(self, breakpoints, coeffs):
        bp = np.array(breakpoints, dtype=float)
        cf = np.array(coeffs, dtype=np.complex128)
        if bp.ndim != 1 or bp.shape[0] < 2 or np.any(np.diff(bp) <= 0):
            raise ArgumentError("breakpoints must be strictly increasing, at least two")
        if cf.ndim != 2 or cf.shape[0] != bp.shape[0] - 1:
            raise ArgumentError(
                f"need {bp.shape[0] - 1} pieces of coefficients, got shape {cf.shape}")
        bp.setflags(write=False)
        cf.setflags(write=False)
        self.breakpoints = bp
        self.coeffs = cf

    @property
    def interval(self):
        return float(self.breakpoints[0]), float(self.breakpoints[-1])

    @property
    def k(self):
        return self.coeffs.shape[1]

    @property
    def npieces(self):
        return self.coeffs.shape[0]

    @property
    def ncoeffs(self):
        return self.coeffs.size

    @property
    def pieces(self):
        bp = self.breakpoints
        return [ChebCoeffs((float(bp[i]), float(bp[i + 1])), self.coeffs[i])
                for i in range(self.npieces)]

    def locate(self, t):
        """Index of the piece containing each ``t`` (raises outside [a, b])."""
        t = np.asarray(t, dtype=float)
        a, b = self.breakpoints[0], self.breakpoints[-1]
        if np.any(t < a) or np.any(t > b) or np.any(np.isnan(t)):
            raise DomainError(f"evaluation point outside [{a}, {b}]")
        idx = np.searchsorted(self.breakpoints, t, side="right") - 1
        return np.minimum(idx, self.npieces - 1)

    def __call__(self, t):
        return evaluate(self, t)

    def __repr__(self):
        return (f"PiecewiseCheb(interval={self.interval}, pieces={self.npieces}, "
                f"k={self.k})")

    def to_json(self):
        return {
            "breakpoints": self.breakpoints.tolist(),
            "pieces": [[[z.real, z.imag] for z in row] for row in self.coeffs],
        }

    @classmethod
    def from_json(cls, obj):
        cf = np.array(obj["pieces"], dtype=float)
        return cls(obj["breakpoints"], cf[..., 0] + 1j * cf[..., 1])


def evaluate(expansion, t):
    """Evaluate a :class:`ChebCoeffs` or :class:`PiecewiseCheb` at ``t``.

    Scalar ``t`` gives a complex scalar; arrays give arrays of the same shape.
    """
    tt = np.asarray(t, dtype=float)
    flat = np.atleast_1d(tt).ravel()
    if isinstance(expansion, PiecewiseCheb):
        idx = expansion.locate(flat)
        c = expansion.breakpoints[idx]
        d = expansion.breakpoints[idx + 1]
        coeffs = expansion.coeffs[idx]
    elif isinstance(expansion, ChebCoeffs):
        c, d = expansion.interval
        if np.any(flat < c) or np.any(flat > d) or np.any(np.isnan(flat)):
            raise DomainError(f"evaluation point outside [{c}, {d}]")
        coeffs = np.broadcast_to(expansion.alpha, (flat.shape[0], expansion.k))
    else:
        raise ArgumentError(f"cannot evaluate {type(expansion).__name__}")
    x = (2.0 * flat - (c + d)) / (d - c)
    vals = _kernels.clenshaw(np.ascontiguousarray(coeffs, dtype=np.complex128),
                             np.ascontiguousarray(x, dtype=float))
    if tt.ndim == 0:
        return complex(vals[0])
    return vals.reshape(tt.shape)


def differentiate(expansion):
    if isinstance(expansion, ChebCoeffs):
        c, d = expansion.interval
        return ChebCoeffs(expansion.interval,
                          _differentiate_coeffs(expansion.alpha) * (2.0 / (d - c)))
    bp = expansion.breakpoints
    scale = 2.0 / np.diff(bp)
    return PiecewiseCheb(bp, _differentiate_coeffs(np.array(expansion.coeffs))
                         * scale[:, None])


def integrate(expansion, base_point=None):
    """Antiderivative vanishing at ``base_point`` (default: left end).

    The degree-k term of each piece's antiderivative is dropped, so the result
    keeps k coefficients per piece; constants are chained for continuity.
    """
    if isinstance(expansion, ChebCoeffs):
        pw = PiecewiseCheb(expansion.interval, expansion.alpha[None, :])
        out = integrate(pw, base_point)
        return ChebCoeffs(expansion.interval, np.array(out.coeffs[0]))
    bp = expansion.breakpoints
    k = expansion.k
    half = 0.5 * np.diff(bp)
    anti = _integrate_coeffs(np.array(expansion.coeffs))[:, :k] * half[:, None]
    signs = (-1.0) ** np.arange(k)
    left = (anti * signs).sum(axis=1)
    right = anti.sum(axis=1)
    offset = 0.0
    for i in range(anti.shape[0]):
        anti[i, 0] += offset - left[i]
        offset = offset + right[i] - left[i]
    out = PiecewiseCheb(bp, anti)
    if base_point is not None:
        shift = evaluate(out, float(base_point))
        anti[:, 0] -= shift
        out = PiecewiseCheb(bp, anti)
    return out


def adaptive_partition(sampler: Callable, interval, k: int, eps: float,
                       floor: Callable | None = None, width_min: float | None = None):
    """Bisect ``interval`` until every sampled component is resolved.

    ``sampler(t)`` maps the k grid nodes of a subinterval to an array of shape
    ``(ncomp, k)``.  A subinterval is accepted when every component has
    ``fit_metric < eps**2``.  When ``floor`` is given, it maps the sampled
    values to per-component magnitudes and a component is also accepted if
    its tail energy is below ``eps**2 * floor**2`` (components that are zero
    up to rounding).  Intervals are processed LIFO.

    Returns ``(breakpoints, expansions)`` with one :class:`PiecewiseCheb` per
    component.
    """
    a, b = _check_interval(interval)
    if eps <= 0:
        raise ArgumentError("eps must be positive")
    if width_min is None:
        width_min = (b - a) * 2.0 ** -30
    todo = [(a, b)]
    accepted = []
    eps2 = eps * eps
    while todo:
        c, d = todo.pop()
        t = map_nodes(k, c, d)
        vals = np.asarray(sampler(t))
        if vals.ndim == 1:
            vals = vals[None, :]
        alpha = vals_to_coeffs_array(vals)
        energy = np.abs(alpha) ** 2
        total = energy.sum(axis=-1)
        tail = energy[:, -TAIL:].sum(axis=-1)
        ref = total
        if floor is not None:
            ref = np.maximum(total, np.asarray(floor(vals), dtype=float) ** 2)
        ok = np.all((tail < eps2 * ref) | (total == 0))
        if ok and np.all(np.isfinite(alpha)):
            accepted.append((c, d, alpha))
            continue
        if (d - c) / 2 < width_min:
            raise RefinementError(
                f"could not resolve sampled functions on [{c!r}, {d!r}]", (c, d))
        mid = 0.5 * (c + d)
        todo.append((mid, d))
        todo.append((c, mid))
    accepted.sort(key=lambda item: item[0])
    bp = np.array([item[0] for item in accepted] + [accepted[-1][1]])
    stack = np.stack([item[2] for item in accepted], axis=1)
    return bp, [PiecewiseCheb(bp, stack[i]) for i in range(stack.shape[0])]


def from_samples(breakpoints: Sequence[float], values) -> PiecewiseCheb:
    """Build an expansion from samples at each piece's extremal grid, shape (m, k)."""
    return PiecewiseCheb(breakpoints, vals_to_coeffs_array(np.asarray(values)))


def total_coefficients(expansions) -> int:
    return int(sum(e.ncoeffs for e in expansions))
