"""Simultaneous roots of small monic complex polynomials.

Aberth-Ehrlich iteration started from Bini's Newton-polygon circles, with one
Newton polish per root.  Used for companion-matrix eigenvalues (Levin initial
guesses, branch tracking) and for pointwise eigenvalues of ``A(t)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ArgumentError, ConvergenceError, DegeneracyError

MAXIT = 200
TOL = 1e-14
MAX_DEGREE = 16
BACKWARD_TOL = 1e-13


def backward_error(c, z):
    """Normwise backward error of approximate roots ``z`` of the monic ``c``.

    Multiple roots stall the correction-size test while the roots are already
    exact for a polynomial within rounding of ``c``; this measure accepts them.
    """
    z = np.asarray(z)
    powers = np.abs(z)[:, None] ** np.arange(c.shape[0] + 1)
    norm = np.max(np.r_[np.abs(c), 1.0])
    return float(np.max(np.abs(MonicPoly(c)(z)) / (powers.sum(axis=1) * norm)))


@dataclass(frozen=True)
class MonicPoly:
    """``z**n + c[n-1] z**(n-1) + ... + c[0]``."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=np.complex128))
        if c.ndim != 1 or c.shape[0] < 1:
            raise ArgumentError("a monic polynomial needs degree >= 1")
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self):
        return self.coeffs.shape[0]

    def __call__(self, z):
        z = np.asarray(z, dtype=np.complex128)
        p = np.ones_like(z)
        for cj in self.coeffs[::-1]:
            p = p * z + cj
        return p

    @classmethod
    def from_roots(cls, rts):
        full = np.poly(np.asarray(rts, dtype=np.complex128))
        return cls(full[1:][::-1])


def _initial_guesses(c):
    """Bini's starting points: circles from the upper convex hull of log|a_j|."""
    n = c.shape[0]
    a = np.abs(np.concatenate([c, [1.0]]))
    with np.errstate(divide="ignore"):
        loga = np.where(a > 0, np.log(a), -np.inf)
    idx = [j for j in range(n + 1) if np.isfinite(loga[j])]
    hull = []
    for j in idx:
        while len(hull) >= 2:
            i0, i1 = hull[-2], hull[-1]
            cross = (i1 - i0) * (loga[j] - loga[i0]) - (j - i0) * (loga[i1] - loga[i0])
            if cross >= 0:
                hull.pop()
            else:
                break
        hull.append(j)
    z = []
    offset = 0.4
    if hull[0] > 0:
        # zero roots of multiplicity hull[0]: start them small but distinct
        tiny = 1e-30 if len(hull) == 1 else np.exp(loga[hull[0]] - loga[hull[1]]) * 1e-3
        for l in range(hull[0]):
            z.append(tiny * np.exp(1j * (2 * np.pi * l / hull[0] + offset)))
    for i0, i1 in zip(hull[:-1], hull[1:]):
        m = i1 - i0
        u = np.exp((loga[i0] - loga[i1]) / m)
        for l in range(m):
            z.append(u * np.exp(1j * (2 * np.pi * l / m + offset)))
        offset += 0.7
    return np.array(z, dtype=np.complex128)


def roots(p, maxit=MAXIT, tol=TOL):
    """All roots of a :class:`MonicPoly` (or its low coefficient array)."""
    c = p.coeffs if isinstance(p, MonicPoly) else MonicPoly(p).coeffs
    n = c.shape[0]
    if n > MAX_DEGREE:
        raise ArgumentError(f"degree {n} exceeds {MAX_DEGREE}")
    if not np.all(np.isfinite(c)):
        raise ArgumentError("non-finite coefficients")
    if n == 1:
        return np.array([-c[0]])
    if not np.any(c):
        return np.zeros(n, dtype=np.complex128)
    # rescale so the largest root is O(1)
    j = np.arange(n)
    with np.errstate(divide="ignore"):
        s = np.max(np.where(c != 0, np.abs(c) ** (1.0 / (n - j)), 0.0))
    cs = c / s ** (n - j)
    z0 = _initial_guesses(cs)
    z, its, ok = _kernels.aberth(cs, z0, maxit, tol)
    if not ok and backward_error(cs, z) > BACKWARD_TOL:
        bad = np.max(np.abs(MonicPoly(cs)(z)))
        raise ConvergenceError(
            f"Aberth iteration did not converge in {maxit} steps "
            f"(max scaled residual {bad:.3e}, coefficients {c!r})")
    # one Newton polish
    pz = np.ones_like(z)
    dp = np.zeros_like(z)
    for cj in cs[::-1]:
        dp = dp * z + pz
        pz = pz * z + cj
    with np.errstate(divide="ignore", invalid="ignore"):
        step = np.where(dp != 0, pz / dp, 0.0)
    z = z - np.where(np.isfinite(step), step, 0.0)
    return z * s


def charpoly(a):
    """Low coefficients of ``det(zI - A)`` for one matrix or a stack (Faddeev-LeVerrier)."""
    a = np.asarray(a, dtype=np.complex128)
    n = a.shape[-1]
    s = np.max(np.abs(a), axis=(-2, -1), keepdims=True)
    s = np.where(s > 0, s, 1.0)
    at = a / s
    eye = np.eye(n)
    c = np.zeros(a.shape[:-2] + (n,), dtype=np.complex128)
    m = np.zeros_like(at)
    prev = np.ones(a.shape[:-2], dtype=np.complex128)
    for kk in range(1, n + 1):
        m = at @ m + prev[..., None, None] * eye
        prev = -np.trace(at @ m, axis1=-2, axis2=-1) / kk
        c[..., n - kk] = prev
    powers = s[..., 0, 0][..., None] ** (n - np.arange(n))
    return c * powers


def match_roots(root_rows, reference=None, degeneracy_tol=1e-8):
    """Reorder each row of roots to continue the previous row's branches.

    Greedy nearest-neighbour assignment (smallest distances first).  Raises
    :class:`DegeneracyError` if two roots at one point are closer than
    ``degeneracy_tol`` times the root scale.
    """
    rows = np.array(root_rows, dtype=np.complex128)
    if rows.ndim != 2:
        raise ArgumentError("expected a 2-d array of roots")
    out = np.empty_like(rows)
    prev = rows[0] if reference is None else np.asarray(reference, dtype=np.complex128)
    n = rows.shape[1]
    for i, row in enumerate(rows):
        scale = max(np.max(np.abs(row)), 1e-300)
        if n > 1:
            gap = np.abs(row[:, None] - row[None, :]) + np.diag(np.full(n, np.inf))
            if np.min(gap) < degeneracy_tol * scale:
                raise DegeneracyError(
                    f"roots coalesce at point {i} (min gap {np.min(gap):.3e})")
        dist = np.abs(prev[:, None] - row[None, :])
        order = np.argsort(dist, axis=None)
        assigned = np.full(n, -1)
        used = np.zeros(n, dtype=bool)
        for flat in order:
            bi, ri = divmod(int(flat), n)
            if assigned[bi] < 0 and not used[ri]:
                assigned[bi] = ri
                used[ri] = True
        out[i] = row[assigned]
        prev = out[i]
    return out


def matched_branches(polys, reference=None):
    """Roots of a sequence of polynomials arranged as continuous branches.

    Returns an array of shape (npoints, n); column m is branch m.
    """
    rows = [roots(p) for p in polys]
    return match_roots(rows, reference=reference)
