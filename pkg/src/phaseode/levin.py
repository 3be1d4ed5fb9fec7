"""Local Levin step: slowly-varying Riccati solutions on a small window.

On the window's Chebyshev grid the Riccati equation is solved by Newton's
method with a square collocation system and no boundary conditions.  A grid
that resolves only slowly-varying functions makes that system well
conditioned and singles out the slowly-varying solution near the initial
guess (companion-matrix eigenvalues).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import chebkit, polyroots, riccati
from .errors import ArgumentError, DuplicateBranchError, LevinError

MAX_NEWTON = 30
PINV_RTOL = 1e-13
MAX_HALVINGS = 10
MAX_SHRINK = 8


@dataclass(frozen=True)
class LevinWindow:
    interval: tuple
    sigma: float | None = None
    k: int = 30

    def __post_init__(self):
        a0, b0 = chebkit._check_interval(self.interval)
        object.__setattr__(self, "interval", (a0, b0))
        s = 0.5 * (a0 + b0) if self.sigma is None else float(self.sigma)
        if not a0 <= s <= b0:
            raise ArgumentError(f"sigma={s} outside window ({a0}, {b0})")
        object.__setattr__(self, "sigma", s)
        if self.k < 4:
            raise ArgumentError("window grid needs k >= 4")


@dataclass(frozen=True)
class PhaseSeed:
    """Values ``r(sigma), r'(sigma), ..., r^(n-2)(sigma)`` for one branch."""

    branch: int
    sigma: float
    values: np.ndarray
    residual: float
    iterations: int
    window: tuple = ()


@dataclass(frozen=True)
class NewtonResult:
    rjet: riccati.RJet
    iterations: int
    residual: float


def svd_solve(mat, rhs, rtol=PINV_RTOL):
    """Minimum-norm least-squares solution with relative singular-value cutoff."""
    u, s, vh = np.linalg.svd(mat)
    keep = s > rtol * s[0]
    coef = (u.conj().T @ rhs)[keep] / s[keep]
    return vh[keep].conj().T @ coef


def normalized_residual(levels, q):
    """Max pointwise residual divided by the max total term magnitude."""
    res, scale = riccati.residual_levels(levels, q)
    return res, float(np.max(np.abs(res)) / max(np.max(scale), 1e-300))


def initial_guesses(q, grid: chebkit.ChebGrid):
    """One guess per branch from pointwise companion-matrix eigenvalues.

    ``q`` has shape ``(n, k)``.  Derivative levels come from spectral
    differentiation of the matched branch values.
    """
    q = np.asarray(q, dtype=np.complex128)
    n = q.shape[0]
    rows = [polyroots.roots(q[:, i]) for i in range(grid.k)]
    mid = grid.k // 2
    # match outward from the middle node so both halves start from one reference
    right = polyroots.match_roots(rows[mid:])
    left = polyroots.match_roots(rows[mid::-1], reference=right[0])[::-1]
    branches = np.concatenate([left[:-1], right])
    dm = chebkit.diff_matrix(grid.k, grid.interval)
    out = []
    for m in range(n):
        lv = [branches[:, m]]
        for _ in range(n - 2):
            lv.append(dm @ lv[-1])
        out.append(riccati.RJet(grid, np.array(lv)))
    return out


def _levels_from_r(r, dm, n):
    lv = [r]
    if n > 1:
        # removing a constant first makes constant r differentiate to exact zeros
        lv.append(dm @ (r - r[0]))
    for _ in range(n - 2):
        lv.append(dm @ lv[-1])
    return np.array(lv)


def residual_tolerance(dm, q, eps):
    """Acceptance bound for the normalized residual on one grid.

    Repeated spectral differentiation amplifies rounding in ``r`` by about
    ``(|D| / s)^(n-1)`` relative to the leading terms, where ``s`` is the
    root scale of ``q``.  That floor only matters at low frequency.
    """
    n = q.shape[0]
    dnorm = np.max(np.sum(np.abs(dm), axis=1))
    s = max(riccati.root_scale(q), 1e-300)
    noise = np.finfo(float).eps * (dnorm / s) ** (n - 1)
    return 10 * max(eps, 1e-13, noise)


def levin_newton(guess: riccati.RJet, q, eps=1e-12, max_newton=MAX_NEWTON):
    """Newton iteration for the Riccati equation on the guess's grid.

    Each step solves ``L[h] = -residual`` with ``L`` discretized by spectral
    differentiation (square, SVD-solved).  Steps are halved while the
    normalized residual does not decrease.  Stops when the update is below
    ``eps`` relative to ``max|r|``.
    """
    grid = guess.grid
    n = guess.order
    q = np.asarray(q, dtype=np.complex128)
    dm = chebkit.diff_matrix(grid.k, grid.interval)
    dpow = [np.eye(grid.k)]
    for _ in range(n - 1):
        dpow.append(dm @ dpow[-1])
    r = guess.levels[0].astype(np.complex128)
    lv = _levels_from_r(r, dm, n)
    res, norm = normalized_residual(lv, q)
    converged = False
    it = 0
    for it in range(1, max_newton + 1):
        c = riccati.linearization_levels(lv, q)
        mat = sum(c[m][:, None] * dpow[m] for m in range(n))
        h = svd_solve(mat, -res)
        rmax = max(np.max(np.abs(r)), 1e-300)
        if np.max(np.abs(h)) <= eps * rmax:
            # last correction only polishes; keep it unless it adds noise
            lv_new = _levels_from_r(r + h, dm, n)
            res_new, norm_new = normalized_residual(lv_new, q)
            if norm_new <= norm:
                r, lv, res, norm = r + h, lv_new, res_new, norm_new
            converged = True
            break
        lam = 1.0
        for _ in range(MAX_HALVINGS):
            r_try = r + lam * h
            lv_try = _levels_from_r(r_try, dm, n)
            res_try, norm_try = normalized_residual(lv_try, q)
            if norm_try < norm:
                break
            lam *= 0.5
        r, lv, res, norm = r_try, lv_try, res_try, norm_try
        if lam * np.max(np.abs(h)) <= eps * max(np.max(np.abs(r)), 1e-300):
            converged = True
            break
    if not converged or not norm <= residual_tolerance(dm, q, eps):
        raise LevinError(
            f"Newton did not converge on {grid.interval} after {it} iterations "
            f"(normalized residual {norm:.3e})")
    return NewtonResult(riccati.RJet(grid, lv[: n - 1]), it, norm)


def _solve_branches(interval, k, reduced, eps_phase, max_newton):
    grid = chebkit.cheb_nodes(k, interval)
    q = reduced.q_at(grid.nodes)
    results = [levin_newton(g, q, eps_phase, max_newton) for g in initial_guesses(q, grid)]
    width = interval[1] - interval[0]
    resolved = all(riccati.fit_ok(res.rjet.levels, width, q, eps_phase) for res in results)
    return results, resolved


def phase_seeds(window: LevinWindow, reduced, eps_phase=1e-12, max_newton=MAX_NEWTON,
                max_shrink=MAX_SHRINK):
    """Seeds for all ``n`` branches at ``window.sigma``.

    If a converged branch fails the fit test on the window, the window is
    halved about ``sigma`` and the solve repeated (at most ``max_shrink``
    times), so seeds are accurate to the requested precision.
    """
    a, b = reduced.interval
    a0, b0 = window.interval
    if a0 < a or b0 > b:
        raise ArgumentError(f"window {window.interval} not inside [{a}, {b}]")
    sigma = window.sigma
    interval = window.interval
    for _ in range(max_shrink + 1):
        results, resolved = _solve_branches(interval, window.k, reduced, eps_phase,
                                             max_newton)
        if resolved:
            break
        half = 0.25 * (interval[1] - interval[0])
        interval = (max(a0, sigma - half), min(b0, sigma + half))
    else:
        raise LevinError(f"Levin solution not resolved on any window around sigma={sigma}")
    seeds = []
    for m, result in enumerate(results):
        alpha = chebkit.vals_to_coeffs_array(result.rjet.levels)
        vals = np.array([chebkit.evaluate(chebkit.ChebCoeffs(interval, row), sigma)
                         for row in alpha])
        seeds.append(PhaseSeed(m, sigma, vals, result.residual, result.iterations, interval))
    r0 = np.array([s.values[0] for s in seeds])
    scale = max(np.max(np.abs(r0)), 1e-300)
    for i in range(len(seeds)):
        for j in range(i):
            if abs(r0[i] - r0[j]) <= 1e-6 * scale:
                raise DuplicateBranchError(
                    f"branches {j} and {i} converged to the same solution "
                    f"(r = {r0[i]:.6g}); move or shrink the window")
    return seeds
