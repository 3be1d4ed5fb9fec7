"""Propagation of Levin seeds across the interval and assembly of phases.

Each branch's Riccati initial value problem is marched outward from the seed
point.  On a trial interval the unknown is the top derivative
``w = r^(n-1)`` at the Chebyshev nodes; lower derivatives are the Taylor
polynomial of the initial data plus repeated spectral integrals of ``w``.
This integral form is well conditioned for stiff problems and imposes the
initial conditions exactly.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from math import factorial

import numpy as np

from . import chebkit, polyroots, riccati
from .errors import ArgumentError, PhaseODEError, StiffError
from .levin import MAX_HALVINGS, MAX_NEWTON, PhaseSeed, normalized_residual, svd_solve

GROWTH = 2.0
OVERFLOW_WARN = 600.0


@dataclass(frozen=True)
class BranchSolution:
    """Accepted pieces of one branch: sorted breakpoints and level samples.

    ``levels`` has shape ``(npieces, n, k)`` with ``r, ..., r^(n-1)``.
    """

    branch: int
    breakpoints: np.ndarray
    levels: np.ndarray
    newton_iterations: int


@dataclass(frozen=True)
class PhaseBranch:
    psi: chebkit.PiecewiseCheb
    derivs: tuple  # r, r', ..., r^(n-2)

    def expansions(self):
        return [self.psi, *self.derivs]


@dataclass(frozen=True)
class PhaseSet:
    """``psi_m`` and ``psi_m', ..., psi_m^(n-1)`` for every branch (n^2 expansions)."""

    n: int
    interval: tuple
    branches: tuple
    warnings: tuple = ()
    _top: list = field(default_factory=list, repr=False, compare=False)

    def expansions(self):
        return [e for br in self.branches for e in br.expansions()]

    def coeff_count(self):
        return chebkit.total_coefficients(self.expansions())

    def top_derivatives(self):
        """``r^(n-1)`` per branch, by differentiating the stored ``r^(n-2)``."""
        if not self._top:
            self._top.extend(chebkit.differentiate(br.derivs[-1]) for br in self.branches)
        return self._top

    def to_json(self):
        return {"n": self.n, "interval": list(self.interval),
                "branches": [[e.to_json() for e in br.expansions()] for br in self.branches]}


def _taylor_part(ic, t, t_ic):
    """Samples of the initial-data Taylor polynomials for levels ``0..n-2``."""
    n1 = ic.shape[0]
    dt = t - t_ic
    out = np.zeros((n1, t.shape[0]), dtype=np.complex128)
    for m in range(n1):
        for l in range(m, n1):
            out[m] += ic[l] * dt ** (l - m) / factorial(l - m)
    return out


def _branch_guess(q, nodes, i0, r_ic, n):
    """Eigenvalue branch through the node ``i0`` nearest ``r_ic``, shifted to match it."""
    k = nodes.shape[0]
    rows = [polyroots.roots(q[:, i]) for i in range(k)]
    start = rows[i0]
    m = int(np.argmin(np.abs(start - r_ic)))
    order = range(k) if i0 == 0 else range(k - 1, -1, -1)
    matched = polyroots.match_roots([rows[i] for i in order])
    col = matched[:, int(np.argmin(np.abs(matched[0] - start[m])))]
    lam = col if i0 == 0 else col[::-1]
    return lam + (r_ic - lam[i0])


def solve_piece(ic, interval, base, reduced, k, eps, max_newton=MAX_NEWTON):
    """Riccati IVP on one interval.

    Returns ``(levels, q)`` with level samples of shape ``(n, k)`` and the
    coefficients at the nodes, or ``None`` if Newton fails.

    ``ic`` holds ``r, ..., r^(n-2)`` at the left (``base="left"``) or right end.
    """
    n = ic.shape[0] + 1
    c, d = interval
    grid = chebkit.cheb_nodes(k, interval)
    t = grid.nodes
    i0 = 0 if base == "left" else k - 1
    try:
        q = reduced.q_at(t)
        guess = _branch_guess(q, t, i0, ic[0], n)
    except PhaseODEError:
        return None
    kmat = chebkit.int_matrix(k, interval, base)
    kpow = [np.eye(k)]
    for _ in range(n - 1):
        kpow.append(kmat @ kpow[-1])
    taylor = _taylor_part(ic, t, t[i0])
    dm = chebkit.diff_matrix(k, interval)
    w = guess
    for _ in range(n - 1):
        w = dm @ w

    def levels(wv):
        lv = np.empty((n, k), dtype=np.complex128)
        for m in range(n - 1):
            lv[m] = taylor[m] + kpow[n - 1 - m] @ wv
        lv[n - 1] = wv
        return lv

    lv = levels(w)
    res, norm = normalized_residual(lv, q)
    for _ in range(max_newton):
        cf = riccati.linearization_levels(lv, q)
        jac = sum(cf[m][:, None] * kpow[n - 1 - m] for m in range(n))
        dw = svd_solve(jac, -res)
        dr = kpow[n - 1] @ dw
        rmax = max(np.max(np.abs(lv[0])), 1e-300)
        if np.max(np.abs(dr)) <= eps * rmax:
            lv = levels(w + dw)
            res, norm = normalized_residual(lv, q)
            if np.all(np.isfinite(lv)) and norm <= 10 * max(eps, 1e-13):
                return lv, q
            return None
        lam = 1.0
        for _ in range(MAX_HALVINGS):
            lv_try = levels(w + lam * dw)
            res_try, norm_try = normalized_residual(lv_try, q)
            if norm_try < norm:
                break
            lam *= 0.5
        w = w + lam * dw
        lv, res, norm = lv_try, res_try, norm_try
        if not np.isfinite(norm):
            return None
    return None


def riccati_ivp(seed: PhaseSeed, reduced, direction, k=30, eps_phase=1e-12, width_min=None):
    """March one seed from ``sigma`` to the right or left end of the interval.

    Returns a list of ``(c, d, levels)`` tuples ordered by ``c``.
    """
    if direction not in ("left", "right"):
        raise ArgumentError(f"direction must be 'left' or 'right', got {direction!r}")
    a, b = reduced.interval
    length = b - a
    if width_min is None:
        width_min = length * 2.0 ** -30
    hmax = length
    state = np.asarray(seed.values, dtype=np.complex128)
    pos = seed.sigma
    end = b if direction == "right" else a
    sign = 1.0 if direction == "right" else -1.0
    # first trial covers everything left to march; bisection takes over from there
    h = abs(end - pos)
    pieces = []
    while sign * (end - pos) > 0:
        if sign * (end - pos) <= 1.25 * h:
            other = end
        else:
            other = pos + sign * h
        interval = (pos, other) if sign > 0 else (other, pos)
        base = "left" if sign > 0 else "right"
        out = solve_piece(state, interval, base, reduced, k, eps_phase)
        width = abs(other - pos)
        if out is not None and riccati.fit_ok(out[0][:-1], width, out[1], eps_phase):
            lv = out[0]
            pieces.append((interval[0], interval[1], lv))
            state = lv[:-1, -1] if sign > 0 else lv[:-1, 0]
            pos = other
            h = min(GROWTH * width, hmax)
            continue
        h = 0.5 * width
        if h < width_min:
            raise StiffError(
                f"step size underflow near t={pos!r} (branch {seed.branch}); "
                "possible turning point or bad seed", location=float(pos))
    pieces.sort(key=lambda p: p[0])
    return pieces


def propagate_branch(seed: PhaseSeed, reduced, k=30, eps_phase=1e-12):
    left = riccati_ivp(seed, reduced, "left", k, eps_phase)
    right = riccati_ivp(seed, reduced, "right", k, eps_phase)
    pieces = left + right
    bp = np.array([p[0] for p in pieces] + [pieces[-1][1]])
    return BranchSolution(seed.branch, bp, np.stack([p[2] for p in pieces]),
                          seed.iterations)


def assemble_phases(solutions, interval):
    """Build the :class:`PhaseSet` with ``psi_m(a) = 0`` from branch solutions."""
    a, b = interval
    branches = []
    notes = []
    for sol in solutions:
        bp = sol.breakpoints
        if bp[0] != a or bp[-1] != b or np.any(np.diff(bp) <= 0):
            raise PhaseODEError(f"branch {sol.branch} does not cover [{a}, {b}]")
        n = sol.levels.shape[1]
        derivs = tuple(chebkit.from_samples(bp, sol.levels[:, m, :]) for m in range(n - 1))
        psi = chebkit.integrate(derivs[0], base_point=a)
        re_max = float(np.max(np.abs(chebkit.coeffs_to_vals_array(np.array(psi.coeffs)).real)))
        if re_max > OVERFLOW_WARN:
            msg = (f"branch {sol.branch}: |Re psi| reaches {re_max:.1f}; "
                   "solution magnitudes approach floating-point limits")
            warnings.warn(msg, RuntimeWarning, stacklevel=2)
            notes.append(msg)
        branches.append(PhaseBranch(psi, derivs))
    return PhaseSet(len(branches), (float(a), float(b)), tuple(branches), tuple(notes))


def branch_residuals(phases: PhaseSet, reduced, per_piece=None):
    """Max normalized Riccati residual per branch at ``3k`` points per piece.

    The top derivative is obtained by differentiating ``r^(n-2)``.
    """
    out = []
    tops = phases.top_derivatives()
    for br, top in zip(phases.branches, tops):
        bp = br.psi.breakpoints
        m = per_piece or 3 * br.psi.k
        worst = 0.0
        for i in range(bp.shape[0] - 1):
            t = np.linspace(bp[i], bp[i + 1], m + 2)[1:-1]
            lv = np.stack([chebkit.evaluate(e, t) for e in br.derivs]
                          + [chebkit.evaluate(top, t)])
            q = reduced.q_at(t)
            worst = max(worst, normalized_residual(lv, q)[1])
        out.append(worst)
    return out
