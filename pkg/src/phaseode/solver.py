"""Fundamental matrices of ``y' = A(t) y`` from phase functions.

``build`` discretizes the cyclic-vector transform, computes Levin seeds on
the window and propagates them, yielding ``M(t) = Phi(t)^{-1} Theta(t)``
where row ``m`` of ``Theta`` holds the m-th derivatives ``d_m exp(psi_j)`` of
the scalar solutions.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import chebkit, levin, polyroots, propagate, reduction, riccati
from .errors import ArgumentError, PhaseOverflowError, SingularSystemError

SOLVE_RTOL = 1e-14
EXP_LIMIT = 709.0


@dataclass(frozen=True)
class SolverInput:
    spec: reduction.SystemSpec
    window: levin.LevinWindow
    v: reduction.CyclicVector | tuple
    k: int = 30
    eps_disc: float = 1e-12
    eps_phase: float = 1e-12
    cond_limit: float = reduction.COND_LIMIT

    def __post_init__(self):
        if not 8 <= self.k <= 60:
            raise ArgumentError(f"k must lie in [8, 60], got {self.k}")
        for name in ("eps_disc", "eps_phase"):
            val = getattr(self, name)
            if not 0 < val <= 1e-2:
                raise ArgumentError(f"{name} must lie in (0, 1e-2], got {val}")
        if not isinstance(self.window, levin.LevinWindow):
            object.__setattr__(self, "window", levin.LevinWindow(tuple(self.window), k=self.k))
        if not isinstance(self.v, reduction.CyclicVector):
            object.__setattr__(self, "v", reduction.CyclicVector(self.v))


@dataclass(frozen=True)
class FundamentalMatrix:
    reduced: reduction.ReducedSystem
    phases: propagate.PhaseSet
    interval: tuple
    stats: dict = field(default_factory=dict, compare=False)

    @property
    def n(self):
        return self.reduced.n

    def coeff_count(self):
        """Chebyshev coefficients over all ``Phi^{-1}`` entries and phase expansions."""
        return self.reduced.coeff_count() + self.phases.coeff_count()

    def __call__(self, t):
        return eval_M(self, t)

    def to_json(self):
        n = self.n
        return {
            "interval": list(self.interval),
            "v": [[z.real, z.imag] for z in self.reduced.v],
            "phi_inv": [[self.reduced.phi_inv[i * n + j].to_json() for j in range(n)]
                        for i in range(n)],
            "phases": self.phases.to_json(),
        }


@dataclass(frozen=True)
class Solution:
    fm: FundamentalMatrix
    c: np.ndarray
    residual: float

    def __call__(self, t):
        """``y(t)``: shape ``(n,)`` for scalar ``t`` or ``(len(t), n)``."""
        tt = np.asarray(t, dtype=float)
        m = eval_M(self.fm, np.atleast_1d(tt))
        y = m @ self.c
        return y[0] if tt.ndim == 0 else y


@dataclass(frozen=True)
class FrequencyReport:
    omega_param: float | None
    Omega: float
    branch_integrals: np.ndarray


def build(inp: SolverInput) -> FundamentalMatrix:
    """Run the whole pipeline: transform, Levin seeds, propagation, phases."""
    spec = inp.spec
    a, b = spec.interval
    a0, b0 = inp.window.interval
    if a0 < a or b0 > b:
        raise ArgumentError(f"window {inp.window.interval} not inside [{a}, {b}]")
    t0 = time.perf_counter()
    reduced = reduction.discretize(spec, inp.v, inp.k, inp.eps_disc, inp.cond_limit)
    t1 = time.perf_counter()
    seeds = levin.phase_seeds(inp.window, reduced, inp.eps_phase)
    t2 = time.perf_counter()
    sols = [propagate.propagate_branch(s, reduced, inp.k, inp.eps_phase) for s in seeds]
    phases = propagate.assemble_phases(sols, spec.interval)
    t3 = time.perf_counter()
    stats = {
        "newton_iterations": [s.iterations for s in seeds],
        "seed_residuals": [s.residual for s in seeds],
        "reduction_pieces": int(reduced.breakpoints.shape[0] - 1),
        "phase_pieces": [int(s.breakpoints.shape[0] - 1) for s in sols],
        "cond_max": reduced.cond_max,
        "time_reduction": t1 - t0,
        "time_levin": t2 - t1,
        "time_propagate": t3 - t2,
    }
    return FundamentalMatrix(reduced, phases, (float(a), float(b)), stats)


def _phase_values(phases, t, with_top):
    """``psi_j(t)`` (shape (n, m)) and the r-jets (list of (levels, m))."""
    psi = np.stack([chebkit.evaluate(br.psi, t) for br in phases.branches])
    jets = []
    tops = phases.top_derivatives() if with_top else [None] * phases.n
    for br, top in zip(phases.branches, tops):
        lv = [chebkit.evaluate(e, t) for e in br.derivs]
        if with_top:
            lv.append(chebkit.evaluate(top, t))
        jets.append(np.stack(lv))
    return psi, jets


def _exp_psi(psi):
    if np.any(psi.real > EXP_LIMIT):
        raise PhaseOverflowError(
            f"exp(psi) overflows: Re psi reaches {np.max(psi.real):.1f}")
    return np.exp(psi)


def _theta_rows(jets, n, upto):
    """Rows ``d_0..d_upto`` per branch: shape (upto+1, n_branches, m)."""
    m = jets[0].shape[1]
    out = np.ones((upto + 1, n, m), dtype=np.complex128)
    for j, r in enumerate(jets):
        d = riccati.d_jets(r)
        for row in range(1, upto + 1):
            out[row, j] = d[row - 1][0]
    return out


def eval_theta(phases: propagate.PhaseSet, t):
    """``Theta(t)``: entry (m, j) is ``d_m exp(psi_j)``; shape (n, n) or (len(t), n, n)."""
    tt = np.asarray(t, dtype=float)
    t1 = np.atleast_1d(tt)
    n = phases.n
    psi, jets = _phase_values(phases, t1, with_top=False)
    rows = _theta_rows(jets, n, n - 1) if n > 1 else np.ones((1, 1, t1.shape[0]))
    theta = np.transpose(rows * _exp_psi(psi)[None], (2, 0, 1))
    return theta[0] if tt.ndim == 0 else theta


def eval_M(fm: FundamentalMatrix, t):
    """``M(t) = Phi(t)^{-1} Theta(t)``."""
    tt = np.asarray(t, dtype=float)
    t1 = np.atleast_1d(tt)
    m = fm.reduced.phi_inv_at(t1) @ eval_theta(fm.phases, t1)
    return m[0] if tt.ndim == 0 else m


def eval_M_and_derivative(fm: FundamentalMatrix, t):
    """``M`` and ``M'`` from the product rule on the expansions (1-d ``t``)."""
    t1 = np.atleast_1d(np.asarray(t, dtype=float))
    n = fm.n
    psi, jets = _phase_values(fm.phases, t1, with_top=True)
    rows = _theta_rows(jets, n, n)
    e = _exp_psi(psi)[None]
    theta = np.transpose(rows[:n] * e, (2, 0, 1))
    dtheta = np.transpose(rows[1:] * e, (2, 0, 1))
    pinv = fm.reduced.phi_inv_at(t1)
    dpinv = fm.reduced.dphi_inv_at(t1)
    return pinv @ theta, dpinv @ theta + pinv @ dtheta


def _solve_combination(mat, rhs, what):
    u, s, vh = np.linalg.svd(mat)
    if s[0] == 0 or s[-1] <= SOLVE_RTOL * s[0]:
        raise SingularSystemError(
            f"{what} matrix is numerically singular (cond {s[0] / max(s[-1], 1e-300):.3e})")
    c = vh.conj().T @ ((u.conj().T @ rhs) / s)
    res = float(np.linalg.norm(mat @ c - rhs) / max(np.linalg.norm(rhs), 1e-300))
    return c, res


def solve_ivp(fm: FundamentalMatrix, t0, y0) -> Solution:
    """Solution with ``y(t0) = y0``."""
    a, b = fm.interval
    if not a <= t0 <= b:
        raise ArgumentError(f"t0={t0} outside [{a}, {b}]")
    y0 = np.asarray(y0, dtype=np.complex128)
    c, res = _solve_combination(eval_M(fm, float(t0)), y0, "initial-value")
    return Solution(fm, c, res)


def solve_bvp(fm: FundamentalMatrix, ba, bb, g) -> Solution:
    """Solution with ``Ba y(a) + Bb y(b) = g``."""
    a, b = fm.interval
    ba = np.asarray(ba, dtype=np.complex128)
    bb = np.asarray(bb, dtype=np.complex128)
    g = np.asarray(g, dtype=np.complex128)
    mat = ba @ eval_M(fm, a) + bb @ eval_M(fm, b)
    c, res = _solve_combination(mat, g, "boundary-value")
    return Solution(fm, c, res)


def _branch_abs(spec, t):
    a = spec.matrix(t)
    rows = [polyroots.roots(cp) for cp in polyroots.charpoly(a)]
    return np.abs(polyroots.match_roots(rows))


def frequency(spec: reduction.SystemSpec, omega=None, rtol=1e-10, panels=32, max_panels=2 ** 14):
    """``Omega = max_i integral of |lambda_i|`` over matched eigenvalue branches.

    Composite 16-point Gauss-Legendre quadrature, doubling the panel count
    until the largest branch integral changes by less than ``rtol``.
    """
    a, b = spec.interval
    x, w = np.polynomial.legendre.leggauss(16)
    prev = None
    while True:
        edges = np.linspace(a, b, panels + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[:-1] + edges[1:])
        t = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        weights = (half[:, None] * w[None, :]).ravel()
        ints = weights @ _branch_abs(spec, t)
        val = float(np.max(ints))
        if prev is not None and abs(val - prev) <= rtol * abs(val):
            return FrequencyReport(omega, val, ints)
        if panels >= max_panels:
            return FrequencyReport(omega, val, ints)
        prev = val
        panels *= 2
