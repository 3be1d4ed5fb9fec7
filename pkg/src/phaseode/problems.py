"""Registry of the benchmark systems exp1..exp5 on [-1, 1].

Each coefficient matrix is written once with :mod:`phaseode.taylor`
operations, so the same expression yields ``A(t)`` and its exact derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import partial
from typing import Callable

import numpy as np

from . import oracle, solver
from . import taylor as tj
from .errors import ArgumentError
from .reduction import SystemSpec

INTERVAL = (-1.0, 1.0)
I = 1j


def _exp1(t, w):
    return [[1 + t * t, 1 / (1 + t ** 4)],
            [-w / (1 + t * t), -I * w * (2 + t) / (5 + t)]]


def _exp2(t, w):
    s6 = tj.sin(6 * t)
    et = tj.exp(t)
    return [[I * w * (2 + s6 * s6) / (1 + t * t), -w / (1 + t * t)],
            [I + w * et, I * w * et]]


def _exp3(t, w):
    et = tj.exp(t)
    e12 = tj.exp(-12 * t * t)
    ete = tj.exp(t - 12 * t * t)
    c = tj.cos(17 * t)
    t2 = t * t
    return [
        [-I * w * (3 * t2 + ete + 3 * et + et * c + 3), -I * w * (e12 + c + 3),
         I * w * (3 * t2 + ete + 3 * et + (et + 1) * c + 5)],
        [-I * w * et * (-3 * t2 + e12 - 2), -I * w * (e12 + 1),
         I * w * et * (-3 * t2 + e12 - 2)],
        [-I * w * et * (e12 + c + 3), -I * w * (e12 + c + 3),
         I * w * (ete + 3 * et + (et + 1) * c + 2)],
    ]


def _exp4(t, w):
    lg = tj.log(t + 1.001)
    s3 = tj.sin(3 * t)
    st = tj.sin(t)
    e1 = tj.exp(t * t)
    e2 = tj.exp(2 * t * t)
    e3 = tj.exp(3 * t * t)
    den = 4 * e3 - t
    lw = np.log(w)
    return [
        [(4 * (1 + 4 * I * w) * e3 + 8 * I * w * e3 * s3 - I * w * t * lg) / den, 0.0,
         2 * I * e1 * t * (w * lg - 2 * w * s3 - 4 * w + I) / den],
        [2 * e2 * t * (-8 * I * w * e1 + 2 * I * w * s3 + lw * st + 4 * I * w + 1) / den,
         -lw * st + 8 * I * w * e1,
         I * t * t * (8 * w * e1 - 2 * w * s3 + I * lw * st - 4 * w + I) / den],
        [2 * e2 * (-I * w * lg + 2 * I * w * s3 + 4 * I * w + 1) / den, 0.0,
         I * (4 * w * e3 * lg + (-4 * w + I) * t - 2 * w * t * s3) / den],
    ]


def _exp5(t, w):
    ct = tj.cos(t)
    st = tj.sin(t)
    et = tj.exp(t)
    e1 = tj.exp(t * t)
    t2 = t * t
    d1 = 4 * e1 + ct
    d2 = 2 * t2 - t - t * st + 2
    sw = np.sqrt(w)
    lg = tj.log(t + 2)
    return [
        [(ct * (lg - I * sw) - 8 * I * w * tj.exp(2 * t2)) / d1, 0.0,
         -I * e1 * ct * (2 * w * e1 - sw - I * lg) / ((t2 + 1) * d1), 0.0],
        [0.0, (-I * w * (t - 8) + t * (2 * et - I * w) * st + 2 * et * t) / (2 * d2), 0.0,
         -(2 * et * (t2 + 1) - I * w * (t2 - 3)) * (st + 1) / d2],
        [-4 * I * (t2 + 1) * (2 * w * e1 - sw - I * lg) / d1, 0.0,
         2 * e1 * (-I * w * ct - 2 * I * sw + 2 * lg) / d1, 0.0],
        [0.0, t * (2 * et * (t2 + 1) - I * w * (t2 - 3)) / (2 * (t2 + 1) * d2), 0.0,
         (I * w * (t2 * t2 + 2 * t2 - 2 * t + 1) - 2 * I * w * t * st
          - 2 * et * (t2 + 1) ** 2) / ((t2 + 1) * d2)],
    ]


def _eig3(t, w):
    t = np.asarray(t, dtype=float)
    return np.stack([I * w * (2 + np.cos(17 * t)), -3 * I * w * (1 + t * t),
                     -I * w * (1 + np.exp(-12 * t * t))], axis=-1)


def _eig4(t, w):
    t = np.asarray(t, dtype=float)
    return np.stack([1 + 2 * I * w * (2 + np.sin(3 * t)),
                     -np.log(w) * np.sin(t) + 8 * I * w * np.exp(t * t),
                     I * w * np.log(1.001 + t)], axis=-1)


def _eig5(t, w):
    t = np.asarray(t, dtype=float)
    one = np.ones_like(t)
    return np.stack([-2 * I * w * np.exp(t * t), 2 * I * w / (1 + t * t),
                     np.log(2 + t) - I * np.sqrt(w) * one, -np.exp(t) + I * w / 2], axis=-1)


def _eig1_at0(w):
    return np.array([-2j * w / 5 - 2.5j, 1 + 2.5j])


def _eig2_at0(w):
    root = np.sqrt(w * (4j + 5 * w))
    return np.array([1.5j * w - 0.5j * root, 1.5j * w + 0.5j * root])


@dataclass(frozen=True)
class ProblemDef:
    """A registered benchmark problem.

    ``kind`` is ``"ivp"`` (uses ``t0``, ``y0``) or ``"bvp"`` (uses ``ba``,
    ``bb``, ``g``).  ``eigenvalues(t, omega)`` is the closed form, when known,
    returning shape ``t.shape + (n,)``; ``eigenvalues_at0(omega)`` gives the
    values at ``t = 0``.
    """

    id: str
    n: int
    entries: Callable
    kind: str
    window: tuple
    v: tuple
    eps_disc: float
    eps_phase: float
    t0: float = 0.0
    y0: tuple = ()
    ba: tuple = ()
    bb: tuple = ()
    g: tuple = ()
    eigenvalues: Callable | None = None
    eigenvalues_at0: Callable | None = None

    def spec(self, omega) -> SystemSpec:
        omega = float(omega)
        if not omega > 0:
            raise ArgumentError("omega must be positive")
        fn = partial(self.entries, w=omega)
        return SystemSpec(self.n, INTERVAL,
                          lambda t, order: tj.matrix_jet(fn, t, order))

    def exact_eigenvalues(self, t, omega):
        if self.eigenvalues is not None:
            return self.eigenvalues(t, float(omega))
        if np.all(np.asarray(t) == 0) and self.eigenvalues_at0 is not None:
            return np.broadcast_to(self.eigenvalues_at0(float(omega)),
                                   np.shape(t) + (self.n,))
        raise ArgumentError(f"{self.id}: closed-form eigenvalues only known at t=0")

    def solver_input(self, omega, k=30, eps_disc=None, eps_phase=None, window=None, v=None):
        """Registered defaults for :func:`solver.build`, with optional overrides."""
        return solver.SolverInput(
            self.spec(omega), window if window is not None else self.window,
            v if v is not None else self.v, k,
            eps_disc if eps_disc is not None else self.eps_disc,
            eps_phase if eps_phase is not None else self.eps_phase)

    def solve(self, fm):
        """Apply the registered initial or boundary conditions to ``fm``."""
        if self.kind == "ivp":
            return solver.solve_ivp(fm, self.t0, self.y0)
        return solver.solve_bvp(fm, self.ba, self.bb, self.g)

    def reference(self, omega, tol=1e-13):
        """Oracle solution of the registered problem."""
        spec = self.spec(omega)
        if self.kind == "ivp":
            return oracle.reference_ivp(spec, self.t0, self.y0, tol)
        return oracle.reference_bvp(spec, self.ba, self.bb, self.g, tol)


PROBLEMS = {
    "exp1": ProblemDef("exp1", 2, _exp1, "ivp", (-0.5, 0.0), (1, 0), 1e-12, 1e-12,
                       t0=0.0, y0=(1, 1), eigenvalues_at0=_eig1_at0),
    "exp2": ProblemDef("exp2", 2, _exp2, "bvp", (-0.5, 0.0), (0, 1), 1e-12, 1e-12,
                       ba=((1, 0), (0, 0)), bb=((0, 0), (1, 0)), g=(1, 1),
                       eigenvalues_at0=_eig2_at0),
    "exp3": ProblemDef("exp3", 3, _exp3, "ivp", (-0.25, 0.0), (1, 0, 0), 1e-12, 1e-12,
                       t0=-1.0, y0=(1, 0, -1), eigenvalues=_eig3),
    "exp4": ProblemDef("exp4", 3, _exp4, "bvp", (-0.1, 0.0), (1, 1, 1), 1e-12, 1e-12,
                       ba=((1, 1, 0), (1, 0, 1), (0, 1, 0)),
                       bb=((0, 0, 1), (0, 1, 0), (0, -1, 0)), g=(1, 0, 1),
                       eigenvalues=_eig4),
    "exp5": ProblemDef("exp5", 4, _exp5, "ivp", (-0.25, 0.0), (0, 1, 1, 0), 1e-10, 1e-10,
                       t0=0.0, y0=(1, -1, 1, -1), eigenvalues=_eig5),
}


def get(problem_id) -> ProblemDef:
    try:
        return PROBLEMS[problem_id]
    except KeyError:
        raise ArgumentError(
            f"unknown problem {problem_id!r}; choose from {sorted(PROBLEMS)}") from None
