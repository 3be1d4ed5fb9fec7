import warnings

import numpy as np
import pytest

from phaseode import chebkit, levin, problems, propagate, reduction
from phaseode.checks import const_spec
from phaseode.errors import ArgumentError, StiffError


def constant_branch(value, interval=(0.0, 1.0), k=16):
    bp = np.array(interval)
    return propagate.BranchSolution(0, bp, np.full((1, 2, k), 0j) + np.array([[value], [0]]), 0)


@pytest.fixture(scope="module")
def exp1_parts():
    prob = problems.get("exp1")
    red = reduction.discretize(prob.spec(256.0), prob.v)
    seeds = levin.phase_seeds(levin.LevinWindow(prob.window), red)
    return red, seeds


class TestRiccatiIVP:
    def test_constant_one_piece_per_side(self):
        red = reduction.discretize(const_spec(np.diag([1j, -1j])), (1, 1))
        seeds = levin.phase_seeds(levin.LevinWindow((-0.25, 0.25)), red)
        for seed in seeds:
            for direction in ("left", "right"):
                pieces = propagate.riccati_ivp(seed, red, direction)
                assert len(pieces) == 1
                assert np.allclose(pieces[0][2][0], seed.values[0], atol=1e-13)

    def test_exp1_piece_count_independent_of_omega(self):
        prob = problems.get("exp1")
        counts = []
        for omega in (2.0 ** 8, 2.0 ** 12, 2.0 ** 16):
            red = reduction.discretize(prob.spec(omega), prob.v)
            seeds = levin.phase_seeds(levin.LevinWindow(prob.window), red)
            counts.append([propagate.propagate_branch(s, red).breakpoints.shape[0] - 1
                           for s in seeds])
        assert all(abs(a - b) <= 1 for c in counts[1:] for a, b in zip(c, counts[0]))

    def test_perturbed_seed(self, exp1_parts):
        red, seeds = exp1_parts
        slow, fast = seeds[0].values[0], seeds[1].values[0]
        bad = levin.PhaseSeed(0, seeds[0].sigma, np.array([slow + 0.1 * (fast - slow)]),
                              0.0, 0)
        try:
            sol = propagate.propagate_branch(bad, red)
        except StiffError as exc:
            assert exc.location is not None
            return
        phases = propagate.assemble_phases([sol], red.interval)
        assert propagate.branch_residuals(phases, red)[0] <= 1e-10

    def test_bad_direction(self, exp1_parts):
        red, seeds = exp1_parts
        with pytest.raises(ArgumentError):
            propagate.riccati_ivp(seeds[0], red, "up")

    def test_pieces_cover_interval(self, exp1_parts):
        red, seeds = exp1_parts
        sol = propagate.propagate_branch(seeds[1], red)
        assert sol.breakpoints[0] == -1.0 and sol.breakpoints[-1] == 1.0
        assert seeds[1].sigma in sol.breakpoints


class TestAssemble:
    def test_constant_phase(self):
        omega = 50.0
        phases = propagate.assemble_phases([constant_branch(1j * omega)], (0.0, 1.0))
        t = np.linspace(0, 1, 11)
        assert np.allclose(phases.branches[0].psi(t), 1j * omega * t)

    @pytest.mark.parametrize("pid", sorted(problems.PROBLEMS))
    def test_phase_vanishes_at_left_end(self, pid, build_problem):
        fm = build_problem(pid, 8)
        for br in fm.phases.branches:
            scale = np.max(np.abs(br.psi(np.linspace(-1, 1, 101))))
            assert abs(br.psi(-1.0)) <= 1e-15 * scale

    def test_exp1_phase_size(self, build_problem):
        fm = build_problem("exp1", 8)
        im_end = max(abs(br.psi(1.0).imag) for br in fm.phases.branches)
        assert 150 < im_end < 250
        assert fm.phases.coeff_count() < 500

    def test_overflow_warning(self):
        with pytest.warns(RuntimeWarning, match="Re psi"):
            phases = propagate.assemble_phases([constant_branch(700.0)], (0.0, 1.0))
        assert phases.warnings

    def test_no_warning_for_oscillatory(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            propagate.assemble_phases([constant_branch(700j)], (0.0, 1.0))

    def test_gap_rejected(self):
        sol = constant_branch(1.0, (0.0, 0.5))
        with pytest.raises(Exception):
            propagate.assemble_phases([sol], (0.0, 1.0))


def test_branch_residuals_small(build_problem):
    fm = build_problem("exp3", 8)
    res = propagate.branch_residuals(fm.phases, fm.reduced)
    assert max(res) < 1e-11
