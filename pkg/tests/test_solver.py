import json

import numpy as np
import pytest

from phaseode import problems, propagate, reduction, solver
from phaseode.checks import const_spec, expm_solution, ode_residual
from phaseode.errors import ArgumentError, PhaseOverflowError, SingularSystemError


@pytest.fixture(scope="module")
def rotation_fm():
    return solver.build(solver.SolverInput(const_spec(np.diag([1j, -1j])), (-0.25, 0.25), (1, 1)))


class TestBuild:
    def test_constant_rotation(self, rotation_fm):
        t = np.linspace(-1, 1, 7)
        psis = sorted((br.psi(t) for br in rotation_fm.phases.branches), key=lambda p: p[-1].imag)
        assert np.allclose(psis[0], -1j * (t + 1), atol=1e-13)
        assert np.allclose(psis[1], 1j * (t + 1), atol=1e-13)
        inv = rotation_fm.reduced.phi_inv_at(t)
        assert np.allclose(inv, inv[0][None], atol=1e-14)

    def test_exp1_coefficient_count(self, build_problem):
        fm = build_problem("exp1", 8)
        assert 360 <= fm.coeff_count() <= 720
        assert fm.stats["reduction_pieces"] >= 1
        assert len(fm.stats["newton_iterations"]) == 2

    @pytest.mark.parametrize("pid", ["exp3", "exp4"])
    def test_cost_does_not_grow_with_frequency(self, pid, build_problem):
        counts = [build_problem(pid, e).coeff_count() for e in (8, 14, 20)]
        assert counts == sorted(counts, reverse=True)

    def test_exp4_builds(self, build_problem):
        fm = build_problem("exp4", 8)
        assert fm.n == 3

    def test_deterministic(self):
        inp = problems.get("exp2").solver_input(2.0 ** 9)
        a, b = solver.build(inp), solver.build(inp)
        assert a.coeff_count() == b.coeff_count()
        for ea, eb in zip(a.phases.expansions(), b.phases.expansions()):
            assert np.array_equal(ea.coeffs, eb.coeffs)

    @pytest.mark.parametrize("kwargs", [{"k": 4}, {"k": 80}, {"eps_disc": 0.5},
                                        {"eps_phase": 0.0}])
    def test_input_validation(self, kwargs):
        spec = problems.get("exp1").spec(256)
        with pytest.raises(ArgumentError):
            solver.SolverInput(spec, (-0.5, 0), (1, 0), **kwargs)

    def test_window_outside(self):
        spec = problems.get("exp1").spec(256)
        with pytest.raises(ArgumentError):
            solver.build(solver.SolverInput(spec, (0.5, 1.5), (1, 0)))

    def test_json(self, build_problem):
        obj = json.loads(json.dumps(build_problem("exp1", 8).to_json()))
        assert len(obj["phi_inv"]) == 2 and len(obj["phases"]["branches"]) == 2


class TestTheta:
    def test_basic_values(self):
        k = 16
        sols = [propagate.BranchSolution(j, np.array([0.0, 1.0]),
                                         np.full((1, 2, k), 0j) + np.array([[s], [0]]), 0)
                for j, s in enumerate((1j, -1j))]
        phases = propagate.assemble_phases(sols, (0.0, 1.0))
        assert np.allclose(solver.eval_theta(phases, 0.0), [[1, 1], [1j, -1j]])

    def test_constant_case_closed_form(self, rotation_fm):
        t = np.array([-0.5, 0.3])
        theta = solver.eval_theta(rotation_fm.phases, t)
        lam = np.array([br.derivs[0](0.0) for br in rotation_fm.phases.branches])
        vander = np.vstack([np.ones(2), lam])
        expected = vander[None] * np.exp(np.outer(t + 1, lam))[:, None, :]
        assert np.allclose(theta, expected, atol=1e-13)

    def test_columns_solve_companion_system(self):
        # Theta' = B Theta, checked with a fourth-order central difference
        prob = problems.get("exp1")
        spec = prob.spec(256.0)
        fm = solver.build(prob.solver_input(256.0))
        h = 5e-5
        for t in (-0.6, 0.1, 0.7):
            pts = t + h * np.array([-2, -1, 1, 2])
            th = solver.eval_theta(fm.phases, pts)
            dth = (th[0] - 8 * th[1] + 8 * th[2] - th[3]) / (12 * h)
            b, _, _ = reduction._transform_at(spec, fm.reduced.v, np.array([t]))
            th0 = solver.eval_theta(fm.phases, t)
            assert np.linalg.norm(dth - b[0] @ th0) < 1e-8 * np.linalg.norm(b[0]) * np.linalg.norm(th0)

    def test_overflow(self):
        k = 16
        sol = propagate.BranchSolution(0, np.array([0.0, 1.0]),
                                       np.full((1, 2, k), 0j) + np.array([[800.0], [0]]), 0)
        with pytest.warns(RuntimeWarning):
            phases = propagate.assemble_phases([sol], (0.0, 1.0))
        with pytest.raises(PhaseOverflowError):
            solver.eval_theta(phases, 1.0)


class TestM:
    def test_scalar_form_gives_theta(self):
        fm = solver.build(solver.SolverInput(
            const_spec(np.array([[0, 1], [-4.0, 0]])), (-0.25, 0.25), (1, 0)))
        t = np.linspace(-1, 1, 5)
        assert np.allclose(solver.eval_M(fm, t), solver.eval_theta(fm.phases, t), atol=1e-13)

    @pytest.mark.parametrize("pid", ["exp1", "exp2", "exp3", "exp4"])
    def test_nonsingular(self, pid, build_problem, rng):
        fm = build_problem(pid, 10)
        m = solver.eval_M(fm, rng.uniform(-1, 1, 100))
        sv = np.linalg.svd(m, compute_uv=False)
        assert np.all(sv[:, -1] > 1e-8 * sv[:, 0])

    @pytest.mark.parametrize("pid", ["exp1", "exp2", "exp3", "exp4"])
    @pytest.mark.parametrize("log2_omega", [8, 12])
    def test_ode_residual(self, pid, log2_omega, build_problem, rng):
        fm = build_problem(pid, log2_omega)
        res = ode_residual(fm, problems.get(pid).spec(2.0 ** log2_omega), rng.uniform(-1, 1, 200))
        assert np.max(res) <= 1e-8

    def test_scalar_and_vector_evaluation(self, build_problem):
        fm = build_problem("exp1", 8)
        assert fm(0.2).shape == (2, 2)
        assert fm(np.array([0.2, 0.3])).shape == (2, 2, 2)


class TestConditions:
    def test_ivp_column(self, build_problem):
        fm = build_problem("exp3", 8)
        sol = solver.solve_ivp(fm, -1.0, solver.eval_M(fm, -1.0)[:, 0])
        assert np.allclose(sol.c, [1, 0, 0], atol=1e-10)

    @pytest.mark.parametrize("pid", ["exp1", "exp3", "exp5"])
    def test_ivp_reproduces_initial_value(self, pid, build_problem):
        prob = problems.get(pid)
        sol = prob.solve(build_problem(pid, 8))
        y0 = np.asarray(prob.y0)
        assert np.linalg.norm(sol(prob.t0) - y0) <= 1e-10 * np.linalg.norm(y0)

    def test_bvp_identity_matches_ivp(self, build_problem):
        fm = build_problem("exp1", 8)
        y0 = np.array([1.0, 2.0 - 1j])
        a = solver.solve_ivp(fm, -1.0, y0)
        b = solver.solve_bvp(fm, np.eye(2), np.zeros((2, 2)), y0)
        assert np.allclose(a.c, b.c, rtol=1e-11, atol=1e-11 * np.max(np.abs(a.c)))

    @pytest.mark.parametrize("pid", ["exp2", "exp4"])
    def test_bvp_conditions_hold(self, pid, build_problem):
        prob = problems.get(pid)
        sol = prob.solve(build_problem(pid, 8))
        got = np.asarray(prob.ba) @ sol(-1.0) + np.asarray(prob.bb) @ sol(1.0)
        assert np.allclose(got, prob.g, atol=1e-10)

    def test_singular_bvp(self, build_problem):
        fm = build_problem("exp2", 8)
        with pytest.raises(SingularSystemError):
            solver.solve_bvp(fm, np.zeros((2, 2)), np.zeros((2, 2)), np.ones(2))

    def test_t0_outside(self, build_problem):
        with pytest.raises(ArgumentError):
            solver.solve_ivp(build_problem("exp1", 8), 2.0, np.ones(2))

    def test_constant_3x3_against_exponential(self):
        s = np.array([[1, 1, 0], [0, 1, 1], [1, 0, 1.0]])
        a = s @ np.diag([2j, -1, 0.5 - 3j]) @ np.linalg.inv(s)
        fm = solver.build(solver.SolverInput(const_spec(a), (-0.25, 0.25), (1, 2, 3)))
        y0 = np.array([1, -1j, 2])
        t = np.linspace(-1, 1, 201)
        exact = expm_solution(a, 0.3, y0, t)
        got = solver.solve_ivp(fm, 0.3, y0)(t)
        assert np.max(np.linalg.norm(got - exact, axis=1) / np.linalg.norm(exact, axis=1)) < 1e-12


class TestFrequency:
    def test_exp3_is_eight_omega(self):
        rep = solver.frequency(problems.get("exp3").spec(256.0), 256.0)
        assert rep.Omega == pytest.approx(2048, rel=1e-9)
        assert rep.omega_param == 256.0

    def test_exp1(self):
        assert solver.frequency(problems.get("exp1").spec(256.0)).Omega == pytest.approx(204, abs=2)

    def test_constant(self):
        rep = solver.frequency(const_spec(np.diag([3j, -1.0])))
        assert rep.Omega == pytest.approx(6.0)
        assert sorted(rep.branch_integrals) == pytest.approx([2.0, 6.0])
