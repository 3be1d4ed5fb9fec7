import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phaseode import polyroots, problems
from phaseode import taylor as tj
from phaseode.errors import ArgumentError


class TestJet:
    def test_variable(self):
        x = tj.Jet.variable([0.5], 3)
        assert np.allclose(x.derivatives()[:, 0], [0.5, 1, 0, 0])

    @pytest.mark.parametrize("fn,derivs", [
        (tj.exp, lambda t: [np.exp(t)] * 5),
        (tj.sin, lambda t: [np.sin(t), np.cos(t), -np.sin(t), -np.cos(t), np.sin(t)]),
        (tj.cos, lambda t: [np.cos(t), -np.sin(t), -np.cos(t), np.sin(t), np.cos(t)]),
    ])
    def test_elementary(self, fn, derivs):
        t = np.array([-0.7, 0.2, 1.3])
        got = fn(tj.Jet.variable(t, 4)).derivatives()
        assert np.allclose(got, np.array(derivs(t)), atol=1e-14)

    def test_log_sqrt_division(self):
        t = np.array([0.3, 1.7])
        x = tj.Jet.variable(t, 3)
        lg = tj.log(2 + x).derivatives()
        assert np.allclose(lg[:, 0], [np.log(2.3), 1 / 2.3, -1 / 2.3 ** 2, 2 / 2.3 ** 3])
        sq = tj.sqrt(1 + x * x).derivatives()
        assert np.allclose(sq[1], t / np.sqrt(1 + t * t))
        rec = (1 / (1 + x * x)).derivatives()
        assert np.allclose(rec[1], -2 * t / (1 + t * t) ** 2)

    def test_plain_numbers_pass_through(self):
        assert tj.exp(0.0) == 1.0
        assert tj.cos(np.array([0.0]))[0] == 1.0

    @settings(deadline=None, max_examples=40)
    @given(st.floats(-2, 2), st.integers(0, 5))
    def test_power_matches_product(self, t0, p):
        x = tj.Jet.variable([t0], 4)
        base = 1.5 + tj.sin(x)
        prod = 1.0
        for _ in range(p):
            prod = prod * base
        lhs = (base ** p).derivatives() if p else np.r_[1.0, np.zeros(4)][:, None]
        rhs = prod.derivatives() if p else lhs
        assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12)

    @settings(deadline=None, max_examples=40)
    @given(st.floats(-3, 3))
    def test_exp_log_inverse(self, t0):
        x = tj.Jet.variable([t0], 5)
        back = tj.log(tj.exp(x)).derivatives()[:, 0]
        assert np.allclose(back, [t0, 1, 0, 0, 0, 0], atol=1e-12)


class TestRegistry:
    @pytest.mark.parametrize("pid", sorted(problems.PROBLEMS))
    def test_jet_derivatives_match_finite_differences(self, pid, rng):
        spec = problems.get(pid).spec(16.0)
        t = rng.uniform(-0.9, 0.9, 10)
        jet = spec.jet(t, 2)
        h = 1e-5
        fd1 = (spec.matrix(t + h) - spec.matrix(t - h)) / (2 * h)
        fd2 = (spec.matrix(t + h) - 2 * spec.matrix(t) + spec.matrix(t - h)) / h ** 2
        assert np.max(np.abs(fd1 - jet[1])) <= 1e-6 * np.max(np.abs(jet[1]))
        assert np.max(np.abs(fd2 - jet[2])) <= 1e-4 * np.max(np.abs(jet[2]))

    @pytest.mark.parametrize("pid", ["exp3", "exp4", "exp5"])
    def test_closed_form_eigenvalues(self, pid, rng):
        prob = problems.get(pid)
        omega = 2.0 ** 10
        t = rng.uniform(-1, 1, 20)
        spec = prob.spec(omega)
        exact = prob.exact_eigenvalues(t, omega)
        for i in range(20):
            got = polyroots.roots(polyroots.charpoly(spec.matrix(t[i])))
            matched = polyroots.match_roots([exact[i], got])[1]
            assert np.max(np.abs(matched - exact[i]) / np.abs(exact[i])) < 1e-9

    @pytest.mark.parametrize("pid,atol", [("exp1", lambda w: 20 / w), ("exp2", lambda w: 1e-12 * w)])
    @pytest.mark.parametrize("omega", [2.0 ** 8, 2.0 ** 14])
    def test_eigenvalues_at_zero(self, pid, atol, omega):
        # exp1's formula is asymptotic (error O(1/omega)); exp2's is exact
        prob = problems.get(pid)
        got = np.linalg.eigvals(prob.spec(omega).matrix(0.0))
        exact = prob.exact_eigenvalues(0.0, omega)
        matched = polyroots.match_roots([exact, got])[1]
        assert np.max(np.abs(matched - exact)) < atol(omega)
        with pytest.raises(ArgumentError):
            prob.exact_eigenvalues(0.5, omega)

    def test_exp1_eigenvalue_asymptotics(self):
        omega = 2.0 ** 16
        lam = problems.get("exp1").exact_eigenvalues(0.0, omega)
        target = -2j * omega / 5 - 2.5j
        assert np.min(np.abs(lam - target)) < 10 / omega

    def test_unknown_problem(self):
        with pytest.raises(ArgumentError):
            problems.get("exp0")

    def test_nonpositive_omega(self):
        with pytest.raises(ArgumentError):
            problems.get("exp1").spec(0)

    def test_conditions_shapes(self):
        for prob in problems.PROBLEMS.values():
            if prob.kind == "ivp":
                assert len(prob.y0) == prob.n
            else:
                assert np.shape(prob.ba) == (prob.n, prob.n) == np.shape(prob.bb)
                assert len(prob.g) == prob.n
        assert math.isclose(problems.get("exp3").t0, -1.0)
