import numpy as np
import pytest

from phaseode import polyroots, problems, reduction
from phaseode.checks import const_spec
from phaseode.errors import ArgumentError, IllConditionedError


def companion(q0, q1):
    return np.array([[0, 1], [-q0, -q1]], dtype=complex)


class TestPhi:
    def test_companion_form_gives_identity(self):
        spec = const_spec(companion(3.0, 0.5))
        phi, dphi = reduction.phi_jet(spec, (1, 0), 0.2)
        assert np.allclose(phi, np.eye(2))
        assert np.allclose(dphi, 0)

    def test_constant_diag(self):
        spec = const_spec(np.diag([1.0, 2.0]))
        phi, dphi = reduction.phi_jet(spec, (1, 1), -0.4)
        assert np.allclose(phi, [[1, 1], [1, 2]])
        assert np.allclose(dphi, 0)

    def test_exp1_second_row(self):
        # D[e1] = A^T e1 is the first row of A(0)
        spec = problems.get("exp1").spec(256)
        phi, _ = reduction.phi_jet(spec, (1, 0), 0.0)
        assert np.allclose(phi[1], [1, 1])
        phi_b, _ = reduction.phi_jet(spec, (0, 1), 0.0)
        assert np.allclose(phi_b[1], [-256, -2j * 256 / 5])

    def test_derivative_matches_finite_difference(self, rng):
        spec = problems.get("exp3").spec(8.0)
        t = rng.uniform(-0.9, 0.9, 5)
        _, dphi = reduction.phi_jet(spec, (1, 0, 0), t)
        h = 1e-6
        fd = (reduction.phi_jet(spec, (1, 0, 0), t + h)[0]
              - reduction.phi_jet(spec, (1, 0, 0), t - h)[0]) / (2 * h)
        assert np.max(np.abs(fd - dphi)) < 1e-6 * np.max(np.abs(dphi))

    def test_vector_validation(self):
        spec = const_spec(np.eye(2))
        with pytest.raises(ArgumentError):
            reduction.phi_jet(spec, (0, 0), 0.0)
        with pytest.raises(ArgumentError):
            reduction.phi_jet(spec, (1, 0, 0), 0.0)


class TestScalarCoefficients:
    def test_companion_exact(self):
        q, inv, cond = reduction.scalar_coeffs_at(const_spec(companion(3.0, 0.5)), (1, 0), 0.1)
        assert np.allclose(q, [3.0, 0.5], atol=1e-15)
        assert np.allclose(inv, np.eye(2))

    def test_diag(self):
        q, _, _ = reduction.scalar_coeffs_at(const_spec(np.diag([1.0, 2.0])), (1, 1), 0.0)
        assert np.allclose(q, [2, -3])
        assert np.allclose(sorted(polyroots.roots(q).real), [1, 2])

    def test_companion_structure(self, rng):
        spec = problems.get("exp4").spec(256)
        t = rng.uniform(-1, 1, 10)
        assert np.max(reduction.companion_residual(spec, (1, 1, 1), t)) < 1e-12

    def test_transform_is_similar_to_a(self):
        # Phi A Phi^{-1} has the eigenvalues of A; the reduced q adds Phi' Phi^{-1}
        spec = problems.get("exp3").spec(256)
        phi, _ = reduction.phi_jet(spec, (1, 0, 0), 0.3)
        sim = phi @ spec.matrix(0.3) @ np.linalg.inv(phi)
        ev = np.linalg.eigvals(spec.matrix(0.3))
        got = polyroots.match_roots([ev, np.linalg.eigvals(sim)])[1]
        assert np.max(np.abs(got - ev) / np.abs(ev)) < 1e-12

    def test_reduced_roots_approach_eigenvalues(self):
        # the gauge term Phi' Phi^{-1} is O(1), so the relative gap decays like 1/omega
        prob = problems.get("exp3")
        gaps = []
        for omega in (2.0 ** 8, 2.0 ** 14, 2.0 ** 20):
            spec = prob.spec(omega)
            q, _, _ = reduction.scalar_coeffs_at(spec, prob.v, 0.3)
            ev = prob.exact_eigenvalues(np.array([0.3]), omega)[0]
            got = polyroots.match_roots([ev, polyroots.roots(q)])[1]
            gaps.append(np.max(np.abs(got - ev) / np.abs(ev)))
        assert gaps[0] < 0.1
        assert gaps[1] < gaps[0] / 30 and gaps[2] < gaps[1] / 30

    def test_non_cyclic_vector(self):
        spec = const_spec(np.diag([1.0, 2.0]))
        with pytest.raises(IllConditionedError) as info:
            reduction.scalar_coeffs_at(spec, (1, 0), 0.0)
        assert info.value.cond > 1e8

    def test_vectorized_shapes(self):
        spec = problems.get("exp5").spec(64)
        q, inv, cond = reduction.scalar_coeffs_at(spec, (0, 1, 1, 0), np.linspace(-1, 1, 7))
        assert q.shape == (7, 4) and inv.shape == (7, 4, 4) and cond.shape == (7,)


class TestDiscretize:
    def test_constant_single_piece(self):
        red = reduction.discretize(const_spec(np.diag([1.0, 2.0])), (1, 1))
        assert red.breakpoints.shape[0] == 2
        t = np.linspace(-1, 1, 9)
        assert np.allclose(red.q_at(t), np.array([[2.0], [-3.0]]))

    def test_exp1_pieces_independent_of_omega(self):
        prob = problems.get("exp1")
        counts = [reduction.discretize(prob.spec(w), prob.v).breakpoints.shape[0] - 1
                  for w in (2.0 ** 8, 2.0 ** 16)]
        assert abs(counts[0] - counts[1]) <= 1

    def test_exp1_interpolates(self, rng):
        prob = problems.get("exp1")
        spec = prob.spec(256)
        red = reduction.discretize(spec, prob.v)
        t = rng.uniform(-1, 1, 50)
        q, inv, _ = reduction.scalar_coeffs_at(spec, prob.v, t)
        assert np.max(np.abs(red.q_at(t).T - q)) < 1e-10 * np.max(np.abs(q))
        assert np.max(np.abs(red.phi_inv_at(t) - inv)) < 1e-10 * np.max(np.abs(inv))
        assert red.coeff_count() == 4 * red.k * (red.breakpoints.shape[0] - 1)

    def test_exp5_condition_larger(self):
        p1, p5 = problems.get("exp1"), problems.get("exp5")
        r1 = reduction.discretize(p1.spec(256), p1.v)
        r5 = reduction.discretize(p5.spec(256), p5.v, eps_disc=p5.eps_disc)
        assert r5.cond_max > r1.cond_max
        assert np.isfinite(r5.cond_max)

    def test_phi_inverse_derivative(self):
        prob = problems.get("exp2")
        red = reduction.discretize(prob.spec(256), prob.v)
        t = np.array([-0.3, 0.45])
        h = 1e-6
        fd = (red.phi_inv_at(t + h) - red.phi_inv_at(t - h)) / (2 * h)
        assert np.max(np.abs(fd - red.dphi_inv_at(t))) < 1e-6 * np.max(np.abs(fd))
