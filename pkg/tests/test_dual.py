import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csstd.dual import binary_entropy, data_energy, lse, regularized_sigmoid


class TestLse:
    def test_at_zero(self):
        assert lse(0.0, 1.0) == pytest.approx(math.log(2), abs=1e-12)

    def test_direct_formula(self):
        # 0.5 * ln(e^2 + 1)
        assert lse(1.0, 0.5) == pytest.approx(0.5 * math.log(math.exp(2) + 1), abs=1e-12)
        assert lse(1.0, 0.5) == pytest.approx(1.0634640, abs=1e-6)

    def test_saturation_no_overflow(self):
        assert lse(1000.0, 1.0) == pytest.approx(1000.0, abs=1e-9)
        assert lse(-1000.0, 1.0) == pytest.approx(0.0, abs=1e-9)
        assert np.isfinite(lse(np.array([-1e4, 0.0, 1e4]), 0.05)).all()

    def test_invalid_epsilon(self):
        with pytest.raises(ValueError):
            lse(1.0, 0.0)

    @settings(max_examples=200, deadline=None)
    @given(o=st.floats(-50, 50), eps=st.sampled_from([0.05, 0.1, 0.5, 1.0]))
    def test_relu_limit_bound(self, o, eps):
        assert abs(lse(o, eps) - max(o, 0.0)) <= eps * math.log(2) + 1e-12


class TestBinaryEntropy:
    @pytest.mark.parametrize("u", [0.0, 1.0])
    def test_endpoints_exact_zero(self, u):
        assert binary_entropy(u, 1.0) == 0.0
        assert binary_entropy(u, 0.05) == 0.0

    def test_midpoint(self):
        assert binary_entropy(0.5, 1.0) == pytest.approx(-math.log(2), abs=1e-12)

    def test_direct_evaluation(self):
        expected = 0.1 * (0.9 * math.log(0.9) + 0.1 * math.log(0.1))
        assert binary_entropy(0.9, 0.1) == pytest.approx(expected, abs=1e-12)
        assert binary_entropy(0.9, 0.1) == pytest.approx(-0.032508, abs=1e-6)

    def test_outside_domain_is_infinite(self):
        assert binary_entropy(-0.1, 1.0) == np.inf
        assert binary_entropy(1.5, 1.0) == np.inf
        vals = binary_entropy(np.array([-1.0, 0.5, 2.0]), 1.0)
        assert np.isinf(vals[[0, 2]]).all() and np.isfinite(vals[1])


class TestFenchelPair:
    def test_lse_equals_grid_maximized_conjugate(self):
        # lse(o) = max_u [o*u - entropy(u)]; grid search over u with step 1e-3
        u_grid = np.arange(0.0, 1.0 + 1e-9, 1e-3)
        ent = {eps: binary_entropy(u_grid, eps) for eps in (0.1, 0.5, 1.0)}
        for eps in (0.1, 0.5, 1.0):
            for o in np.arange(-10.0, 10.0 + 1e-9, 0.1):
                dual = np.max(o * u_grid - ent[eps])
                assert abs(lse(o, eps) - dual) < 1e-3


class TestRegularizedSigmoid:
    def test_classic_sigmoid_when_lambda_zero(self):
        rng = np.random.default_rng(0)
        o = rng.normal(size=(8, 8))
        p = rng.normal(size=(8, 8))
        u = regularized_sigmoid(o, p, 0.0, 1.0)
        np.testing.assert_allclose(u, 1.0 / (1.0 + np.exp(-o)), atol=1e-12)

    def test_symmetry_point(self):
        assert regularized_sigmoid(np.zeros((2, 2)), np.zeros((2, 2)), 3.0, 0.5)[0, 0] == 0.5

    def test_direct_value(self):
        u = regularized_sigmoid(np.array([[1.0]]), np.array([[0.05]]), 10.0, 0.1)
        assert u[0, 0] == pytest.approx(0.9933071, abs=1e-6)

    def test_overflow_safe(self):
        o = np.array([[500.0, -500.0]])
        u = regularized_sigmoid(o, np.zeros_like(o), 0.0, 0.05)
        assert np.isfinite(u).all() and u[0, 0] == 1.0 and u[0, 1] == 0.0

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            regularized_sigmoid(np.zeros((2, 2)), np.zeros((3, 2)), 1.0, 1.0)

    def test_monotone_in_o_and_p(self):
        o = np.linspace(-2, 2, 41).reshape(1, -1)
        p = np.zeros_like(o)
        u = regularized_sigmoid(o, p, 1.0, 0.3)[0]
        assert (np.diff(u) > 0).all()
        p2 = np.linspace(-2, 2, 41).reshape(1, -1)
        u2 = regularized_sigmoid(np.zeros_like(p2), p2, 2.0, 0.3)[0]
        assert (np.diff(u2) < 0).all()

    def test_is_minimizer_of_linearized_objective(self):
        # perturbing any pixel of the output increases data_energy + lam*<p,u>
        rng = np.random.default_rng(7)
        o = rng.normal(size=(4, 4))
        p = rng.normal(size=(4, 4))
        lam, eps = 2.0, 0.3
        u = regularized_sigmoid(o, p, lam, eps)

        def objective(x):
            return data_energy(x, o, eps) + lam * float(np.sum(p * x))

        base = objective(u)
        for idx in [(0, 0), (1, 2), (3, 3)]:
            for step in (1e-3, -1e-3):
                pert = u.copy()
                pert[idx] = np.clip(pert[idx] + step, 0.0, 1.0)
                assert objective(pert) >= base


class TestDataEnergy:
    def test_zero_mask(self):
        rng = np.random.default_rng(0)
        assert data_energy(np.zeros((5, 5)), rng.normal(size=(5, 5)), 1.0) == 0.0

    def test_full_mask_constant_feature(self):
        o = np.full((4, 6), 1.75)
        assert data_energy(np.ones((4, 6)), o, 0.3) == pytest.approx(-1.75 * 24, abs=1e-12)

    def test_single_pixel(self):
        val = data_energy(np.array([[0.5]]), np.array([[2.0]]), 1.0)
        assert val == pytest.approx(-1.0 - math.log(2), abs=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            data_energy(np.zeros((2, 3)), np.zeros((3, 2)), 1.0)
