"""Plant models: dynamics, costs, divergence handling, integrator accuracy."""
import math

import numpy as np
import pytest

from mpccert.sim import (
    DivergenceError,
    MODEL_NAMES,
    integrate_sampled,
    lq_double_integrator,
    lq_scalar,
    model_by_name,
    pendulum_model,
    pendulum_stage_cost,
)
from mpccert.sim.models import _pendulum_rhs


class TestLqScalar:
    def test_dynamics_and_cost(self):
        m = lq_scalar()
        x = np.array([2.0])
        u = np.array([-1.0])
        np.testing.assert_allclose(m.f(x, u), [3.0])  # 2*2 - 1
        assert m.stage_cost(x, u) == 5.0  # 4 + 1

    def test_rollout_matches_stepwise_recursion(self):
        m = lq_scalar()
        rng = np.random.default_rng(7)
        u = rng.normal(size=(6, 1))
        states, costs = m.rollout(np.array([1.5]), u)
        x = np.array([1.5])
        for k in range(6):
            assert costs[k] == pytest.approx(m.stage_cost(x, u[k]), rel=1e-14)
            x = m.f(x, u[k])
            np.testing.assert_allclose(states[k + 1], x, rtol=1e-14)

    def test_step_raises_on_divergence(self):
        m = lq_scalar()
        with pytest.raises(DivergenceError):
            m.step(np.array([1e8]), np.array([0.0]))

    def test_rollout_never_raises(self):
        # u^2 overflows immediately: states freeze at x0, every cost is +inf
        m = lq_scalar()
        states, costs = m.rollout(np.array([1.0]), np.full((400, 1), 1e155))
        assert np.all(np.isfinite(states))
        assert np.all(np.isinf(costs))

        # merely huge inputs are not divergence: everything stays finite
        states, costs = m.rollout(np.array([1.0]), np.full((400, 1), 1e30))
        assert np.all(np.isfinite(states))
        assert np.all(np.isfinite(costs))
        assert costs[-1] > 1e200

    def test_weight_validation(self):
        from mpccert.sim.models import LqScalarModel

        with pytest.raises(ValueError):
            LqScalarModel(q=0.0)


class TestLqMatrix:
    def test_double_integrator_structure(self):
        m = lq_double_integrator(dt=0.1)
        np.testing.assert_allclose(m.A, [[1.0, 0.1], [0.0, 1.0]])
        np.testing.assert_allclose(m.B, [[0.005], [0.1]])
        assert m.state_dim == 2
        assert m.control_dim == 1

    def test_cost_is_quadratic_form(self):
        m = lq_double_integrator()
        x = np.array([1.0, -2.0])
        u = np.array([0.5])
        assert m.stage_cost(x, u) == pytest.approx(1.0 + 4.0 + 0.25, rel=1e-14)

    def test_generic_rollout_matches_manual(self):
        m = lq_double_integrator()
        u = np.array([[1.0], [-1.0], [0.5]])
        states, costs = m.rollout(np.array([1.0, 0.0]), u)
        x = np.array([1.0, 0.0])
        for k in range(3):
            assert costs[k] == pytest.approx(m.stage_cost(x, u[k]), rel=1e-14)
            x = m.A @ x + m.B @ u[k]
        np.testing.assert_allclose(states[-1], x, rtol=1e-14)


class TestPendulum:
    def test_target_is_an_exact_fixed_point(self):
        m = pendulum_model()
        x = np.zeros(4)
        x_next = m.f(x, np.array([0.0]))
        np.testing.assert_allclose(x_next, x, atol=1e-15)

    def test_hanging_position_is_a_fixed_point(self):
        m = pendulum_model()
        x = np.array([math.pi, 0.0, 0.0, 0.0])
        x_next = m.f(x, np.array([0.0]))
        np.testing.assert_allclose(x_next, x, atol=1e-12)

    def test_cost_vanishes_only_at_the_target(self):
        # the dynamics carry the upright angle as an offset from pi, so the
        # residual acceleration at the origin is sin(pi) ~ 1.2e-16; over one
        # sampling period that leaves a cost of order 1e-71, not exactly 0
        m = pendulum_model()
        at_target = m.stage_cost(np.zeros(4), np.array([0.0]))
        assert 0.0 <= at_target < 1e-60
        assert m.stage_cost(np.array([0.3, 0.0, 0.0, 0.0]), np.array([0.0])) > 0.0
        assert m.stage_cost(np.array([0.0, 0.0, 5.0, 0.0]), np.array([0.0])) > 0.0

    def test_hanging_cost_reduces_to_constant_quadrature(self):
        # at the hanging equilibrium with u = 0 the running cost is the
        # constant (2 * ((1 - cos pi) * 2)^2)^2 = 1024, so the Simpson
        # integral over one period T = 0.05 is 51.2
        c = pendulum_stage_cost([math.pi, 0.0, 0.0, 0.0], 0.0)
        assert c == pytest.approx(51.2, rel=1e-12)

    def test_inlined_sweep_matches_generic_integrator(self):
        # the production sweep inlines the RK4 stages; it must agree with a
        # straightforward RK4 on the published right-hand side
        m = pendulum_model()
        field = lambda x, u: np.array(_pendulum_rhs(x[0], x[1], x[2], x[3], u[0]))
        rng = np.random.default_rng(3)
        for _ in range(25):
            x = rng.uniform([-3, -2, -5, -2], [3, 2, 5, 2])
            u = rng.uniform(-3, 3, size=1)
            fast = m.f(x, u)
            slow = integrate_sampled(field, x, u, m.T, substeps=m.substeps)
            np.testing.assert_allclose(fast, slow, rtol=1e-12, atol=1e-12)

    def test_stage_cost_is_nonnegative(self):
        m = pendulum_model()
        rng = np.random.default_rng(11)
        for _ in range(50):
            x = rng.uniform(-4, 4, size=4)
            u = rng.uniform(-5, 5, size=1)
            assert m.stage_cost(x, u) >= 0.0

    def test_angle_box_documented_on_model(self):
        m = pendulum_model()
        lim = 2.0 * math.pi - 0.01
        assert m.x_lower[0] == -lim
        assert m.x_upper[0] == lim
        assert np.isinf(m.x_lower[1])

    def test_rollout_freezes_after_blowup(self):
        m = pendulum_model()
        u = np.full((8, 1), 1e155)
        states, costs = m.rollout(np.zeros(4), u)
        assert np.all(np.isfinite(states))
        assert math.isinf(costs[-1])

    def test_substeps_must_be_even(self):
        with pytest.raises(ValueError):
            pendulum_model(substeps=5)


class TestGenericIntegrator:
    def test_fourth_order_on_linear_decay(self):
        # dx/dt = -x over one unit at h = 0.05: classical RK4 accumulates
        # roughly n * h^5 / 120 ~ 5e-8 of global error (measured ~2e-8)
        field = lambda x, u: -x
        x1 = integrate_sampled(field, np.array([1.0]), np.array([0.0]), 1.0, substeps=20)
        assert x1[0] == pytest.approx(math.exp(-1.0), abs=5e-8)
        # quartic convergence: doubling the substep count shrinks the error
        # by roughly 2^4
        x2 = integrate_sampled(field, np.array([1.0]), np.array([0.0]), 1.0, substeps=40)
        e1 = abs(x1[0] - math.exp(-1.0))
        e2 = abs(x2[0] - math.exp(-1.0))
        assert e2 < e1 / 10.0

    def test_divergence_detection(self):
        field = lambda x, u: x * x  # finite-time blow-up
        with pytest.raises(DivergenceError):
            integrate_sampled(field, np.array([1e4]), np.array([0.0]), 10.0, substeps=20)

    def test_substep_validation(self):
        with pytest.raises(ValueError):
            integrate_sampled(lambda x, u: -x, np.array([1.0]), np.array([0.0]), 1.0, substeps=0)


class TestRegistry:
    def test_names_round_trip(self):
        for name in MODEL_NAMES:
            assert model_by_name(name).name == name

    def test_unknown_name(self):
        with pytest.raises(ValueError, match="unknown model"):
            model_by_name("unicycle")
