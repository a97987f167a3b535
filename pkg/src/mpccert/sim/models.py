"""System models for closed-loop validation.

Three concrete plants back the simulation layer:

* ``LqScalarModel`` — scalar linear dynamics with quadratic cost, the
  workhorse for oracle tests because its value functions are exactly
  computable (see :mod:`mpccert.sim.lq`);
* ``LqModel`` — the matrix analogue (a discretized double integrator is
  provided as ``lq_double_integrator``);
* ``PendulumModel`` — a sampled-data inverted pendulum on a cart with
  quartic stage cost, integrated by fixed-step RK4 with the running cost
  accumulated by composite Simpson quadrature on the same substep grid.

A model exposes ``f`` (one control period), ``stage_cost``, ``step`` (both
at once, with divergence detection) and ``rollout`` (an open-loop sweep
that never raises — bad control iterates show up as infinite cost so that
line searches can back away from them).
"""
from __future__ import annotations

import math
from typing import Callable, Optional

import numpy as np

__all__ = [
    "DivergenceError",
    "SystemModel",
    "LqScalarModel",
    "LqModel",
    "PendulumModel",
    "lq_scalar",
    "lq_double_integrator",
    "pendulum_model",
    "pendulum_stage_cost",
    "integrate_sampled",
    "model_by_name",
    "MODEL_NAMES",
]

# states beyond this norm abort a closed-loop run
DIVERGENCE_NORM = 1e8


class DivergenceError(RuntimeError):
    """The closed-loop state left the numerically meaningful region."""


class SystemModel:
    """Discrete-time plant x+ = f(x, u) with stage cost vanishing at the target."""

    name: str = "generic"
    state_dim: int = 0
    control_dim: int = 0

    def __init__(self) -> None:
        self.x_star = np.zeros(self.state_dim)
        self.u_star = np.zeros(self.control_dim)
        self.u_lower: Optional[np.ndarray] = None  # None = unconstrained
        self.u_upper: Optional[np.ndarray] = None
        self.x_lower: Optional[np.ndarray] = None
        self.x_upper: Optional[np.ndarray] = None
        self.state_penalty = 1e6  # quadratic weight on state-box violation
        self.default_x0 = np.zeros(self.state_dim)

    def f(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def stage_cost(self, x: np.ndarray, u: np.ndarray) -> float:
        raise NotImplementedError

    def step(self, x: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, float]:
        """One closed-loop move; raises :class:`DivergenceError` on blow-up."""
        cost = self.stage_cost(x, u)
        x_next = self.f(x, u)
        if not (np.all(np.isfinite(x_next)) and math.isfinite(cost)):
            raise DivergenceError(f"{self.name}: non-finite state or cost")
        if float(np.max(np.abs(x_next))) > DIVERGENCE_NORM:
            raise DivergenceError(f"{self.name}: state norm exceeded {DIVERGENCE_NORM:g}")
        return x_next, float(cost)

    def rollout(self, x0: np.ndarray, controls: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Open-loop sweep used by the optimizer; never raises.

        Returns (states, costs) with shapes (n+1, state_dim) and (n,).  Once
        an iterate goes non-finite the remaining costs are +inf and the
        state is frozen, which the line search treats as a wall.
        """
        controls = np.asarray(controls, dtype=float).reshape(-1, self.control_dim)
        n = controls.shape[0]
        states = np.empty((n + 1, self.state_dim))
        costs = np.full(n, math.inf)
        x = np.asarray(x0, dtype=float).reshape(self.state_dim)
        states[0] = x
        for k in range(n):
            try:
                c = self.stage_cost(x, controls[k])
                x_next = self.f(x, controls[k])
            except (OverflowError, ValueError, FloatingPointError):
                states[k + 1 :] = x
                return states, costs
            if not (np.all(np.isfinite(x_next)) and math.isfinite(c)):
                states[k + 1 :] = x
                return states, costs
            costs[k] = c
            x = x_next
            states[k + 1] = x
        return states, costs

    def control_bounds(self, n: int):
        """Per-variable (low, high) pairs for an n-step control vector, or None."""
        if self.u_lower is None and self.u_upper is None:
            return None
        lo = np.full(self.control_dim, -np.inf) if self.u_lower is None else self.u_lower
        hi = np.full(self.control_dim, np.inf) if self.u_upper is None else self.u_upper
        pair = [(None if math.isinf(a) else a, None if math.isinf(b) else b) for a, b in zip(lo, hi)]
        return pair * n


class LqScalarModel(SystemModel):
    """x+ = a x + b u with stage cost q x^2 + r u^2.

    The default (a, b, q, r) = (2, 1, 1, 1) is deliberately unstable with a
    one-step controllable input, so certificate values spread usefully
    across control horizons.
    """

    name = "lq-scalar"
    state_dim = 1
    control_dim = 1

    def __init__(self, a: float = 2.0, b: float = 1.0, q: float = 1.0, r: float = 1.0):
        super().__init__()
        if q <= 0 or r <= 0:
            raise ValueError("stage weights q, r must be positive")
        self.a, self.b, self.q, self.r = float(a), float(b), float(q), float(r)
        self.default_x0 = np.array([1.0])

    def f(self, x, u):
        return np.array([self.a * float(x[0]) + self.b * float(u[0])])

    def stage_cost(self, x, u):
        xv, uv = float(x[0]), float(u[0])
        return self.q * xv * xv + self.r * uv * uv

    def rollout(self, x0, controls):
        # plain-float recursion: this path sits inside every finite-difference
        # objective evaluation, so it is kept allocation-light
        u = np.asarray(controls, dtype=float).reshape(-1)
        n = u.size
        a, b, q, r = self.a, self.b, self.q, self.r
        x = float(np.asarray(x0).reshape(-1)[0])
        states = np.empty((n + 1, 1))
        costs = np.empty(n)
        states[0, 0] = x
        for k in range(n):
            # plain float so overflow yields inf through Python arithmetic
            # rather than a numpy RuntimeWarning
            uk = float(u[k])
            c = q * x * x + r * uk * uk
            x_next = a * x + b * uk
            if not (math.isfinite(c) and math.isfinite(x_next)):
                states[k + 1 :, 0] = x
                costs[k:] = math.inf
                return states, costs
            costs[k] = c
            x = x_next
            states[k + 1, 0] = x
        return states, costs


class LqModel(SystemModel):
    """x+ = A x + B u with stage cost x' Q x + u' R u."""

    name = "lq"

    def __init__(self, A, B, Q, R, name: str = "lq"):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        B = np.asarray(B, dtype=float).reshape(A.shape[0], -1)
        Q = np.atleast_2d(np.asarray(Q, dtype=float))
        R = np.atleast_2d(np.asarray(R, dtype=float))
        self.state_dim = A.shape[0]
        self.control_dim = B.shape[1]
        self.name = name
        super().__init__()
        self.A, self.B, self.Q, self.R = A, B, Q, R
        self.default_x0 = np.zeros(self.state_dim)
        self.default_x0[0] = 1.0

    def f(self, x, u):
        return self.A @ np.asarray(x, dtype=float) + self.B @ np.asarray(u, dtype=float)

    def stage_cost(self, x, u):
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        return float(x @ self.Q @ x + u @ self.R @ u)


def lq_scalar() -> LqScalarModel:
    return LqScalarModel()


def lq_double_integrator(dt: float = 0.1) -> LqModel:
    """Position/velocity chain sampled at dt, unit weights."""
    A = [[1.0, dt], [0.0, 1.0]]
    B = [[0.5 * dt * dt], [dt]]
    return LqModel(A, B, np.eye(2), [[1.0]], name="lq-double-integrator")


# --- sampled-data pendulum -------------------------------------------------

_G = 9.81
_LENGTH = 10.0
_FRICTION = 0.01  # both air and rotational friction coefficients

# Coulomb-friction deadband: the signum is taken as 0 for |velocity| below
# this, so the discontinuity cannot amplify integrator round-off (~1e-18 at
# the equilibria) into full-size friction kicks.  Far below any physically
# meaningful velocity; it makes the exact equilibria of the field exact
# fixed points of the integrator too.
_SGN_EPS = 1e-12


def _pendulum_rhs(x1: float, x2: float, x3: float, x4: float, u: float):
    """Continuous-time right-hand side; the angle is measured from upright."""
    s = math.sin(x1 + math.pi)
    c = math.cos(x1 + math.pi)
    sgn = 1.0 if x2 > _SGN_EPS else (-1.0 if x2 < -_SGN_EPS else 0.0)
    acc = -(_G / _LENGTH) * s - (_FRICTION / _LENGTH) * x2 * abs(x2) - u * c - _FRICTION * sgn
    return x2, acc, x4, u


def _pendulum_running_cost(x1: float, x2: float, x3: float, x4: float, u: float) -> float:
    sin1 = math.sin(x1)
    cos2 = math.cos(x2)
    inner = (
        3.51 * sin1 * sin1
        + 4.82 * x2 * sin1
        + 2.31 * x2 * x2
        + 0.01 * x3 * x3
        + 2.0 * ((1.0 - math.cos(x1)) * (1.0 + cos2 * cos2)) ** 2
        + 0.1 * x4 * x4
    )
    return 1e-4 * u * u + inner * inner


class PendulumModel(SystemModel):
    """Inverted pendulum on a cart, zero-order-hold control, period T.

    State: (angle from upright, angular velocity, cart position, cart
    velocity).  Both the upright target and the hanging position are exact
    equilibria of the vector field; the stage cost vanishes only at the
    target, and the angle is boxed inside (-2*pi, 2*pi) to exclude the
    wrapped copies of it.  One control period is integrated by ``substeps``
    RK4 steps and the stage cost is the integral of the running cost over
    the period, evaluated by composite Simpson quadrature on the RK4 nodes
    (so ``substeps`` must be even).
    """

    name = "pendulum"
    state_dim = 4
    control_dim = 1

    def __init__(self, T: float = 0.05, substeps: int = 20):
        if substeps < 2 or substeps % 2:
            raise ValueError("substeps must be even and >= 2 for Simpson quadrature")
        super().__init__()
        self.T = float(T)
        self.substeps = int(substeps)
        lim = 2.0 * math.pi - 0.01
        self.x_lower = np.array([-lim, -np.inf, -np.inf, -np.inf])
        self.x_upper = np.array([lim, np.inf, np.inf, np.inf])
        self.default_x0 = np.array([math.pi + 1.4, 0.0, 0.0, 0.0])

    def _sweep(self, x, u: float) -> tuple[tuple[float, float, float, float], float]:
        """Integrate one period and accumulate the cost integral in one pass.

        The right-hand side and running cost are inlined: this loop sits
        under every finite-difference gradient entry of the shooting solver,
        so per-call overhead dominates wall time if left factored.  Raises
        OverflowError/ValueError if the trig/power evaluations leave the
        floating-point range; ``rollout`` converts that to an infinite cost,
        ``step`` to a :class:`DivergenceError`.
        """
        sin, cos = math.sin, math.cos
        pi = math.pi
        gl = _G / _LENGTH
        fl = _FRICTION / _LENGTH
        fr = _FRICTION
        eps = _SGN_EPS
        h = self.T / self.substeps
        h2 = 0.5 * h
        x1, x2, x3, x4 = x

        def rhs2(a1: float, a2: float) -> float:
            # angular acceleration; x3/x4 components are trivially (x4, u)
            sgn = 1.0 if a2 > eps else (-1.0 if a2 < -eps else 0.0)
            return -gl * sin(a1 + pi) - fl * a2 * abs(a2) - u * cos(a1 + pi) - fr * sgn

        def lrun(a1: float, a2: float, a3: float, a4: float) -> float:
            s1 = sin(a1)
            c2 = cos(a2)
            inner = (
                3.51 * s1 * s1
                + 4.82 * a2 * s1
                + 2.31 * a2 * a2
                + 0.01 * a3 * a3
                + 2.0 * ((1.0 - cos(a1)) * (1.0 + c2 * c2)) ** 2
                + 0.1 * a4 * a4
            )
            return 1e-4 * u * u + inner * inner

        acc = lrun(x1, x2, x3, x4)  # Simpson endpoint, weight 1
        n_sub = self.substeps
        for i in range(1, n_sub + 1):
            b2 = rhs2(x1, x2)
            m1, m2 = x1 + h2 * x2, x2 + h2 * b2
            c2_ = rhs2(m1, m2)
            n1, n2 = x1 + h2 * m2, x2 + h2 * c2_
            d2 = rhs2(n1, n2)
            p1, p2 = x1 + h * n2, x2 + h * d2
            e2 = rhs2(p1, p2)
            # cart chain is linear in (x4, u): RK4 reduces to exact quadrature
            x3 += h * x4 + h * h2 * u
            x1 += h * (x2 + 2.0 * (m2 + n2) + p2) / 6.0
            x2 += h * (b2 + 2.0 * (c2_ + d2) + e2) / 6.0
            x4 += h * u
            w = lrun(x1, x2, x3, x4)
            acc += (2.0 if i % 2 == 0 else 4.0) * w if i < n_sub else w
        return (x1, x2, x3, x4), acc * h / 3.0

    def f(self, x, u):
        xt, _ = self._sweep(tuple(float(v) for v in np.asarray(x).reshape(4)), float(np.asarray(u).reshape(1)[0]))
        return np.array(xt)

    def stage_cost(self, x, u):
        _, c = self._sweep(tuple(float(v) for v in np.asarray(x).reshape(4)), float(np.asarray(u).reshape(1)[0]))
        return c

    def step(self, x, u):
        try:
            xt, c = self._sweep(
                tuple(float(v) for v in np.asarray(x).reshape(4)), float(np.asarray(u).reshape(1)[0])
            )
        except (OverflowError, ValueError) as exc:
            raise DivergenceError(f"{self.name}: {exc}") from exc
        x_next = np.array(xt)
        if not (np.all(np.isfinite(x_next)) and math.isfinite(c)):
            raise DivergenceError(f"{self.name}: non-finite state or cost")
        if float(np.max(np.abs(x_next))) > DIVERGENCE_NORM:
            raise DivergenceError(f"{self.name}: state norm exceeded {DIVERGENCE_NORM:g}")
        return x_next, c

    def rollout(self, x0, controls):
        u = np.asarray(controls, dtype=float).reshape(-1)
        n = u.size
        states = np.empty((n + 1, 4))
        costs = np.full(n, math.inf)
        x = tuple(float(v) for v in np.asarray(x0).reshape(4))
        states[0] = x
        for k in range(n):
            try:
                # plain float keeps the sweep in Python arithmetic, where
                # blow-ups raise OverflowError instead of warning silently
                x, c = self._sweep(x, float(u[k]))
            except (OverflowError, ValueError):
                states[k + 1 :] = states[k]
                return states, costs
            if not (math.isfinite(c) and all(math.isfinite(v) for v in x)):
                states[k + 1 :] = states[k]
                return states, costs
            costs[k] = c
            states[k + 1] = x
        return states, costs


def pendulum_model(T: float = 0.05, substeps: int = 20) -> PendulumModel:
    return PendulumModel(T=T, substeps=substeps)


def pendulum_stage_cost(x, u, T: float = 0.05, substeps: int = 20) -> float:
    """Integral of the pendulum running cost over one control period."""
    return PendulumModel(T=T, substeps=substeps).stage_cost(np.asarray(x, dtype=float), np.atleast_1d(u))


def integrate_sampled(
    field: Callable[[np.ndarray, np.ndarray], np.ndarray],
    x: np.ndarray,
    u: np.ndarray,
    T: float,
    substeps: int = 20,
) -> np.ndarray:
    """Fixed-step RK4 over one control period for a generic vector field.

    Raises :class:`DivergenceError` if the final state is non-finite or
    leaves the admissible norm ball.
    """
    if substeps < 1:
        raise ValueError("substeps must be >= 1")
    x = np.asarray(x, dtype=float).copy()
    u = np.asarray(u, dtype=float)
    h = float(T) / substeps
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(substeps):
            k1 = np.asarray(field(x, u), dtype=float)
            k2 = np.asarray(field(x + 0.5 * h * k1, u), dtype=float)
            k3 = np.asarray(field(x + 0.5 * h * k2, u), dtype=float)
            k4 = np.asarray(field(x + h * k3, u), dtype=float)
            x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(x)):
        raise DivergenceError("integration produced a non-finite state")
    if float(np.max(np.abs(x))) > DIVERGENCE_NORM:
        raise DivergenceError(f"state norm exceeded {DIVERGENCE_NORM:g}")
    return x


MODEL_NAMES = ("lq-scalar", "lq-double-integrator", "pendulum")


def model_by_name(name: str) -> SystemModel:
    if name == "lq-scalar":
        return lq_scalar()
    if name == "lq-double-integrator":
        return lq_double_integrator()
    if name == "pendulum":
        return pendulum_model()
    raise ValueError(f"unknown model {name!r}; expected one of {', '.join(MODEL_NAMES)}")
