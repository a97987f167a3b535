"""Closed-loop simulation: models, shooting solver, receding-horizon loops."""
from .models import (
    DivergenceError,
    LqModel,
    LqScalarModel,
    MODEL_NAMES,
    PendulumModel,
    SystemModel,
    integrate_sampled,
    lq_double_integrator,
    lq_scalar,
    model_by_name,
    pendulum_model,
    pendulum_stage_cost,
)
from .lq import (
    gamma_from_riccati,
    riccati_gains,
    riccati_matrices,
    riccati_value,
    riccati_values,
)
from .shooting import ShootingProblem, ShootingSolution, shift_guess, solve_finite_horizon
from .loop import (
    ClosedLoopTrace,
    LyapunovAudit,
    Schedule,
    UpdateRecord,
    WindowCheck,
    constant_schedule,
    dropout_schedule,
    measured_alpha,
    mpc_run,
    trace_to_csv,
    verify_relaxed_lyapunov,
)

__all__ = [
    "DivergenceError",
    "LqModel",
    "LqScalarModel",
    "MODEL_NAMES",
    "PendulumModel",
    "SystemModel",
    "integrate_sampled",
    "lq_double_integrator",
    "lq_scalar",
    "model_by_name",
    "pendulum_model",
    "pendulum_stage_cost",
    "gamma_from_riccati",
    "riccati_gains",
    "riccati_matrices",
    "riccati_value",
    "riccati_values",
    "ShootingProblem",
    "ShootingSolution",
    "shift_guess",
    "solve_finite_horizon",
    "ClosedLoopTrace",
    "LyapunovAudit",
    "Schedule",
    "UpdateRecord",
    "WindowCheck",
    "constant_schedule",
    "dropout_schedule",
    "measured_alpha",
    "mpc_run",
    "trace_to_csv",
    "verify_relaxed_lyapunov",
]
