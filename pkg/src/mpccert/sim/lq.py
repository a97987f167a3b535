"""Linear-quadratic value functions via the Riccati recursion.

For LQ problems the finite-horizon value functions are exactly quadratic,
V_i(x) = x' P_i x, with P_i given by the standard backward recursion.  That
makes the growth bounds gamma_i = sup_x V_i(x) / V_1(x) computable exactly:
the largest generalized eigenvalue of (P_i, P_1).  These sequences feed the
certificates, and the recursion doubles as an independent oracle for the
numerical shooting solver.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg

from ..controllability import GammaSequence

__all__ = [
    "riccati_values",
    "riccati_matrices",
    "riccati_gains",
    "riccati_value",
    "gamma_from_riccati",
]


def riccati_values(a: float, b: float, q: float, r: float, n: int) -> list[float]:
    """Scalar cost-to-go coefficients p_1..p_n  (V_i(x) = p_i * x^2).

    p_1 = q (one stage, no input needed), then
    p_{k+1} = q + p_k a^2 r / (r + b^2 p_k).
    """
    if q <= 0.0 or r <= 0.0:
        raise ValueError("stage weights q, r must be positive")
    if n < 1:
        raise ValueError("need at least one step")
    p = [float(q)]
    for _ in range(n - 1):
        pk = p[-1]
        p.append(q + pk * a * a * r / (r + b * b * pk))
    return p


def riccati_matrices(
    A: np.ndarray, B: np.ndarray, Q: np.ndarray, R: np.ndarray, n: int
) -> list[np.ndarray]:
    """Matrix cost-to-go P_1..P_n for x' Q x + u' R u stage cost."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    R = np.atleast_2d(np.asarray(R, dtype=float))
    if n < 1:
        raise ValueError("need at least one step")
    out = [Q.copy()]
    for _ in range(n - 1):
        P = out[-1]
        S = R + B.T @ P @ B
        K = np.linalg.solve(S, B.T @ P @ A)
        out.append(Q + A.T @ P @ A - A.T @ P @ B @ K)
    return out


def riccati_gains(
    A: np.ndarray, B: np.ndarray, Q: np.ndarray, R: np.ndarray, n: int
) -> list[np.ndarray]:
    """Feedback gains K_i with u = -K_i x optimal for the i-step problem (i >= 2)."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    mats = riccati_matrices(A, B, Q, R, n)
    gains = [np.zeros((np.atleast_2d(B).shape[1], A.shape[0]))]  # 1-step: no move needed
    for P in mats[:-1]:
        S = np.atleast_2d(np.asarray(R, dtype=float)) + B.T @ P @ B
        gains.append(np.linalg.solve(S, B.T @ P @ A))
    return gains


def riccati_value(model, n: int, x) -> float:
    """Exact V_n(x) for an LQ model (scalar or matrix)."""
    from .models import LqModel, LqScalarModel  # local import to avoid a cycle

    if isinstance(model, LqScalarModel):
        p = riccati_values(model.a, model.b, model.q, model.r, n)[-1]
        xv = float(np.asarray(x).reshape(-1)[0])
        return p * xv * xv
    if isinstance(model, LqModel):
        P = riccati_matrices(model.A, model.B, model.Q, model.R, n)[-1]
        xv = np.asarray(x, dtype=float).reshape(-1)
        return float(xv @ P @ xv)
    raise TypeError(f"not a linear-quadratic model: {model!r}")


def gamma_from_riccati(model, n: int) -> GammaSequence:
    """Exact growth bounds gamma_i = sup_x V_i(x)/V_1(x) for an LQ model.

    Scalar case: p_i / p_1.  Matrix case: the largest generalized eigenvalue
    of (P_i, P_1), since the supremum of a ratio of quadratics is attained
    at the leading generalized eigenvector.
    """
    from .models import LqModel, LqScalarModel

    if n < 2:
        raise ValueError("need n >= 2 for a usable growth sequence")
    if isinstance(model, LqScalarModel):
        p = riccati_values(model.a, model.b, model.q, model.r, n)
        return GammaSequence(tuple(pi / p[0] for pi in p))
    if isinstance(model, LqModel):
        mats = riccati_matrices(model.A, model.B, model.Q, model.R, n)
        vals = []
        prev = 1.0  # the sequence is monotone in exact arithmetic; clamp
        for P in mats:  # eigensolver round-off so construction never rejects
            w = scipy.linalg.eigh(P, mats[0], eigvals_only=True)
            prev = max(prev, float(w[-1]))
            vals.append(prev)
        return GammaSequence(tuple(vals))
    raise TypeError(f"not a linear-quadratic model: {model!r}")
