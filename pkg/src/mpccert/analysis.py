"""Horizon analysis built on top of the certificates.

Answers the design questions around the index alpha_{N,m}: how long must
the prediction horizon be before stability is certified, how does the
choice of control horizon m shift that threshold, and for which
exponential-bound parameters (C, sigma) is a given (N, m) pair stable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from .certificate import (
    CLOSED_FORM,
    CertificateQuery,
    certificate,
    max_alpha_over_m,
)
from .controllability import GammaSequence, constant_gamma, gamma_from_exponential

__all__ = [
    "HorizonResult",
    "HorizonSearchError",
    "RegionGrid",
    "minimal_horizon",
    "exponential_family",
    "constant_family",
    "horizon_bound_m1",
    "horizon_bound_half",
    "horizon_table",
    "stability_region",
    "alpha_profile_m",
    "profile_to_csv",
    "region_to_csv",
    "horizon_table_to_csv",
]

GammaFactory = Callable[[int], GammaSequence]

REGION_CSV_HEADER = "C,sigma,stable"
PROFILE_CSV_HEADER = "m,alpha"
HORIZON_CSV_HEADER = "M,N_hat_m1,N_hat_half,bound_m1,bound_half"


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


class HorizonSearchError(RuntimeError):
    """No stabilizing horizon found up to the search cap."""

    def __init__(self, n_max: int, alpha_at_max: float, policy: str):
        self.n_max = n_max
        self.alpha_at_max = alpha_at_max
        self.policy = policy
        super().__init__(
            f"no horizon with alpha >= 0 found up to N = {n_max} "
            f"(policy {policy}, alpha at the cap: {alpha_at_max:.6g})"
        )


@dataclass(frozen=True)
class HorizonResult:
    """Smallest certified horizon, bracketed by the last failing one."""

    n_hat: int
    m: int
    alpha: float  # index at (n_hat, m); >= 0 by construction
    alpha_before: float  # best index at n_hat - 1, < 0 unless n_hat == 2
    policy: str


def exponential_family(C: float, sigma: float) -> GammaFactory:
    """Growth-bound factory N -> gamma_1..gamma_N for exponential decay."""
    return lambda n: gamma_from_exponential(C, sigma, n)


def constant_family(M: float) -> GammaFactory:
    """Growth-bound factory for the constant overshoot bound."""
    return lambda n: constant_gamma(M, n)


def _policy_alpha(factory: GammaFactory, n: int, policy: Union[int, str], method: str):
    """Best certificate at horizon n under the given control-horizon policy."""
    gamma = factory(n)
    if isinstance(policy, int):
        if n <= policy:
            return None  # this horizon cannot accommodate m yet
        return certificate(CertificateQuery(gamma, n, policy), method)
    if policy == "best":
        return max_alpha_over_m(gamma, n, method)
    if policy == "half":
        return certificate(CertificateQuery(gamma, n, max(1, n // 2)), method)
    raise ValueError(f"unknown policy {policy!r}: expected an integer m, 'best', or 'half'")


def minimal_horizon(
    factory: GammaFactory,
    policy: Union[int, str] = 1,
    *,
    n_max: int = 600,
    method: str = CLOSED_FORM,
) -> HorizonResult:
    """Linear scan for the smallest N >= 2 whose index is nonnegative.

    ``policy`` fixes how the control horizon follows N: a literal integer m,
    "best" (maximize over m each N), or "half" (m = floor(N/2), at least 1).
    The scan is linear rather than bisective because alpha need not be
    monotone in N for arbitrary growth sequences.
    """
    if isinstance(policy, int) and policy < 1:
        raise ValueError(f"fixed control horizon must be >= 1, got {policy}")
    last_alpha = -math.inf
    for n in range(2, n_max + 1):
        res = _policy_alpha(factory, n, policy, method)
        if res is None:
            continue
        if res.alpha >= 0.0:
            return HorizonResult(
                n_hat=n,
                m=res.m,
                alpha=res.alpha,
                alpha_before=last_alpha,
                policy=str(policy),
            )
        last_alpha = res.alpha
    raise HorizonSearchError(n_max, last_alpha, str(policy))


def horizon_bound_m1(M: float) -> float:
    """Horizon threshold for m = 1 under the constant bound gamma_i = M > 1.

    N >= 2 + ln(M - 1) / (ln M - ln(M - 1)) is exactly the condition
    alpha_{N,1} >= 0, so the minimal stabilizing horizon is the smallest
    integer at or above this value.  Grows like M ln M.
    """
    if not (math.isfinite(M) and M > 1.0):
        raise ValueError(f"constant bound M = {M!r} must be finite and > 1")
    d = math.log(M) - math.log(M - 1.0)
    return 2.0 + math.log(M - 1.0) / d


def horizon_bound_half(M: float, parity: str = "even") -> float:
    """Horizon threshold for m = floor(N/2) under the constant bound M > 1.

    For even N the condition alpha_{N,N/2} >= 0 is M^(N/2) >= 2 (M-1)^(N/2),
    i.e. N >= 2 ln 2 / (ln M - ln(M-1)).  For odd N = 2h+1 it reads
    (M/(M-1))^h >= (2M-1)/M, giving a single logarithm of the product
    ((2M-1)/M) * ((2M-1)/(M-1)) in the numerator.  Both thresholds grow
    like 2 ln 2 * M — half-horizon updates need roughly a log-factor
    shorter horizon than m = 1.
    """
    if not (math.isfinite(M) and M > 1.0):
        raise ValueError(f"constant bound M = {M!r} must be finite and > 1")
    d = math.log(M) - math.log(M - 1.0)
    if parity == "even":
        return 2.0 * math.log(2.0) / d
    if parity == "odd":
        r = 2.0 * M - 1.0
        return math.log((r / M) * (r / (M - 1.0))) / d
    raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")


def horizon_table(M_values: Iterable[float], *, n_max: int = 600) -> list[dict]:
    """Minimal horizons and analytic thresholds for a sweep of constant bounds."""
    rows = []
    for M in M_values:
        m1 = minimal_horizon(constant_family(M), 1, n_max=n_max)
        half = minimal_horizon(constant_family(M), "half", n_max=n_max)
        rows.append(
            {
                "M": float(M),
                "N_hat_m1": m1.n_hat,
                "N_hat_half": half.n_hat,
                "bound_m1": horizon_bound_m1(M),
                "bound_half": horizon_bound_half(M, "even"),
            }
        )
    return rows


@dataclass(frozen=True)
class RegionGrid:
    """Stability verdicts over an exponential-bound parameter grid.

    ``stable[i, j]`` is the verdict (alpha >= 0) at C_values[i], sigma_values[j].
    """

    horizon: int
    m: int
    C_values: np.ndarray
    sigma_values: np.ndarray
    stable: np.ndarray

    def fraction_stable(self) -> float:
        return float(np.count_nonzero(self.stable)) / self.stable.size


def default_region_axes(
    C_range: tuple[float, float] = (1.0, 10.0),
    sigma_range: tuple[float, float] = (0.01, 0.99),
    cells: int = 200,
) -> tuple[np.ndarray, np.ndarray]:
    """Inclusive uniform axes for :func:`stability_region`."""
    if cells < 2:
        raise ValueError("need at least a 2x2 grid")
    return (
        np.linspace(C_range[0], C_range[1], cells),
        np.linspace(sigma_range[0], sigma_range[1], cells),
    )


def stability_region(
    horizon: int,
    m: int,
    C_values: Sequence[float] | np.ndarray | None = None,
    sigma_values: Sequence[float] | np.ndarray | None = None,
    method: str = CLOSED_FORM,
) -> RegionGrid:
    """Evaluate the stability verdict on a (C, sigma) grid for fixed (N, m).

    The verdict is monotone in both parameters (larger overshoot or slower
    decay only hurts), so each sigma-column of the mask is a prefix of
    stable cells in C.
    """
    if C_values is None or sigma_values is None:
        dC, dS = default_region_axes()
        C_values = dC if C_values is None else np.asarray(C_values, dtype=float)
        sigma_values = dS if sigma_values is None else np.asarray(sigma_values, dtype=float)
    C_values = np.asarray(C_values, dtype=float)
    sigma_values = np.asarray(sigma_values, dtype=float)
    if np.any(C_values < 1.0):
        raise ValueError("overshoot axis must satisfy C >= 1")
    if np.any((sigma_values <= 0.0) | (sigma_values >= 1.0)):
        raise ValueError("decay axis must lie strictly inside (0, 1)")
    mask = np.zeros((C_values.size, sigma_values.size), dtype=bool)
    for j, sig in enumerate(sigma_values):
        for i, C in enumerate(C_values):
            gamma = gamma_from_exponential(float(C), float(sig), horizon)
            res = certificate(CertificateQuery(gamma, horizon, m), method)
            mask[i, j] = res.alpha >= 0.0
            if not mask[i, j]:
                # alpha is nonincreasing in C at fixed sigma: the rest of the
                # column cannot come back
                break
    return RegionGrid(
        horizon=horizon,
        m=m,
        C_values=C_values,
        sigma_values=sigma_values,
        stable=mask,
    )


def alpha_profile_m(gamma: GammaSequence, horizon: int, method: str = CLOSED_FORM) -> list[tuple[int, float]]:
    """The index as a function of the control horizon m = 1..N-1."""
    return [
        (m, certificate(CertificateQuery(gamma, horizon, m), method).alpha)
        for m in range(1, horizon)
    ]


def _write_lines(path: Union[str, Path], lines: list[str]) -> None:
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def region_to_csv(grid: RegionGrid, path: Union[str, Path], config_line: str | None = None) -> None:
    """Rows ordered C-major: all sigma for the first C, then the next C."""
    lines = []
    if config_line:
        lines.append(f"#config {config_line}")
    lines.append(REGION_CSV_HEADER)
    for i, C in enumerate(grid.C_values):
        for j, sig in enumerate(grid.sigma_values):
            lines.append(f"{_fmt(C)},{_fmt(sig)},{int(grid.stable[i, j])}")
    _write_lines(path, lines)


def profile_to_csv(profile: list[tuple[int, float]], path: Union[str, Path], config_line: str | None = None) -> None:
    lines = []
    if config_line:
        lines.append(f"#config {config_line}")
    lines.append(PROFILE_CSV_HEADER)
    lines.extend(f"{m},{_fmt(alpha)}" for m, alpha in profile)
    _write_lines(path, lines)


def horizon_table_to_csv(rows: list[dict], path: Union[str, Path], config_line: str | None = None) -> None:
    lines = []
    if config_line:
        lines.append(f"#config {config_line}")
    lines.append(HORIZON_CSV_HEADER)
    lines.extend(
        f"{_fmt(r['M'])},{r['N_hat_m1']},{r['N_hat_half']},{_fmt(r['bound_m1'])},{_fmt(r['bound_half'])}"
        for r in rows
    )
    _write_lines(path, lines)
