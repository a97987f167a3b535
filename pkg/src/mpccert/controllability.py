"""Controllability growth sequences.

Everything downstream of this module is parametrized by a finite sequence
``gamma_1, ..., gamma_N`` of growth bounds relating the i-step optimal cost
to the one-step optimal cost,

    V_i(x) <= gamma_i * V_1(x)   for all states x and 1 <= i <= N.

The sequence is the only system information the certification machinery
needs; it can come from an exponential-decay bound, from a summable
coefficient sequence, or (for linear-quadratic problems) from a Riccati
recursion, see :mod:`mpccert.sim.lq`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence, Union

__all__ = [
    "GammaSequence",
    "ExpBound",
    "CSequence",
    "gamma_from_exponential",
    "gamma_from_c_sequence",
    "constant_gamma",
    "check_submultiplicative",
    "gamma_to_csv",
    "gamma_from_csv",
]

GAMMA_CSV_HEADER = "i,gamma"


def _fmt(x: float) -> str:
    """Render a float with 12 significant digits (shared output convention)."""
    return format(float(x), ".12g")


@dataclass(frozen=True)
class GammaSequence:
    """Finite monotone sequence of growth bounds ``gamma_1 .. gamma_N``.

    ``values[i-1]`` is gamma_i; the leading gamma_0 == 1 is implied by the
    definition (V_0 is the zero function plus one stage) and never stored.
    Certificates need at least two entries, so shorter input is rejected.
    """

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if len(vals) < 2:
            raise ValueError(
                f"need at least gamma_1 and gamma_2, got {len(vals)} entries"
            )
        prev = 1.0
        for i, v in enumerate(vals, start=1):
            if not math.isfinite(v):
                raise ValueError(f"gamma_{i} = {v!r} is not finite")
            if v < 1.0:
                raise ValueError(f"gamma_{i} = {v!r} violates gamma_i >= 1")
            if v < prev:
                raise ValueError(
                    f"gamma_{i} = {v!r} < gamma_{i-1} = {prev!r}: sequence must be nondecreasing"
                )
            prev = v

    def __len__(self) -> int:
        return len(self.values)

    @property
    def n(self) -> int:
        """Largest index N for which a bound is available."""
        return len(self.values)

    def gamma(self, i: int) -> float:
        """1-based access; ``gamma(0)`` returns the implied 1.0."""
        if i == 0:
            return 1.0
        if not 1 <= i <= len(self.values):
            raise IndexError(f"gamma_{i} not available (N = {len(self.values)})")
        return self.values[i - 1]

    def deltas(self) -> tuple[float, ...]:
        """First differences Delta_i = gamma_i - gamma_{i-1} with gamma_0 = 1."""
        prev = 1.0
        out = []
        for v in self.values:
            out.append(v - prev)
            prev = v
        return tuple(out)

    def truncated(self, n: int) -> "GammaSequence":
        """The leading subsequence gamma_1..gamma_n (n >= 2)."""
        if n > len(self.values):
            raise ValueError(f"cannot truncate to {n} entries, only {len(self.values)} available")
        return GammaSequence(self.values[:n])


@dataclass(frozen=True)
class ExpBound:
    """Exponential controllability parameters: overshoot C >= 1, decay sigma in (0,1)."""

    C: float
    sigma: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.C) and self.C >= 1.0):
            raise ValueError(f"overshoot C = {self.C!r} must be finite and >= 1")
        if not (math.isfinite(self.sigma) and 0.0 < self.sigma < 1.0):
            raise ValueError(f"decay rate sigma = {self.sigma!r} must lie in (0, 1)")

    def gamma(self, n: int) -> GammaSequence:
        return gamma_from_exponential(self.C, self.sigma, n)


@dataclass(frozen=True)
class CSequence:
    """Summable-coefficient description: gamma_i is the partial sum of c_0..c_{i-1}.

    c_0 >= 1 guarantees gamma_1 >= 1; nonnegativity gives monotonicity.
    """

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if len(vals) < 2:
            raise ValueError("need at least c_0 and c_1")
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("coefficients must be finite")
        if vals[0] < 1.0:
            raise ValueError(f"c_0 = {vals[0]!r} must be >= 1 so that gamma_1 >= 1")
        for i, v in enumerate(vals):
            if v < 0.0:
                raise ValueError(f"c_{i} = {v!r} must be nonnegative")


def gamma_from_exponential(C: float, sigma: float, n: int) -> GammaSequence:
    """Growth bounds induced by the decay estimate  beta(r, i) = C * sigma^i * r.

    gamma_i = C * (1 - sigma^i) / (1 - sigma), the i-term geometric partial sum.
    """
    bound = ExpBound(C, sigma)  # validates parameters
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    # accumulate C * sigma^k directly: the closed form (1 - sigma^i)/(1 - sigma)
    # can round gamma_1 below C (and hence below 1) for C near 1
    out = []
    total = 0.0
    term = bound.C
    for _ in range(n):
        total += term
        out.append(total)
        term *= bound.sigma
    return GammaSequence(tuple(out))


def gamma_from_c_sequence(c: Union[CSequence, Sequence[float]]) -> GammaSequence:
    """Partial sums gamma_i = sum_{k < i} c_k of a summable coefficient sequence."""
    if not isinstance(c, CSequence):
        c = CSequence(tuple(c))
    out = []
    total = 0.0
    for v in c.values:
        total += v
        out.append(total)
    return GammaSequence(tuple(out))


def constant_gamma(M: float, n: int) -> GammaSequence:
    """The constant sequence gamma_i = M (finite accumulated overshoot)."""
    if not (math.isfinite(M) and M >= 1.0):
        raise ValueError(f"constant bound M = {M!r} must be finite and >= 1")
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    return GammaSequence((float(M),) * n)


def check_submultiplicative(gamma: GammaSequence) -> bool:
    """Check Delta_n * Delta_m >= Delta_{n+m} for all n, m >= 1 with n + m <= N.

    Delta_i = gamma_i - gamma_{i-1} with the implied gamma_0 = 1.  When this
    holds, the closed-form index is exact (it coincides with the linear
    program); when it fails the closed form is still a valid lower bound.
    The comparison is exact — callers who need slack should pre-round.
    """
    d = gamma.deltas()
    n = len(d)
    for i in range(1, n):  # pair (i, j), 1-based, i <= j, i + j <= n
        for j in range(i, n - i + 1):
            if d[i - 1] * d[j - 1] < d[i + j - 1]:
                return False
    return True


def gamma_to_csv(gamma: GammaSequence, path: Union[str, Path]) -> None:
    """Write ``i,gamma`` rows, one per index starting at i = 1, 12 significant digits."""
    lines = [GAMMA_CSV_HEADER]
    lines.extend(f"{i},{_fmt(v)}" for i, v in enumerate(gamma.values, start=1))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def gamma_from_csv(path: Union[str, Path]) -> GammaSequence:
    """Read a sequence written by :func:`gamma_to_csv`; strict about the format."""
    raw = Path(path).read_text(encoding="ascii").strip().splitlines()
    if not raw or raw[0].strip() != GAMMA_CSV_HEADER:
        raise ValueError(f"expected header {GAMMA_CSV_HEADER!r}")
    values = []
    for lineno, line in enumerate(raw[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'i,gamma', got {line!r}")
        idx = int(parts[0])
        if idx != len(values) + 1:
            raise ValueError(f"line {lineno}: index {idx}, expected {len(values) + 1}")
        values.append(float(parts[1]))
    return GammaSequence(tuple(values))
