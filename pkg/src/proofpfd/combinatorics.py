"""Exact integer binomials and the alternating coefficients S(M, N, x)."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import ValidationError

MAX_BINOMIAL_N = 62
MAX_COMPONENTS = 30


def binomial(n: int, k: int) -> int:
    if k < 0 or n < 0 or k > n:
        raise ValueError(f"binomial({n}, {k}) requires 0 <= k <= n")
    if n > MAX_BINOMIAL_N:
        raise ValueError(f"binomial({n}, {k}) outside supported range n <= {MAX_BINOMIAL_N}")
    return math.comb(n, k)


@dataclass(frozen=True)
class SCoefficients:
    m: int
    n_components: int
    values: tuple[int, ...]

    @property
    def orders(self) -> range:
        """The exponents x = M..N matching ``values``."""
        return range(self.m, self.n_components + 1)

    def __getitem__(self, x: int) -> int:
        if not self.m <= x <= self.n_components:
            raise IndexError(x)
        return self.values[x - self.m]

    def __iter__(self):
        return iter(zip(self.orders, self.values))


def s_coefficients(m: int, n_components: int) -> SCoefficients:
    """S(M, N, x) = sum_{k=M..x} C(N, x) C(x, k) (-1)^(x-k), for x = M..N.

    These are the weights of e^{-x lambda t} in the expanded availability of a
    MooN system. Computed in exact integer arithmetic.
    """
    if not 1 <= m <= n_components:
        raise ValidationError(f"invalid architecture {m}oo{n_components}", field="m")
    if n_components > MAX_COMPONENTS:
        raise ValidationError(
            f"N = {n_components} exceeds supported maximum {MAX_COMPONENTS}", field="n")
    values = []
    for x in range(m, n_components + 1):
        c_nx = binomial(n_components, x)
        values.append(sum(c_nx * binomial(x, k) * (-1) ** (x - k) for k in range(m, x + 1)))
    return SCoefficients(m, n_components, tuple(values))
