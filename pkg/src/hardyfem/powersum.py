"""Finite power sums ``sum_i c_i * r**s_i`` with closed-form calculus.

Coefficient functions, manufactured solutions and synthesized sources are
all restricted to this class.
"""

from __future__ import annotations

import math
from typing import Iterable

import numpy as np

EXP_TOL = 1e-12


def _canonical(terms: Iterable[tuple[float, float]]):
    merged: list[list[float]] = []
    for c, s in sorted(((float(c), float(s)) for c, s in terms), key=lambda t: t[1]):
        if not (math.isfinite(c) and math.isfinite(s)):
            raise ValueError(f"non-finite term {c}*r^{s}")
        if merged and abs(merged[-1][1] - s) <= EXP_TOL * max(1.0, abs(s)):
            merged[-1][0] += c
        else:
            merged.append([c, s])
    return tuple((c, s) for c, s in merged if c != 0.0)


class PowerSum:
    """Radial function ``r -> sum c * r**s``."""

    __slots__ = ("terms",)

    def __init__(self, terms=()):
        self.terms = _canonical(terms)

    @classmethod
    def constant(cls, c: float) -> "PowerSum":
        return cls([(c, 0.0)])

    @classmethod
    def monomial(cls, c: float, s: float) -> "PowerSum":
        return cls([(c, s)])

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        for c, s in self.terms:
            out = out + (c if s == 0.0 else c * r**s)
        return out if out.ndim else float(out)

    def derivative(self) -> "PowerSum":
        return PowerSum((c * s, s - 1.0) for c, s in self.terms if s != 0.0)

    def divergence(self, N: int) -> "PowerSum":
        """``div(F e_r) = r^(1-N) (r^(N-1) F)'`` for a radial flux ``F``."""
        return PowerSum((c * (s + N - 1), s - 1.0) for c, s in self.terms)

    def shift(self, ds: float) -> "PowerSum":
        """Multiply by ``r**ds``."""
        return PowerSum((c, s + ds) for c, s in self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def exponents(self):
        return tuple(s for _, s in self.terms)

    @property
    def min_exponent(self) -> float:
        return min(self.exponents) if self.terms else math.inf

    def in_h1(self, N: int) -> bool:
        """``|grad u|^2`` integrable on the unit ball of R^N."""
        return all(s > -(N - 2) / 2 for c, s in self.terms if s != 0.0)

    def integrable(self, N: int, power: float = 1.0) -> bool:
        """Whether ``|u|^power`` is integrable near the origin in R^N."""
        if self.is_zero:
            return True
        return self.min_exponent * power > -N

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = PowerSum.constant(other)
        if not isinstance(other, PowerSum):
            return NotImplemented
        return PowerSum(self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self):
        return PowerSum((-c, s) for c, s in self.terms)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return PowerSum((c * other, s) for c, s in self.terms)
        if not isinstance(other, PowerSum):
            return NotImplemented
        return PowerSum(
            (c1 * c2, s1 + s2) for c1, s1 in self.terms for c2, s2 in other.terms
        )

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if int(k) != k or k < 0:
            raise ValueError("power sums are closed under nonnegative integer powers only")
        out = PowerSum.constant(1.0)
        for _ in range(int(k)):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, PowerSum):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def allclose(self, other: "PowerSum", rtol=1e-12, atol=1e-12) -> bool:
        diff = self - other
        scale = max([abs(c) for c, _ in self.terms + other.terms] + [1.0])
        return all(abs(c) <= atol + rtol * scale for c, _ in diff.terms)

    def to_expression(self) -> str:
        """Serialize to the ``term ("+" term)*`` grammar of the config files."""
        if not self.terms:
            return "0"
        parts = []
        for c, s in self.terms:
            cs = format(c, ".17g")
            parts.append(cs if s == 0.0 else f"{cs}*r^{format(s, '.17g')}")
        return " + ".join(parts)

    def __repr__(self):
        return f"PowerSum({self.to_expression()!r})"
