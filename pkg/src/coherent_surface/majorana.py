"""Symbolic Majorana monomials with exact phase bookkeeping.

Used to verify link orientations and to reduce logical operators to the
four unpaired corner Majoranas. Phases are kept as integer powers of ``i``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce


@dataclass(frozen=True)
class Monomial:
    """``i**phase * c_{k1} c_{k2} ... c_{kr}`` with ``k1 < k2 < ... < kr``."""

    phase: int
    indices: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "phase", self.phase % 4)

    def __mul__(self, other: "Monomial") -> "Monomial":
        a, b = self.indices, other.indices
        # sign of sorting the concatenation: count pairs (x in a, y in b) with x > y
        swaps = 0
        j = 0
        for y in b:
            while j < len(a) and a[j] <= y:
                j += 1
            swaps += len(a) - j
        merged = sorted(set(a) ^ set(b))
        return Monomial(self.phase + other.phase + 2 * (swaps % 2), tuple(merged))

    def __neg__(self) -> "Monomial":
        return Monomial(self.phase + 2, self.indices)

    @property
    def support(self) -> frozenset[int]:
        return frozenset(self.indices)

    def sign_against(self, other: "Monomial") -> int:
        """Return +1/-1 if ``self == ±other``; raise if they differ otherwise."""
        if self.indices != other.indices:
            raise ValueError(f"monomials have different supports: {self} vs {other}")
        d = (self.phase - other.phase) % 4
        if d == 0:
            return 1
        if d == 2:
            return -1
        raise ValueError(f"monomials differ by a factor of ±i: {self} vs {other}")


IDENTITY = Monomial(0, ())


def bilinear(p: int, q: int) -> Monomial:
    """The Hermitian pair operator ``i c_p c_q``."""
    if p == q:
        raise ValueError("bilinear needs two distinct Majoranas")
    if p < q:
        return Monomial(1, (p, q))
    return Monomial(3, (q, p))


def product(terms) -> Monomial:
    return reduce(lambda x, y: x * y, terms, IDENTITY)


def c4_stabilizer(c1: int, c2: int, c3: int, c4: int) -> Monomial:
    """``-c1 c2 c3 c4`` for one qubit's Majoranas in encoding order."""
    return -product(Monomial(0, (k,)) for k in (c1, c2, c3, c4))


def gf2_solve(rows: list[int], target: int, nvars: int) -> int | None:
    """Solve ``sum_j x_j * cols[j] = target`` over GF(2).

    ``rows`` holds one bitmask per variable (its column vector). Returns the
    variable bitmask or ``None`` when no solution exists.
    """
    pivots: dict[int, tuple[int, int]] = {}  # pivot bit -> (vector, combination)
    for j in range(nvars):
        vec, comb = rows[j], 1 << j
        while vec:
            top = vec.bit_length() - 1
            if top not in pivots:
                pivots[top] = (vec, comb)
                break
            pv, pc = pivots[top]
            vec ^= pv
            comb ^= pc
    vec, comb = target, 0
    while vec:
        top = vec.bit_length() - 1
        if top not in pivots:
            return None
        pv, pc = pivots[top]
        vec ^= pv
        comb ^= pc
    return comb
