"""Weingarten functions of the unitary group U(d).

The Weingarten function Wg(sigma, d) is the class function on S_p inverse to
the Gram function tau -> d^{c(tau)} under convolution:

    sum_{tau in S_p} Wg(sigma tau^{-1}) d^{c(tau)} = delta(sigma, id).

Restricted to class functions this is a square integer linear system with
one unknown per partition of p.  It is solved here in exact rational
arithmetic, so every value is an exact :class:`fractions.Fraction`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .classalgebra import class_product_counts
from .errors import ConditionError, ResourceCapError, UnsupportedRegimeError
from .perm_comb import (
    P_CAP,
    CycleType,
    class_size,
    mobius_coefficient,
    partitions,
)


@dataclass(frozen=True)
class WeingartenTable:
    """Exact values of Wg(., d) on every conjugacy class of S_p."""

    p: int
    d: int
    values: dict[CycleType, Fraction] = field(repr=False)

    def __getitem__(self, lam: CycleType | Sequence[int]) -> Fraction:
        if not isinstance(lam, CycleType):
            lam = CycleType(lam)
        return self.values[lam]

    def __iter__(self):
        return iter(self.values.items())

    def ordered(self) -> list[Fraction]:
        """Values in the canonical partition order."""
        return [self.values[lam] for lam in partitions(self.p)]

    def as_floats(self) -> dict[CycleType, float]:
        return {lam: float(v) for lam, v in self.values.items()}

    def class_sum(self) -> Fraction:
        """Sum of Wg over all of S_p, i.e. weighted by class sizes."""
        return sum((class_size(lam) * v for lam, v in self.values.items()), Fraction(0))


def solve_exact(matrix: Sequence[Sequence[int | Fraction]], rhs: Sequence[int | Fraction]) -> list[Fraction]:
    """Solve a square linear system exactly by Gauss-Jordan elimination.

    Raises :class:`ConditionError` when the matrix is singular.
    """
    n = len(matrix)
    a = [[Fraction(x) for x in row] + [Fraction(b)] for row, b in zip(matrix, rhs)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            raise ConditionError("singular linear system")
        a[col], a[pivot] = a[pivot], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[n] for row in a]


def gram_matrix(p: int, d: int, allow_large: bool = False) -> list[list[int]]:
    """Class-collapsed Gram matrix M with M @ w = e_id for the Weingarten vector w.

    Row l is the orthogonality relation evaluated at the representative of
    class l; column k collects every tau whose product with it lands in k.
    """
    counts = class_product_counts(p, allow_large=allow_large)
    classes = partitions(p)
    dpow = [d ** len(lam) for lam in classes]
    nc = len(classes)
    return [
        [sum(int(counts[row, nu, col]) * dpow[nu] for nu in range(nc)) for col in range(nc)]
        for row in range(nc)
    ]


@lru_cache(maxsize=256)
def weingarten_table(p: int, d: int, allow_large: bool = False) -> WeingartenTable:
    """Exact Weingarten table for S_p at dimension d (requires d >= p).

    >>> weingarten_table(2, 2)[[2]]
    Fraction(-1, 6)
    """
    if not isinstance(p, int) or p < 1:
        raise ConditionError(f"p must be a positive integer, got {p!r}")
    if p > P_CAP:
        raise ResourceCapError(f"p={p} exceeds the hard cap p <= {P_CAP}")
    if d < p:
        raise UnsupportedRegimeError(
            f"d={d} < p={p}: the Gram matrix is singular (pseudo-inverse regime not supported)"
        )
    classes = partitions(p)
    rhs = [0] * len(classes)
    rhs[-1] = 1  # identity class is last in canonical order
    w = solve_exact(gram_matrix(p, d, allow_large), rhs)
    return WeingartenTable(p, d, dict(zip(classes, w)))


def weingarten(lam: CycleType | Sequence[int], d: int) -> Fraction:
    if not isinstance(lam, CycleType):
        lam = CycleType(lam)
    return weingarten_table(lam.p, d)[lam]


def closed_form_small_p(lam: CycleType | Sequence[int], d: int) -> Fraction:
    """Reference rational functions of d for p <= 4."""
    if not isinstance(lam, CycleType):
        lam = CycleType(lam)
    if lam.p > 4:
        raise ConditionError("closed forms are tabulated for p <= 4 only")
    d = Fraction(d)
    d2 = d * d
    forms = {
        (1,): lambda: 1 / d,
        (2,): lambda: -1 / (d * (d2 - 1)),
        (1, 1): lambda: 1 / (d2 - 1),
        (3,): lambda: 2 / ((d2 - 4) * (d2 - 1) * d),
        (2, 1): lambda: -1 / ((d2 - 4) * (d2 - 1)),
        (1, 1, 1): lambda: (d2 - 2) / ((d2 - 4) * (d2 - 1) * d),
        (4,): lambda: -5 / ((d2 - 9) * (d2 - 4) * (d2 - 1) * d),
        (3, 1): lambda: (2 * d2 - 3) / ((d2 - 9) * (d2 - 4) * (d2 - 1) * d2),
        (2, 2): lambda: (d2 + 6) / ((d2 - 9) * (d2 - 4) * (d2 - 1) * d2),
        (2, 1, 1): lambda: -(d2 - 4) / ((d2 - 9) * (d2 - 4) * (d2 - 1) * d),
        (1, 1, 1, 1): lambda: (d2 * d2 - 8 * d2 + 6) / ((d2 - 9) * (d2 - 4) * (d2 - 1) * d2),
    }
    try:
        return forms[lam.parts]()
    except ZeroDivisionError as exc:
        raise ConditionError(f"closed form for {lam} has a pole at d={d}") from exc


def asymptotic_estimate(lam: CycleType | Sequence[int], d: int) -> float:
    """Leading large-d term (-1)^|lam| Moeb(lam) / d^(p+|lam|)."""
    if not isinstance(lam, CycleType):
        lam = CycleType(lam)
    k = lam.transposition_distance
    return (-1) ** k * mobius_coefficient(lam) / float(d) ** (lam.p + k)


def collins_matsumoto_p_max(d: int) -> int:
    """Largest p with p <= (d/sqrt 6)^(4/7), computed exactly as 36 p^7 <= d^4."""
    if d < 1:
        return 0
    k = int((d**4 / 36) ** (1 / 7)) + 2
    while 36 * k**7 > d**4:
        k -= 1
    return k


def collins_matsumoto_interval(
    lam: CycleType | Sequence[int], d: int, form: str = "sharp"
) -> tuple[float, float]:
    """Two-sided bound on |Wg(lam, d)|, valid for p <= (d/sqrt 6)^(4/7).

    ``form="sharp"`` uses d^(p+|lam|) in the denominator; ``form="weak"``
    uses (d^2-1)^(p/2) d^|lam|.
    """
    if not isinstance(lam, CycleType):
        lam = CycleType(lam)
    p, k = lam.p, lam.transposition_distance
    if p > collins_matsumoto_p_max(d):
        raise ConditionError(
            f"p={p} exceeds floor((d/sqrt6)^(4/7))={collins_matsumoto_p_max(d)} at d={d}"
        )
    moeb = mobius_coefficient(lam)
    upper_factor = 1.0 / (1.0 - 6.0 * p**3.5 / d**2)
    if form == "sharp":
        base = moeb / float(d) ** (p + k)
        return base / (1.0 - (p - 1) / d**2), base * upper_factor
    if form == "weak":
        base = moeb / ((float(d) ** 2 - 1.0) ** (p / 2) * float(d) ** k)
        return base * (1.0 + (p / 2 - 1) / d**2), base * upper_factor
    raise ValueError(f"unknown form {form!r}")


def weingarten_class_sum(p: int, d: int) -> Fraction:
    """Closed form (d-1)!/(p+d-1)! for the sum of Wg over S_p."""
    if p < 1 or d < 1:
        raise ConditionError("need p >= 1 and d >= 1")
    return Fraction(math.factorial(d - 1), math.factorial(p + d - 1))
