"""Combinatorics of the symmetric group S_p.

Conjugacy classes of S_p are labelled by integer partitions of p (the cycle
type).  Everything here is exact integer arithmetic; the sums appearing in
the Haar moment expansion are organised class by class so that raw
permutations only need to be enumerated in oracles and in the class algebra
precomputation.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

from .errors import ConditionError, ResourceCapError

P_CAP = 12


def _check_p(p: int, cap: int = P_CAP) -> None:
    if not isinstance(p, int) or p < 1:
        raise ConditionError(f"p must be a positive integer, got {p!r}")
    if p > cap:
        raise ResourceCapError(f"p={p} exceeds the hard cap p <= {cap}")


@dataclass(frozen=True, order=False)
class CycleType:
    """A partition of p labelling a conjugacy class of S_p.

    ``parts`` are stored in non-increasing order.  Construct from any
    iterable of positive integers; it is sorted on the way in.
    """

    parts: tuple[int, ...]

    def __init__(self, parts: Iterable[int]):
        parts = tuple(sorted((int(a) for a in parts), reverse=True))
        if not parts or parts[-1] < 1:
            raise ConditionError(f"cycle type needs positive parts, got {parts}")
        object.__setattr__(self, "parts", parts)

    @classmethod
    def parse(cls, text: str) -> "CycleType":
        """Parse ``"3,1"`` or ``"[3, 1]"``."""
        stripped = text.strip().strip("[]()")
        try:
            return cls(int(tok) for tok in stripped.replace(" ", "").split(",") if tok)
        except ValueError as exc:
            raise ConditionError(f"cannot parse cycle type {text!r}") from exc

    @classmethod
    def identity(cls, p: int) -> "CycleType":
        return cls((1,) * p)

    @property
    def p(self) -> int:
        return sum(self.parts)

    @property
    def cycle_count(self) -> int:
        return len(self.parts)

    @property
    def transposition_distance(self) -> int:
        return self.p - len(self.parts)

    @property
    def is_derangement(self) -> bool:
        return self.parts[-1] >= 2

    @property
    def is_perfect_matching(self) -> bool:
        return all(a == 2 for a in self.parts)

    @property
    def multiplicities(self) -> dict[int, int]:
        """Map cycle length j -> number m_j of cycles of that length."""
        return dict(Counter(self.parts))

    def label(self) -> str:
        return ",".join(str(a) for a in self.parts)

    def __str__(self) -> str:
        return "[" + self.label() + "]"

    def __repr__(self) -> str:
        return f"CycleType({list(self.parts)})"

    def __iter__(self) -> Iterator[int]:
        return iter(self.parts)

    def __len__(self) -> int:
        return len(self.parts)


@dataclass(frozen=True)
class Permutation:
    """A permutation of {1..p} in one-line notation.

    ``images[i-1]`` is the image of ``i``.  Products compose right to left,
    ``(sigma * tau)(i) == sigma(tau(i))``.
    """

    images: tuple[int, ...]

    def __init__(self, images: Iterable[int]):
        images = tuple(int(x) for x in images)
        if sorted(images) != list(range(1, len(images) + 1)):
            raise ConditionError(f"not a permutation of 1..{len(images)}: {images}")
        object.__setattr__(self, "images", images)

    @classmethod
    def identity(cls, p: int) -> "Permutation":
        return cls(range(1, p + 1))

    @classmethod
    def from_cycles(cls, p: int, *cycles: Sequence[int]) -> "Permutation":
        """Build from disjoint cycles, e.g. ``from_cycles(3, (1, 2))``."""
        images = list(range(1, p + 1))
        for cyc in cycles:
            for a, b in zip(cyc, cyc[1:] + type(cyc)(cyc[:1])):
                images[a - 1] = b
        return cls(images)

    @classmethod
    def from_zero_based(cls, images: Sequence[int]) -> "Permutation":
        return cls(x + 1 for x in images)

    @property
    def p(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def __mul__(self, other: "Permutation") -> "Permutation":
        return compose(self, other)

    def zero_based(self) -> tuple[int, ...]:
        return tuple(x - 1 for x in self.images)

    def cycles(self) -> list[tuple[int, ...]]:
        seen = [False] * self.p
        out = []
        for start in range(1, self.p + 1):
            if seen[start - 1]:
                continue
            cyc = []
            i = start
            while not seen[i - 1]:
                seen[i - 1] = True
                cyc.append(i)
                i = self.images[i - 1]
            out.append(tuple(cyc))
        return out


def compose(sigma: Permutation, tau: Permutation) -> Permutation:
    """Return sigma∘tau, i.e. apply tau first."""
    if sigma.p != tau.p:
        raise ConditionError("cannot compose permutations of different degree")
    return Permutation(sigma.images[t - 1] for t in tau.images)


def invert(sigma: Permutation) -> Permutation:
    inv = [0] * sigma.p
    for i, s in enumerate(sigma.images, start=1):
        inv[s - 1] = i
    return Permutation(inv)


def cycle_type(sigma: Permutation | Sequence[int]) -> CycleType:
    """Cycle type of a :class:`Permutation` or of a 0-based image tuple."""
    if isinstance(sigma, Permutation):
        images = sigma.zero_based()
    else:
        images = tuple(sigma)
    n = len(images)
    seen = [False] * n
    parts = []
    for start in range(n):
        if seen[start]:
            continue
        length = 0
        i = start
        while not seen[i]:
            seen[i] = True
            i = images[i]
            length += 1
        parts.append(length)
    return CycleType(parts)


def all_permutations(p: int) -> Iterator[Permutation]:
    for images in itertools.permutations(range(1, p + 1)):
        yield Permutation(images)


def class_representative(lam: CycleType) -> tuple[int, ...]:
    """A 0-based permutation with cycle type ``lam`` (consecutive cycles)."""
    images = []
    start = 0
    for a in lam.parts:
        images.extend(start + (k + 1) % a for k in range(a))
        start += a
    return tuple(images)


# ---------------------------------------------------------------------------
# partitions and class sizes


@lru_cache(maxsize=None)
def _partitions(p: int, largest: int) -> tuple[tuple[int, ...], ...]:
    if p == 0:
        return ((),)
    out = []
    for first in range(min(p, largest), 0, -1):
        for rest in _partitions(p - first, first):
            out.append((first,) + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def partitions(p: int) -> tuple[CycleType, ...]:
    """All partitions of p, in reverse lexicographic order.

    >>> [str(c) for c in partitions(3)]
    ['[3]', '[2,1]', '[1,1,1]']
    """
    _check_p(p)
    return tuple(CycleType(parts) for parts in _partitions(p, p))


def class_size(lam: CycleType) -> int:
    """Number of permutations of S_p with cycle type ``lam``."""
    denom = 1
    for j, m in lam.multiplicities.items():
        denom *= j**m * math.factorial(m)
    return math.factorial(lam.p) // denom


def transposition_distance(lam: CycleType) -> int:
    return lam.transposition_distance


# ---------------------------------------------------------------------------
# counting functions


def catalan(n: int) -> int:
    if n < 0:
        raise ConditionError("Catalan numbers need n >= 0")
    return math.comb(2 * n, n) // (n + 1)


def mobius_coefficient(lam: CycleType) -> int:
    """Product of Cat_{a-1} over the cycle lengths a of ``lam``.

    This is the magnitude of the leading 1/d coefficient of the Weingarten
    function on that class.
    """
    out = 1
    for a in lam.parts:
        out *= catalan(a - 1)
    return out


@lru_cache(maxsize=None)
def stirling_first_unsigned(p: int, m: int) -> int:
    """Number of permutations of S_p with exactly m cycles."""
    if p < 0 or m < 0 or m > p:
        raise ConditionError(f"stirling number needs 0 <= m <= p, got p={p}, m={m}")
    if p == 0:
        return 1
    if m == 0:
        return 0
    below = stirling_first_unsigned(p - 1, m) if m <= p - 1 else 0
    return stirling_first_unsigned(p - 1, m - 1) + (p - 1) * below


@lru_cache(maxsize=None)
def derangement_count(p: int) -> int:
    """Number of fixed-point-free permutations of p objects."""
    if p < 0:
        raise ConditionError("p must be >= 0")
    if p == 0:
        return 1
    if p == 1:
        return 0
    return (p - 1) * (derangement_count(p - 1) + derangement_count(p - 2))


def ceil_factorial_over_e(p: int) -> int:
    """Exact value of ceil(p!/e).

    p!/e differs from the derangement number by an alternating tail whose
    sign is (-1)^(p+1), so the ceiling is D_p for even p and D_p + 1 for odd p.
    """
    return derangement_count(p) + (p % 2)


def double_factorial(n: int) -> int:
    """n!! with the conventions 0!! = (-1)!! = 1."""
    if n < -1:
        raise ConditionError("double factorial needs n >= -1")
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def perfect_matching_count(p: int) -> int:
    if p % 2:
        return 0
    return double_factorial(p - 1)


def derangement_classes(p: int) -> list[tuple[CycleType, int]]:
    """Derangement conjugacy classes (all parts >= 2) with their sizes."""
    return [(lam, class_size(lam)) for lam in partitions(p) if lam.is_derangement]


def derangements_by_distance(p: int) -> dict[int, int]:
    """Map k -> number of derangements of S_p with transposition distance k."""
    out: dict[int, int] = {}
    for lam, size in derangement_classes(p):
        k = lam.transposition_distance
        out[k] = out.get(k, 0) + size
    return dict(sorted(out.items()))
