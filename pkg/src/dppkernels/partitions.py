"""Young diagrams and their point configurations on the half-integer lattice.

Half-integers are never stored as floats.  A point ``x`` of ``Z + 1/2`` is kept
as the odd integer ``2x`` (see :class:`LatticePoint`); all configuration
membership tests are therefore exact integer comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

ENUMERATION_CAP = 30


class LatticePoint(int):
    """A point ``x`` of the half-integer lattice, stored as the odd integer ``2x``.

    ``LatticePoint(5)`` is the point ``5/2``.  Use :meth:`from_value` to build
    one from the half-integer itself.
    """

    def __new__(cls, twice_x: int) -> "LatticePoint":
        if isinstance(twice_x, bool) or int(twice_x) != twice_x:
            raise TypeError(f"twice_x must be an integer, got {twice_x!r}")
        if int(twice_x) % 2 == 0:
            raise ValueError(f"twice_x must be odd (got {twice_x}); {twice_x / 2} is not a half-integer")
        return super().__new__(cls, int(twice_x))

    @classmethod
    def from_value(cls, x: float | Fraction) -> "LatticePoint":
        doubled = 2 * Fraction(x)
        if doubled.denominator != 1:
            raise ValueError(f"{x} is not a half-integer")
        return cls(int(doubled))

    @property
    def twice_x(self) -> int:
        return int(self)

    @property
    def x(self) -> float:
        return int(self) / 2

    def __repr__(self) -> str:
        return f"LatticePoint({int(self)}/2)"


def as_lattice_point(v) -> LatticePoint:
    """Coerce a half-integer value (or a :class:`LatticePoint`) to a lattice point.

    Plain integers are rejected rather than guessed at: they are never
    half-integers, and reading them as doubled coordinates would be ambiguous.
    """
    if isinstance(v, LatticePoint):
        return v
    if isinstance(v, (int,)) and not isinstance(v, bool):
        raise ValueError(f"{v} is an integer, not a half-integer; pass LatticePoint({2 * v}) for doubled input")
    return LatticePoint.from_value(Fraction(v))


@dataclass(frozen=True)
class Partition:
    """A Young diagram as a weakly decreasing tuple of positive parts."""

    parts: tuple[int, ...] = ()

    def __init__(self, parts: Iterable[int] = ()):
        cleaned = tuple(int(p) for p in parts)
        while cleaned and cleaned[-1] == 0:
            cleaned = cleaned[:-1]
        for i, p in enumerate(cleaned):
            if p < 1:
                raise ValueError(f"parts must be positive, got {cleaned}")
            if i and p > cleaned[i - 1]:
                raise ValueError(f"parts must be weakly decreasing, got {cleaned}")
        object.__setattr__(self, "parts", cleaned)

    def size(self) -> int:
        return sum(self.parts)

    def length(self) -> int:
        return len(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __iter__(self) -> Iterator[int]:
        return iter(self.parts)

    def __getitem__(self, i: int) -> int:
        return self.parts[i]

    def row(self, i: int) -> int:
        """Return ``lambda_i`` for a 1-based row index, zero past the last row."""
        return self.parts[i - 1] if i <= len(self.parts) else 0

    def boxes(self) -> Iterator[tuple[int, int]]:
        """Yield 1-based ``(row, column)`` coordinates of every box."""
        for i, p in enumerate(self.parts, start=1):
            for j in range(1, p + 1):
                yield i, j

    def contents(self) -> Iterator[int]:
        """Yield the content ``j - i`` of every box."""
        for i, j in self.boxes():
            yield j - i

    def contains(self, other: "Partition") -> bool:
        if len(other) > len(self):
            return False
        return all(a >= b for a, b in zip(self.parts, other.parts))

    def to_json(self) -> list[int]:
        return list(self.parts)

    @classmethod
    def from_json(cls, data: Sequence[int]) -> "Partition":
        return cls(data)

    def __repr__(self) -> str:
        return f"Partition({self.parts})"


@dataclass(frozen=True)
class PointConfigWindow:
    """Restriction of a point configuration to the window ``[lo, hi]``."""

    lo: LatticePoint
    hi: LatticePoint
    members: frozenset[LatticePoint]

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("empty window: lo > hi")
        for m in self.members:
            if not self.lo <= m <= self.hi:
                raise ValueError(f"{m!r} lies outside [{self.lo!r}, {self.hi!r}]")

    def __contains__(self, point) -> bool:
        return as_lattice_point(point) in self.members

    def to_json(self) -> list[int]:
        return sorted(int(m) for m in self.members)


def size(p: Partition) -> int:
    return p.size()


def conjugate(p: Partition) -> Partition:
    """Transpose the diagram: the parts of the result are the column lengths."""
    if not p.parts:
        return Partition()
    return Partition(sum(1 for r in p.parts if r > j) for j in range(p.parts[0]))


@lru_cache(maxsize=None)
def _dimension(parts: tuple[int, ...]) -> int:
    n = sum(parts)
    if n == 0:
        return 1
    cols = conjugate(Partition(parts)).parts
    hooks = 1
    for i, r in enumerate(parts):
        for j in range(r):
            hooks *= (r - j - 1) + (cols[j] - i - 1) + 1
    dim, rem = divmod(math.factorial(n), hooks)
    assert rem == 0, "hook product must divide n!"
    return dim


def dimension(p: Partition) -> int:
    """Number of standard Young tableaux of shape ``p`` (hook length formula, exact)."""
    return _dimension(p.parts)


def pochhammer_lambda(z: complex, p: Partition) -> complex:
    """Generalized Pochhammer symbol: the product of ``z + content`` over all boxes."""
    result = 1
    for c in p.contents():
        result *= z + c
    return result


def pochhammer_lambda_rows(z: complex, p: Partition) -> complex:
    """Row form ``prod_i (z - i + 1)_{lambda_i}`` of the generalized Pochhammer symbol."""
    result = 1
    for i, r in enumerate(p.parts, start=1):
        for k in range(r):
            result *= z + (k - i + 1)
    return result


def semi_infinite_points(p: Partition, lo: int) -> Iterator[int]:
    """Yield doubled coordinates ``2(lambda_i - i) + 1`` for ``i = 1, 2, ...`` down to ``lo``.

    The sequence is strictly decreasing, so iteration stops at the first
    point below ``lo``.
    """
    i = 1
    while True:
        x2 = 2 * (p.row(i) - i) + 1
        if x2 < lo:
            return
        yield x2
        i += 1


def to_semi_infinite_config(p: Partition, window: tuple) -> PointConfigWindow:
    """Restrict ``{lambda_i - i + 1/2 : i >= 1}`` to the window ``(lo, hi)``."""
    lo, hi = (as_lattice_point(w) for w in window)
    members = frozenset(LatticePoint(x2) for x2 in semi_infinite_points(p, lo) if x2 <= hi)
    return PointConfigWindow(lo, hi, members)


def to_N_config(p: Partition, N: int) -> tuple[int, ...]:
    """Map ``p`` to the ``N``-point configuration ``l_i = lambda_i + N - i`` on ``Z_+``.

    Raises
    ------
    ValueError
        If ``p`` has more than ``N`` rows; such diagrams carry zero weight in
        the first degenerate series and have no ``N``-point image.
    """
    if N < 1:
        raise ValueError("N must be positive")
    if len(p) > N:
        raise ValueError(f"partition {p.parts} has {len(p)} rows > N = {N}")
    return tuple(p.row(i) + N - i for i in range(1, N + 1))


def from_N_config(config: Sequence[int]) -> Partition:
    """Inverse of :func:`to_N_config`."""
    N = len(config)
    return Partition(l - N + i for i, l in enumerate(sorted(config, reverse=True), start=1))


@lru_cache(maxsize=None)
def _partitions_of(n: int, largest: int) -> tuple[tuple[int, ...], ...]:
    if n == 0:
        return ((),)
    out = []
    for k in range(min(n, largest), 0, -1):
        for rest in _partitions_of(n - k, k):
            out.append((k,) + rest)
    return tuple(out)


def partitions_of(n: int) -> list[Partition]:
    """All partitions of ``n`` in lexicographically decreasing order."""
    return [Partition(parts) for parts in _partitions_of(n, n)]


def enumerate_partitions(max_size: int, cap: int = ENUMERATION_CAP) -> Iterator[Partition]:
    """Yield every partition with ``|p| <= max_size`` once, ordered by size then
    lexicographically decreasing.

    Raises
    ------
    ValueError
        If ``max_size`` exceeds ``cap``.
    """
    if max_size < 0:
        raise ValueError("max_size must be nonnegative")
    if max_size > cap:
        raise ValueError(f"max_size {max_size} exceeds the enumeration cap {cap}")
    for n in range(max_size + 1):
        yield from partitions_of(n)
