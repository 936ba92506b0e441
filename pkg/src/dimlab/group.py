"""Z^d, its finite subsets, and box Følner sequences."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence

from .errors import DimensionMismatch

GroupElement = tuple  # tuple[int, ...]

SUPPORTED_DIMENSIONS = (1, 2, 3)


def norm(g: GroupElement) -> int:
    """Max-norm word length |g|."""
    return max((abs(c) for c in g), default=0)


def add(g: GroupElement, h: GroupElement) -> GroupElement:
    if len(g) != len(h):
        raise DimensionMismatch(f"cannot add {g} and {h}")
    return tuple(a + b for a, b in zip(g, h))


def _check_dimension(d: int) -> None:
    if d not in SUPPORTED_DIMENSIONS:
        raise DimensionMismatch(f"dimension must be one of {SUPPORTED_DIMENSIONS}, got {d}")


@dataclass(frozen=True)
class FiniteSubset:
    """A finite subset of Z^d in canonical (sorted, de-duplicated) form."""

    d: int
    elements: tuple

    @classmethod
    def of(cls, elements: Iterable[Sequence[int] | int], d: int | None = None) -> "FiniteSubset":
        pts = []
        for e in elements:
            pts.append((int(e),) if isinstance(e, int) else tuple(int(c) for c in e))
        if d is None:
            if not pts:
                raise ValueError("dimension required for an empty subset")
            d = len(pts[0])
        for p in pts:
            if len(p) != d:
                raise DimensionMismatch(f"element {p} does not live in Z^{d}")
        return cls(d, tuple(sorted(set(pts))))

    @classmethod
    def box(cls, lo: Sequence[int], hi: Sequence[int]) -> "FiniteSubset":
        """The box prod_i [lo_i, hi_i] (inclusive bounds)."""
        ranges = [range(a, b + 1) for a, b in zip(lo, hi)]
        return cls(len(lo), tuple(product(*ranges)))

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, g) -> bool:
        return tuple(g) in self._index

    @property
    def _index(self) -> dict:
        idx = self.__dict__.get("_idx")
        if idx is None:
            idx = {g: i for i, g in enumerate(self.elements)}
            object.__setattr__(self, "_idx", idx)
        return idx

    def position(self, g) -> int:
        return self._index[tuple(g)]

    def issubset(self, other: "FiniteSubset") -> bool:
        return all(g in other._index for g in self.elements)

    def translate(self, g: GroupElement) -> "FiniteSubset":
        if len(g) != self.d:
            raise DimensionMismatch(f"translation {g} has wrong dimension for Z^{self.d}")
        return FiniteSubset.of((add(e, g) for e in self.elements), self.d)

    def sumset(self, other: "FiniteSubset") -> "FiniteSubset":
        if other.d != self.d:
            raise DimensionMismatch("sumset of subsets of different dimension")
        return FiniteSubset.of((add(a, b) for a in self.elements for b in other.elements), self.d)

    def union(self, other: "FiniteSubset") -> "FiniteSubset":
        if other.d != self.d:
            raise DimensionMismatch("union of subsets of different dimension")
        return FiniteSubset.of(self.elements + other.elements, self.d)

    def difference(self, other: "FiniteSubset") -> "FiniteSubset":
        return FiniteSubset(self.d, tuple(g for g in self.elements if g not in other._index))

    def bounds(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        lo = tuple(min(e[i] for e in self.elements) for i in range(self.d))
        hi = tuple(max(e[i] for e in self.elements) for i in range(self.d))
        return lo, hi

    def to_json(self) -> list[list[int]]:
        return [list(e) for e in self.elements]

    @classmethod
    def from_json(cls, data: list, d: int | None = None) -> "FiniteSubset":
        return cls.of(data, d)


def ball(d: int, radius: int) -> FiniteSubset:
    """W_radius = {g : |g| <= radius}; empty for negative radius."""
    if radius < 0:
        return FiniteSubset(d, ())
    return FiniteSubset.box((-radius,) * d, (radius,) * d)


def box_folner(d: int, n: int) -> FiniteSubset:
    """The box [0, n)^d."""
    _check_dimension(d)
    if n < 1:
        raise ValueError(f"Følner index must be >= 1, got {n}")
    return FiniteSubset.box((0,) * d, (n - 1,) * d)


def folner_defect(F: FiniteSubset, g: GroupElement) -> Fraction:
    """|F Δ (g + F)| / |F| as an exact rational."""
    g = (g,) if isinstance(g, int) else tuple(g)
    if len(g) != F.d:
        raise DimensionMismatch(f"element {g} does not match dimension {F.d}")
    if not len(F):
        raise ValueError("Følner defect of the empty set is undefined")
    shifted = set(add(e, g) for e in F.elements)
    own = set(F.elements)
    return Fraction(len(own ^ shifted), len(own))


@dataclass(frozen=True)
class FolnerSequence:
    """Either the box rule n -> [0, n)^d or an explicit finite list of members."""

    d: int
    members: tuple | None = None

    def __post_init__(self):
        _check_dimension(self.d)
        if self.members is not None:
            sizes = [len(F) for F in self.members]
            if not sizes or min(sizes) < 1:
                raise ValueError("every Følner member must be non-empty")
            if any(b < a for a, b in zip(sizes, sizes[1:])):
                raise ValueError("Følner member sizes must be non-decreasing")
            if any(F.d != self.d for F in self.members):
                raise DimensionMismatch("Følner member of the wrong dimension")

    @classmethod
    def boxes(cls, d: int = 1) -> "FolnerSequence":
        return cls(d)

    @classmethod
    def explicit(cls, members: Sequence[FiniteSubset]) -> "FolnerSequence":
        return cls(members[0].d, tuple(members))

    @property
    def is_box(self) -> bool:
        return self.members is None

    @property
    def length(self) -> int | None:
        return None if self.members is None else len(self.members)

    def __getitem__(self, n: int) -> FiniteSubset:
        if n < 1:
            raise IndexError("Følner sequences are indexed from 1")
        if self.members is None:
            return box_folner(self.d, n)
        if n > len(self.members):
            raise IndexError(f"explicit Følner list has only {len(self.members)} members")
        return self.members[n - 1]

    def label(self) -> str:
        if self.members is None:
            return f"box[0,n)^{self.d}"
        return f"explicit[{len(self.members)} members, Z^{self.d}]"

    def to_json(self) -> dict:
        if self.members is None:
            return {"kind": "box", "d": self.d}
        return {"kind": "explicit", "d": self.d, "members": [F.to_json() for F in self.members]}


@dataclass(frozen=True)
class GrowthReport:
    ratios: tuple
    passes: bool
    note: str


def growth_check(seq: FolnerSequence, n_max: int) -> GrowthReport:
    """Finite witness for |F_n| / log n -> infinity.

    Returns the ratios for n = 2..n_max. ``passes`` says the ratios are
    non-decreasing from n = 3 on, which is necessary (not sufficient) for
    divergence.
    """
    if n_max < 3:
        raise ValueError("growth_check needs n_max >= 3")
    ratios = tuple(len(seq[n]) / math.log(n) for n in range(2, n_max + 1))
    tail = ratios[1:]
    passes = all(b >= a for a, b in zip(tail, tail[1:]))
    note = ("consistent with |F_n|/log n -> infinity for n <= %d" % n_max if passes
            else "ratios decrease on n in [3, %d]; hypothesis not witnessed" % n_max)
    return GrowthReport(ratios, passes, note)
