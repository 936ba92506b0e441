"""Symbolic systems over Z^d, cylinders, and Bowen balls realized as cylinders.

The metric on a shift space is d(x, y) = 2^-min{|g| : x_g != y_g}.  An
``EpsilonLevel`` m stands for any eps strictly between 2^-(m+1) and 2^-m, so
d_F(x, y) < eps exactly when x and y agree on F + W_m, and the open and
closed Bowen balls are the same cylinder.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Iterable, Iterator, NamedTuple, Sequence

from .errors import BudgetExceeded, DimensionMismatch, InvalidSystem
from .group import FiniteSubset, ball as group_ball, norm

EpsilonLevel = int


def _check_level(m: int) -> None:
    if m < 0:
        raise ValueError(f"epsilon level must be >= 0, got {m}")


class _WordGraph:
    """De Bruijn graph of a 1-D SFT, pruned to states on bi-infinite paths.

    States are allowed words of length q = max(longest forbidden word - 1, 1).
    A finite pattern is extendable to a valid configuration iff it is read
    along some path of essential states.
    """

    def __init__(self, k: int, forbidden: tuple):
        self.k = k
        self.forbidden = forbidden
        longest = max((len(w) for w in forbidden), default=1)
        self.q = max(longest - 1, 1)
        states = [w for w in product(range(k), repeat=self.q) if self._allowed(w)]
        allowed_states = set(states)
        succ = {s: [s[1:] + (a,) for a in range(k)
                    if self._allowed(s + (a,)) and s[1:] + (a,) in allowed_states]
                for s in states}
        alive = set(states)
        changed = True
        while changed:
            changed = False
            has_in = {t for s in alive for t in succ[s] if t in alive}
            keep = {s for s in alive if s in has_in and any(t in alive for t in succ[s])}
            if keep != alive:
                alive, changed = keep, True
        self.states = sorted(alive)
        self.succ = {s: sorted(t for t in succ[s] if t in alive) for s in self.states}

    def _allowed(self, word: tuple) -> bool:
        n = len(word)
        for f in self.forbidden:
            L = len(f)
            for i in range(n - L + 1):
                if word[i:i + L] == f:
                    return False
        return True

    def _consistent(self, state: tuple, start: int, pinned: dict) -> bool:
        for j, a in enumerate(state):
            b = pinned.get(start + j)
            if b is not None and b != a:
                return False
        return True

    def _feasible_sets(self, length: int, pinned: dict) -> list:
        """feasible[i] = states at window start i that complete to the end."""
        q = self.q
        last = length - q
        feasible = [None] * (last + 1)
        feasible[last] = {s for s in self.states if self._consistent(s, last, pinned)}
        for i in range(last - 1, -1, -1):
            nxt = feasible[i + 1]
            feasible[i] = {s for s in self.states
                           if self._consistent(s, i, pinned) and any(t in nxt for t in self.succ[s])}
        return feasible

    def words(self, length: int, pinned: dict | None = None) -> Iterator[tuple]:
        """Extendable words on positions 0..length-1, lexicographic order."""
        pinned = pinned or {}
        q = self.q
        if length <= 0:
            yield ()
            return
        if length < q:
            seen = set()
            for s in self.states:
                w = s[:length]
                if w not in seen and self._consistent(w, 0, pinned):
                    seen.add(w)
            yield from sorted(seen)
            return
        feasible = self._feasible_sets(length, pinned)
        last = length - q

        def walk(i, state, word):
            if i == last:
                yield word
                return
            for t in self.succ[state]:
                if t in feasible[i + 1]:
                    yield from walk(i + 1, t, word + (t[-1],))

        for s in sorted(feasible[0]):
            yield from walk(0, s, s)

    def count(self, length: int) -> int:
        if length < self.q:
            return len({s[:length] for s in self.states})
        counts = {s: 1 for s in self.states}
        for _ in range(length - self.q):
            new = dict.fromkeys(self.states, 0)
            for s, c in counts.items():
                for t in self.succ[s]:
                    new[t] += c
            counts = new
        return sum(counts.values())

    def extendable(self, pinned: dict) -> bool:
        if not pinned:
            return bool(self.states)
        lo, hi = min(pinned), max(pinned)
        shifted = {p - lo: a for p, a in pinned.items()}
        length = max(hi - lo + 1, self.q)
        return bool(self._feasible_sets(length, shifted)[0])


@dataclass(frozen=True)
class SymbolicSystem:
    """Full shift over k symbols on Z^d, or a 1-D SFT given by forbidden words."""

    k: int
    d: int = 1
    forbidden: tuple = ()

    def __post_init__(self):
        if self.k < 2:
            raise InvalidSystem("alphabet size must be at least 2")
        if self.d not in (1, 2, 3):
            raise InvalidSystem(f"unsupported dimension {self.d}")
        forb = tuple(sorted({tuple(int(a) for a in w) for w in self.forbidden}))
        object.__setattr__(self, "forbidden", forb)
        if forb:
            if self.d != 1:
                raise InvalidSystem("subshifts of finite type are only supported for d = 1")
            if any(not w or min(w) < 0 or max(w) >= self.k for w in forb):
                raise InvalidSystem("forbidden word uses symbols outside the alphabet")
            if not self.graph.states:
                raise InvalidSystem("SFT has no bi-infinite configuration")

    @classmethod
    def full_shift(cls, k: int, d: int = 1) -> "SymbolicSystem":
        return cls(k, d)

    @classmethod
    def sft(cls, k: int, forbidden: Iterable[Sequence[int]]) -> "SymbolicSystem":
        return cls(k, 1, tuple(tuple(w) for w in forbidden))

    @classmethod
    def golden_mean(cls) -> "SymbolicSystem":
        return cls.sft(2, [(1, 1)])

    @property
    def is_full_shift(self) -> bool:
        return not self.forbidden

    @cached_property
    def graph(self) -> _WordGraph:
        if self.d != 1:
            raise InvalidSystem("word graph only exists for d = 1")
        return _WordGraph(self.k, self.forbidden)

    def label(self) -> str:
        if self.is_full_shift:
            return f"full shift k={self.k} on Z^{self.d}"
        words = ",".join("".join(map(str, w)) for w in self.forbidden)
        return f"SFT k={self.k} forbidding {{{words}}}"

    def to_json(self) -> dict:
        return {"alphabet_size": self.k, "dimension": self.d,
                "forbidden": [list(w) for w in self.forbidden]}

    def is_extendable(self, pinned: dict) -> bool:
        """Whether a pattern {coordinate: symbol} occurs in some configuration."""
        if any(not 0 <= a < self.k for a in pinned.values()):
            return False
        if self.is_full_shift:
            return True
        return self.graph.extendable({g[0]: a for g, a in pinned.items()})

    def count_words(self, length: int) -> int:
        if self.is_full_shift:
            return self.k ** (length * 1)
        return self.graph.count(length)

    def patterns(self, support: FiniteSubset, max_count: int | None = None,
                 pinned: dict | None = None) -> Iterator[tuple]:
        """All extendable patterns on ``support``, in canonical lexicographic order.

        Patterns are tuples aligned with ``support.elements``.
        """
        if support.d != self.d:
            raise DimensionMismatch("support dimension does not match the system")
        n = len(support)
        pinned = pinned or {}
        if self.is_full_shift:
            if max_count is not None and self.k ** (n - len([g for g in support if g in pinned])) > max_count:
                raise BudgetExceeded(f"{self.k}^{n} patterns exceed cap {max_count}")
            choices = [(pinned[g],) if g in pinned else range(self.k) for g in support.elements]
            yield from product(*choices)
            return
        if n == 0:
            yield ()
            return
        if max_count is not None and self.k ** n > max_count and self.graph.count(n) > max_count:
            raise BudgetExceeded(f"pattern count on {n} sites exceeds cap {max_count}")
        lo = support.elements[0][0]
        hi = support.elements[-1][0]
        shifted = {g[0] - lo: a for g, a in pinned.items()}
        offsets = [g[0] - lo for g in support.elements]
        contiguous = len(offsets) == hi - lo + 1
        words = self.graph.words(max(hi - lo + 1, 1), shifted)
        if contiguous:
            yield from words
            return
        seen = set()
        for w in words:
            p = tuple(w[i] for i in offsets)
            if p not in seen:
                seen.add(p)
        yield from sorted(seen)


@dataclass(frozen=True, order=True)
class Cylinder:
    """The set of configurations with prescribed symbols on a finite support."""

    support: FiniteSubset = field(compare=False)
    symbols: tuple = field(compare=False)
    _key: tuple = field(init=False, repr=False, compare=True)

    def __post_init__(self):
        if len(self.symbols) != len(self.support):
            raise ValueError("symbols do not match support size")
        object.__setattr__(self, "_key", (self.support.elements, tuple(self.symbols)))

    @classmethod
    def from_dict(cls, pattern: dict, d: int = 1) -> "Cylinder":
        pts = [(g,) if isinstance(g, int) else tuple(g) for g in pattern]
        norm_pattern = dict(zip(pts, pattern.values()))
        support = FiniteSubset.of(pts, d)
        return cls(support, tuple(norm_pattern[g] for g in support.elements))

    @classmethod
    def word(cls, symbols: Sequence[int], start: int = 0) -> "Cylinder":
        """1-D cylinder reading ``symbols`` on start, start+1, ..."""
        support = FiniteSubset.of([(start + i,) for i in range(len(symbols))], 1)
        return cls(support, tuple(int(a) for a in symbols))

    @property
    def d(self) -> int:
        return self.support.d

    def as_dict(self) -> dict:
        return dict(zip(self.support.elements, self.symbols))

    def symbol(self, g) -> int | None:
        try:
            return self.symbols[self.support.position(g)]
        except KeyError:
            return None

    def restrict(self, sub: FiniteSubset) -> "Cylinder":
        return Cylinder(sub, tuple(self.symbols[self.support.position(g)] for g in sub.elements))

    def compatible(self, other: "Cylinder") -> bool:
        mine = self.as_dict()
        return all(mine.get(g, a) == a for g, a in other.as_dict().items())

    def merge(self, other: "Cylinder") -> "Cylinder":
        pattern = self.as_dict()
        pattern.update(other.as_dict())
        support = self.support.union(other.support)
        return Cylinder(support, tuple(pattern[g] for g in support.elements))

    def contains(self, x: "Configuration") -> bool:
        return all(x.symbol(g) == a for g, a in zip(self.support.elements, self.symbols))

    def label(self) -> str:
        if self.d == 1:
            pos = [g[0] for g in self.support.elements]
            if pos and pos == list(range(pos[0], pos[0] + len(pos))):
                return "".join(map(str, self.symbols)) + f"@{pos[0]}"
        return repr(self.to_json())

    def to_json(self) -> dict:
        return {"support": self.support.to_json(), "symbols": list(self.symbols)}

    @classmethod
    def from_json(cls, data: dict, d: int | None = None) -> "Cylinder":
        support_pts = [tuple(p) for p in data["support"]]
        pattern = dict(zip(support_pts, data["symbols"]))
        support = FiniteSubset.of(support_pts, d)
        return cls(support, tuple(int(pattern[g]) for g in support.elements))


class Configuration:
    """A point of the shift space, read one coordinate at a time."""

    d: int = 1

    def symbol(self, g) -> int:
        raise NotImplementedError

    def read(self, support: FiniteSubset) -> tuple:
        return tuple(self.symbol(g) for g in support.elements)

    def label(self) -> str:
        return repr(self)


class Periodic(Configuration):
    """x_g = pattern[g mod period], with the pattern given on the box [0, period)."""

    def __init__(self, pattern: dict, period: Sequence[int], system: SymbolicSystem | None = None):
        self.period = tuple(int(p) for p in period)
        self.d = len(self.period)
        self.pattern = {tuple(g): int(a) for g, a in pattern.items()}
        box = FiniteSubset.box((0,) * self.d, tuple(p - 1 for p in self.period))
        if set(self.pattern) != set(box.elements):
            raise ValueError("periodic pattern must be given on the whole period box")
        if system is not None:
            self.validate(system)

    @classmethod
    def from_word(cls, word: Sequence[int], system: SymbolicSystem | None = None) -> "Periodic":
        return cls({(i,): a for i, a in enumerate(word)}, (len(word),), system)

    @classmethod
    def constant(cls, a: int, d: int = 1, system: SymbolicSystem | None = None) -> "Periodic":
        return cls({(0,) * d: a}, (1,) * d, system)

    def symbol(self, g) -> int:
        g = (g,) if isinstance(g, int) else g
        return self.pattern[tuple(c % p for c, p in zip(g, self.period))]

    def validate(self, system: SymbolicSystem) -> None:
        if system.d != self.d:
            raise DimensionMismatch("configuration and system dimensions differ")
        if any(not 0 <= a < system.k for a in self.pattern.values()):
            raise InvalidSystem("periodic configuration uses symbols outside the alphabet")
        if not system.is_full_shift:
            p = self.period[0]
            longest = max(len(w) for w in system.forbidden)
            reps = longest // p + 2
            word = tuple(self.symbol((i,)) for i in range(p * reps))
            if not system.graph._allowed(word):
                raise InvalidSystem("periodic configuration contains a forbidden word")

    def label(self) -> str:
        if self.d == 1:
            return "periodic " + "".join(str(self.pattern[(i,)]) for i in range(self.period[0]))
        return f"periodic period={self.period}"


class LazyRandom(Configuration):
    """A sampled point whose symbols are generated on demand and cached.

    ``sampler`` is any object with ``draw(config, g) -> int``; it must derive
    each symbol deterministically from (seed, g) so the configuration does not
    depend on read order.
    """

    def __init__(self, seed: int, sampler, d: int = 1):
        self.seed = int(seed)
        self.sampler = sampler
        self.d = d
        self._cache: dict = {}

    def symbol(self, g) -> int:
        g = (g,) if isinstance(g, int) else tuple(g)
        a = self._cache.get(g)
        if a is None:
            a = self.sampler.draw(self, g)
            self._cache[g] = a
        return a

    def label(self) -> str:
        return f"sample seed={self.seed}"


def metric_level(x: Configuration, y: Configuration, probe_radius: int) -> int | None:
    """Smallest |g| <= probe_radius with x_g != y_g, or None if identical within the probe."""
    if probe_radius < 0:
        raise ValueError("probe radius must be non-negative")
    d = x.d
    for j in range(probe_radius + 1):
        for g in group_ball(d, j).elements:
            if norm(g) == j and x.symbol(g) != y.symbol(g):
                return j
    return None


def bowen_window(F: FiniteSubset, eps: EpsilonLevel) -> FiniteSubset:
    """F + W_m: the agreement window for d_F(x, y) < eps."""
    if not len(F):
        raise ValueError("Bowen window of an empty set")
    _check_level(eps)
    return F.sumset(group_ball(F.d, eps))


def ball_of(x: Configuration, F: FiniteSubset, eps: EpsilonLevel) -> Cylinder:
    """The Bowen ball B_F(x, eps) as a cylinder."""
    window = bowen_window(F, eps)
    return Cylinder(window, x.read(window))


class Relation(enum.Enum):
    DISJOINT = "disjoint"
    NESTED = "nested"
    OVERLAPPING = "overlapping"


def balls_relation(a: Cylinder, b: Cylinder, system: SymbolicSystem | None = None) -> Relation:
    """Disjoint, nested (one contains the other) or properly overlapping."""
    if not a.compatible(b):
        return Relation.DISJOINT
    if a.support.issubset(b.support) or b.support.issubset(a.support):
        return Relation.NESTED
    if system is not None and not system.is_full_shift:
        if not system.is_extendable(a.merge(b).as_dict()):
            return Relation.DISJOINT
    return Relation.OVERLAPPING


@dataclass(frozen=True)
class TargetSet:
    """The whole system (cylinders=None) or a finite union of cylinders."""

    system: SymbolicSystem
    cylinders: tuple | None = None

    def __post_init__(self):
        if self.cylinders is not None:
            cyl = tuple(sorted(set(self.cylinders)))
            if not cyl:
                raise ValueError("target set must be non-empty")
            for c in cyl:
                if c.d != self.system.d:
                    raise DimensionMismatch("target cylinder has the wrong dimension")
                if not self.system.is_extendable(c.as_dict()):
                    raise InvalidSystem(f"target cylinder {c.label()} is empty in {self.system.label()}")
            object.__setattr__(self, "cylinders", cyl)

    @classmethod
    def whole(cls, system: SymbolicSystem) -> "TargetSet":
        return cls(system, None)

    @classmethod
    def union(cls, system: SymbolicSystem, cylinders: Iterable[Cylinder]) -> "TargetSet":
        return cls(system, tuple(cylinders))

    @property
    def is_whole(self) -> bool:
        return self.cylinders is None

    def support(self) -> FiniteSubset:
        if self.cylinders is None:
            return FiniteSubset(self.system.d, ())
        out = self.cylinders[0].support
        for c in self.cylinders[1:]:
            out = out.union(c.support)
        return out

    def contains(self, x: Configuration) -> bool:
        return self.cylinders is None or any(c.contains(x) for c in self.cylinders)

    def _by_support(self) -> dict:
        idx = self.__dict__.get("_idx")
        if idx is None:
            idx = {}
            for h in self.cylinders:
                idx.setdefault(h.support, []).append(h)
            object.__setattr__(self, "_idx", idx)
        return idx

    def meets(self, c: Cylinder) -> bool:
        if self.cylinders is None:
            return True
        full = self.system.is_full_shift
        for S, group in self._by_support().items():
            if S.issubset(c.support):
                # every member of the group is either disjoint from c or contains it
                keys = self.__dict__.setdefault("_keys", {})
                syms = keys.get(S)
                if syms is None:
                    syms = keys[S] = {h.symbols for h in group}
                if c.restrict(S).symbols in syms and (full or self.system.is_extendable(c.as_dict())):
                    return True
                continue
            for h in group:
                if h.compatible(c) and (full or self.system.is_extendable(h.merge(c).as_dict())):
                    return True
        return False

    def contains_pattern(self, c: Cylinder) -> bool:
        """Whether the cylinder c lies inside this set (c's support covers the target's)."""
        if self.cylinders is None:
            return True
        keys = self.__dict__.setdefault("_keys", {})
        for S, group in self._by_support().items():
            if S.issubset(c.support):
                syms = keys.get(S)
                if syms is None:
                    syms = keys[S] = {h.symbols for h in group}
                if c.restrict(S).symbols in syms:
                    return True
        return False

    def intersect(self, c: Cylinder) -> "TargetSet | None":
        if self.cylinders is None:
            pieces = [c]
        else:
            pieces = [h.merge(c) for h in self.cylinders if h.compatible(c)]
        pieces = [p for p in pieces if self.system.is_extendable(p.as_dict())]
        return TargetSet(self.system, tuple(pieces)) if pieces else None

    def label(self) -> str:
        if self.cylinders is None:
            return "X"
        return " u ".join(c.label() for c in self.cylinders)

    def to_json(self):
        return None if self.cylinders is None else [c.to_json() for c in self.cylinders]


class BallRecord(NamedTuple):
    cylinder: Cylinder
    meets_target: bool


def enumerate_balls(H: TargetSet, F: FiniteSubset, eps: EpsilonLevel,
                    include_all: bool = False, max_count: int | None = None) -> list[BallRecord]:
    """Distinct Bowen balls B_F(x, eps) with x in H, in canonical order.

    With ``include_all`` every ball of the system is listed and flagged by
    whether it meets H.
    """
    if not isinstance(H, TargetSet):
        raise TypeError("target must be a TargetSet (the whole system or a clopen set)")
    window = bowen_window(F, eps)
    out = []
    for pattern in H.system.patterns(window, max_count=max_count):
        c = Cylinder(window, pattern)
        meets = H.meets(c)
        if meets or include_all:
            out.append(BallRecord(c, meets))
    return out
