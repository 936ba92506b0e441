"""Positive, locally determined potentials and their Bowen-ball extremes."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Iterable, Mapping

from .errors import BudgetExceeded, InvalidSystem
from .group import FiniteSubset, ball as group_ball, norm
from .symbolic import Configuration, Cylinder, EpsilonLevel, SymbolicSystem

# free-coordinate enumeration cap for d >= 2 ball extremes
MAX_FREE_ENUMERATION = 1 << 16


def parse_value(v) -> Fraction:
    """Decimal string, "p/q" string, int, float or Fraction -> exact Fraction."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        return Fraction(repr(v))
    return Fraction(v)


@dataclass(frozen=True)
class Potential:
    """phi(x) = table[x restricted to W_r], with strictly positive rational values."""

    system: SymbolicSystem
    r: int
    table: tuple  # sorted ((pattern, Fraction), ...)

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("window radius must be non-negative")
        entries = dict(self.table)
        for p, v in entries.items():
            if v <= 0:
                raise InvalidSystem(f"potential must be strictly positive; got {v} on {p}")
        valid = set(self.system.patterns(self.window))
        if set(entries) != valid:
            missing = sorted(valid - set(entries))[:3]
            extra = sorted(set(entries) - valid)[:3]
            raise InvalidSystem(f"potential table must cover exactly the valid W_r patterns "
                                f"(missing {missing}, unexpected {extra})")
        object.__setattr__(self, "table", tuple(sorted(entries.items())))
        object.__setattr__(self, "_lookup", {p: float(v) for p, v in entries.items()})
        object.__setattr__(self, "_exact", entries)

    @classmethod
    def from_entries(cls, system: SymbolicSystem, r: int, entries: Mapping) -> "Potential":
        return cls(system, r, tuple((tuple(p), parse_value(v)) for p, v in entries.items()))

    @classmethod
    def from_function(cls, system: SymbolicSystem, r: int, fn: Callable[[tuple], object]) -> "Potential":
        W = group_ball(system.d, r)
        return cls.from_entries(system, r, {p: fn(p) for p in system.patterns(W)})

    @classmethod
    def constant(cls, system: SymbolicSystem, c=1) -> "Potential":
        return cls.from_function(system, 0, lambda p: c)

    @classmethod
    def from_symbol_values(cls, system: SymbolicSystem, values: Iterable) -> "Potential":
        """Radius-0 potential phi(x) = values[x_0]."""
        vals = [parse_value(v) for v in values]
        if len(vals) != system.k:
            raise ValueError("need one value per symbol")
        return cls.from_function(system, 0, lambda p: vals[p[0]])

    @property
    def window(self) -> FiniteSubset:
        return group_ball(self.system.d, self.r)

    @property
    def phi_hat(self) -> Fraction:
        return min(v for _, v in self.table)

    @property
    def phi_max(self) -> Fraction:
        return max(v for _, v in self.table)

    @property
    def is_constant(self) -> bool:
        return self.phi_hat == self.phi_max

    def value(self, pattern: tuple) -> float:
        return self._lookup[tuple(pattern)]

    def exact_value(self, pattern: tuple) -> Fraction:
        return self._exact[tuple(pattern)]

    def label(self) -> str:
        if self.is_constant:
            return f"phi = {self.phi_hat}"
        if self.r == 0:
            return "phi(a) = " + ", ".join(f"{p[0]}:{v}" for p, v in self.table)
        return f"phi window r={self.r} ({len(self.table)} entries)"

    def to_json(self) -> dict:
        return {"window_radius": self.r,
                "entries": [{"pattern": list(p), "value": str(v)} for p, v in self.table]}

    def _term_offsets(self) -> list:
        return list(self.window.elements)


def _shift(g, h):
    return tuple(a + b for a, b in zip(g, h))


def birkhoff_sum(phi: Potential, x: Configuration, F: FiniteSubset, exact: bool = False):
    """Phi_F(x) = sum over g in F of phi(g x); reads x only on F + W_r."""
    offsets = phi._term_offsets()
    total = []
    for g in F.elements:
        pattern = tuple(x.symbol(_shift(g, h)) for h in offsets)
        try:
            total.append(phi.exact_value(pattern) if exact else phi.value(pattern))
        except KeyError:
            raise InvalidSystem(f"pattern {pattern} at {g} missing from potential table") from None
    return sum(total, Fraction(0)) if exact else math.fsum(total)


def pattern_sum(phi: Potential, pattern: Mapping, F: FiniteSubset) -> float:
    """Phi_F evaluated on a pattern that pins every coordinate of F + W_r."""
    offsets = phi._term_offsets()
    return math.fsum(phi.value(tuple(pattern[_shift(g, h)] for h in offsets)) for g in F.elements)


def ball_extremes(phi: Potential, ball: Cylinder, F: FiniteSubset) -> tuple[float, float]:
    """(inf, sup) of Phi_F over the cylinder ``ball``.

    Coordinates of F + W_r outside the ball's support are free; the optimum
    over them is exact (line dynamic programme in 1-D, enumeration otherwise).
    """
    needed = F.sumset(phi.window)
    pinned = ball.as_dict()
    if all(g in pinned for g in needed.elements):
        v = pattern_sum(phi, pinned, F)
        return v, v
    system = phi.system
    if system.d == 1:
        return _line_extremes(phi, pinned, F, needed)
    free = [g for g in needed.elements if g not in pinned]
    if system.k ** len(free) > MAX_FREE_ENUMERATION:
        raise BudgetExceeded(f"{len(free)} free coordinates in a Z^{system.d} ball sup")
    lo = math.inf
    hi = -math.inf
    full = dict(pinned)
    for values in product(range(system.k), repeat=len(free)):
        full.update(zip(free, values))
        v = pattern_sum(phi, full, F)
        lo, hi = min(lo, v), max(hi, v)
    return lo, hi


def _line_extremes(phi: Potential, pinned: dict, F: FiniteSubset, needed: FiniteSubset):
    system = phi.system
    pin = {g[0]: a for g, a in pinned.items()}
    positions = set(pin) | {g[0] for g in needed.elements}
    lo, hi = min(positions), max(positions)
    r = phi.r
    q = 1 if system.is_full_shift else system.graph.q
    K = max(2 * r + 1, q)
    hi = max(hi, lo + K - 1)
    term_ends = {g[0] + r for g in F.elements}
    graph = None if system.is_full_shift else system.graph
    essential = None if graph is None else set(graph.states)

    def terms_at(end, word):
        # word covers [end - K + 1, end]
        if end in term_ends:
            return phi.value(word[K - (2 * r + 1):])
        return 0.0

    # initial states: extendable words on [lo, lo + K - 1]
    init_pinned = {p - lo: a for p, a in pin.items() if lo <= p < lo + K}
    if graph is None:
        choices = [(init_pinned[i],) if i in init_pinned else range(system.k) for i in range(K)]
        starts = product(*choices)
    else:
        starts = graph.words(K, init_pinned)
    states = {}
    for w in starts:
        w = tuple(w)
        acc = 0.0
        for end in range(lo, lo + K):
            if end in term_ends:
                start = end - 2 * r
                if start >= lo:
                    acc += phi.value(w[start - lo:end - lo + 1])
        states[w] = (acc, acc)
    for pos in range(lo + K, hi + 1):
        allowed = (pin[pos],) if pos in pin else range(system.k)
        new = {}
        for w, (vmin, vmax) in states.items():
            for a in allowed:
                nw = w[1:] + (a,)
                if graph is not None:
                    tail = nw[-q:]
                    if tail not in essential or tail not in graph.succ[w[-q:]]:
                        continue
                t = terms_at(pos, nw)
                cur = new.get(nw)
                cand = (vmin + t, vmax + t)
                if cur is None:
                    new[nw] = cand
                else:
                    new[nw] = (min(cur[0], cand[0]), max(cur[1], cand[1]))
        states = new
    if not states:
        raise InvalidSystem("cylinder is empty in this system")
    return min(v[0] for v in states.values()), max(v[1] for v in states.values())


def ball_sup(phi: Potential, ball: Cylinder, F: FiniteSubset) -> float:
    """sup of Phi_F over the Bowen ball."""
    return ball_extremes(phi, ball, F)[1]


def ball_inf(phi: Potential, ball: Cylinder, F: FiniteSubset) -> float:
    return ball_extremes(phi, ball, F)[0]


def oscillation(phi: Potential, eps: EpsilonLevel) -> Fraction:
    """max |phi(x) - phi(y)| over x, y with d(x, y) < 2 eps.

    At level m such pairs agree on W_{m-1}, so this is the largest spread of
    table values within a class of W_r patterns sharing their W_{m-1} part.
    """
    if eps < 0:
        raise ValueError("epsilon level must be >= 0")
    inner = [i for i, g in enumerate(phi.window.elements) if norm(g) <= eps - 1]
    groups: dict = {}
    for p, v in phi.table:
        key = tuple(p[i] for i in inner)
        lo, hi = groups.get(key, (v, v))
        groups[key] = (min(lo, v), max(hi, v))
    return max(hi - lo for lo, hi in groups.values())
