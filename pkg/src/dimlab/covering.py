"""Greedy 5r ball selection and interval-targeted packing selection."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .cp_core import DepthRange, GaugeSpec, build_universe
from .errors import Infeasible
from .group import FolnerSequence
from .symbolic import Cylinder, EpsilonLevel, Relation, TargetSet, balls_relation

EXHAUSTIVE_LIMIT = 24


@dataclass(frozen=True)
class BallFamily:
    """Equal-radius open balls on the real line, indexed 0..n-1 by position in ``centers``."""

    centers: tuple
    radius: float

    def __post_init__(self):
        if not self.centers:
            raise ValueError("ball family must be non-empty")
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        object.__setattr__(self, "centers", tuple(float(c) for c in self.centers))

    def __len__(self) -> int:
        return len(self.centers)

    def intersects(self, i: int, j: int) -> bool:
        return abs(self.centers[i] - self.centers[j]) < 2 * self.radius

    def inside(self, i: int, center: float, radius: float) -> bool:
        """B(c_i, r) is contained in B(center, radius)."""
        return abs(self.centers[i] - center) + self.radius <= radius


@dataclass
class Selection:
    selected: list
    witness: dict  # every index -> selected index whose enlarged ball contains it
    neighborhoods: dict = field(repr=False, default_factory=dict)

    def to_json(self) -> dict:
        return {"selected": self.selected, "witness": {str(i): j for i, j in sorted(self.witness.items())}}


def _greedy(n: int, meets) -> Selection:
    nbhd = {i: frozenset(j for j in range(n) if meets(i, j)) for i in range(n)}
    selected, witness = [], {}
    for i in range(n):
        clash = next((j for j in selected if nbhd[i] & nbhd[j]), None)
        if clash is None:
            selected.append(i)
            witness[i] = i
        else:
            witness[i] = clash
    return Selection(selected, witness, nbhd)


def five_r_select(fam: BallFamily) -> Selection:
    """Lowest-index greedy choice of balls with pairwise disjoint neighbourhood classes.

    A ball that is skipped shares a neighbour with a chosen ball, so its
    centre lies within 4r of that ball's centre and it sits inside the
    concentric ball of radius 5r; ``witness`` records that chosen ball.
    """
    return _greedy(len(fam), fam.intersects)


def five_r_select_cylinders(balls: Sequence[Cylinder], system=None) -> Selection:
    """Same greedy rule with intersection decided by cylinder relations."""
    balls = list(balls)
    if not balls:
        raise ValueError("ball family must be non-empty")

    def meets(i, j):
        return i == j or balls_relation(balls[i], balls[j], system) is not Relation.DISJOINT

    return _greedy(len(balls), meets)


def verify_five_r(fam: BallFamily, sel: Selection) -> list:
    """Return a list of failures (empty when both postconditions hold)."""
    failures = []
    n = len(fam)
    nbhd = {i: {j for j in range(n) if fam.intersects(i, j)} for i in range(n)}
    for a, i in enumerate(sel.selected):
        for j in sel.selected[a + 1:]:
            if nbhd[i] & nbhd[j]:
                failures.append(f"neighbourhoods of {i} and {j} meet")
    chosen = set(sel.selected)
    for i in range(n):
        j = sel.witness.get(i)
        if j not in chosen:
            failures.append(f"ball {i} has no selected witness")
        elif not fam.inside(i, fam.centers[j], 5 * fam.radius):
            failures.append(f"ball {i} not inside 5r-ball of {j}")
    return failures


@dataclass
class PackingSelection:
    balls: list  # (depth, Cylinder)
    weights: list  # exact Fractions of the float weights
    total: Fraction
    depth: int | None
    method: str
    discards: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"method": self.method, "depth": self.depth, "total": str(self.total),
                "total_float": float(self.total),
                "balls": [{"depth": n, "cylinder": c.to_json(), "weight": float(w)}
                          for (n, c), w in zip(self.balls, self.weights)],
                "discards": [{"depth": n, "cylinder": c.label(), "weight": float(w)} for n, c, w in self.discards]}


def _frac(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        return Fraction(repr(v))
    return Fraction(v)


def interval_packing_select(H: TargetSet, gauge: GaugeSpec, eps: EpsilonLevel, N: int, target: tuple,
                            N_max: int | None = None, folner: FolnerSequence | None = None) -> PackingSelection:
    """A disjoint family of balls centred in H whose total weight lies in (a, b).

    For each depth from N to N_max the full partition at that depth is
    trimmed by discarding heaviest balls while the total is >= b.  If no
    depth lands inside the interval and the universe is small, every
    disjoint family is searched; otherwise Infeasible names the range seen.
    """
    a, b = _frac(target[0]), _frac(target[1])
    if not 0 <= a < b:
        raise ValueError("need 0 <= a < b")
    N_max = N if N_max is None else N_max
    u = build_universe(H, eps, DepthRange(N, N_max), folner, gauge.potential)
    logw = gauge.log_weights(u, "pack")
    w = [Fraction(math.exp(x)) for x in logw]
    seen_lo, seen_hi = None, Fraction(0)
    for n in u.depth.depths:
        sl = u.slices[n]
        idx = list(range(sl.start, sl.stop))
        total = sum((w[i] for i in idx), Fraction(0))
        seen_hi = max(seen_hi, total)
        order = sorted(idx, key=lambda i: (-w[i], i))
        keep = set(idx)
        discards = []
        for i in order:
            if total < b:
                break
            keep.discard(i)
            total -= w[i]
            discards.append((n, u.balls[i].cylinder, w[i]))
        if total > a and total < b:
            chosen = sorted(keep)
            return PackingSelection([(n, u.balls[i].cylinder) for i in chosen], [w[i] for i in chosen],
                                    total, n, "discard", discards)
        if total > 0:
            seen_lo = total if seen_lo is None else min(seen_lo, total)
    if len(u) <= EXHAUSTIVE_LIMIT:
        found = _exhaustive(u, w, a, b)
        if found is not None:
            return PackingSelection([(u.balls[i].n, u.balls[i].cylinder) for i in found],
                                    [w[i] for i in found], sum((w[i] for i in found), Fraction(0)),
                                    None, "exhaustive")
        raise Infeasible(f"no disjoint family has total weight in ({a}, {b}); "
                         f"exhaustive search over {len(u)} balls at depths {N}..{N_max}")
    raise Infeasible(f"target ({a}, {b}) not reached at depths {N}..{N_max}; "
                     f"trimmed totals ranged over [{seen_lo}, {seen_hi}]")


def _exhaustive(u, w, a, b):
    masks = u.masks
    n = len(u)

    def dfs(i, used, total, chosen):
        if a < total < b:
            return list(chosen)
        if total >= b or i == n:
            return None
        if not masks[i] & used:
            r = dfs(i + 1, used | masks[i], total + w[i], chosen + [i])
            if r is not None:
                return r
        return dfs(i + 1, used, total, chosen)

    return dfs(0, 0, Fraction(0), [])
