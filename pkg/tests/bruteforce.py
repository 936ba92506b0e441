"""Subset-enumeration reference for cover and packing values on 1-D shifts.

Written from the definitions only: points are words on a hull interval that
contains every Bowen window and potential neighbourhood, a ball is the set of
hull words agreeing with a centre on [-m, n-1+m], and the value is found by
trying every family of balls.
"""
import itertools
import math
import random
from dataclasses import dataclass


def allowed(word, forbid_11):
    return not forbid_11 or all(not (a and b) for a, b in zip(word, word[1:]))


@dataclass
class Instance:
    forbid_11: bool
    table: dict  # pattern (length 2r+1) -> positive value
    r: int
    m: int
    N: int
    N_max: int
    target: list  # list of (start, symbols), or None for the whole space
    s: float

    @property
    def hull(self):
        R = self.r + self.m
        lo = -R
        hi = self.N_max - 1 + R
        for start, sym in self.target or []:
            lo, hi = min(lo, start), max(hi, start + len(sym) - 1)
        return lo, hi


def _points(inst):
    lo, hi = inst.hull
    pts = []
    for word in itertools.product((0, 1), repeat=hi - lo + 1):
        if allowed(word, inst.forbid_11):
            pts.append(word)
    return lo, pts


def _in_target(inst, lo, word):
    if inst.target is None:
        return True
    return any(all(word[start + i - lo] == a for i, a in enumerate(sym)) for start, sym in inst.target)


def _birkhoff(inst, lo, word, n):
    r = inst.r
    return math.fsum(inst.table[tuple(word[g - r - lo:g + r + 1 - lo])] for g in range(n))


def balls(inst):
    """Universe: (n, key, member indices, sup Phi) for balls meeting the target."""
    lo, pts = _points(inst)
    inside = [i for i, w in enumerate(pts) if _in_target(inst, lo, w)]
    out = []
    for n in range(inst.N, inst.N_max + 1):
        a, b = -inst.m - lo, n - 1 + inst.m - lo + 1
        groups = {}
        for i, w in enumerate(pts):
            groups.setdefault(w[a:b], []).append(i)
        for key in sorted(groups):
            members = frozenset(groups[key])
            if members.isdisjoint(inside):
                continue
            sup = max(_birkhoff(inst, lo, pts[i], n) for i in members)
            out.append((n, key, members, sup))
    return out, frozenset(inside)


def best_cover(inst):
    universe, inside = balls(inst)
    best = math.inf
    for k in range(1, len(universe) + 1):
        for fam in itertools.combinations(universe, k):
            covered = frozenset().union(*(b[2] for b in fam))
            if inside <= covered:
                best = min(best, math.fsum(math.exp(-inst.s * b[3]) for b in fam))
    return best, len(universe)


def best_packing(inst):
    universe, _ = balls(inst)
    best = 0.0
    for k in range(1, len(universe) + 1):
        for fam in itertools.combinations(universe, k):
            if all(x[2].isdisjoint(y[2]) for x, y in itertools.combinations(fam, 2)):
                best = max(best, math.fsum(math.exp(-inst.s * b[3]) for b in fam))
    return best, len(universe)


def random_instance(rng: random.Random) -> Instance:
    forbid = rng.random() < 0.5
    r = rng.choice([0, 0, 1])
    m = rng.choice([0, 1])
    table = {}
    for p in itertools.product((0, 1), repeat=2 * r + 1):
        if allowed(p, forbid):
            table[p] = rng.randint(1, 4) / 2
    N = rng.randint(1, 3)
    N_max = N + rng.choice([0, 0, 1])
    target = None
    if rng.random() < 0.5:
        target = []
        for _ in range(rng.randint(1, 2)):
            length = rng.randint(1, 2)
            sym = tuple(rng.randint(0, 1) for _ in range(length))
            if allowed(sym, forbid):
                target.append((rng.randint(0, 1), sym))
        target = target or None
    return Instance(forbid, table, r, m, N, N_max, target, rng.uniform(0.0, 1.5))


def library_values(inst):
    """cover_value and packing_value for the same instance via dimlab."""
    from dimlab.cp_core import DepthRange, GaugeSpec, cover_value, packing_value

    _, phi, H = _library_setup(inst)
    gauge = GaugeSpec.bs(phi, inst.s)
    depth = DepthRange(inst.N, inst.N_max)
    return cover_value(H, gauge, inst.m, depth), packing_value(H, gauge, inst.m, depth)


def library_interval(inst, a, b):
    """interval_packing_select for the instance, with the system for post-checks."""
    from dimlab.covering import interval_packing_select
    from dimlab.cp_core import GaugeSpec

    system, phi, H = _library_setup(inst)
    return system, interval_packing_select(H, GaugeSpec.bs(phi, inst.s), inst.m, inst.N, (a, b), inst.N_max)


def interval_family_exists(inst, a, b):
    """Does some pairwise disjoint family of universe balls have total weight in (a, b)?"""
    from fractions import Fraction

    universe, _ = balls(inst)
    weights = [Fraction(math.exp(-inst.s * ball[3])) for ball in universe]
    for k in range(1, len(universe) + 1):
        for fam in itertools.combinations(range(len(universe)), k):
            if all(universe[i][2].isdisjoint(universe[j][2]) for i, j in itertools.combinations(fam, 2)):
                if a < sum(weights[i] for i in fam) < b:
                    return True
    return False


def _library_setup(inst):
    from dimlab.potential import Potential
    from dimlab.symbolic import Cylinder, SymbolicSystem, TargetSet

    system = SymbolicSystem.golden_mean() if inst.forbid_11 else SymbolicSystem.full_shift(2)
    phi = Potential.from_function(system, inst.r, lambda p: inst.table[tuple(p)])
    if inst.target is None:
        H = TargetSet.whole(system)
    else:
        H = TargetSet.union(system, [Cylinder.word(sym, start) for start, sym in inst.target])
    return system, phi, H


def disjoint(system, cylinders):
    """Pairwise disjointness of cylinders, decided by extending their merged patterns."""
    for x, y in itertools.combinations(cylinders, 2):
        merged = dict(x.as_dict())
        clash = any(merged.get(g, v) != v for g, v in y.as_dict().items())
        merged.update(y.as_dict())
        if not clash and system.is_extendable(merged):
            return False
    return True
