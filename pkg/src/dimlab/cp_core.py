"""Carathéodory-Pesin quantities over finite universes of Bowen balls.

A universe collects every Bowen ball B_{F_n}(x, eps) meeting the target set
for Følner indices n in [N, N_max].  Cover sums are minimised and packing
sums maximised exactly over that universe.  Restricting the admissible
families can only raise an infimum and lower a supremum, so cover values are
upper bounds and packing values lower bounds for the untruncated quantities;
every result carries that side.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import BracketError, BudgetExceeded, Infeasible
from .group import FiniteSubset, FolnerSequence, box_folner
from .potential import Potential, ball_extremes
from .symbolic import Cylinder, EpsilonLevel, TargetSet, bowen_window, enumerate_balls

MAX_UNIVERSE = 200_000
MAX_NODES = 2_000_000
MAX_DEPTH_SPAN = 64


class BoundSide(str, enum.Enum):
    UPPER = "upper"
    LOWER = "lower"
    TWO_SIDED = "two_sided"
    EXACT = "exact"
    HEURISTIC = "heuristic"


@dataclass(frozen=True)
class DepthRange:
    N: int
    N_max: int

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("minimum Følner index N must be >= 1")
        if self.N_max < self.N:
            raise ValueError("N_max must be >= N")
        if self.N_max - self.N > MAX_DEPTH_SPAN:
            raise BudgetExceeded(f"depth span {self.N_max - self.N} exceeds {MAX_DEPTH_SPAN}")

    @classmethod
    def single(cls, n: int) -> "DepthRange":
        return cls(n, n)

    @property
    def depths(self) -> range:
        return range(self.N, self.N_max + 1)

    @property
    def equal_depth(self) -> bool:
        return self.N == self.N_max

    def to_json(self) -> dict:
        return {"N": self.N, "N_max": self.N_max}


class Ball(NamedTuple):
    n: int
    cylinder: Cylinder


def _bits(x: int):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def _logsumexp(a) -> float:
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return -math.inf
    m = float(np.max(a))
    if m == -math.inf:
        return m
    return m + math.log(float(np.sum(np.exp(a - m))))


class Universe:
    """Bowen balls meeting a target set at Følner indices N..N_max, in canonical order."""

    def __init__(self, target: TargetSet, eps: EpsilonLevel, depth: DepthRange,
                 folner: FolnerSequence, potential: Potential | None, max_balls: int):
        self.target = target
        self.system = target.system
        self.eps = eps
        self.depth = depth
        self.folner = folner
        self.potential = potential
        self.max_balls = max_balls
        self.windows = {n: bowen_window(folner[n], eps) for n in depth.depths}
        balls = []
        for n in depth.depths:
            for rec in enumerate_balls(target, folner[n], eps, max_count=max_balls):
                balls.append(Ball(n, rec.cylinder))
                if len(balls) > max_balls:
                    raise BudgetExceeded(f"universe exceeds {max_balls} balls")
        self.balls = balls
        self.sizes = np.array([len(folner[b.n]) for b in balls], dtype=float)
        self.slices = {}
        start = 0
        for n in depth.depths:
            count = sum(1 for b in balls if b.n == n)
            self.slices[n] = slice(start, start + count)
            start += count
        depths = list(depth.depths)
        self.laminar = all(self.windows[a].issubset(self.windows[b])
                           for a, b in zip(depths, depths[1:]))
        self.parent = np.full(len(balls), -1, dtype=np.int64)
        if self.laminar:
            for a, b in zip(depths, depths[1:]):
                sa = self.slices[a]
                index = {balls[i].cylinder.symbols: i for i in range(sa.start, sa.stop)}
                wa = self.windows[a]
                for i in range(self.slices[b].start, self.slices[b].stop):
                    self.parent[i] = index[balls[i].cylinder.restrict(wa).symbols]
        self._phi_arrays()

    def __len__(self) -> int:
        return len(self.balls)

    def _phi_arrays(self):
        n = len(self.balls)
        if self.potential is None:
            zero = np.zeros(n)
            self.phi_sup = self.phi_inf = self.phi_sup_h = self.phi_inf_h = zero
            return
        sup = np.empty(n)
        inf = np.empty(n)
        sup_h = np.empty(n)
        inf_h = np.empty(n)
        for i, b in enumerate(self.balls):
            F = self.folner[b.n]
            lo, hi = ball_extremes(self.potential, b.cylinder, F)
            inf[i], sup[i] = lo, hi
            if lo == hi or self.target.is_whole or self.target.contains_pattern(b.cylinder):
                inf_h[i], sup_h[i] = lo, hi
                continue
            los, his = [], []
            for h in self.target.cylinders:
                if not h.compatible(b.cylinder):
                    continue
                if h.support.issubset(b.cylinder.support):
                    los.append(lo)
                    his.append(hi)
                    continue
                merged = b.cylinder.merge(h)
                if not self.system.is_extendable(merged.as_dict()):
                    continue
                a, c = ball_extremes(self.potential, merged, F)
                los.append(a)
                his.append(c)
            inf_h[i], sup_h[i] = min(los), max(his)
        self.phi_sup, self.phi_inf, self.phi_sup_h, self.phi_inf_h = sup, inf, sup_h, inf_h

    # atoms: extendable patterns on the union of all windows and the target support
    @cached_property
    def _atoms(self):
        U = self.target.support()
        for w in self.windows.values():
            U = w if not len(U) else U.union(w)
        atoms = list(self.system.patterns(U, max_count=self.max_balls))
        if len(atoms) > self.max_balls:
            raise BudgetExceeded(f"{len(atoms)} atoms exceed cap {self.max_balls}")
        return U, atoms

    @cached_property
    def masks(self) -> list[int]:
        """Bitmask over atoms for every ball."""
        U, atoms = self._atoms
        groups = {}
        for n, W in self.windows.items():
            pos = [U.position(g) for g in W.elements]
            table: dict = {}
            for j, a in enumerate(atoms):
                table.setdefault(tuple(a[p] for p in pos), []).append(j)
            groups[n] = table
        nbytes = (len(atoms) + 7) // 8
        out = []
        for b in self.balls:
            bits = bytearray(nbytes)
            for j in groups[b.n].get(b.cylinder.symbols, ()):
                bits[j >> 3] |= 1 << (j & 7)
            out.append(int.from_bytes(bits, "little"))
        return out

    @cached_property
    def target_mask(self) -> int:
        U, atoms = self._atoms
        nbytes = (len(atoms) + 7) // 8
        bits = bytearray(nbytes)
        for j, a in enumerate(atoms):
            if self.target.contains_pattern(Cylinder(U, a)):
                bits[j >> 3] |= 1 << (j & 7)
        return int.from_bytes(bits, "little")

    @property
    def atom_count(self) -> int:
        return len(self._atoms[1])

    @cached_property
    def children(self) -> list[list[int]]:
        kids = [[] for _ in self.balls]
        for i, p in enumerate(self.parent):
            if p >= 0:
                kids[p].append(i)
        return kids

    def describe(self) -> dict:
        return {"target": self.target.label(), "eps_level": self.eps, "depth": self.depth.to_json(),
                "folner": self.folner.label(), "balls": len(self.balls), "laminar": self.laminar}


@lru_cache(maxsize=256)
def build_universe(target: TargetSet, eps: EpsilonLevel, depth: DepthRange,
                   folner: FolnerSequence | None = None, potential: Potential | None = None,
                   max_balls: int = MAX_UNIVERSE) -> Universe:
    folner = folner or FolnerSequence.boxes(target.system.d)
    return Universe(target, eps, depth, folner, potential, max_balls)


@dataclass(frozen=True)
class GaugeSpec:
    """Which weight each ball contributes.

    ``bs``:            exp(-s * Phi-term)
    ``pressure``:      exp(-s |F_n| + Phi-term)
    ``pressure_neg``:  exp(-s |F_n| - t * Phi-term)

    ``phi_term`` is ``ball_sup`` (sup of Phi_F over the ball) or ``center``
    (Phi_F at a centre of the ball).  Every point of a ball in an ultrametric
    is a centre, so ``center`` takes the centre that is optimal for the
    problem: lightest weight for covers, heaviest weight among centres in the
    target for packings.
    """

    kind: str = "bs"
    potential: Potential | None = None
    s: float = 0.0
    t: float = 0.0
    phi_term: str = "ball_sup"

    def __post_init__(self):
        if self.kind not in ("bs", "pressure", "pressure_neg"):
            raise ValueError(f"unknown gauge kind {self.kind!r}")
        if self.phi_term not in ("ball_sup", "center"):
            raise ValueError(f"unknown phi_term {self.phi_term!r}")
        if self.kind == "bs" and self.potential is None:
            raise ValueError("BS gauge requires a potential")

    @classmethod
    def bs(cls, potential: Potential, s: float = 0.0, phi_term: str = "ball_sup") -> "GaugeSpec":
        return cls("bs", potential, s=s, phi_term=phi_term)

    @classmethod
    def pressure(cls, potential: Potential | None, s: float = 0.0, phi_term: str = "center") -> "GaugeSpec":
        return cls("pressure", potential, s=s, phi_term=phi_term)

    @classmethod
    def pressure_neg(cls, t: float, potential: Potential | None, s: float = 0.0,
                     phi_term: str = "center") -> "GaugeSpec":
        return cls("pressure_neg", potential, s=s, t=t, phi_term=phi_term)

    def at(self, s: float) -> "GaugeSpec":
        return replace(self, s=float(s))

    def _coefficients(self, u: Universe):
        if self.kind == "bs":
            return np.zeros(len(u)), -self.s
        base = -self.s * u.sizes
        return base, (1.0 if self.kind == "pressure" else -self.t)

    def log_weights(self, u: Universe, mode: str = "cover") -> np.ndarray:
        base, coef = self._coefficients(u)
        if self.potential is None or coef == 0:
            return base + 0.0
        if self.phi_term == "ball_sup":
            term = u.phi_sup
        elif mode == "cover":
            term = u.phi_sup if coef < 0 else u.phi_inf
        else:
            term = u.phi_inf_h if coef < 0 else u.phi_sup_h
        return base + coef * term

    def to_json(self) -> dict:
        out = {"kind": self.kind, "s": self.s, "phi_term": self.phi_term}
        if self.kind == "pressure_neg":
            out["t"] = self.t
        out["potential"] = None if self.potential is None else self.potential.label()
        return out


@dataclass
class SearchResult:
    """Optimal value over a universe, with the family realising it."""

    log_value: float
    certificate: tuple
    bound_side: BoundSide
    universe: Universe = field(repr=False)
    log_weights: np.ndarray = field(repr=False)
    nodes: int = 0
    budget_exhausted: bool = False
    coefficients: tuple | None = None
    note: str = ""

    @property
    def value(self) -> float:
        return math.exp(self.log_value) if self.log_value < 700 else math.inf

    def objective_from_certificate(self) -> float:
        """Re-evaluate the objective from the certificate alone (log scale)."""
        if not self.certificate:
            return -math.inf
        lw = self.log_weights[list(self.certificate)]
        if self.coefficients is not None:
            c = np.asarray(self.coefficients)
            keep = c > 0
            return _logsumexp(lw[keep] + np.log(c[keep]))
        return canonical_log_sum(lw)

    def to_json(self) -> dict:
        balls = []
        for j, i in enumerate(self.certificate):
            b = self.universe.balls[i]
            rec = {"depth": b.n, "cylinder": b.cylinder.to_json(),
                   "weight": float(math.exp(self.log_weights[i]))}
            if self.coefficients is not None:
                rec["coefficient"] = float(self.coefficients[j])
            balls.append(rec)
        return {"objective": self.value, "log_objective": self.log_value,
                "bound_side": self.bound_side.value, "budget_exhausted": self.budget_exhausted,
                "nodes": self.nodes, "note": self.note, "balls": balls,
                "universe": self.universe.describe()}


def _group_logsumexp(values: np.ndarray, groups: np.ndarray, size: int) -> np.ndarray:
    gm = np.full(size, -np.inf)
    np.maximum.at(gm, groups, values)
    safe = np.where(np.isfinite(gm), gm, 0.0)
    acc = np.zeros(size)
    np.add.at(acc, groups, np.exp(values - safe[groups]))
    with np.errstate(divide="ignore"):
        return safe + np.log(acc)


def tree_values(u: Universe, logw: np.ndarray, maximize: bool) -> tuple[np.ndarray, np.ndarray]:
    """Optimal log value inside every ball of a nested universe, and whether the ball itself is used."""
    depths = list(u.depth.depths)
    lc = logw.copy()
    take_self = np.ones(len(u), dtype=bool)
    for a, b in zip(reversed(depths[:-1]), reversed(depths[1:])):
        sa, sb = u.slices[a], u.slices[b]
        if sa.stop == sa.start:
            continue
        parents = u.parent[sb] - sa.start
        cs = _group_logsumexp(lc[sb], parents, sa.stop - sa.start)
        own = logw[sa]
        pick = own >= cs if maximize else own <= cs
        take_self[sa] = pick
        lc[sa] = np.where(pick, own, cs)
    return lc, take_self


def _tree_search(u: Universe, logw: np.ndarray, maximize: bool) -> tuple[float, tuple]:
    lc, take_self = tree_values(u, logw, maximize)
    top = u.slices[u.depth.N]
    chosen = []
    stack = list(range(top.stop - 1, top.start - 1, -1))
    kids = u.children
    while stack:
        i = stack.pop()
        if take_self[i] or not kids[i]:
            chosen.append(i)
        else:
            stack.extend(reversed(kids[i]))
    return _logsumexp(lc[top]), tuple(sorted(chosen))


def _trivial_family(u: Universe, logw: np.ndarray) -> tuple[float, tuple]:
    top = u.slices[u.depth.N]
    idx = tuple(range(top.start, top.stop))
    return _logsumexp(logw[list(idx)]), idx


def _cover_bnb(u: Universe, logw: np.ndarray, max_nodes: int):
    masks = u.masks
    target = u.target_mask
    shift = float(np.max(logw))
    w = [math.exp(x - shift) for x in logw]
    cand: dict = {}
    for i, m in enumerate(masks):
        for e in _bits(m & target):
            cand.setdefault(e, []).append(i)
    for e in cand:
        cand[e].sort(key=lambda i: (w[i], i))
    # greedy start: cheapest cost per newly covered atom
    uncovered, chosen, cost = target, [], 0.0
    while uncovered:
        best_i = min(range(len(masks)), key=lambda i: (w[i] / max(bin(masks[i] & uncovered).count("1"), 1e-300)
                                                       if masks[i] & uncovered else math.inf, i))
        chosen.append(best_i)
        cost += w[best_i]
        uncovered &= ~masks[best_i]
    best = [cost, tuple(sorted(chosen))]
    nodes = [0]
    exhausted = [False]

    def lower_bound(unc):
        total = 0.0
        for e in _bits(unc):
            total += min(w[i] / bin(masks[i] & unc).count("1") for i in cand[e])
        return total

    def dfs(unc, cost, picked):
        if exhausted[0]:
            return
        nodes[0] += 1
        if nodes[0] > max_nodes:
            exhausted[0] = True
            return
        if not unc:
            if cost < best[0]:
                best[0], best[1] = cost, tuple(sorted(picked))
            return
        if cost + lower_bound(unc) >= best[0] * (1 - 1e-12):
            return
        e = min(_bits(unc), key=lambda e: (len(cand[e]), e))
        for i in cand[e]:
            dfs(unc & ~masks[i], cost + w[i], picked + [i])

    dfs(target, 0.0, [])
    return math.log(best[0]) + shift, best[1], nodes[0], exhausted[0]


def _pack_bnb(u: Universe, logw: np.ndarray, max_nodes: int):
    masks = u.masks
    n = len(masks)
    order = sorted(range(n), key=lambda i: (-logw[i], i))
    shift = float(np.max(logw))
    w = [math.exp(logw[i] - shift) for i in order]
    conflict = [0] * n
    for a in range(n):
        ma = masks[order[a]]
        for b in range(a + 1, n):
            if ma & masks[order[b]]:
                conflict[a] |= 1 << b
                conflict[b] |= 1 << a
    memo: dict = {}
    nodes = [0]
    exhausted = [False]

    def best(cands):
        if not cands:
            return 0.0, ()
        hit = memo.get(cands)
        if hit is not None:
            return hit
        nodes[0] += 1
        if nodes[0] > max_nodes:
            exhausted[0] = True
            raise BudgetExceeded("packing search node cap")
        i = (cands & -cands).bit_length() - 1
        rest = cands & ~(1 << i)
        v_out, s_out = best(rest)
        v_in, s_in = best(rest & ~conflict[i])
        v_in += w[i]
        res = (v_in, (i,) + s_in) if v_in >= v_out else (v_out, s_out)
        memo[cands] = res
        return res

    try:
        value, picked = best((1 << n) - 1)
        chosen = tuple(sorted(order[i] for i in picked))
        return math.log(value) + shift, chosen, nodes[0], False
    except BudgetExceeded:
        return None, None, nodes[0], True


def _solve(u: Universe, logw: np.ndarray, maximize: bool, method: str, max_nodes: int):
    if method == "auto":
        method = "tree" if u.laminar else "bnb"
    if method == "tree":
        if not u.laminar:
            raise ValueError("tree search needs nested Bowen windows")
        if len(u) > max_nodes:
            lv, cert = _trivial_family(u, logw)
            return lv, cert, max_nodes, True
        lv, cert = _tree_search(u, logw, maximize)
        return lv, cert, len(u), False
    if method == "bnb":
        lv, cert, nodes, exhausted = (_pack_bnb if maximize else _cover_bnb)(u, logw, max_nodes)
        if exhausted and lv is None:
            lv, cert = _trivial_family(u, logw)
        return lv, cert, nodes, exhausted
    raise ValueError(f"unknown method {method!r}")


def canonical_log_sum(values) -> float:
    """log-sum-exp over a sorted copy, so equal multisets give identical floats."""
    return _logsumexp(np.sort(np.asarray(values, dtype=float)))


def _result(u, logw, lv, cert, nodes, exhausted, side, note=""):
    if cert:
        lv = canonical_log_sum(logw[list(cert)])
    if exhausted:
        side = BoundSide.HEURISTIC
        note = (note + "; " if note else "") + "node budget exhausted, best-found family"
    return SearchResult(lv, cert, side, u, logw, nodes, exhausted, note=note)


def cover_value(H: TargetSet, gauge: GaugeSpec, eps: EpsilonLevel, depth: DepthRange,
                folner: FolnerSequence | None = None, *, method: str = "auto",
                max_nodes: int = MAX_NODES, max_balls: int = MAX_UNIVERSE) -> SearchResult:
    """min of the gauge sum over covers of H by balls with depths in [N, N_max]."""
    u = build_universe(H, eps, depth, folner, gauge.potential, max_balls)
    return solve_cover(u, gauge, method=method, max_nodes=max_nodes)


def solve_cover(u: Universe, gauge: GaugeSpec, *, method: str = "auto",
                max_nodes: int = MAX_NODES) -> SearchResult:
    logw = gauge.log_weights(u, "cover")
    lv, cert, nodes, exhausted = _solve(u, logw, False, method, max_nodes)
    return _result(u, logw, lv, cert, nodes, exhausted, BoundSide.UPPER)


def packing_value(H: TargetSet, gauge: GaugeSpec, eps: EpsilonLevel, depth: DepthRange,
                  folner: FolnerSequence | None = None, *, method: str = "auto",
                  max_nodes: int = MAX_NODES, max_balls: int = MAX_UNIVERSE) -> SearchResult:
    """max of the gauge sum over pairwise disjoint balls centred in H."""
    u = build_universe(H, eps, depth, folner, gauge.potential, max_balls)
    return solve_packing(u, gauge, method=method, max_nodes=max_nodes)


def solve_packing(u: Universe, gauge: GaugeSpec, *, method: str = "auto",
                  max_nodes: int = MAX_NODES) -> SearchResult:
    logw = gauge.log_weights(u, "pack")
    lv, cert, nodes, exhausted = _solve(u, logw, True, method, max_nodes)
    return _result(u, logw, lv, cert, nodes, exhausted, BoundSide.LOWER)


def weighted_cover_value(H: TargetSet, gauge: GaugeSpec, eps: EpsilonLevel, depth: DepthRange,
                         folner: FolnerSequence | None = None, *, max_nodes: int = MAX_NODES,
                         max_balls: int = MAX_UNIVERSE) -> SearchResult:
    """Fractional covering programme: min sum c_i w_i with sum c_i 1_{B_i} >= 1 on H.

    The integral optimum is feasible for the programme, so the returned value
    is clipped to the cover value to absorb solver round-off.
    """
    from scipy.optimize import linprog
    from scipy.sparse import csr_matrix

    u = build_universe(H, eps, depth, folner, gauge.potential, max_balls)
    logw = gauge.log_weights(u, "cover")
    shift = float(np.max(logw))
    w = np.exp(logw - shift)
    masks = u.masks
    rows, cols = [], []
    atom_rows = {e: r for r, e in enumerate(_bits(u.target_mask))}
    for j, m in enumerate(masks):
        for e in _bits(m & u.target_mask):
            rows.append(atom_rows[e])
            cols.append(j)
    A = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(atom_rows), len(u)))
    res = linprog(w, A_ub=-A, b_ub=-np.ones(len(atom_rows)), bounds=(0, None), method="highs")
    if res.status != 0:
        raise Infeasible(f"fractional cover programme failed: {res.message}")
    integral = solve_cover(u, gauge, max_nodes=max_nodes)
    lp_log = math.log(max(res.fun, 1e-300)) + shift
    coeffs = res.x
    keep = [j for j in range(len(u)) if coeffs[j] > 1e-12]
    if integral.log_value < lp_log:
        lp_log = integral.log_value
        keep = list(integral.certificate)
        coeffs = np.zeros(len(u))
        coeffs[keep] = 1.0
    side = BoundSide.HEURISTIC if integral.budget_exhausted else BoundSide.UPPER
    return SearchResult(lp_log, tuple(keep), side, u, logw, integral.nodes, integral.budget_exhausted,
                        coefficients=tuple(float(coeffs[j]) for j in keep))


def split_pieces(H: TargetSet, split_depth: int) -> list[TargetSet]:
    """H cut by the cylinders on the box [0, D)^d; D = 0 gives H itself."""
    if split_depth <= 0:
        return [H]
    system = H.system
    box = box_folner(system.d, split_depth)
    pieces = []
    for pattern in system.patterns(box):
        piece = H.intersect(Cylinder(box, pattern))
        if piece is not None:
            pieces.append(piece)
    return pieces


@dataclass
class OuterPackingResult:
    log_value: float
    split: str
    pieces: list
    bound_side: BoundSide
    budget_exhausted: bool

    @property
    def value(self) -> float:
        return math.exp(self.log_value) if self.log_value < 700 else math.inf

    def to_json(self) -> dict:
        return {"objective": self.value, "log_objective": self.log_value, "split": self.split,
                "bound_side": self.bound_side.value, "budget_exhausted": self.budget_exhausted,
                "pieces": [{"piece": p.universe.target.label(), "log_value": p.log_value} for p in self.pieces]}


def packing_outer_value(H: TargetSet, gauge: GaugeSpec, eps: EpsilonLevel, depth: DepthRange,
                        split_depth: int = 0, folner: FolnerSequence | None = None, *,
                        method: str = "auto", max_nodes: int = MAX_NODES,
                        max_balls: int = MAX_UNIVERSE) -> OuterPackingResult:
    """min over {trivial split, depth-D cylinder split} of the summed packing values."""
    trivial = packing_value(H, gauge, eps, depth, folner, method=method, max_nodes=max_nodes,
                            max_balls=max_balls)
    best = OuterPackingResult(trivial.log_value, "trivial", [trivial], trivial.bound_side,
                              trivial.budget_exhausted)
    if split_depth > 0:
        parts = [packing_value(p, gauge, eps, depth, folner, method=method, max_nodes=max_nodes,
                               max_balls=max_balls) for p in split_pieces(H, split_depth)]
        lv = _logsumexp([p.log_value for p in parts])
        exhausted = any(p.budget_exhausted for p in parts)
        if lv < best.log_value:
            side = BoundSide.HEURISTIC if exhausted else BoundSide.LOWER
            best = OuterPackingResult(lv, f"depth-{split_depth}", parts, side, exhausted)
        elif exhausted:
            best.budget_exhausted = True
            best.bound_side = BoundSide.HEURISTIC
    return best


# --- Katok-type covers -------------------------------------------------------

def _mass_threshold(delta: Fraction, denom: int) -> tuple[int, bool]:
    """Integer mass needed (over ``denom``) and whether it is a strict bound."""
    if delta == 0:
        return denom, False
    T = (1 - delta) * denom
    return math.floor(T) + 1, True


def _as_fraction(delta) -> Fraction:
    return delta if isinstance(delta, Fraction) else Fraction(str(delta))


def _class_knapsack(items, need: int, max_nodes: int):
    """min sum w over a multiset of (w, m) items with sum m >= need.

    ``items`` is a list of (w, m, members); equal (w, m) items are grouped
    so symmetric choices are explored once.
    """
    classes: dict = {}
    for w, m, i in items:
        classes.setdefault((w, m), []).append(i)
    cls = sorted(((w, m, sorted(ids)) for (w, m), ids in classes.items()),
                 key=lambda c: (c[0] / c[1], c[0], c[1]))
    total = sum(m * len(ids) for _, m, ids in cls)
    if total < need:
        raise Infeasible("not enough mass in the universe")
    if 2 * need > total:
        return _class_knapsack_complement(cls, total - need, max_nodes)
    best = [math.inf, None]
    nodes = [0]
    exhausted = [False]

    def bound(ci, rem):
        lb = 0.0
        for w, m, ids in cls[ci:]:
            cap = m * len(ids)
            if cap >= rem:
                return lb + rem * (w / m)
            lb += w * len(ids)
            rem -= cap
        return math.inf

    def dfs(ci, rem, cost, counts):
        if exhausted[0]:
            return
        nodes[0] += 1
        if nodes[0] > max_nodes:
            exhausted[0] = True
            return
        if rem <= 0:
            if cost < best[0]:
                best[0], best[1] = cost, list(counts)
            return
        if ci == len(cls) or cost + bound(ci, rem) >= best[0] * (1 - 1e-12):
            return
        w, m, ids = cls[ci]
        kmax = min(len(ids), -(-rem // m))
        for k in range(kmax, -1, -1):
            dfs(ci + 1, rem - k * m, cost + k * w, counts + [k])

    dfs(0, need, 0.0, [])
    chosen = []
    if best[1] is not None:
        for (w, m, ids), k in zip(cls, best[1]):
            chosen.extend(ids[:k])
    return best[0], tuple(sorted(chosen)), nodes[0], exhausted[0]


def _class_knapsack_complement(cls, cap: int, max_nodes: int):
    """Same problem via its complement: drop the heaviest items whose mass fits in ``cap``."""
    order = sorted(((w, m, ids) for w, m, ids in cls), key=lambda c: (-c[0] / c[1], -c[0], c[1]))
    full = sum(w * len(ids) for w, _, ids in cls)
    best = [-1.0, None]
    nodes = [0]
    exhausted = [False]

    def bound(ci, room):
        ub = 0.0
        for w, m, ids in order[ci:]:
            cap_c = m * len(ids)
            if cap_c >= room:
                return ub + room * (w / m)
            ub += w * len(ids)
            room -= cap_c
        return ub

    def dfs(ci, room, gain, counts):
        if exhausted[0]:
            return
        nodes[0] += 1
        if nodes[0] > max_nodes:
            exhausted[0] = True
            return
        if gain > best[0]:
            best[0], best[1] = gain, counts + [0] * (len(order) - len(counts))
        if ci == len(order) or gain + bound(ci, room) <= best[0] * (1 + 1e-12):
            return
        w, m, ids = order[ci]
        for k in range(min(len(ids), room // m), -1, -1):
            dfs(ci + 1, room - k * m, gain + k * w, counts + [k])

    dfs(0, cap, 0.0, [])
    chosen = []
    for (w, m, ids), k in zip(order, best[1]):
        chosen.extend(ids[k:])
    cost = math.fsum(w * (len(ids) - k) for (w, m, ids), k in zip(order, best[1]))
    return (cost if cost > 0 else full - best[0]), tuple(sorted(chosen)), nodes[0], exhausted[0]


def _antichain_knapsack(u: Universe, w, masses, need: int, max_nodes: int):
    masks = u.masks
    order = sorted((i for i in range(len(u)) if masses[i] > 0), key=lambda i: (w[i] / masses[i], i))
    best = [math.inf, None]
    nodes = [0]
    exhausted = [False]

    def dfs(pos, covered, rem, cost, picked):
        if exhausted[0]:
            return
        nodes[0] += 1
        if nodes[0] > max_nodes:
            exhausted[0] = True
            return
        if rem <= 0:
            if cost < best[0]:
                best[0], best[1] = cost, tuple(sorted(picked))
            return
        lb, r = cost, rem
        for i in order[pos:]:
            if masks[i] & covered:
                continue
            if masses[i] >= r:
                lb += r * w[i] / masses[i]
                r = 0
                break
            lb += w[i]
            r -= masses[i]
        if r > 0 or lb >= best[0] * (1 - 1e-12):
            return
        for j in range(pos, len(order)):
            i = order[j]
            if masks[i] & covered:
                continue
            dfs(j + 1, covered | masks[i], rem - masses[i], cost + w[i], picked + [i])

    dfs(0, 0, need, 0.0, [])
    return best[0], best[1] or (), nodes[0], exhausted[0]


@lru_cache(maxsize=128)
def _ball_masses(u: Universe, mu) -> tuple[tuple, int]:
    from .measures import cylinder_mass
    fr = [cylinder_mass(mu, b.cylinder) for b in u.balls]
    denom = 1
    for f in fr:
        denom = denom * f.denominator // math.gcd(denom, f.denominator)
    return tuple(int(f * denom) for f in fr), denom


def katok_cover_value(mu, gauge: GaugeSpec, eps: EpsilonLevel, depth: DepthRange, delta,
                      folner: FolnerSequence | None = None, *, max_nodes: int = MAX_NODES,
                      max_balls: int = MAX_UNIVERSE) -> SearchResult:
    """min gauge sum over ball families whose union has mu-mass > 1 - delta.

    delta = 0 asks for the full mass 1.  Masses are exact rationals, so the
    strict inequality is decided without tolerance.
    """
    delta = _as_fraction(delta)
    if not 0 <= delta < 1:
        raise ValueError("delta must lie in [0, 1)")
    system = gauge.potential.system if gauge.potential is not None else None
    if system is None:
        raise ValueError("Katok covers need a gauge with a potential")
    u = build_universe(TargetSet.whole(system), eps, depth, folner, gauge.potential, max_balls)
    masses, denom = _ball_masses(u, mu)
    D = denom * delta.denominator
    scale = delta.denominator
    need, strict = _mass_threshold(delta, D)
    m_scaled = [m * scale for m in masses]
    logw = gauge.log_weights(u, "cover")
    shift = float(np.max(logw))
    w = [math.exp(x - shift) for x in logw]
    if depth.equal_depth or not u.laminar:
        pass
    note = ("strict mass > 1 - delta" if strict else "full mass required (delta = 0)")
    if depth.equal_depth:
        if len(set(w)) == 1:
            order = sorted((i for i in range(len(u)) if m_scaled[i] > 0), key=lambda i: (-m_scaled[i], i))
            acc, chosen = 0, []
            for i in order:
                if acc >= need:
                    break
                acc += m_scaled[i]
                chosen.append(i)
            if acc < need:
                raise Infeasible("not enough mass")
            cost, cert, nodes, exhausted = w[0] * len(chosen), tuple(sorted(chosen)), len(order), False
            note += "; mass-greedy selection (equal weights)"
        else:
            items = [(w[i], m_scaled[i], i) for i in range(len(u)) if m_scaled[i] > 0]
            cost, cert, nodes, exhausted = _class_knapsack(items, need, max_nodes)
    else:
        cost, cert, nodes, exhausted = _antichain_knapsack(u, w, m_scaled, need, max_nodes)
    if not cert:
        raise Infeasible("no admissible family found")
    lv = math.log(cost) + shift
    res = _result(u, logw, lv, cert, nodes, exhausted, BoundSide.UPPER, note)
    covered = sum(m_scaled[i] for i in cert)
    res.note += f"; certificate mass {Fraction(covered, D)}"
    return res


# --- critical exponents -------------------------------------------------------

@dataclass
class CriticalExponent:
    s: float
    iterations: int
    bracket: tuple
    log_value: float
    bound_side: BoundSide = BoundSide.UPPER

    @property
    def residual(self) -> float:
        return abs(math.expm1(self.log_value))

    def to_json(self) -> dict:
        return {"s": self.s, "iterations": self.iterations, "bracket": list(self.bracket),
                "residual": self.residual, "bound_side": self.bound_side.value}


def critical_exponent(log_value_fn: Callable[[float], float], s_bracket=(0.0, 4.0), tol: float = 1e-6,
                      residual: float | None = 1e-6, max_expansions: int = 60,
                      max_iter: int = 400, bound_side: BoundSide = BoundSide.UPPER) -> CriticalExponent:
    """The s at which a strictly decreasing value function crosses 1.

    ``log_value_fn`` returns log(value).  The bracket is widened geometrically
    when it does not straddle; bisection stops once the bracket is narrower
    than ``tol`` and, if ``residual`` is given, |value - 1| <= residual.
    """
    lo, hi = float(s_bracket[0]), float(s_bracket[1])
    if hi <= lo:
        raise BracketError("empty bracket")
    f_lo, f_hi = log_value_fn(lo), log_value_fn(hi)
    width = hi - lo
    expansions = 0
    while f_lo < 0:
        expansions += 1
        if expansions > max_expansions:
            raise BracketError(f"value below 1 at every tried lower end (last {lo})")
        hi, f_hi = lo, f_lo
        lo -= width
        width *= 2
        f_lo = log_value_fn(lo)
    while f_hi > 0:
        expansions += 1
        if expansions > max_expansions:
            raise BracketError(f"value above 1 at every tried upper end (last {hi})")
        lo, f_lo = hi, f_hi
        hi += width
        width *= 2
        f_hi = log_value_fn(hi)
    bracket = (lo, hi)
    if f_lo == 0:
        return CriticalExponent(lo, 0, bracket, 0.0, bound_side)
    if f_hi == 0:
        return CriticalExponent(hi, 0, bracket, 0.0, bound_side)
    it = 0
    mid = 0.5 * (lo + hi)
    f_mid = log_value_fn(mid)
    while it < max_iter:
        done_width = (hi - lo) <= tol
        done_res = residual is None or abs(math.expm1(f_mid)) <= residual
        if done_width and done_res:
            break
        if f_mid > 0:
            lo = mid
        elif f_mid < 0:
            hi = mid
        else:
            break
        it += 1
        mid = 0.5 * (lo + hi)
        f_mid = log_value_fn(mid)
    return CriticalExponent(mid, it, bracket, f_mid, bound_side)


def _log_ball_count(u: Universe) -> float:
    """log of the number of depth-N balls in the whole system (independent of the target)."""
    W = u.windows[u.depth.N]
    system = u.system
    if system.is_full_shift:
        return len(W) * math.log(system.k)
    lo, hi = W.bounds()
    if hi[0] - lo[0] + 1 == len(W):
        return math.log(system.count_words(len(W)))
    return math.log(max(len(u), 2))


def _default_bracket(u: Universe, potential: Potential | None, sizes_only: bool = False):
    """A bracket that depends on the system, window and potential only, so that
    exponents of different targets are bisected on identical grids."""
    if potential is None or sizes_only:
        scale = float(np.min(u.sizes))
    else:
        scale = float(np.min(u.sizes)) * float(potential.phi_hat)
    return (0.0, max(_log_ball_count(u), math.log(2)) / scale + 1.0)


@dataclass
class ExponentResult:
    """s*(N, eps) for one (depth range, level) with the optimal family at s*."""

    quantity: str
    s: float
    bound_side: BoundSide
    critical: CriticalExponent
    certificate: dict
    budget_exhausted: bool = False

    def to_json(self) -> dict:
        return {"quantity": self.quantity, "s": self.s, "bound_side": self.bound_side.value,
                "bisection": self.critical.to_json(), "certificate": self.certificate,
                "budget_exhausted": self.budget_exhausted}


def _exponent(quantity, evaluate, bracket, side, tol):
    flags = {"exhausted": False}

    def f(s):
        lv, exhausted = evaluate(s)
        flags["exhausted"] |= exhausted
        return lv

    crit = critical_exponent(f, bracket, tol=tol, bound_side=side)
    _, _ = evaluate(crit.s)
    return crit, flags["exhausted"]


def bs_exponent(H: TargetSet, potential: Potential, eps: EpsilonLevel, depth: DepthRange,
                folner: FolnerSequence | None = None, *, phi_term: str = "ball_sup",
                problem: str = "cover", split_depth: int = 0, tol: float = 1e-6,
                method: str = "auto", max_nodes: int = MAX_NODES,
                max_balls: int = MAX_UNIVERSE) -> ExponentResult:
    """Critical s for the BS gauge: ``problem`` is cover, weighted, packing or packing_outer."""
    u = build_universe(H, eps, depth, folner, potential, max_balls)
    gauge = GaugeSpec.bs(potential, phi_term=phi_term)
    last = {}

    def evaluate(s):
        g = gauge.at(s)
        if problem == "cover":
            r = solve_cover(u, g, method=method, max_nodes=max_nodes)
        elif problem == "packing":
            r = solve_packing(u, g, method=method, max_nodes=max_nodes)
        elif problem == "weighted":
            r = weighted_cover_value(H, g, eps, depth, folner, max_nodes=max_nodes, max_balls=max_balls)
        elif problem == "packing_outer":
            r = packing_outer_value(H, g, eps, depth, split_depth, folner, method=method,
                                    max_nodes=max_nodes, max_balls=max_balls)
        else:
            raise ValueError(f"unknown problem {problem!r}")
        last["r"] = r
        return r.log_value, r.budget_exhausted

    side = BoundSide.LOWER if problem.startswith("packing") else BoundSide.UPPER
    crit, exhausted = _exponent(problem, evaluate, _default_bracket(u, potential), side, tol)
    if exhausted:
        side = BoundSide.HEURISTIC
        crit.bound_side = side
    return ExponentResult(f"bs_{problem}", crit.s, side, crit, last["r"].to_json(), exhausted)


def katok_exponent(mu, potential: Potential, eps: EpsilonLevel, depth: DepthRange, delta,
                   folner: FolnerSequence | None = None, *, tol: float = 1e-6,
                   max_nodes: int = MAX_NODES, max_balls: int = MAX_UNIVERSE) -> ExponentResult:
    gauge = GaugeSpec.bs(potential, phi_term="center")
    last = {}

    def evaluate(s):
        r = katok_cover_value(mu, gauge.at(s), eps, depth, delta, folner, max_nodes=max_nodes,
                              max_balls=max_balls)
        last["r"] = r
        return r.log_value, r.budget_exhausted

    u = build_universe(TargetSet.whole(potential.system), eps, depth, folner, potential, max_balls)
    crit, exhausted = _exponent("katok", evaluate, _default_bracket(u, potential), BoundSide.UPPER, tol)
    side = BoundSide.HEURISTIC if exhausted else BoundSide.UPPER
    return ExponentResult("katok_cover", crit.s, side, crit, last["r"].to_json(), exhausted)


@dataclass
class DimensionEstimate:
    """Critical exponents s*(N, eps) over a grid, with convergence diagnostics."""

    quantity: str
    values: dict
    bound_side: BoundSide
    certificates: dict = field(repr=False, default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"quantity": self.quantity, "bound_side": self.bound_side.value,
                "values": [{"N": k[0], "N_max": k[1], "eps_level": k[2], "s": v}
                           for k, v in sorted(self.values.items())],
                "diagnostics": self.diagnostics}


def dimension_estimate(H: TargetSet, potential: Potential, eps_levels: Sequence[int],
                       depths: Sequence[DepthRange], folner: FolnerSequence | None = None, *,
                       problem: str = "cover", phi_term: str = "ball_sup", split_depth: int = 0,
                       tol: float = 1e-6, max_nodes: int = MAX_NODES) -> DimensionEstimate:
    values, certs = {}, {}
    exhausted = False
    for m in eps_levels:
        for dr in depths:
            r = bs_exponent(H, potential, m, dr, folner, phi_term=phi_term, problem=problem,
                            split_depth=split_depth, tol=tol, max_nodes=max_nodes)
            key = (dr.N, dr.N_max, m)
            values[key] = r.s
            certs[key] = r.certificate
            exhausted |= r.budget_exhausted
    diagnostics = {}
    for m in eps_levels:
        seq = sorted((k[0], v) for k, v in values.items() if k[2] == m)
        tail = [v for _, v in seq[-3:]]
        diagnostics[f"eps_level_{m}"] = {"sequence": seq, "tail_variation": max(tail) - min(tail)}
    side = BoundSide.HEURISTIC if exhausted else (
        BoundSide.LOWER if problem.startswith("packing") else BoundSide.UPPER)
    return DimensionEstimate(f"bs_{problem}", values, side, certs, diagnostics)
