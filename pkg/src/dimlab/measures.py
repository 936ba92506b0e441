"""Bernoulli and Markov measures, local BS exponents and measure dimensions."""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterator, Sequence

import numpy as np

from .cp_core import (MAX_NODES, BoundSide, DepthRange, GaugeSpec, build_universe, bs_exponent,
                      critical_exponent, katok_exponent, tree_values, _as_fraction, _class_knapsack,
                      _default_bracket, _group_logsumexp, _logsumexp)
from .errors import BudgetExceeded, InvalidSystem, ZeroMassBall
from .group import FiniteSubset, FolnerSequence, box_folner
from .potential import Potential, birkhoff_sum, parse_value
from .symbolic import (Configuration, Cylinder, EpsilonLevel, LazyRandom, SymbolicSystem, TargetSet,
                       bowen_window)

DEFAULT_TAIL = 4
EXACT_BUDGET = 1 << 20


def _uniform(seed, g) -> float:
    h = hashlib.blake2b(f"{seed}|{tuple(g)}".encode(), digest_size=8).digest()
    return int.from_bytes(h, "little") / 2.0 ** 64


def _pick(cum: Sequence[float], u: float) -> int:
    for a, c in enumerate(cum):
        if u < c:
            return a
    # guard against float cumulative sums slightly below 1
    return max(a for a in range(len(cum)) if a == 0 or cum[a] > cum[a - 1])


@dataclass(frozen=True)
class MeasureSpec:
    """Bernoulli product measure (any d) or stationary Markov chain (d = 1)."""

    kind: str
    probs: tuple = ()
    P: tuple = ()
    pi: tuple = ()
    d: int = 1

    def __post_init__(self):
        if self.kind == "bernoulli":
            if len(self.probs) < 2 or sum(self.probs) != 1 or any(p < 0 for p in self.probs):
                raise InvalidSystem("Bernoulli weights must be >= 0 and sum to 1 exactly")
        elif self.kind == "markov":
            if self.d != 1:
                raise InvalidSystem("Markov measures are one-dimensional")
            k = len(self.P)
            if any(len(row) != k or sum(row) != 1 or any(p < 0 for p in row) for row in self.P):
                raise InvalidSystem("transition matrix rows must be >= 0 and sum to 1 exactly")
            if len(self.pi) != k or sum(self.pi) != 1:
                raise InvalidSystem("stationary vector must sum to 1")
            for b in range(k):
                if sum(self.pi[a] * self.P[a][b] for a in range(k)) != self.pi[b]:
                    raise InvalidSystem("stationary vector does not satisfy pi P = pi exactly")
        else:
            raise ValueError(f"unknown measure kind {self.kind!r}")

    @classmethod
    def bernoulli(cls, probs: Sequence, d: int = 1) -> "MeasureSpec":
        return cls("bernoulli", probs=tuple(parse_value(p) for p in probs), d=d)

    @classmethod
    def markov(cls, P: Sequence[Sequence], pi: Sequence | None = None) -> "MeasureSpec":
        M = tuple(tuple(parse_value(p) for p in row) for row in P)
        if pi is None:
            pi = stationary_vector(M)
        return cls("markov", P=M, pi=tuple(parse_value(p) for p in pi))

    @classmethod
    def golden_markov(cls, a, max_denominator: int = 10 ** 6) -> "MeasureSpec":
        """Chain on the golden-mean shift with P = [[1-a, a], [1, 0]]."""
        a = Fraction(a).limit_denominator(max_denominator) if not isinstance(a, Fraction) else a
        return cls.markov([[1 - a, a], [1, 0]], [1 / (1 + a), a / (1 + a)])

    @property
    def k(self) -> int:
        return len(self.probs) if self.kind == "bernoulli" else len(self.P)

    def label(self) -> str:
        if self.kind == "bernoulli":
            return "Bernoulli(" + ", ".join(str(p) for p in self.probs) + ")"
        return "Markov(P=" + str([[str(p) for p in row] for row in self.P]) + ")"

    def to_json(self) -> dict:
        if self.kind == "bernoulli":
            return {"kind": "bernoulli", "probs": [str(p) for p in self.probs], "d": self.d}
        return {"kind": "markov", "P": [[str(p) for p in row] for row in self.P],
                "pi": [str(p) for p in self.pi]}

    def compatible_with(self, system: SymbolicSystem) -> bool:
        """Every positive-mass short word is allowed in ``system``."""
        if system.k != self.k or system.d != self.d:
            return False
        if system.is_full_shift:
            return True
        length = system.graph.q + 1
        support = box_folner(1, length)
        allowed = set(system.patterns(support))
        for w in product(range(self.k), repeat=length):
            if w not in allowed and cylinder_mass(self, Cylinder(support, w)) > 0:
                return False
        return True

    @property
    def _float_cum(self):
        return _cum(self)

    def draw(self, config: LazyRandom, g) -> int:
        if self.kind == "bernoulli":
            return _pick(self._float_cum[0], _uniform(config.seed, g))
        return _markov_symbol(self, config, g[0])


@lru_cache(maxsize=64)
def _cum(mu: MeasureSpec):
    def cum(row):
        return tuple(float(sum(row[:a + 1])) for a in range(len(row)))

    if mu.kind == "bernoulli":
        return (cum(mu.probs),)
    k = mu.k
    forward = tuple(cum(row) for row in mu.P)
    backward = []
    for b in range(k):
        if mu.pi[b] == 0:
            backward.append(cum([Fraction(1, k)] * k))
        else:
            backward.append(cum([mu.pi[a] * mu.P[a][b] / mu.pi[b] for a in range(k)]))
    return cum(mu.pi), forward, tuple(backward)


def _markov_symbol(mu: MeasureSpec, config: LazyRandom, i: int) -> int:
    init, forward, backward = _cum(mu)
    cache = config._cache
    if (0,) not in cache:
        cache[(0,)] = _pick(init, _uniform(config.seed, (0,)))
    step = 1 if i > 0 else -1
    j = 0
    # walk outward from the nearest already-materialized coordinate
    while (j + step,) in cache and j != i:
        j += step
    while j != i:
        prev = cache[(j,)]
        j += step
        table = forward[prev] if step > 0 else backward[prev]
        cache[(j,)] = _pick(table, _uniform(config.seed, (j,)))
    return cache[(i,)]


def stationary_vector(P) -> tuple:
    """Exact stationary vector of an irreducible rational transition matrix."""
    k = len(P)
    # solve pi (P - I) = 0 with sum(pi) = 1 by Gauss-Jordan over Fractions
    A = [[P[j][i] - (1 if i == j else 0) for j in range(k)] for i in range(k)]
    A[-1] = [Fraction(1)] * k
    b = [Fraction(0)] * (k - 1) + [Fraction(1)]
    M = [row[:] + [b[i]] for i, row in enumerate(A)]
    for c in range(k):
        piv = next((r for r in range(c, k) if M[r][c] != 0), None)
        if piv is None:
            raise InvalidSystem("transition matrix has no unique stationary vector")
        M[c], M[piv] = M[piv], M[c]
        inv = 1 / M[c][c]
        M[c] = [v * inv for v in M[c]]
        for r in range(k):
            if r != c and M[r][c] != 0:
                f = M[r][c]
                M[r] = [a - f * bb for a, bb in zip(M[r], M[c])]
    return tuple(M[i][k] for i in range(k))


@lru_cache(maxsize=4096)
def _matrix_power(P: tuple, e: int) -> tuple:
    k = len(P)
    result = tuple(tuple(Fraction(int(i == j)) for j in range(k)) for i in range(k))
    base = P
    while e:
        if e & 1:
            result = _matmul(result, base)
        base = _matmul(base, base)
        e >>= 1
    return result


def _matmul(A, B):
    k = len(A)
    return tuple(tuple(sum(A[i][l] * B[l][j] for l in range(k)) for j in range(k)) for i in range(k))


def cylinder_mass(mu: MeasureSpec, c: Cylinder) -> Fraction:
    """Exact mu-mass of a cylinder; gaps in Markov supports are summed out."""
    if c.d != mu.d:
        raise ValueError(f"cylinder dimension {c.d} does not match measure dimension {mu.d}")
    if mu.kind == "bernoulli":
        out = Fraction(1)
        for a in c.symbols:
            out *= mu.probs[a]
        return out
    positions = [g[0] for g in c.support.elements]
    symbols = c.symbols
    out = mu.pi[symbols[0]]
    for j in range(1, len(positions)):
        gap = positions[j] - positions[j - 1]
        step = mu.P[symbols[j - 1]][symbols[j]] if gap == 1 else _matrix_power(mu.P, gap)[symbols[j - 1]][symbols[j]]
        out *= step
        if out == 0:
            break
    return out


@lru_cache(maxsize=64)
def _log_tables(mu: MeasureSpec):
    def lg(p):
        return math.log(p) if p > 0 else -math.inf

    if mu.kind == "bernoulli":
        return tuple(lg(p) for p in mu.probs), None
    return tuple(lg(p) for p in mu.pi), tuple(tuple(lg(p) for p in row) for row in mu.P)


def cylinder_log_mass(mu: MeasureSpec, c: Cylinder) -> float:
    """log mu(c) in floating point (-inf for null cylinders)."""
    first, trans = _log_tables(mu)
    if mu.kind == "bernoulli":
        return math.fsum(first[a] for a in c.symbols)
    positions = [g[0] for g in c.support.elements]
    if all(b - a == 1 for a, b in zip(positions, positions[1:])):
        s = c.symbols
        return math.fsum([first[s[0]]] + [trans[a][b] for a, b in zip(s, s[1:])])
    m = cylinder_mass(mu, c)
    return math.log(m) if m > 0 else -math.inf


def sample_point(mu: MeasureSpec, seed) -> LazyRandom:
    return LazyRandom(seed, mu, mu.d)


def point_seed(seed, index: int) -> int:
    """Independent per-point seed stream derived from (seed, index)."""
    h = hashlib.blake2b(f"{seed}/{index}".encode(), digest_size=8).digest()
    return int.from_bytes(h, "little")


# --- local exponents -------------------------------------------------------------

@dataclass
class LocalExponentTrace:
    point_id: str
    eps_level: int
    ns: list
    values: list
    tail_window: int = DEFAULT_TAIL

    @property
    def _tail(self) -> list:
        hi = self.ns[-1]
        lo = max(self.ns[0], hi - self.tail_window)
        return [v for n, v in zip(self.ns, self.values) if n >= lo]

    @property
    def tail_inf(self) -> float:
        return min(self._tail)

    @property
    def tail_sup(self) -> float:
        return max(self._tail)

    def rows(self) -> list:
        return [(n, v) for n, v in zip(self.ns, self.values)]

    def to_json(self) -> dict:
        return {"point": self.point_id, "eps_level": self.eps_level, "tail_window": self.tail_window,
                "tail_inf": self.tail_inf, "tail_sup": self.tail_sup,
                "trace": [{"n": n, "e_n": v} for n, v in self.rows()]}


def _line_fast(mu, x, phi, eps, N_lo, N_hi):
    # one-dimensional boxes: prefix sums over the read window
    r = phi.r
    lo = -eps
    hi = N_hi - 1 + eps
    read_lo = min(lo, -r)
    read_hi = max(hi, N_hi - 1 + r)
    sym = [x.symbol((i,)) for i in range(read_lo, read_hi + 1)]
    first, trans = _log_tables(mu)
    off = -read_lo
    terms = [phi.value(tuple(sym[g + off - r:g + off + r + 1])) for g in range(N_hi)]
    birk = np.concatenate([[0.0], np.cumsum(terms)])
    if mu.kind == "bernoulli":
        lm = np.concatenate([[0.0], np.cumsum([first[a] for a in sym])])

        def logmass(a, b):
            return lm[b + off + 1] - lm[a + off]
    else:
        tr = np.concatenate([[0.0], np.cumsum([trans[a][b] for a, b in zip(sym, sym[1:])])])

        def logmass(a, b):
            # pi(x_a) * prod P(x_i, x_{i+1}) for i in [a, b)
            return first[sym[a + off]] + tr[b + off] - tr[a + off]
    out = []
    for n in range(N_lo, N_hi + 1):
        lmass = logmass(lo, n - 1 + eps)
        if lmass == -math.inf:
            raise ZeroMassBall(n)
        out.append(-lmass / birk[n])
    return out


def local_exponent_trace(mu: MeasureSpec, x: Configuration, phi: Potential, eps: EpsilonLevel,
                         N_lo: int, N_hi: int, folner: FolnerSequence | None = None,
                         tail_window: int = DEFAULT_TAIL, point_id: str | None = None) -> LocalExponentTrace:
    """e_n = -log mu(B_{F_n}(x, eps)) / Phi_{F_n}(x) for n in [N_lo, N_hi]."""
    if N_lo < 1 or N_hi < N_lo:
        raise ValueError("need 1 <= N_lo <= N_hi")
    folner = folner or FolnerSequence.boxes(mu.d)
    ns = list(range(N_lo, N_hi + 1))
    if mu.d == 1 and folner.is_box:
        values = _line_fast(mu, x, phi, eps, N_lo, N_hi)
    else:
        values = []
        for n in ns:
            F = folner[n]
            W = bowen_window(F, eps)
            c = Cylinder(W, x.read(W))
            lm = cylinder_log_mass(mu, c)
            if lm == -math.inf:
                raise ZeroMassBall(n)
            values.append(-lm / birkhoff_sum(phi, x, F))
    return LocalExponentTrace(point_id or x.label(), eps, ns, values, tail_window)


@dataclass(frozen=True)
class Sampling:
    num_points: int = 64
    seed: int = 0


@dataclass(frozen=True)
class ExactDepth:
    n: int


@dataclass
class MeasureEstimate:
    value: float
    err: float
    side: str
    mode: str
    params: dict = field(default_factory=dict)
    traces: list = field(default_factory=list, repr=False)

    @property
    def interval(self) -> tuple:
        return (self.value - self.err, self.value + self.err)

    def to_json(self) -> dict:
        return {"value": self.value, "err": self.err, "side": self.side, "mode": self.mode, **self.params}


def _compositions(total: int, parts: int) -> Iterator[tuple]:
    if parts == 1:
        yield (total,)
        return
    for a in range(total + 1):
        for rest in _compositions(total - a, parts - 1):
            yield (a,) + rest


def _log_multinomial(counts) -> float:
    return math.lgamma(sum(counts) + 1) - sum(math.lgamma(c + 1) for c in counts)


def _exact_bernoulli_r0(mu, phi, eps, n, folner):
    F = folner[n]
    W = bowen_window(F, eps)
    inner, shell = len(F), len(W) - len(F)
    logp = [math.log(p) if p > 0 else None for p in mu.probs]
    vals = [phi.value((a,)) for a in range(mu.k)]
    shell_classes = []
    for c2 in _compositions(shell, mu.k):
        if any(c and logp[a] is None for a, c in enumerate(c2)):
            continue
        lm = sum(c * logp[a] for a, c in enumerate(c2) if c)
        shell_classes.append((_log_multinomial(c2) + lm, lm))
    total = 0.0
    for c1 in _compositions(inner, mu.k):
        if any(c and logp[a] is None for a, c in enumerate(c1)):
            continue
        lm1 = sum(c * logp[a] for a, c in enumerate(c1) if c)
        w1 = _log_multinomial(c1) + lm1
        birk = sum(c * vals[a] for a, c in enumerate(c1))
        for w2, lm2 in shell_classes:
            total += math.exp(w1 + w2) * (-(lm1 + lm2) / birk)
    return total


def _exact_enumerate(mu, phi, eps, n, folner, budget):
    F = folner[n]
    W = bowen_window(F, eps)
    V = W.union(F.sumset(phi.window))
    system = phi.system
    total = 0.0
    count = 0
    for pattern in system.patterns(V, max_count=budget + 1):
        count += 1
        if count > budget:
            raise BudgetExceeded(f"more than {budget} patterns at exact depth {n}")
        c = Cylinder(V, pattern)
        lm_full = cylinder_log_mass(mu, c)
        if lm_full == -math.inf:
            continue
        pinned = c.as_dict()
        ball = Cylinder(W, tuple(pinned[g] for g in W.elements))
        lm_ball = cylinder_log_mass(mu, ball)
        offsets = phi.window.elements
        birk = math.fsum(phi.value(tuple(pinned[tuple(a + b for a, b in zip(g, h))] for h in offsets))
                         for g in F.elements)
        total += math.exp(lm_full) * (-lm_ball / birk)
    return total


def exact_local_expectation(mu: MeasureSpec, phi: Potential, eps: EpsilonLevel, n: int,
                            folner: FolnerSequence | None = None, budget: int = EXACT_BUDGET) -> float:
    """E_mu[e_n] computed exactly by enumeration (grouped by type class when possible)."""
    folner = folner or FolnerSequence.boxes(mu.d)
    if mu.kind == "bernoulli" and phi.r == 0 and phi.system.is_full_shift:
        return _exact_bernoulli_r0(mu, phi, eps, n, folner)
    return _exact_enumerate(mu, phi, eps, n, folner, budget)


def measure_bs_dimension(mu: MeasureSpec, phi: Potential, eps: EpsilonLevel, N_range: tuple,
                         side: str = "lower", sampling: Sampling | ExactDepth | None = None,
                         folner: FolnerSequence | None = None,
                         tail_window: int = DEFAULT_TAIL) -> MeasureEstimate:
    """Mean tail-inf (lower) or tail-sup (upper) local exponent, with a 95% interval."""
    if side not in ("lower", "upper"):
        raise ValueError("side must be 'lower' or 'upper'")
    sampling = sampling or Sampling()
    if isinstance(sampling, ExactDepth):
        v = exact_local_expectation(mu, phi, eps, sampling.n, folner)
        return MeasureEstimate(v, 0.0, side, "exact_depth", {"n": sampling.n, "eps_level": eps})
    N_lo, N_hi = N_range
    traces = []
    for i in range(sampling.num_points):
        x = sample_point(mu, point_seed(sampling.seed, i))
        traces.append(local_exponent_trace(mu, x, phi, eps, N_lo, N_hi, folner, tail_window,
                                           point_id=f"seed={sampling.seed}/{i}"))
    vals = np.array([t.tail_inf if side == "lower" else t.tail_sup for t in traces])
    mean = float(np.mean(vals))
    err = 1.96 * float(np.std(vals, ddof=1)) / math.sqrt(len(vals)) if len(vals) > 1 else 0.0
    return MeasureEstimate(mean, err, side, "monte_carlo",
                           {"N_lo": N_lo, "N_hi": N_hi, "eps_level": eps, "seed": sampling.seed,
                            "num_points": sampling.num_points, "tail_window": tail_window}, traces)


# --- Katok and BS dimensions of a measure ---------------------------------------

@dataclass
class DeltaProfile:
    quantity: str
    profile: dict  # delta (str) -> s*
    bound_side: BoundSide
    details: dict = field(default_factory=dict, repr=False)

    @property
    def estimate(self) -> float:
        return self.profile[min(self.profile, key=lambda d: Fraction(d))]

    def to_json(self) -> dict:
        return {"quantity": self.quantity, "bound_side": self.bound_side.value, "estimate": self.estimate,
                "profile": [{"delta": d, "s": v} for d, v in
                            sorted(self.profile.items(), key=lambda kv: Fraction(kv[0]))]}


def _delta_key(delta) -> str:
    return str(_as_fraction(delta)) if not isinstance(delta, str) else delta


def katok_dimension_of_measure(mu: MeasureSpec, phi: Potential, eps: EpsilonLevel, depth: DepthRange,
                               delta_grid: Sequence, folner: FolnerSequence | None = None, *,
                               tol: float = 1e-9, max_nodes: int = MAX_NODES) -> DeltaProfile:
    """Critical exponent of the Katok cover quantity at each delta."""
    profile, details = {}, {}
    side = BoundSide.UPPER
    for delta in delta_grid:
        r = katok_exponent(mu, phi, eps, depth, delta, folner, tol=tol, max_nodes=max_nodes)
        key = str(delta)
        profile[key] = r.s
        details[key] = r.to_json()
        if r.budget_exhausted:
            side = BoundSide.HEURISTIC
    return DeltaProfile("katok", profile, side, details)


def sorted_cylinders(mu: MeasureSpec, system: SymbolicSystem, window: FiniteSubset) -> list:
    """Positive-mass cylinders on ``window``, by mass descending then pattern."""
    out = []
    for p in system.patterns(window):
        c = Cylinder(window, p)
        m = cylinder_mass(mu, c)
        if m > 0:
            out.append((m, c))
    out.sort(key=lambda mc: (-mc[0], mc[1]))
    return out


def high_mass_set(mu: MeasureSpec, system: SymbolicSystem, window: FiniteSubset, delta) -> TargetSet:
    """Shortest prefix of the sorted cylinders with mass >= 1 - delta."""
    need = 1 - _as_fraction(delta)
    acc = Fraction(0)
    chosen = []
    for m, c in sorted_cylinders(mu, system, window):
        if acc >= need:
            break
        acc += m
        chosen.append(c)
    return TargetSet.union(system, chosen)


def bs_dimension_of_measure(mu: MeasureSpec, phi: Potential, eps: EpsilonLevel, depth: DepthRange,
                            delta_grid: Sequence, folner: FolnerSequence | None = None, *,
                            phi_term: str = "center", tol: float = 1e-9,
                            max_nodes: int = MAX_NODES) -> DeltaProfile:
    """min over sorted-cylinder sets H with mu(H) >= 1 - delta of the BS cover exponent of H."""
    folner = folner or FolnerSequence.boxes(mu.d)
    profile, details = {}, {}
    side = BoundSide.UPPER
    for delta in delta_grid:
        best = None
        for n in depth.depths:
            H = high_mass_set(mu, phi.system, bowen_window(folner[n], eps), delta)
            r = bs_exponent(H, phi, eps, depth, folner, phi_term=phi_term, tol=tol, max_nodes=max_nodes)
            if r.budget_exhausted:
                side = BoundSide.HEURISTIC
            if best is None or r.s < best[0]:
                best = (r.s, n, len(H.cylinders))
        key = str(delta)
        profile[key] = best[0]
        details[key] = {"s": best[0], "candidate_depth": best[1], "cylinders": best[2]}
    return DeltaProfile("bs_of_measure", profile, side, details)


def bsp_dimension_of_measure(mu: MeasureSpec, phi: Potential, eps: EpsilonLevel, depth: DepthRange,
                             delta_grid: Sequence, folner: FolnerSequence | None = None, *,
                             tol: float = 1e-9, max_nodes: int = MAX_NODES) -> DeltaProfile:
    """Packing analogue of bs_dimension_of_measure over the same sorted-cylinder sets."""
    folner = folner or FolnerSequence.boxes(mu.d)
    profile, details = {}, {}
    side = BoundSide.LOWER
    for delta in delta_grid:
        best = None
        for n in depth.depths:
            H = high_mass_set(mu, phi.system, bowen_window(folner[n], eps), delta)
            r = bs_exponent(H, phi, eps, depth, folner, phi_term="center", problem="packing", tol=tol,
                            max_nodes=max_nodes)
            if r.budget_exhausted:
                side = BoundSide.HEURISTIC
            if best is None or r.s < best[0]:
                best = (r.s, n, len(H.cylinders))
        key = str(delta)
        profile[key] = best[0]
        details[key] = {"s": best[0], "candidate_depth": best[1], "cylinders": best[2]}
    return DeltaProfile("bsp_of_measure", profile, side, details)


def packing_katok_exponent(mu: MeasureSpec, phi: Potential, eps: EpsilonLevel, depth: DepthRange,
                           delta, folner: FolnerSequence | None = None, *, split_depth: int | None = None,
                           tol: float = 1e-9) -> float:
    """Critical exponent of the restricted packing-Katok quantity.

    Pieces are the cylinders on the depth-D box (D defaults to N, and must
    not exceed it) together with the whole space.  A family of pieces
    qualifies when its mass is >= 1 - delta; its value is the sum of the
    pieces' packing values.  Each ball of a nested universe lies inside one
    piece, so piece values are sums of per-ball packing optima.
    """
    folner = folner or FolnerSequence.boxes(mu.d)
    system = phi.system
    D = depth.N if split_depth is None else split_depth
    box = box_folner(system.d, D)
    whole = TargetSet.whole(system)
    u = build_universe(whole, eps, depth, folner, phi)
    top = u.slices[depth.N]
    if not u.laminar or not box.issubset(u.windows[depth.N]):
        raise ValueError("packing-Katok pieces need a nested universe with the box inside the top window")
    keys = {}
    groups = []
    masses = []
    for i in range(top.start, top.stop):
        c = u.balls[i].cylinder.restrict(box)
        if c.symbols not in keys:
            keys[c.symbols] = len(masses)
            masses.append(cylinder_mass(mu, c))
        groups.append(keys[c.symbols])
    groups = np.array(groups)
    need = 1 - _as_fraction(delta)
    gauge = GaugeSpec.bs(phi, phi_term="center")

    def log_value(s):
        logw = gauge.at(s).log_weights(u, "pack")
        lc, _ = tree_values(u, logw, True)
        top_vals = lc[top]
        piece_vals = _group_logsumexp(top_vals, groups, len(masses))
        whole_val = _logsumexp(top_vals)
        vals = [(m, v) for m, v in zip(masses, piece_vals) if m > 0]
        return min(whole_val, _min_mass_family(vals, need))

    return critical_exponent(log_value, _default_bracket(u, phi), tol=tol).s


def _min_mass_family(vals, need: Fraction) -> float:
    """min log-sum of chosen log values subject to chosen mass >= need (exact knapsack)."""
    denom = 1
    for m, _ in vals:
        denom = denom * m.denominator // math.gcd(denom, m.denominator)
    denom = denom * need.denominator // math.gcd(denom, need.denominator)
    shift = max(v for _, v in vals)
    items = [(math.exp(v - shift), int(m * denom), i) for i, (m, v) in enumerate(vals) if m > 0]
    cost, _, _, _ = _class_knapsack(items, math.ceil(need * denom), MAX_NODES)
    return math.log(cost) + shift
