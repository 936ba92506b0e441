"""Closed-form and transfer-matrix reference values."""
from __future__ import annotations

import math
from fractions import Fraction
from math import comb

import numpy as np
from scipy.optimize import brentq

from ..potential import Potential
from ..symbolic import SymbolicSystem

GOLDEN = (1 + math.sqrt(5)) / 2


def bernoulli_entropy(probs) -> float:
    return -math.fsum(float(p) * math.log(float(p)) for p in probs if p > 0)


def transfer_matrix(system: SymbolicSystem) -> tuple[np.ndarray, list]:
    """0/1 adjacency over the essential states of the system's word graph."""
    if system.is_full_shift:
        return np.ones((system.k, system.k)), [(a,) for a in range(system.k)]
    g = system.graph
    states = sorted(g.states)
    index = {s: i for i, s in enumerate(states)}
    A = np.zeros((len(states), len(states)))
    for s in states:
        for t in g.succ[s]:
            if t in index:
                A[index[s], index[t]] = 1
    return A, states


def word_count(system: SymbolicSystem, n: int) -> int:
    """Number of allowed words of length n (exact integer transfer-matrix count)."""
    if system.is_full_shift:
        return system.k ** n
    A, states = transfer_matrix(system)
    q = len(states[0])
    if n <= q:
        return len({s[:n] for s in states})
    M = [[int(v) for v in row] for row in A]
    vec = [1] * len(states)
    for _ in range(n - q):
        vec = [sum(M[i][j] * vec[j] for j in range(len(vec))) for i in range(len(vec))]
    return sum(vec)


def topological_entropy(system: SymbolicSystem) -> float:
    A, _ = transfer_matrix(system)
    return math.log(max(abs(np.linalg.eigvals(A))))


def pressure_root(system: SymbolicSystem, phi: Potential) -> float | None:
    """t with spectral radius of [A_ab exp(-t phi(b))] equal to 1, for radius-0 potentials."""
    if phi.r != 0 or system.d != 1 and not system.is_full_shift:
        return None
    vals = np.array([phi.value((a,)) for a in range(system.k)])
    if system.is_full_shift:
        return brentq(lambda t: math.log(np.sum(np.exp(-t * vals))), 0.0, 50.0, xtol=1e-14)
    A, states = transfer_matrix(system)
    if len(states[0]) != 1:
        return None
    last = np.array([vals[s[-1]] for s in states])

    def f(t):
        return math.log(max(abs(np.linalg.eigvals(A * np.exp(-t * last)[None, :]))))

    return brentq(f, 0.0, 50.0, xtol=1e-14)


def gibbs_weights(system: SymbolicSystem, phi: Potential) -> list | None:
    """Bernoulli weights p_a proportional to exp(-t* phi(a)) on a full shift."""
    t = pressure_root(system, phi)
    if t is None or not system.is_full_shift:
        return None
    w = [math.exp(-t * phi.value((a,))) for a in range(system.k)]
    total = sum(w)
    return [v / total for v in w]


def bernoulli_katok_count(probs, n: int, delta) -> int:
    """Fewest length-n words with Bernoulli mass > 1 - delta (mass = 1 when delta = 0).

    Works class by class on symbol counts, so it never lists words.
    """
    probs = [Fraction(p) for p in probs]
    delta = Fraction(str(delta)) if not isinstance(delta, Fraction) else delta
    k = len(probs)
    classes = []

    def rec(i, left, counts):
        if i == k - 1:
            c = counts + [left]
            mass = Fraction(1)
            for p, e in zip(probs, c):
                mass *= p ** e
            mult = math.factorial(n)
            for e in c:
                mult //= math.factorial(e)
            if mass > 0:
                classes.append((mass, mult))
            return
        for e in range(left + 1):
            rec(i + 1, left - e, counts + [e])

    rec(0, n, [])
    classes.sort(key=lambda mc: -mc[0])
    need = 1 - delta
    acc, count = Fraction(0), 0
    for mass, mult in classes:
        if (acc > need) or (delta == 0 and acc >= 1):
            break
        # take just enough words from this class
        if delta == 0:
            take = mult
        else:
            gap = need - acc
            take = min(mult, math.floor(gap / mass) + 1)
        acc += take * mass
        count += take
    return count


ORACLES = {
    "golden_entropy": (lambda: math.log(GOLDEN), "log((1 + sqrt 5)/2), entropy of the golden-mean shift"),
    "bowen_phi12": (lambda: -math.log((math.sqrt(5) - 1) / 2),
                    "-log((sqrt 5 - 1)/2), root of exp(-t) + exp(-2t) = 1"),
    "gibbs_p0": (lambda: (math.sqrt(5) - 1) / 2, "(sqrt 5 - 1)/2, Gibbs weight of symbol 0 for phi = (1, 2)"),
    "log2": (lambda: math.log(2), "log 2, entropy of the 2-shift"),
    "log3": (lambda: math.log(3), "log 3, entropy of the 3-shift"),
    "half_log2": (lambda: math.log(2) / 2, "(log 2)/2, root of 2 exp(-2t) = 1"),
    "entropy_0.3": (lambda: bernoulli_entropy([0.3, 0.7]), "-0.3 log 0.3 - 0.7 log 0.7"),
    "entropy_0.9": (lambda: bernoulli_entropy([0.9, 0.1]), "-0.9 log 0.9 - 0.1 log 0.1"),
    "golden_count_16": (lambda: math.log(word_count(SymbolicSystem.golden_mean(), 14)) / 14,
                        "log(F_16)/14 = log 987 / 14, finite-depth golden-mean exponent"),
}
