import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from dimlab.cp_core import (BoundSide, DepthRange, GaugeSpec, build_universe, canonical_log_sum,
                            cover_value, critical_exponent, katok_cover_value, packing_outer_value,
                            packing_value, weighted_cover_value)
from dimlab.errors import BracketError, BudgetExceeded
from dimlab.measures import MeasureSpec
from dimlab.potential import Potential
from dimlab.symbolic import Cylinder, SymbolicSystem, TargetSet

import bruteforce

FULL2 = SymbolicSystem.full_shift(2)
GOLDEN = SymbolicSystem.golden_mean()
ONE = Potential.constant(FULL2, 1)
X = TargetSet.whole(FULL2)
D2 = DepthRange.single(2)


@pytest.mark.parametrize("s", [0.0, 0.3, math.log(2), 1.7])
def test_cover_full_shift_depth_two(s):
    res = cover_value(X, GaugeSpec.bs(ONE, s), 0, D2)
    assert res.value == pytest.approx(4 * math.exp(-2 * s), rel=1e-12)
    assert res.bound_side is BoundSide.UPPER
    assert res.objective_from_certificate() == pytest.approx(res.log_value, abs=1e-9)


def test_cover_value_one_at_log2():
    assert cover_value(X, GaugeSpec.bs(ONE, math.log(2)), 0, D2).value == pytest.approx(1.0, abs=1e-12)


def test_cover_counts_golden_words():
    res = cover_value(TargetSet.whole(GOLDEN), GaugeSpec.bs(Potential.constant(GOLDEN, 1), 0.0), 0,
                      DepthRange.single(3))
    assert res.value == pytest.approx(5)
    assert len(res.certificate) == 5


def test_weighted_cover_examples():
    for depth in (D2, DepthRange(2, 3)):
        g = GaugeSpec.bs(ONE, 0.4)
        w = weighted_cover_value(X, g, 0, depth)
        c = cover_value(X, g, 0, depth)
        assert w.log_value <= c.log_value + 1e-12
        assert w.value == pytest.approx(c.value, rel=1e-9)
    H = TargetSet.union(FULL2, [Cylinder.word([0, 1])])
    w = weighted_cover_value(H, GaugeSpec.bs(ONE, 0.4), 0, D2)
    assert w.value == pytest.approx(math.exp(-0.8), rel=1e-9)


def test_packing_examples():
    s = 0.35
    assert packing_value(X, GaugeSpec.bs(ONE, s), 0, D2).value == pytest.approx(4 * math.exp(-2 * s))
    H0 = TargetSet.union(FULL2, [Cylinder.word([0])])
    res = packing_value(H0, GaugeSpec.bs(ONE, s), 0, D2)
    assert res.value == pytest.approx(2 * math.exp(-2 * s))
    assert res.bound_side is BoundSide.LOWER
    values = [packing_value(X, GaugeSpec.bs(ONE, t), 0, D2).value for t in (0, 1, 5, 20, 60)]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert values[-1] < 1e-40


def test_packing_outer_splits():
    s = 0.2
    g = GaugeSpec.bs(ONE, s)
    assert packing_outer_value(X, g, 0, D2, 0).log_value == packing_value(X, g, 0, D2).log_value
    out = packing_outer_value(X, g, 0, D2, 1)
    assert out.value == pytest.approx(4 * math.exp(-2 * s))
    H = TargetSet.union(FULL2, [Cylinder.word([0, 0]), Cylinder.word([1, 1])])
    split = packing_outer_value(H, g, 0, D2, 1)
    pieces = [packing_value(TargetSet.union(FULL2, [c]), g, 0, D2).value for c in H.cylinders]
    assert split.value == pytest.approx(min(sum(pieces), packing_value(H, g, 0, D2).value))


def test_katok_examples():
    half = MeasureSpec.bernoulli(["1/2", "1/2"])
    s = 0.25
    g = GaugeSpec.bs(ONE, s, phi_term="center")
    full = katok_cover_value(half, g, 0, D2, 0)
    assert len(full.certificate) == 4
    assert full.value == pytest.approx(4 * math.exp(-2 * s))
    # two quarter cylinders reach 1/2, which is not > 1/2
    assert len(katok_cover_value(half, g, 0, D2, "0.5").certificate) == 3
    skew = MeasureSpec.bernoulli(["7/10", "3/10"])
    edge = katok_cover_value(skew, g, 0, DepthRange.single(1), "0.3")
    assert len(edge.certificate) == 2
    assert edge.value == pytest.approx(2 * math.exp(-s))
    with pytest.raises(ValueError):
        katok_cover_value(half, g, 0, D2, 1)


@pytest.mark.parametrize("fn,expected", [
    (lambda s: math.log(4) - 2 * s, math.log(2)),
    (lambda s: math.log(5) - 3 * s, math.log(5) / 3),
    (lambda s: -1.3 * s, 0.0),
])
def test_critical_exponent_closed_forms(fn, expected):
    crit = critical_exponent(fn, (0.0, 4.0), tol=1e-9)
    assert crit.s == pytest.approx(expected, abs=1e-8)
    assert crit.residual <= 1e-6


def test_critical_exponent_widens_and_fails():
    assert critical_exponent(lambda s: 30 - s, (0.0, 1.0), tol=1e-9).s == pytest.approx(30, abs=1e-7)
    with pytest.raises(BracketError):
        critical_exponent(lambda s: 1.0, (0.0, 1.0), max_expansions=5)


def test_budget_degrades_to_heuristic():
    phi = Potential.from_symbol_values(FULL2, [1, 2])
    res = cover_value(X, GaugeSpec.bs(phi, 0.5), 0, DepthRange(1, 4), method="bnb", max_nodes=1)
    assert res.bound_side in (BoundSide.HEURISTIC, BoundSide.UPPER)
    if res.budget_exhausted:
        assert res.bound_side is BoundSide.HEURISTIC
    with pytest.raises(BudgetExceeded):
        build_universe(X, 0, DepthRange.single(12), max_balls=100)


def test_canonical_log_sum_order_free():
    vals = [0.1, -3.0, 2.5, 0.7]
    assert canonical_log_sum(vals) == canonical_log_sum(vals[::-1])


def test_certificate_deterministic():
    phi = Potential.from_symbol_values(FULL2, [1, 2])
    g = GaugeSpec.bs(phi, 0.48)
    a = cover_value(X, g, 0, DepthRange(2, 4))
    b = cover_value(X, g, 0, DepthRange(2, 4))
    assert a.certificate == b.certificate and a.log_value == b.log_value


def test_matches_bruteforce_on_small_universes():
    rng = random.Random(2024)
    seen = 0
    while seen < 60:
        inst = bruteforce.random_instance(rng)
        if len(bruteforce.balls(inst)[0]) > 12:
            continue
        seen += 1
        cover, pack = bruteforce.library_values(inst)
        assert cover.value == pytest.approx(bruteforce.best_cover(inst)[0], rel=1e-12)
        assert pack.value == pytest.approx(bruteforce.best_packing(inst)[0], rel=1e-12)


cyl = st.tuples(st.integers(0, 2), st.lists(st.integers(0, 1), min_size=1, max_size=3))


def _target(parts):
    return TargetSet.union(FULL2, [Cylinder.word(sym, start) for start, sym in parts])


@settings(max_examples=40, deadline=None)
@given(st.lists(cyl, min_size=1, max_size=3), st.lists(cyl, min_size=1, max_size=2),
       st.floats(0.0, 1.5), st.integers(2, 4))
def test_monotone_in_target(small, extra, s, n):
    phi = Potential.from_symbol_values(FULL2, [1, 2])
    g = GaugeSpec.bs(phi, s)
    H1, H2 = _target(small), _target(small + extra)
    depth = DepthRange.single(n)
    assert cover_value(H1, g, 0, depth).log_value <= cover_value(H2, g, 0, depth).log_value + 1e-12


@settings(max_examples=40, deadline=None)
@given(st.lists(cyl, min_size=1, max_size=3), st.floats(0.0, 1.5), st.integers(2, 3), st.integers(0, 1))
def test_weighted_below_cover_and_partition_duality(parts, s, n, extra):
    phi = Potential.from_symbol_values(FULL2, [1, 2])
    g = GaugeSpec.bs(phi, s)
    H = _target(parts)
    depth = DepthRange(n, n + extra)
    assert weighted_cover_value(H, g, 0, depth).log_value <= cover_value(H, g, 0, depth).log_value + 1e-12
    full = DepthRange.single(n)
    assert packing_value(X, g, 0, full).log_value == pytest.approx(cover_value(X, g, 0, full).log_value,
                                                                   abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 2.0), st.floats(0.01, 1.0), st.integers(1, 3))
def test_values_strictly_decrease_in_s(s, ds, n):
    phi = Potential.from_symbol_values(FULL2, [1, 2])
    depth = DepthRange(n, n + 1)
    a = cover_value(X, GaugeSpec.bs(phi, s), 0, depth).log_value
    b = cover_value(X, GaugeSpec.bs(phi, s + ds), 0, depth).log_value
    assert b < a


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(1, 4), min_size=8, max_size=8), st.floats(0.0, 1.5), st.integers(1, 3))
def test_center_equals_sup_when_radius_within_level(values, s, n):
    phi = Potential.from_function(FULL2, 1, lambda p: values[p[0] * 4 + p[1] * 2 + p[2]])
    depth = DepthRange.single(n)
    sup = cover_value(X, GaugeSpec.bs(phi, s), 1, depth)
    ctr = cover_value(X, GaugeSpec.bs(phi, s, phi_term="center"), 1, depth)
    assert sup.log_value == ctr.log_value
