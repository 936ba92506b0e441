import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from dimlab.covering import BallFamily, five_r_select, five_r_select_cylinders, interval_packing_select, verify_five_r
from dimlab.cp_core import GaugeSpec
from dimlab.errors import Infeasible
from dimlab.potential import Potential
from dimlab.symbolic import Cylinder, SymbolicSystem, TargetSet

import bruteforce

FULL2 = SymbolicSystem.full_shift(2)
LOG2 = 0.6931471805599453


def test_five_r_examples():
    assert five_r_select(BallFamily((3.0,), 1)).selected == [0]
    fam = BallFamily((0, 1.5, 10), 1)
    sel = five_r_select(fam)
    assert sel.selected == [0, 2]
    assert sel.witness[1] == 0 and fam.inside(1, 0.0, 5.0)
    far = BallFamily(tuple(10 * i for i in range(7)), 1)
    assert five_r_select(far).selected == list(range(7))


def test_five_r_cylinders():
    balls = [Cylinder.word([0]), Cylinder.word([0, 1]), Cylinder.word([1])]
    sel = five_r_select_cylinders(balls, FULL2)
    assert sel.selected == [0, 2]
    assert sel.witness[1] == 0


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0, 100), min_size=1, max_size=64), st.sampled_from([0.5, 1, 2]))
def test_five_r_postconditions(centers, r):
    fam = BallFamily(tuple(centers), r)
    sel = five_r_select(fam)
    assert verify_five_r(fam, sel) == []
    chosen = sel.selected
    assert all(not fam.intersects(i, j) for i in chosen for j in chosen if i != j)


def _select(target, N, N_max=None):
    gauge = GaugeSpec.bs(Potential.constant(FULL2, 1), LOG2)
    return interval_packing_select(TargetSet.whole(FULL2), gauge, 0, N, target, N_max)


def test_interval_packing_examples():
    two = _select((Fraction(2, 5), Fraction(3, 5)), 2)
    assert len(two.balls) == 2 and float(two.total) == pytest.approx(0.5)
    four = _select((Fraction(9, 10), Fraction(11, 10)), 2)
    assert len(four.balls) == 4 and float(four.total) == pytest.approx(1.0)
    with pytest.raises(Infeasible):
        _select((0, Fraction(1, 10)), 2)
    one = _select((0, Fraction(1, 10)), 2, 4)
    assert len(one.balls) == 1 and one.depth == 4 and float(one.total) == pytest.approx(0.0625)


def test_interval_packing_rejects_bad_interval():
    with pytest.raises(ValueError):
        _select((Fraction(1, 2), Fraction(1, 4)), 2)


def test_interval_packing_against_exhaustive():
    rng = random.Random(99)
    done = 0
    while done < 40:
        inst = bruteforce.random_instance(rng)
        if len(bruteforce.balls(inst)[0]) > 16:
            continue
        done += 1
        a = Fraction(rng.randint(0, 40), 20)
        b = a + Fraction(rng.randint(1, 20), 40)
        try:
            system, sel = bruteforce.library_interval(inst, a, b)
        except Infeasible:
            assert not bruteforce.interval_family_exists(inst, a, b)
            continue
        assert a < sel.total < b
        assert sel.total == sum(sel.weights)
        assert bruteforce.disjoint(system, [c for _, c in sel.balls])
