import pytest

from dimlab.errors import InvalidSystem
from dimlab.group import FiniteSubset, box_folner
from dimlab.symbolic import (Cylinder, Periodic, Relation, SymbolicSystem, TargetSet, ball_of,
                             balls_relation, bowen_window, enumerate_balls, metric_level)


class _Config:
    """Configuration given by a dict with a default symbol."""

    def __init__(self, values, default=0):
        self.values, self.default = values, default

    def symbol(self, g):
        g = (g,) if isinstance(g, int) else tuple(g)
        return self.values.get(g, self.default)

    def read(self, support):
        return tuple(self.symbol(g) for g in support)


def test_metric_level_examples():
    x = Periodic.constant(0)
    assert metric_level(x, x, 3) is None
    assert metric_level(x, _Config({(0,): 1}), 3) == 0
    assert metric_level(x, _Config({(2,): 1, (-2,): 1}), 5) == 2


def test_bowen_window_examples():
    assert bowen_window(box_folner(1, 3), 0) == box_folner(1, 3)
    w = bowen_window(box_folner(1, 3), 1)
    assert w == FiniteSubset.box((-1,), (3,)) and len(w) == 5
    w2 = bowen_window(box_folner(2, 2), 1)
    assert w2 == FiniteSubset.box((-1, -1), (2, 2)) and len(w2) == 16


def test_ball_of_examples():
    assert ball_of(Periodic.constant(0), box_folner(1, 2), 0) == Cylinder.word([0, 0])
    x = _Config({(0,): 1, (1,): 1})
    assert ball_of(x, box_folner(1, 2), 1) == Cylinder.word([0, 1, 1, 0], start=-1)


def test_depth_two_balls_partition_full_shift():
    S = SymbolicSystem.full_shift(2)
    balls = [r.cylinder for r in enumerate_balls(TargetSet.whole(S), box_folner(1, 2), 0)]
    assert sorted(b.symbols for b in balls) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    for i, a in enumerate(balls):
        for b in balls[i + 1:]:
            assert balls_relation(a, b) is Relation.DISJOINT


def test_balls_relation_examples():
    assert balls_relation(Cylinder.word([0]), Cylinder.word([1])) is Relation.DISJOINT
    assert balls_relation(Cylinder.word([0, 1]), Cylinder.word([0])) is Relation.NESTED
    assert balls_relation(Cylinder.word([0]), Cylinder.word([1], start=1)) is Relation.OVERLAPPING


def test_enumerate_balls_examples():
    S = SymbolicSystem.full_shift(2)
    assert len(enumerate_balls(TargetSet.whole(S), box_folner(1, 2), 0)) == 4
    G = SymbolicSystem.golden_mean()
    words = sorted(r.cylinder.symbols for r in enumerate_balls(TargetSet.whole(G), box_folner(1, 3), 0))
    assert words == [(0, 0, 0), (0, 0, 1), (0, 1, 0), (1, 0, 0), (1, 0, 1)]
    H = TargetSet.union(S, [Cylinder.word([0])])
    assert sorted(r.cylinder.symbols for r in enumerate_balls(H, box_folner(1, 2), 0)) == [(0, 0), (0, 1)]


def test_golden_mean_counts_follow_fibonacci():
    G = SymbolicSystem.golden_mean()
    counts = [G.count_words(n) for n in range(1, 16)]
    assert counts[:2] == [2, 3]
    for n in range(2, 15):
        assert counts[n] == counts[n - 1] + counts[n - 2]


def test_sft_without_configurations_rejected():
    with pytest.raises(InvalidSystem):
        SymbolicSystem.sft(2, [[0, 0], [0, 1], [1, 0], [1, 1]])


def test_sft_only_in_one_dimension():
    with pytest.raises((InvalidSystem, ValueError)):
        SymbolicSystem(2, 2, ((0, 0),))


def test_periodic_configuration_validated():
    with pytest.raises(InvalidSystem):
        Periodic.from_word([1, 1], SymbolicSystem.golden_mean())


def test_cylinder_json_round_trip():
    c = Cylinder.word([1, 0, 1], start=-1)
    assert Cylinder.from_json(c.to_json(), 1) == c
