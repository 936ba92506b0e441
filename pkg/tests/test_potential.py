import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from dimlab.group import FiniteSubset, box_folner
from dimlab.potential import Potential, ball_inf, ball_sup, birkhoff_sum, oscillation, parse_value
from dimlab.symbolic import Configuration, Cylinder, Periodic, SymbolicSystem, ball_of, bowen_window

FULL2 = SymbolicSystem.full_shift(2)


class _Word(Configuration):
    """Configuration reading a finite word placed at ``start``, zero elsewhere."""

    def __init__(self, word, start=0):
        self.word, self.start = word, start

    def symbol(self, g):
        i = (g if isinstance(g, int) else g[0]) - self.start
        return self.word[i] if 0 <= i < len(self.word) else 0


def test_birkhoff_examples():
    one = Potential.constant(FULL2, 1)
    assert birkhoff_sum(one, Periodic.constant(0), box_folner(1, 5)) == 5
    phi = Potential.from_symbol_values(FULL2, [1, 2])
    assert birkhoff_sum(phi, Periodic.from_word([0, 1]), box_folner(1, 4)) == 6
    phi2 = Potential.from_symbol_values(FULL2, [Fraction(1, 10**9), 2])
    assert birkhoff_sum(phi2, Periodic.constant(1), box_folner(1, 3)) == 6


def test_ball_sup_examples():
    phi = Potential.from_function(FULL2, 1, lambda p: 1 + p[2])
    F = box_folner(1, 1)
    assert ball_sup(phi, Cylinder.word([0]), F) == 2
    assert ball_sup(phi, Cylinder.word([0, 0]), F) == 1


def test_ball_sup_equals_center_when_radius_within_level():
    phi = Potential.from_symbol_values(FULL2, [1, 2])
    x = Periodic.from_word([0, 1, 1])
    F = box_folner(1, 6)
    b = ball_of(x, F, 0)
    assert ball_sup(phi, b, F) == birkhoff_sum(phi, x, F) == ball_inf(phi, b, F)


def test_oscillation_examples():
    assert oscillation(Potential.constant(FULL2, 3), 0) == 0
    phi = Potential.from_symbol_values(FULL2, [1, 2])
    assert oscillation(phi, 1) == 0
    assert oscillation(phi, 2) == 0
    assert oscillation(phi, 0) == 1


def test_parse_value_forms():
    assert parse_value("3/4") == Fraction(3, 4)
    assert parse_value("0.1") == Fraction(1, 10)
    assert parse_value(2) == 2


def test_nonpositive_potential_rejected():
    with pytest.raises(ValueError):
        Potential.from_symbol_values(FULL2, [0, 1])


def _brute_extremes(phi, ball, F, system):
    """Enumerate every assignment of the free coordinates of F + W_r."""
    needed = F.sumset(phi.window)
    pinned = ball.as_dict()
    free = [g for g in needed.elements if g not in pinned]
    vals = []
    for values in itertools.product(range(system.k), repeat=len(free)):
        full = dict(pinned)
        full.update(zip(free, values))
        lo_pos = min(g[0] for g in full)
        word = [full.get((i,), 0) for i in range(lo_pos, max(g[0] for g in full) + 1)]
        if not system.is_full_shift and not system.is_extendable({(i + lo_pos,): a for i, a in enumerate(word)}):
            continue
        vals.append(birkhoff_sum(phi, _Word(word, lo_pos), F))
    return min(vals), max(vals)


tables = st.lists(st.integers(1, 5), min_size=8, max_size=8)


@settings(max_examples=60, deadline=None)
@given(tables, st.integers(1, 4), st.integers(0, 2), st.data())
def test_ball_extremes_match_enumeration(values, n, m, data):
    system = data.draw(st.sampled_from([FULL2, SymbolicSystem.golden_mean()]))
    phi = Potential.from_function(system, 1, lambda p: values[p[0] * 4 + p[1] * 2 + p[2]])
    F = box_folner(1, n)
    window = bowen_window(F, m)
    words = list(system.patterns(window))
    word = data.draw(st.sampled_from(words))
    ball = Cylinder(window, word)
    assert (ball_inf(phi, ball, F), ball_sup(phi, ball, F)) == pytest.approx(_brute_extremes(phi, ball, F, system))


@settings(max_examples=60, deadline=None)
@given(tables, st.lists(st.integers(0, 1), min_size=12, max_size=12), st.integers(1, 5), st.integers(0, 5))
def test_birkhoff_additive_and_positive(values, word, a, b):
    phi = Potential.from_function(FULL2, 1, lambda p: values[p[0] * 4 + p[1] * 2 + p[2]])
    x = _Word(word, -1)
    F1 = FiniteSubset.of(range(0, a))
    F2 = FiniteSubset.of(range(a, a + b)) if b else None
    F = F1 if F2 is None else F1.union(F2)
    total = birkhoff_sum(phi, x, F)
    assert total >= len(F) * float(phi.phi_hat) > 0
    if F2 is not None:
        assert total == pytest.approx(birkhoff_sum(phi, x, F1) + birkhoff_sum(phi, x, F2))


@settings(max_examples=60, deadline=None)
@given(tables, st.lists(st.integers(0, 1), min_size=14, max_size=14), st.integers(1, 5), st.integers(0, 2))
def test_ball_sup_sandwich(values, word, n, m):
    phi = Potential.from_function(FULL2, 1, lambda p: values[p[0] * 4 + p[1] * 2 + p[2]])
    x = _Word(word, -3)
    F = box_folner(1, n)
    gap = ball_sup(phi, ball_of(x, F, m), F) - birkhoff_sum(phi, x, F)
    assert -1e-12 <= gap <= len(F) * float(oscillation(phi, m)) + 1e-12
    if m >= phi.r:
        assert gap == 0
