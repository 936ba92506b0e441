import math

import pytest
from hypothesis import given, settings, strategies as st

from dimlab.cp_core import BoundSide, DepthRange, bs_exponent
from dimlab.lab.oracles import ORACLES, word_count
from dimlab.potential import Potential
from dimlab.pressure import bowen_root, pressure_value
from dimlab.symbolic import SymbolicSystem, TargetSet

FULL2 = SymbolicSystem.full_shift(2)
GOLDEN = SymbolicSystem.golden_mean()
T_STAR = 0.481211825059603  # -log((sqrt 5 - 1)/2)


@pytest.mark.parametrize("kind", ["pesin_pitskel", "packing"])
def test_entropy_full_shift(kind):
    est = pressure_value(TargetSet.whole(FULL2), None, kind, 0, DepthRange.single(2))
    assert est.s == pytest.approx(math.log(2), abs=1e-8)
    assert est.bound_side is (BoundSide.UPPER if kind == "pesin_pitskel" else BoundSide.LOWER)


def test_entropy_golden_mean():
    est = pressure_value(TargetSet.whole(GOLDEN), None, "pesin_pitskel", 0, DepthRange.single(10))
    assert est.s == pytest.approx(math.log(word_count(GOLDEN, 10)) / 10, abs=1e-8)
    assert abs(est.s - ORACLES["golden_entropy"][0]()) < 0.05


def test_zero_potential_via_t_zero():
    phi = Potential.constant(FULL2, 1)
    est = pressure_value(TargetSet.whole(FULL2), phi, "pesin_pitskel", 0, DepthRange.single(2), t=0.0)
    assert est.s == pytest.approx(math.log(2), abs=1e-8)


def test_bowen_root_constant_one():
    r = bowen_root(TargetSet.whole(FULL2), Potential.constant(FULL2, 1), "bs", 0, DepthRange.single(4), tol=1e-6)
    assert r.t == pytest.approx(math.log(2), abs=1e-5)
    assert r.agree


def test_bowen_root_two_symbol_values():
    phi = Potential.from_symbol_values(FULL2, [1, 2])
    r = bowen_root(TargetSet.whole(FULL2), phi, "bs", 0, DepthRange.single(10), tol=1e-5)
    assert r.agree and r.difference <= 2e-5
    assert r.t == pytest.approx(T_STAR, abs=0.01)


@pytest.mark.parametrize("c", [1, 2, "1/2", 3])
def test_bowen_root_constant_c(c):
    phi = Potential.constant(FULL2, c)
    r = bowen_root(TargetSet.whole(FULL2), phi, "bs", 0, DepthRange.single(3), tol=1e-6)
    assert r.t == pytest.approx(math.log(2) / float(phi.phi_hat), abs=1e-5)


def test_packing_root_not_below_cover_root():
    phi = Potential.from_symbol_values(FULL2, [1, 2])
    H = TargetSet.whole(FULL2)
    bs = bowen_root(H, phi, "bs", 0, DepthRange(3, 5), tol=1e-5)
    bsp = bowen_root(H, phi, "bsp", 0, DepthRange(3, 5), tol=1e-5)
    assert bsp.t >= bs.t - 2e-5


def test_unknown_kind_rejected():
    with pytest.raises(ValueError):
        bowen_root(TargetSet.whole(FULL2), Potential.constant(FULL2, 1), "nope", 0, DepthRange.single(2))


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 2.0), st.floats(0.05, 1.0), st.integers(2, 5))
def test_pressure_strictly_decreasing_in_t(t, dt, n):
    phi = Potential.from_symbol_values(FULL2, [1, 2])
    H = TargetSet.whole(FULL2)
    a = pressure_value(H, phi, "pesin_pitskel", 0, DepthRange.single(n), t=t).s
    b = pressure_value(H, phi, "pesin_pitskel", 0, DepthRange.single(n), t=t + dt).s
    assert b < a
    # at least the minimum of phi per unit of t
    assert a - b >= float(phi.phi_hat) * dt - 1e-7


@settings(max_examples=15, deadline=None)
@given(st.lists(st.integers(1, 4), min_size=2, max_size=2), st.integers(2, 6))
def test_route_agreement(values, n):
    phi = Potential.from_symbol_values(FULL2, values)
    H = TargetSet.whole(FULL2)
    r = bowen_root(H, phi, "bs", 0, DepthRange.single(n), tol=1e-5)
    direct = bs_exponent(H, phi, 0, DepthRange.single(n)).s
    assert abs(r.t - direct) <= 2e-5
