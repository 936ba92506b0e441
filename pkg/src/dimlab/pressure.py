"""Pesin-Pitskel and packing pressures, and Bowen-equation roots."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .cp_core import (MAX_NODES, BoundSide, DepthRange, GaugeSpec, bs_exponent, build_universe,
                      critical_exponent, packing_outer_value, solve_cover, solve_packing)
from .group import FolnerSequence
from .potential import Potential
from .symbolic import EpsilonLevel, TargetSet

KINDS = ("pesin_pitskel", "packing")


@dataclass
class PressureEstimate:
    kind: str
    s: float
    bound_side: BoundSide
    t: float | None = None
    iterations: int = 0
    budget_exhausted: bool = False

    def to_json(self) -> dict:
        return {"kind": self.kind, "s": self.s, "bound_side": self.bound_side.value, "t": self.t,
                "iterations": self.iterations, "budget_exhausted": self.budget_exhausted}


def _pressure_log_value(H, gauge, eps, depth, folner, kind, split_depth, max_nodes, flags):
    u = build_universe(H, eps, depth, folner, gauge.potential)
    if kind == "pesin_pitskel":
        def f(s):
            r = solve_cover(u, gauge.at(s), max_nodes=max_nodes)
            flags["exhausted"] |= r.budget_exhausted
            return r.log_value
    elif kind == "packing":
        def f(s):
            if split_depth:
                r = packing_outer_value(H, gauge.at(s), eps, depth, split_depth, folner, max_nodes=max_nodes)
            else:
                r = solve_packing(u, gauge.at(s), max_nodes=max_nodes)
            flags["exhausted"] |= r.budget_exhausted
            return r.log_value
    else:
        raise ValueError(f"pressure kind must be one of {KINDS}")
    return u, f


def pressure_value(H: TargetSet, phi: Potential | None, kind: str, eps: EpsilonLevel, depth: DepthRange,
                   folner: FolnerSequence | None = None, *, t: float | None = None,
                   split_depth: int = 0, tol: float = 1e-9, max_nodes: int = MAX_NODES) -> PressureEstimate:
    """Critical s of the pressure sums at (N, eps).

    With ``t`` the potential is replaced by -t*phi (the Bowen-equation family);
    ``phi=None`` means the zero potential, giving topological entropy.
    """
    if t is None:
        gauge = GaugeSpec.pressure(phi)
    else:
        gauge = GaugeSpec.pressure_neg(t, phi)
    flags = {"exhausted": False}
    u, f = _pressure_log_value(H, gauge, eps, depth, folner, kind, split_depth, max_nodes, flags)
    size = float(u.sizes.min())
    # value at s is at most count * exp(-s|F_N| + |F| * max term), so this brackets
    spread = 0.0 if phi is None else float(phi.phi_max) * (1.0 if t is None else abs(t))
    hi = math.log(max(len(u), 2)) / size + spread + 1.0
    lo = -spread - 1.0
    crit = critical_exponent(f, (lo, hi), tol=tol, residual=None)
    side = BoundSide.LOWER if kind == "packing" else BoundSide.UPPER
    if flags["exhausted"]:
        side = BoundSide.HEURISTIC
    return PressureEstimate(kind, crit.s, side, t, crit.iterations, flags["exhausted"])


@dataclass
class BowenRoot:
    t: float
    direct: float
    agree: bool
    kind: str
    iterations: int
    bound_side: BoundSide
    tol: float
    sequence: list = field(default_factory=list)
    note: str = ""

    @property
    def difference(self) -> float:
        return abs(self.t - self.direct)

    def to_json(self) -> dict:
        return {"kind": self.kind, "t_root": self.t, "direct_exponent": self.direct,
                "difference": self.difference, "agree": self.agree, "iterations": self.iterations,
                "bound_side": self.bound_side.value, "tol": self.tol, "note": self.note,
                "pressure_sequence": [{"t": a, "s": b} for a, b in self.sequence]}


def bowen_root(H: TargetSet, phi: Potential, kind: str, eps: EpsilonLevel, depth: DepthRange,
               tol: float = 1e-4, folner: FolnerSequence | None = None, *, split_depth: int = 0,
               max_nodes: int = MAX_NODES) -> BowenRoot:
    """Root t* of s*(t) = 0 for the pressure of -t*phi, cross-checked against the direct exponent.

    ``kind`` is ``bs`` (covers) or ``bsp`` (packings).
    """
    if kind not in ("bs", "bsp"):
        raise ValueError("kind must be 'bs' or 'bsp'")
    pkind = "pesin_pitskel" if kind == "bs" else "packing"
    inner_tol = tol / 64
    seq = []
    exhausted = {"flag": False}

    def g(t):
        est = pressure_value(H, phi, pkind, eps, depth, folner, t=t, split_depth=split_depth,
                             tol=inner_tol, max_nodes=max_nodes)
        exhausted["flag"] |= est.budget_exhausted
        seq.append((t, est.s))
        return est.s

    u = build_universe(H, eps, depth, folner, phi)
    hi = math.log(max(len(u), 2)) / (float(u.sizes.min()) * float(phi.phi_hat)) + 1.0
    crit = critical_exponent(g, (0.0, hi), tol=tol, residual=None)
    problem = "cover" if kind == "bs" else ("packing_outer" if split_depth else "packing")
    direct = bs_exponent(H, phi, eps, depth, folner, phi_term="center", problem=problem,
                         split_depth=split_depth, tol=inner_tol, max_nodes=max_nodes)
    exhausted["flag"] |= direct.budget_exhausted
    side = BoundSide.HEURISTIC if exhausted["flag"] else (BoundSide.UPPER if kind == "bs" else BoundSide.LOWER)
    agree = abs(crit.s - direct.s) <= 2 * tol
    note = "" if agree else "Bowen root and direct exponent disagree beyond 2*tol"
    seq.sort()
    return BowenRoot(crit.s, direct.s, agree, kind, crit.iterations, side, tol, seq, note)
