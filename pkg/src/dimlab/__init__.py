"""Carathéodory-Pesin dimensions and pressures on symbolic systems over Z^d."""
from .group import FiniteSubset, FolnerSequence, box_folner, folner_defect, growth_check
from .symbolic import Cylinder, SymbolicSystem, TargetSet, ball_of, bowen_window, enumerate_balls
from .potential import Potential, ball_sup, birkhoff_sum, oscillation
from .cp_core import (BoundSide, DepthRange, GaugeSpec, cover_value, critical_exponent,
                      katok_cover_value, packing_outer_value, packing_value, weighted_cover_value)
from .measures import MeasureSpec, cylinder_mass, sample_point

__version__ = "0.1.0"
