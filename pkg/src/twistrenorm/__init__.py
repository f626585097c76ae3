"""Numerical lab for the period-doubling renormalization fixed point of
area-preserving twist maps, Lipschitz curves through its Cantor set and the
direction-field clash at the tip."""
from .config import THETA, TOL, RunConfig, Tolerances
from .errors import TwistRenormError
from .series import BivariateSeries
from .renorm import GeneratingSystem, SolveReport, degree_continuation, fixed_point_solve, renormalize
from .twistmap import ImplicitMap
from .ifs import DyadicWord, Scalings, WeightedMetric, microscope
from .curve import PolylineCurve
from .obstruction import Direction, clash_experiment, tip_derivative_chain
from .pipeline import Microscope, prepare, solve

__version__ = "0.1.0"
