"""Gate-level workbench for N-modular redundancy and distributed minority/majority voting."""

from .faults import (
    Counterexample,
    FaultBehavior,
    FaultPattern,
    MaskingVerdict,
    conforming_patterns,
    find_counterexample,
    replay,
    verify_guarantee,
    verify_masking,
)
from .library import braun_multiplier, dmmr_voter, full_adder, half_adder, majority_voter
from .metrics import DelayModel, adp, area, compare, critical_path_delay
from .netlist import Gate, GateKind, Netlist, instantiate, topological_order, validate
from .redundancy import RedundancyScheme, RedundantSystem, build, build_dmmr, build_nmr, tolerance
from .reliability import analytic_reliability, curve, monte_carlo_reliability
from .simulator import Fault, evaluate, truth_table

__version__ = "0.1.0"
