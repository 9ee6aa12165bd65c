"""Phase structure of the annealed Potts model on rank-1 inhomogeneous random graphs."""

from .critical import (
    CriticalPoint, PhaseReport, TauQ, classify, critical_point, newton_tc,
    r_q_asymptotic, r_q_lower_bound, tau_q,
)
from .landscape import (
    PottsConfig, TangentPoints, ZeroCrossingReport, calibrate_counterexample,
    equal_area_R, kappa, pressure_d1, pressure_reduced, scr_f, scr_f_d1, scr_f_d2,
    stationary_solutions, tangent_points, zero_crossing,
)
from .oracle import OracleInstance, annealed_mean_X1, finite_pressure, log_partition
from .variational import OrderParameterSolution, grid_oracle, solve, sweep
from .weights import (
    Dirac, Gamma, LogNormal, Pareto, Rayleigh, TwoAtom, Uniform, expect, moment,
    parse_distribution,
)

__all__ = [
    "CriticalPoint", "PhaseReport", "TauQ", "classify", "critical_point", "newton_tc",
    "r_q_asymptotic", "r_q_lower_bound", "tau_q",
    "PottsConfig", "TangentPoints", "ZeroCrossingReport", "calibrate_counterexample",
    "equal_area_R", "kappa", "pressure_d1", "pressure_reduced", "scr_f", "scr_f_d1",
    "scr_f_d2", "stationary_solutions", "tangent_points", "zero_crossing",
    "OracleInstance", "annealed_mean_X1", "finite_pressure", "log_partition",
    "OrderParameterSolution", "grid_oracle", "solve", "sweep",
    "Dirac", "Gamma", "LogNormal", "Pareto", "Rayleigh", "TwoAtom", "Uniform",
    "expect", "moment", "parse_distribution",
]
