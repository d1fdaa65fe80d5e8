//! Potential theory on the configuration graph: resistances, voltages,
//! hitting times, Green functions and bottleneck (critical) resistances.

mod bounds;
mod network;
mod solver;

pub use bounds::{
    check_voltage_bounds, cut_upper_bound, greedy_paths, path_lower_bound, sandwich, CutBound,
    Sandwich, VoltageBoundReport,
};
pub use network::{
    resistance_exponent, symbolic_bottleneck, Bottleneck, ElectricNetwork, SymbolicBottleneck,
    SymbolicNetwork, MAX_LOG_RANGE,
};
pub use solver::{conjugate_gradient, solve_dirichlet, Elimination, Weights, CG_TOLERANCE, DIRECT_LIMIT};
