//! Planning toolkit for WDM optical networks.
//!
//! Solves the classic routing-and-wavelength-assignment problem (optical
//! bypass) and its extension where an intermediate node combines two source
//! lightpaths optically before forwarding the result (routing, wavelength
//! and computing assignment). The objective is the number of distinct
//! wavelengths needed to serve all demands.
//!
//! The crate ships an exact solver, a constructive heuristic, a MILP
//! encoder with LP-file export, an independent validator with a brute-force
//! optimum oracle, and the COST239 reference topology.

pub mod demand;
pub mod exact;
pub mod heuristic;
pub mod milp;
pub mod solution;
pub mod topology;
pub mod validate;

#[doc(hidden)]
pub mod test_support;

pub use demand::{
    decompose_bypass, generate_star_instance, CommDemand, CompDemand, DemandError,
    GeneratorSpec, Instance, COST239_DEST1_SEED,
};
pub use exact::{lower_bound, solve_exact, solve_via_ilp};
pub use heuristic::{choose_computing_node, solve_heuristic};
pub use milp::{encode_rwa, encode_rwca, export_lp, IlpModel, MilpError, VarKey};
pub use solution::{
    Coupling, DemandOrdering, DemandRef, Lightpath, Mode, ServedDemand, Solution,
    SolutionDoc, SolveConfig, SolverStats, Status,
};
pub use topology::{
    builtin_cost239, k_shortest_simple_paths, Arc, NodeId, Path, Topology, TopologyError,
};
pub use validate::{
    brute_force_optimum, metrics, validate, OracleError, OracleLimits, RuleId,
    ValidationReport,
};
