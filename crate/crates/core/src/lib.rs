//! Observability analysis for conjunctive Boolean networks (CBNs).
//!
//! A CBN updates every state variable to the AND of a subset of the state
//! variables; some variables are observed directly. This crate decides
//! observability from the dependency graph, computes a minimum set of extra
//! variables to observe, reconstructs initial states from output traces and
//! runs random-graph experiments on the size of minimal sensor sets.

pub mod format;
pub mod graph;
pub mod minimal;
pub mod network;
pub mod observability;
pub mod observer;
pub mod oracle;
pub mod random;
pub mod scc;

pub use format::{parse_cbn, parse_document, serialize_cbn, NetworkDocument, ParseError};
pub use graph::{build_dependency_graph, DependencyGraph};
pub use minimal::{
    enumerate_solution_space, solve_minimal, MinimalSolution, SolutionSpace, SolverScratch,
};
pub use network::{
    reduce_cbcn, reduce_dbn, reduce_general_outputs, Cbcn, Cbn, Dbn, GeneralOutputCbn,
};
pub use observability::{
    check_o1, check_o2, decompose, is_observable, ObservabilityVerdict, ObservedPath,
    ObservedPathCover,
};
pub use observer::{
    build_observer, reconstruct_initial_state, simulate, ObserverPlan, OutputTrace,
};
pub use oracle::{oracle_is_observable, verify_minimality_bruteforce};
