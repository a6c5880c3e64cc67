//! Minimum-Wasserstein core-set selection.

// Negated comparisons double as NaN rejection in the config checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod cuts;
pub mod distances;
pub mod error;
pub mod gbd;
pub mod harness;
pub mod master;
pub mod oracle;
pub mod transport;

pub use baselines::{kcenters_select, kmedoids_select, random_select};
pub use distances::{compute_distance_matrix, DistanceMatrix, FeatureMatrix, Metric};
pub use error::{Error, Result};
pub use gbd::{incumbent_guard, select_coreset, BoundsTrace, GbdConfig, GbdResult, GbdStatus};
pub use harness::{
    evaluate_selection, load_features, run_rounds, run_rounds_on, InputFormat, Report, RoundReport, RunConfig,
    Strategy, WarmStart,
};
pub use master::{lp_relaxation, solve_master, MasterProblem, MasterSolution, MasterStatus};
pub use oracle::{brute_force_optimum, OracleResult};
pub use transport::{wasserstein, wasserstein_reduced, Selection, TransportSolution};
