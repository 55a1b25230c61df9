//! Batch runs: random event-system corpora with bound audits, Monte Carlo
//! maxima of graph and hypergraph statistics compared with reference laws,
//! and CSV/JSON reports.
//!
//! Every run is a pure function of its master seed. Unit `i` of a run (an
//! event system or a trial) uses `derive_seed(master, i)` and results are
//! collected in unit order, so outputs do not depend on the worker count.

mod audit;
mod generators;
mod ks;
mod maxima;
pub mod report;

pub use audit::{bound_audit_run, AuditRow, AuditSummary, Residuals, Violation};
pub use generators::{random_event_system, DepFamily, GenFamily, GeneratedSystem, SystemGenSpec};
pub use ks::{empirical_cdf, ks_distance, ks_two_sample, XGrid};
pub use maxima::{
    experiment_constants, independent_cdf, reference_cdf, run_max_experiment, EmpiricalResult, ExperimentConfig,
    ExperimentKind, Reference,
};
pub use report::{emit_audit, emit_experiment};
