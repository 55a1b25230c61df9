//! Extremal independence for systems of dependent events.
//!
//! The crate has two halves. The exact half works on finite probability
//! spaces: [`prob`] holds atoms, events and dependency graphs, and
//! [`coefficients`] evaluates the mixing coefficient, the declustering
//! coefficients and every bound built from them, together with an audit
//! that checks each inequality against the exact probability that no event
//! occurs.
//!
//! The Monte Carlo half reproduces Gumbel limit laws for maxima:
//! [`gumbel`] supplies normalizing constants and exact binomial reference
//! laws, [`structures`] samples binomial graphs and hypergraphs and computes
//! their count statistics, [`gaussian`] covers Gaussian vectors, and
//! [`experiments`] ties everything into reproducible batch runs with KS
//! comparisons and CSV/JSON reports.

// Negated comparisons are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coefficients;
pub mod error;
pub mod experiments;
pub mod gaussian;
pub mod gumbel;
pub mod numeric;
pub mod prob;
pub mod rng;
pub mod structures;
pub mod tail_bounds;

pub use error::{Error, Result};
