//! Communication-computation efficient secure aggregation over sparse
//! secret-sharing graphs.

pub mod adversary;
pub mod analysis;
pub mod crypto;
pub mod graph;
pub mod harness;
pub mod protocol;
pub mod seed;

/// Default float for analytic results.
pub type Real = f64;
pub type LogProb = analysis::LogProb<Real>;
pub type LogProbF32 = analysis::LogProb<f32>;
pub type AnalysisInputs = analysis::AnalysisInputs<Real>;
pub type CostSummary = analysis::CostSummary<Real>;
pub type PerBound = analysis::PerBound<Real>;
