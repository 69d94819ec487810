//! Closed-form design rules, error bounds and cost formulas.
//!
//! Everything is generic over the float type. Probabilities that can get
//! tiny are returned as [`LogProb`], natural log throughout.

mod bounds;
mod cost;
mod rules;

use num_traits::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bounds::{kl_divergence, pep_bound, per_bound, PerBound};
pub use cost::{
    bandwidth_ccesa, bandwidth_sa, comm_total_ccesa, cost_table, cost_table_at,
    turbo_aggregate_comm, CostParams, CostRow, CostSummary,
};
pub use rules::{
    p_star, privacy_threshold_p, q_from_qtotal, qtotal_from_q, reliability_threshold_p,
    t_lower_bound, t_rule,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("outside the formula's regime: {0}")]
    InvalidRegime(String),
    #[error("domain error: {0}")]
    Domain(String),
}

/// A probability stored as its natural log. `ln = -inf` is an exact zero.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct LogProb<F>(F);

impl<F: Float> LogProb<F> {
    pub fn from_ln(ln: F) -> Self {
        Self(ln)
    }

    pub fn zero() -> Self {
        Self(F::neg_infinity())
    }

    pub fn ln(self) -> F {
        self.0
    }

    pub fn log10(self) -> F {
        self.0 / lit::<F>(std::f64::consts::LN_10)
    }

    /// The plain value; may underflow to zero where `ln` does not.
    pub fn value(self) -> F {
        self.0.exp()
    }

    pub fn is_zero(self) -> bool {
        self.0 == F::neg_infinity()
    }
}

/// Parameters of one analytic evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisInputs<F> {
    pub n: usize,
    pub q_total: F,
    /// Per-step dropout, `1 - (1 - q_total)^(1/4)`.
    pub q: F,
    pub p: F,
    pub t: usize,
}

impl<F: Float> AnalysisInputs<F> {
    /// `p = p*` and `t = t_rule` unless given.
    pub fn design(
        n: usize,
        q_total: F,
        p: Option<F>,
        t: Option<usize>,
    ) -> Result<Self, AnalysisError> {
        let q = q_from_qtotal(q_total)?;
        let p = match p {
            Some(p) => p,
            None => p_star(n, q)?,
        };
        let t = match t {
            Some(t) => t,
            None => t_rule(n, p)?,
        };
        Ok(Self {
            n,
            q_total,
            q,
            p,
            t,
        })
    }
}

pub(crate) fn lit<F: Float>(x: f64) -> F {
    F::from(x).expect("f64 literal representable in target float")
}

pub(crate) fn count<F: Float>(n: usize) -> F {
    F::from(n).expect("count representable in target float")
}

pub(crate) fn check_probability<F: Float>(name: &str, x: F) -> Result<(), AnalysisError> {
    if x >= F::zero() && x <= F::one() {
        Ok(())
    } else {
        Err(AnalysisError::Domain(format!(
            "{name} = {} outside [0, 1]",
            x.to_f64().unwrap_or(f64::NAN)
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_prob_basics() {
        let p = LogProb::from_ln(-2.0f64 * std::f64::consts::LN_10);
        assert!((p.log10() + 2.0).abs() < 1e-12);
        assert!((p.value() - 0.01).abs() < 1e-15);
        assert!(LogProb::<f64>::zero().is_zero());
        assert_eq!(LogProb::<f64>::zero().value(), 0.0);
        // ln survives where the value underflows
        let tiny = LogProb::from_ln(-2000.0f64);
        assert_eq!(tiny.value(), 0.0);
        assert!(!tiny.is_zero());
    }

    #[test]
    fn design_defaults() {
        let d = AnalysisInputs::design(100, 0.1f64, None, None).unwrap();
        assert!((d.p - 0.79528).abs() < 1e-4);
        assert_eq!(d.t, 51);
        let d = AnalysisInputs::design(100, 0.0f64, Some(0.5), Some(7)).unwrap();
        assert_eq!((d.p, d.t), (0.5, 7));
    }
}
