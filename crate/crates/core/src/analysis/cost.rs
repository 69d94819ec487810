use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::{count, lit, p_star, q_from_qtotal, AnalysisError};

/// Sizes used by the cost formulas, all in bits except `m` and `groups`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostParams {
    /// Model dimension.
    pub m: usize,
    /// Bits per model coordinate.
    pub r: usize,
    pub key_bits: usize,
    pub share_bits: usize,
    /// Client groups in the Turbo-aggregate comparison.
    pub groups: usize,
}

impl Default for CostParams {
    fn default() -> Self {
        Self {
            m: 1_000_000,
            r: 32,
            key_bits: 256,
            share_bits: 256,
            groups: 10,
        }
    }
}

impl CostParams {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        if [self.m, self.r, self.key_bits, self.share_bits, self.groups].contains(&0) {
            return Err(AnalysisError::Domain(
                "cost parameters must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Key and share traffic of one client with `deg` neighbours:
/// `2(deg+1)a_K + (5deg+1)a_S`.
pub fn bandwidth_ccesa<F: Float>(deg: F, key_bits: usize, share_bits: usize) -> F {
    let two = lit::<F>(2.0);
    two * (deg + F::one()) * count(key_bits) + (lit::<F>(5.0) * deg + F::one()) * count(share_bits)
}

/// Same quantity on the complete graph: `2n·a_K + (5n-4)a_S`.
pub fn bandwidth_sa<F: Float>(n: usize, key_bits: usize, share_bits: usize) -> F {
    let nf = count::<F>(n);
    lit::<F>(2.0) * nf * count(key_bits) + (lit::<F>(5.0) * nf - lit(4.0)) * count(share_bits)
}

/// Headline per-client cost `√(n ln n)(2a_K + 5a_S) + mR`.
pub fn comm_total_ccesa<F: Float>(
    n: usize,
    key_bits: usize,
    share_bits: usize,
    m: usize,
    r: usize,
) -> F {
    let nf = count::<F>(n);
    (nf * nf.ln()).sqrt() * (lit::<F>(2.0) * count(key_bits) + lit::<F>(5.0) * count(share_bits))
        + count::<F>(m) * count(r)
}

/// Turbo-aggregate total `4mnR/L`.
pub fn turbo_aggregate_comm<F: Float>(n: usize, m: usize, r: usize, groups: usize) -> F {
    lit::<F>(4.0) * count(m) * count(n) * count(r) / count(groups)
}

/// Leading-order costs for one topology with mean degree `d`.
///
/// Computation counts field operations: client `d² + m·d` (sharing plus
/// mask expansion), server `(m + n)·d²`. On the complete graph these are
/// the usual `n² + mn` and `mn²` up to lower-order terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostRow<F> {
    pub degree: F,
    pub client_comm_bits: F,
    pub server_comm_bits: F,
    pub client_comp: F,
    pub server_comp: F,
}

impl<F: Float> CostRow<F> {
    fn at_degree(n: usize, degree: F, params: &CostParams, bandwidth: F) -> Self {
        let (nf, mf) = (count::<F>(n), count::<F>(params.m));
        let client_comm = bandwidth + mf * count(params.r);
        Self {
            degree,
            client_comm_bits: client_comm,
            server_comm_bits: nf * client_comm,
            client_comp: degree * degree + mf * degree,
            server_comp: (mf + nf) * degree * degree,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostSummary<F> {
    pub n: usize,
    pub q_total: F,
    pub p: F,
    pub ccesa: CostRow<F>,
    pub sa: CostRow<F>,
    /// `B_CCESA / B_SA`, key and share traffic only.
    pub bandwidth_ratio: F,
    /// `comm_total_ccesa / turbo_aggregate_comm`.
    pub turbo_ratio: F,
}

/// Costs at `p = p*(n, q)`.
pub fn cost_table<F: Float>(
    n: usize,
    q_total: F,
    params: &CostParams,
) -> Result<CostSummary<F>, AnalysisError> {
    let p = p_star(n, q_from_qtotal(q_total)?)?.min(F::one());
    cost_table_at(n, q_total, p, params)
}

/// Costs for an Erdős–Rényi graph with edge probability `p`.
pub fn cost_table_at<F: Float>(
    n: usize,
    q_total: F,
    p: F,
    params: &CostParams,
) -> Result<CostSummary<F>, AnalysisError> {
    params.validate()?;
    super::check_probability("p", p)?;
    if n < 2 {
        return Err(AnalysisError::Domain(format!("n = {n} below 2")));
    }
    let (ka, sa) = (params.key_bits, params.share_bits);
    let deg = count::<F>(n - 1) * p;
    let full = count::<F>(n - 1);
    let b_ccesa = bandwidth_ccesa(deg, ka, sa);
    let b_sa = bandwidth_sa::<F>(n, ka, sa);
    Ok(CostSummary {
        n,
        q_total,
        p,
        ccesa: CostRow::at_degree(n, deg, params, b_ccesa),
        sa: CostRow::at_degree(n, full, params, b_sa),
        bandwidth_ratio: b_ccesa / b_sa,
        turbo_ratio: comm_total_ccesa::<F>(n, ka, sa, params.m, params.r)
            / turbo_aggregate_comm::<F>(n, params.m, params.r, params.groups),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bandwidth_examples() {
        assert_eq!(bandwidth_ccesa(4.0f64, 256, 256), 7936.0);
        for n in 2..50 {
            assert_eq!(
                bandwidth_sa::<f64>(n, 256, 128),
                bandwidth_ccesa((n - 1) as f64, 256, 128)
            );
        }
    }

    #[test]
    fn turbo_comparison() {
        let ratio = comm_total_ccesa::<f64>(100, 256, 256, 1_000_000, 32)
            / turbo_aggregate_comm::<f64>(100, 1_000_000, 32, 10);
        assert!((ratio - 0.02503).abs() < 1e-4, "{ratio}");
        assert!(ratio <= 0.03);
        let summary = cost_table(100, 0.0f64, &CostParams::default()).unwrap();
        assert_eq!(summary.turbo_ratio, ratio);
    }

    #[test]
    fn complete_graph_matches_sa_column() {
        let s = cost_table_at(60, 0.0f64, 1.0, &CostParams::default()).unwrap();
        assert_eq!(s.ccesa, s.sa);
        assert_eq!(s.bandwidth_ratio, 1.0);
    }

    #[test]
    fn bandwidth_ratio_falls_with_n() {
        let ratios: Vec<f64> = (1..=10)
            .map(|k| {
                cost_table(100 * k, 0.0f64, &CostParams::default())
                    .unwrap()
                    .bandwidth_ratio
            })
            .collect();
        assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
    }

    #[test]
    fn degree_scales_like_sqrt_n_ln_n() {
        let scaled: Vec<f64> = (1..=10)
            .map(|k| {
                let n = 100 * k;
                let s = cost_table(n, 0.0f64, &CostParams::default()).unwrap();
                s.ccesa.degree / ((n as f64) * (n as f64).ln()).sqrt()
            })
            .collect();
        let (lo, hi) = scaled
            .iter()
            .fold((f64::MAX, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
        assert!(hi / lo < 1.5, "{scaled:?}");
    }

    #[test]
    fn rejects_zero_sizes() {
        let bad = CostParams {
            groups: 0,
            ..CostParams::default()
        };
        assert!(cost_table(100, 0.0f64, &bad).is_err());
    }
}
