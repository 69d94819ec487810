use num_traits::Float;

use super::{check_probability, count, lit, AnalysisError};

pub fn q_from_qtotal<F: Float>(q_total: F) -> Result<F, AnalysisError> {
    check_probability("q_total", q_total)?;
    Ok(F::one() - (F::one() - q_total).powf(lit(0.25)))
}

/// `1 - (1 - q)^4`.
pub fn qtotal_from_q<F: Float>(q: F) -> Result<F, AnalysisError> {
    check_probability("q", q)?;
    Ok(F::one() - (F::one() - q).powi(4))
}

fn require_n(n: usize, min: usize) -> Result<(), AnalysisError> {
    if n < min {
        return Err(AnalysisError::Domain(format!("n = {n} below {min}")));
    }
    Ok(())
}

/// `⌈n(1-q)^3 - √(n ln n)⌉`, the surviving-clique size used by the privacy term.
fn privacy_core<F: Float>(n: usize, q: F) -> F {
    let nf = count::<F>(n);
    (nf * (F::one() - q).powi(3) - (nf * nf.ln()).sqrt()).ceil()
}

/// `ln(c) / c` with `c = ⌈n(1-q)^3 - √(n ln n)⌉`; needs `c ≥ 2`.
pub fn privacy_threshold_p<F: Float>(n: usize, q: F) -> Result<F, AnalysisError> {
    require_n(n, 2)?;
    check_probability("q", q)?;
    let c = privacy_core(n, q);
    if c < lit(2.0) {
        return Err(AnalysisError::InvalidRegime(format!(
            "ceiling term {} below 2",
            c.to_f64().unwrap_or(f64::NAN)
        )));
    }
    Ok(c.ln() / c)
}

/// `(3√((n-1) ln(n-1)) - 1) / ((n-1)(2(1-q)^4 - 1))`; needs `(1-q)^4 > 1/2`.
pub fn reliability_threshold_p<F: Float>(n: usize, q: F) -> Result<F, AnalysisError> {
    require_n(n, 2)?;
    check_probability("q", q)?;
    let survive4 = (F::one() - q).powi(4);
    if survive4 <= lit(0.5) {
        return Err(AnalysisError::InvalidRegime(format!(
            "(1-q)^4 = {} is not above 1/2",
            survive4.to_f64().unwrap_or(f64::NAN)
        )));
    }
    let m = count::<F>(n - 1);
    Ok((lit::<F>(3.0) * (m * m.ln()).sqrt() - F::one())
        / (m * (lit::<F>(2.0) * survive4 - F::one())))
}

/// The larger of the privacy and reliability thresholds.
pub fn p_star<F: Float>(n: usize, q: F) -> Result<F, AnalysisError> {
    Ok(privacy_threshold_p(n, q)?.max(reliability_threshold_p(n, q)?))
}

/// `((n-1)p + √((n-1) ln(n-1)) + 1) / 2`.
pub fn t_lower_bound<F: Float>(n: usize, p: F) -> Result<F, AnalysisError> {
    require_n(n, 2)?;
    check_probability("p", p)?;
    let m = count::<F>(n - 1);
    Ok((m * p + (m * m.ln()).sqrt() + F::one()) / lit(2.0))
}

/// The unmasking-attack-safe threshold, `⌈t_lower_bound⌉`.
pub fn t_rule<F: Float>(n: usize, p: F) -> Result<usize, AnalysisError> {
    let bound = t_lower_bound(n, p)?;
    Ok(bound.ceil().to_usize().expect("finite nonnegative bound"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_conversion() {
        assert_eq!(q_from_qtotal(0.0f64).unwrap(), 0.0);
        assert_eq!(q_from_qtotal(1.0f64).unwrap(), 1.0);
        let q = q_from_qtotal(0.1f64).unwrap();
        assert!((q - 0.025_996_3).abs() < 1e-6);
        assert!((qtotal_from_q(q).unwrap() - 0.1).abs() < 1e-12);
        assert!(q_from_qtotal(1.5f64).is_err());
    }

    #[test]
    fn p_star_cells() {
        let cell = |n, qt: f64| p_star(n, q_from_qtotal(qt).unwrap()).unwrap();
        assert!((cell(100, 0.0) - 0.636).abs() < 5e-4);
        assert!((cell(1000, 0.1) - 0.311).abs() < 5e-4);
        assert!((cell(500, 0.05) - 0.370).abs() < 5e-4);
    }

    #[test]
    fn threshold_terms() {
        assert!((reliability_threshold_p(100, 0.0f64).unwrap() - 0.63623).abs() < 1e-4);
        assert_eq!(reliability_threshold_p(2, 0.0f64).unwrap(), -1.0);
        assert!(reliability_threshold_p(100, 0.2f64).is_err());
        let priv100 = privacy_threshold_p(100, 0.0f64).unwrap();
        assert!((priv100 - 79f64.ln() / 79.0).abs() < 1e-12);
        assert!(priv100 < p_star(100, 0.0f64).unwrap());
        assert!(privacy_threshold_p(2, 0.0f64).is_err());
        assert!(privacy_threshold_p(3, 0.0f64).is_ok());
        assert!(p_star(1, 0.0f64).is_err());
    }

    #[test]
    fn reliability_term_grows_with_q() {
        let mut last = reliability_threshold_p(200, 0.0f64).unwrap();
        for k in 1..15 {
            let next = reliability_threshold_p(200, k as f64 * 0.01).unwrap();
            assert!(next > last);
            last = next;
        }
    }

    #[test]
    fn privacy_term_decreases_in_n() {
        let vals: Vec<f64> = (1..=10)
            .map(|k| privacy_threshold_p(100 * k, 0.05).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]), "{vals:?}");
    }

    #[test]
    fn t_rule_values() {
        assert!((t_lower_bound(100, 0.6362f64).unwrap() - 42.65).abs() < 0.01);
        assert_eq!(t_lower_bound(2, 0.0f64).unwrap(), 0.5);
        assert_eq!(t_rule(100, 0.6362f64).unwrap(), 43);
        assert_eq!(t_rule(300, 0.5136f64).unwrap(), 98);
        assert_eq!(t_rule(500, 0.4159f64).unwrap(), 133);
        let bounds: Vec<f64> = (0..=10)
            .map(|k| t_lower_bound(50, k as f64 / 10.0).unwrap())
            .collect();
        assert!(bounds.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn single_precision_agrees() {
        let q = q_from_qtotal(0.1f32).unwrap();
        let p = p_star(100, q).unwrap();
        assert!((p - 0.79528).abs() < 1e-3);
        assert_eq!(t_rule(100, p).unwrap(), 51);
    }
}
