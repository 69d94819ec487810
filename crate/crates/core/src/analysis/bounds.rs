use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::{check_probability, count, AnalysisError, LogProb};

/// Result of the reliability bound; the Chernoff form only covers the lower tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "ln_bound", rename_all = "kebab-case")]
pub enum PerBound<F> {
    Applicable(LogProb<F>),
    /// `(t-1)/(n-1)` exceeds `p(1-q)^4`.
    NotApplicable,
}

impl<F: Float> PerBound<F> {
    pub fn log_prob(self) -> Option<LogProb<F>> {
        match self {
            Self::Applicable(lp) => Some(lp),
            Self::NotApplicable => None,
        }
    }
}

/// `x ln y` with `0 ln 0 = 0`.
fn xlny<F: Float>(x: F, y: F) -> F {
    if x == F::zero() {
        F::zero()
    } else {
        x * y.ln()
    }
}

/// `D(a‖b)` between Bernoulli laws, in nats.
pub fn kl_divergence<F: Float>(a: F, b: F) -> F {
    let (ca, cb) = (F::one() - a, F::one() - b);
    xlny(a, a) - xlny(a, b) + xlny(ca, ca) - xlny(ca, cb)
}

/// `n · exp(-(n-1) · D((t-1)/(n-1) ‖ p(1-q)^4))`, as a log.
pub fn per_bound<F: Float>(n: usize, p: F, q: F, t: usize) -> Result<PerBound<F>, AnalysisError> {
    check_probability("p", p)?;
    check_probability("q", q)?;
    if n < 2 || t == 0 {
        return Err(AnalysisError::Domain(format!(
            "n = {n}, t = {t} leave no valid ratio"
        )));
    }
    let m = count::<F>(n - 1);
    let a = count::<F>(t - 1) / m;
    if !(a > F::zero() && a < F::one()) {
        return Err(AnalysisError::Domain(format!(
            "(t-1)/(n-1) = {} must lie strictly inside (0, 1)",
            a.to_f64().unwrap_or(f64::NAN)
        )));
    }
    let b = p * (F::one() - q).powi(4);
    if b == F::zero() || b == F::one() {
        return Err(AnalysisError::Domain(
            "p(1-q)^4 must lie strictly inside (0, 1)".into(),
        ));
    }
    if a > b {
        return Ok(PerBound::NotApplicable);
    }
    Ok(PerBound::Applicable(LogProb::from_ln(
        count::<F>(n).ln() - m * kl_divergence(a, b),
    )))
}

/// Streaming log-sum-exp.
struct LogSum<F> {
    max: F,
    scaled: F,
}

impl<F: Float> LogSum<F> {
    fn new() -> Self {
        Self {
            max: F::neg_infinity(),
            scaled: F::zero(),
        }
    }

    fn push(&mut self, term: F) {
        if term == F::neg_infinity() {
            return;
        }
        if term > self.max {
            self.scaled = self.scaled * (self.max - term).exp() + F::one();
            self.max = term;
        } else {
            self.scaled = self.scaled + (term - self.max).exp();
        }
    }

    fn ln(&self) -> F {
        if self.max == F::neg_infinity() {
            F::neg_infinity()
        } else {
            self.max + self.scaled.ln()
        }
    }
}

/// `ln k!` for `k` in `0..=n`.
fn ln_factorials<F: Float>(n: usize) -> Vec<F> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = F::zero();
    out.push(acc);
    for k in 1..=n {
        acc = acc + count::<F>(k).ln();
        out.push(acc);
    }
    out
}

/// The privacy bound
/// `Σ_m C(n,m) a^m (1-a)^(n-m) Σ_{k=1}^{⌊m/2⌋} C(m,k) (1-p)^(k(m-k))`, `a = (1-q)^3`.
///
/// Every term is summed in log space so results far below `f64::MIN_POSITIVE`
/// keep their magnitude.
pub fn pep_bound<F: Float>(n: usize, p: F, q: F) -> Result<LogProb<F>, AnalysisError> {
    check_probability("p", p)?;
    check_probability("q", q)?;
    if n == 0 {
        return Err(AnalysisError::Domain("n must be at least 1".into()));
    }
    let lf = ln_factorials::<F>(n);
    let ln_choose = |a: usize, b: usize| lf[a] - lf[b] - lf[a - b];
    let survive = (F::one() - q).powi(3);
    let ln_a = survive.ln();
    let ln_not_a = (F::one() - survive).ln();
    let ln_miss = (F::one() - p).ln();
    // 0 · ln 0 = 0 so that 0^0 = 1
    let times = |k: usize, ln_x: F| {
        if k == 0 {
            F::zero()
        } else {
            count::<F>(k) * ln_x
        }
    };

    let mut outer = LogSum::new();
    for m in 2..=n {
        let mut inner = LogSum::new();
        for k in 1..=m / 2 {
            inner.push(ln_choose(m, k) + times(k * (m - k), ln_miss));
        }
        let weight = ln_choose(n, m) + times(m, ln_a) + times(n - m, ln_not_a);
        outer.push(weight + inner.ln());
    }
    Ok(LogProb::from_ln(outer.ln()))
}
