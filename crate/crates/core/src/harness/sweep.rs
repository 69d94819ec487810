use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::analysis::{p_star, q_from_qtotal};

/// Columns of the reference p* table.
pub const TABLE_N: [usize; 10] = [100, 200, 300, 400, 500, 600, 700, 800, 900, 1000];
/// Rows of the reference p* table.
pub const TABLE_Q_TOTAL: [f64; 4] = [0.0, 0.01, 0.05, 0.1];

/// `p*` with rows indexed by `q_total` and columns by `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PStarTable {
    pub n: Vec<usize>,
    pub q_total: Vec<f64>,
    /// `values[row][col]`.
    pub values: Vec<Vec<f64>>,
}

impl PStarTable {
    pub fn get(&self, q_total: f64, n: usize) -> Option<f64> {
        let row = self.q_total.iter().position(|&q| q == q_total)?;
        let col = self.n.iter().position(|&x| x == n)?;
        Some(self.values[row][col])
    }
}

pub fn pstar_table(n: &[usize], q_total: &[f64]) -> Result<PStarTable, HarnessError> {
    let values = q_total
        .iter()
        .map(|&qt| {
            let q = q_from_qtotal(qt)?;
            n.iter()
                .map(|&n| p_star(n, q))
                .collect::<Result<Vec<f64>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PStarTable {
        n: n.to_vec(),
        q_total: q_total.to_vec(),
        values,
    })
}
