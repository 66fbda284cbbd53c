//! LDPC codes as sparse parity-check matrices and bipartite factor graphs.

mod alist;
mod girth;
mod peg;
mod profile;

pub use alist::{load_alist, save_alist};
pub use girth::{bipartite_girth, Girth};
pub use peg::peg_construct;
pub use profile::DegreeProfile;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result};

/// Block length, number of checks and nominal rate of a code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeParams {
    n_vars: usize,
    n_checks: usize,
}

impl CodeParams {
    pub fn new(n_vars: usize, n_checks: usize) -> Result<Self> {
        if n_checks == 0 || n_vars == 0 {
            return Err(Error::Structural("code dimensions must be positive".into()));
        }
        if n_checks >= n_vars {
            return Err(Error::Structural(format!(
                "need n_checks < n_vars, got M={n_checks} N={n_vars}"
            )));
        }
        Ok(Self { n_vars, n_checks })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_checks(&self) -> usize {
        self.n_checks
    }

    /// Number of information bits K = N - M (nominal, assumes full rank).
    pub fn n_info(&self) -> usize {
        self.n_vars - self.n_checks
    }

    /// R = K / N.
    pub fn rate(&self) -> f64 {
        self.n_info() as f64 / self.n_vars as f64
    }
}

/// Sparse binary M x N matrix kept as sorted row and column index lists.
///
/// Rows and columns are always exact transposes of each other, contain no
/// duplicates and are never empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheckMatrix {
    n_vars: usize,
    rows: Vec<Vec<usize>>,
    cols: Vec<Vec<usize>>,
}

impl ParityCheckMatrix {
    /// Builds a matrix from per-check variable lists (any order).
    pub fn from_rows(n_vars: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        let mut rows = rows;
        let mut cols = vec![Vec::new(); n_vars];
        for (m, row) in rows.iter_mut().enumerate() {
            if row.is_empty() {
                return Err(Error::Structural(format!("check {m} has no variables")));
            }
            row.sort_unstable();
            if let Some(w) = row.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::Structural(format!(
                    "check {m} lists variable {} twice",
                    w[0]
                )));
            }
            for &n in row.iter() {
                if n >= n_vars {
                    return Err(Error::Structural(format!(
                        "check {m} references variable {n} >= N={n_vars}"
                    )));
                }
                cols[n].push(m);
            }
        }
        if let Some(n) = cols.iter().position(|c| c.is_empty()) {
            return Err(Error::Structural(format!("variable {n} is in no check")));
        }
        Ok(Self { n_vars, rows, cols })
    }

    /// Builds a matrix from per-variable check lists.
    pub fn from_cols(n_checks: usize, cols: Vec<Vec<usize>>) -> Result<Self> {
        let mut rows = vec![Vec::new(); n_checks];
        for (n, col) in cols.iter().enumerate() {
            for &m in col {
                if m >= n_checks {
                    return Err(Error::Structural(format!(
                        "variable {n} references check {m} >= M={n_checks}"
                    )));
                }
                rows[m].push(n);
            }
        }
        Self::from_rows(cols.len(), rows)
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_checks(&self) -> usize {
        self.rows.len()
    }

    pub fn n_edges(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Code parameters; fails for matrices with M >= N.
    pub fn params(&self) -> Result<CodeParams> {
        CodeParams::new(self.n_vars, self.n_checks())
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn cols(&self) -> &[Vec<usize>] {
        &self.cols
    }

    /// Variables of check `m`, ascending.
    pub fn row(&self, m: usize) -> &[usize] {
        &self.rows[m]
    }

    /// Checks of variable `n`, ascending.
    pub fn col(&self, n: usize) -> &[usize] {
        &self.cols[n]
    }

    pub fn row_degrees(&self) -> Vec<usize> {
        self.rows.iter().map(Vec::len).collect()
    }

    pub fn col_degrees(&self) -> Vec<usize> {
        self.cols.iter().map(Vec::len).collect()
    }

    pub fn has_degree_one_check(&self) -> bool {
        self.rows.iter().any(|r| r.len() == 1)
    }

    /// Dense 0/1 rows, for small matrices and tests.
    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        self.rows
            .iter()
            .map(|row| {
                let mut dense = vec![0u8; self.n_vars];
                for &n in row {
                    dense[n] = 1;
                }
                dense
            })
            .collect()
    }

    /// SHA-256 of the alist serialization, hex encoded.
    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(save_alist(self)))
    }
}

/// One edge of the factor graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub check: usize,
    pub var: usize,
}

/// Bipartite factor graph of a parity-check matrix with stable edge indices.
///
/// Edges are numbered row-major: the edges of check `m` occupy the
/// contiguous range `check_edges(m)`, in ascending variable order.
#[derive(Debug, Clone)]
pub struct FactorGraph {
    matrix: ParityCheckMatrix,
    edges: Vec<Edge>,
    row_start: Vec<usize>,
    var_edges: Vec<Vec<usize>>,
}

impl FactorGraph {
    pub fn new(matrix: ParityCheckMatrix) -> Self {
        let mut edges = Vec::with_capacity(matrix.n_edges());
        let mut row_start = Vec::with_capacity(matrix.n_checks() + 1);
        let mut var_edges = vec![Vec::new(); matrix.n_vars()];
        for (m, row) in matrix.rows().iter().enumerate() {
            row_start.push(edges.len());
            for &n in row {
                var_edges[n].push(edges.len());
                edges.push(Edge { check: m, var: n });
            }
        }
        row_start.push(edges.len());
        Self {
            matrix,
            edges,
            row_start,
            var_edges,
        }
    }

    pub fn matrix(&self) -> &ParityCheckMatrix {
        &self.matrix
    }

    pub fn n_vars(&self) -> usize {
        self.matrix.n_vars()
    }

    pub fn n_checks(&self) -> usize {
        self.matrix.n_checks()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edge index range of check `m`.
    pub fn check_edges(&self, m: usize) -> std::ops::Range<usize> {
        self.row_start[m]..self.row_start[m + 1]
    }

    /// Edge indices of variable `n`, in ascending check order.
    pub fn var_edges(&self, n: usize) -> &[usize] {
        &self.var_edges[n]
    }

    pub fn girth(&self) -> Girth {
        bipartite_girth(self.n_vars(), self.matrix.rows())
    }
}

impl From<ParityCheckMatrix> for FactorGraph {
    fn from(matrix: ParityCheckMatrix) -> Self {
        Self::new(matrix)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_invariants() {
        let p = CodeParams::new(500, 250).unwrap();
        assert_eq!(p.n_info(), 250);
        assert_eq!(p.rate(), 0.5);
        assert!(CodeParams::new(4, 4).is_err());
        assert!(CodeParams::new(4, 0).is_err());
    }

    #[test]
    fn rows_and_cols_are_transposes() {
        let h = ParityCheckMatrix::from_rows(4, vec![vec![3, 0, 1], vec![1, 2]]).unwrap();
        assert_eq!(h.rows(), &[vec![0, 1, 3], vec![1, 2]]);
        assert_eq!(h.cols(), &[vec![0], vec![0, 1], vec![1], vec![0]]);
        for (m, row) in h.rows().iter().enumerate() {
            for &n in row {
                assert!(h.col(n).contains(&m));
            }
        }
        let back = ParityCheckMatrix::from_cols(2, h.cols().to_vec()).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn structural_errors() {
        assert!(ParityCheckMatrix::from_rows(3, vec![vec![0, 0, 1], vec![2]]).is_err());
        assert!(ParityCheckMatrix::from_rows(3, vec![vec![0, 1], vec![]]).is_err());
        assert!(ParityCheckMatrix::from_rows(3, vec![vec![0, 1]]).is_err());
        assert!(ParityCheckMatrix::from_rows(2, vec![vec![0, 5]]).is_err());
    }

    #[test]
    fn edge_indexing() {
        let h = ParityCheckMatrix::from_rows(4, vec![vec![0, 1, 3], vec![1, 2]]).unwrap();
        let g = FactorGraph::new(h);
        assert_eq!(g.n_edges(), 5);
        assert_eq!(g.check_edges(1), 3..5);
        assert_eq!(g.var_edges(1), &[1, 3]);
        for (e, edge) in g.edges().iter().enumerate() {
            assert!(g.check_edges(edge.check).contains(&e));
            assert!(g.var_edges(edge.var).contains(&e));
        }
        let row_sum: usize = g.matrix().row_degrees().iter().sum();
        let col_sum: usize = g.matrix().col_degrees().iter().sum();
        assert_eq!(row_sum, g.n_edges());
        assert_eq!(col_sum, g.n_edges());
    }
}
