use crate::code::ParityCheckMatrix;
use crate::{Error, Result};

/// Systematic-style GF(2) encoder obtained by Gaussian elimination of H.
///
/// The free (non-pivot) columns carry the information bits; each pivot bit is
/// the parity of the free bits in its reduced row.
#[derive(Debug, Clone)]
pub struct Encoder {
    n_vars: usize,
    free: Vec<usize>,
    /// (pivot column, free columns involved).
    pivots: Vec<(usize, Vec<usize>)>,
}

impl Encoder {
    pub fn new(h: &ParityCheckMatrix) -> Self {
        let n = h.n_vars();
        let words = n.div_ceil(64);
        let mut rows: Vec<Vec<u64>> = h
            .rows()
            .iter()
            .map(|r| {
                let mut w = vec![0u64; words];
                for &v in r {
                    w[v / 64] |= 1 << (v % 64);
                }
                w
            })
            .collect();
        let bit = |row: &[u64], c: usize| (row[c / 64] >> (c % 64)) & 1 == 1;
        let mut pivot_cols = Vec::new();
        let mut rank = 0;
        for col in 0..n {
            let Some(p) = (rank..rows.len()).find(|&r| bit(&rows[r], col)) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && bit(row, col) {
                    row.iter_mut().zip(&pivot).for_each(|(a, b)| *a ^= b);
                }
            }
            pivot_cols.push(col);
            rank += 1;
        }
        let is_pivot = {
            let mut v = vec![false; n];
            pivot_cols.iter().for_each(|&c| v[c] = true);
            v
        };
        let free: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
        let pivots = pivot_cols
            .iter()
            .zip(&rows)
            .map(|(&pc, row)| (pc, free.iter().copied().filter(|&c| bit(row, c)).collect()))
            .collect();
        Self {
            n_vars: n,
            free,
            pivots,
        }
    }

    /// Code dimension (number of information bits).
    pub fn dimension(&self) -> usize {
        self.free.len()
    }

    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.free.len() {
            return Err(Error::Domain(format!(
                "expected {} information bits, got {}",
                self.free.len(),
                info.len()
            )));
        }
        let mut x = vec![0u8; self.n_vars];
        for (&c, &b) in self.free.iter().zip(info) {
            x[c] = b & 1;
        }
        for (pc, deps) in &self.pivots {
            x[*pc] = deps.iter().fold(0, |acc, &c| acc ^ x[c]);
        }
        Ok(x)
    }
}
