//! Reweighted belief propagation decoding.
//!
//! With per-check factor appearance probabilities `rho`, one flooding
//! iteration computes, for every edge `(m, n)`:
//!
//! ```text
//! Psi[n->m]    = llr[n] + sum_{m' in N(n)\m} rho[m'] Lam[m'->n] - (1 - rho[m]) Lam[m->n]
//! Lam[m->n]    = s_m * BOXPLUS_{n' in N(m)\n} (rho[m] Psi[n'->m]) - (1 - rho[m]) Psi[n->m]
//! belief[n]    = llr[n] + sum_{m in N(n)} rho[m] Lam[m->n]
//! ```
//!
//! LLRs favor bit 1 when positive, so the parity of the other `|N(m)| - 1`
//! bits enters through the sign `s_m = (-1)^|N(m)|`. At `rho = 1` the rules
//! reduce to standard sum-product decoding.

mod boxplus;
mod engine;

pub use boxplus::{boxplus_pair, f_boxplus, Kernel};
pub use engine::{
    belief_update, check_update, decode, hard_decision, syndrome, variable_update, BeliefState,
    DecodeResult, DecoderConfig, ReweightedDecoder,
};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Saturation magnitude for every message, in natural-log units.
pub const LLR_MAX: f64 = 50.0;

/// Smallest factor appearance probability accepted by the decoder.
pub const RHO_MIN: f64 = 0.05;

/// Per-check factor appearance probabilities, each in `[RHO_MIN, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FapVector(Vec<f64>);

impl FapVector {
    pub fn new(rho: Vec<f64>) -> Result<Self> {
        if let Some((m, r)) = rho
            .iter()
            .enumerate()
            .find(|(_, &r)| !(RHO_MIN..=1.0).contains(&r))
        {
            return Err(Error::Domain(format!(
                "rho[{m}] = {r} outside [{RHO_MIN}, 1]"
            )));
        }
        Ok(Self(rho))
    }

    /// Standard BP.
    pub fn ones(n_checks: usize) -> Self {
        Self(vec![1.0; n_checks])
    }

    /// Uniform reweighting with a single constant.
    pub fn uniform(n_checks: usize, rho: f64) -> Result<Self> {
        Self::new(vec![rho; n_checks])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for FapVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<FapVector> for Vec<f64> {
    fn from(f: FapVector) -> Self {
        f.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fap_bounds() {
        assert!(FapVector::new(vec![1.0, 0.05, 0.5]).is_ok());
        assert!(FapVector::new(vec![0.04]).is_err());
        assert!(FapVector::new(vec![1.01]).is_err());
        assert!(FapVector::new(vec![f64::NAN]).is_err());
        assert!(FapVector::uniform(3, 0.0).is_err());
        let parsed: std::result::Result<FapVector, _> = serde_json::from_str("[0.5, 0.01]");
        assert!(parsed.is_err());
    }
}
