//! Offline FAP optimization: information terms of the reweighted free
//! energy, a conditional-gradient optimizer over a hyperforest surrogate of
//! the valid-FAP polytope, and merging of per-subgraph results.

mod info;
mod lmo;
mod optimize;

pub use info::{
    binary_entropy, clique_belief, clique_information, information_vector, mutual_information,
    trw_objective, CliqueBelief, MutualInfoVector, MAX_CLIQUE_DEGREE,
};
pub use lmo::{is_hyperforest, lmo_hyperforest};
pub use optimize::{
    average_information, average_objective, conditional_gradient_step, diminishing_step,
    optimize_subgraph_faps, OptimizerConfig, OptimizerState, StepRule, SubgraphOptimization,
};

use serde::{Deserialize, Serialize};

use crate::decoder::{FapVector, RHO_MIN};
use crate::subgraph::{Strategy, SubgraphSet};
use crate::{Error, Result};

/// Candidates closer than this are treated as agreeing.
pub const MERGE_TOLERANCE: f64 = 1e-6;

/// Combines per-subgraph FAPs into one vector over all checks.
///
/// Checks with a single candidate (always the case for disjoint sets) take
/// it directly. Otherwise each distinct candidate is scored by `pilot`, which
/// returns the bit-error count for a full FAP vector, with every other check
/// held at the mean of its candidates; the fewest errors win, ties going to
/// the smaller value.
pub fn merge_faps(
    set: &SubgraphSet,
    per_subgraph: &[Vec<f64>],
    mut pilot: impl FnMut(&FapVector) -> Result<u64>,
) -> Result<FapVector> {
    if per_subgraph.len() != set.len() {
        return Err(Error::Structural(format!(
            "{} FAP vectors for {} subgraphs",
            per_subgraph.len(),
            set.len()
        )));
    }
    let m = set.coverage.len();
    let mut candidates: Vec<Vec<f64>> = vec![Vec::new(); m];
    for (sg, rho_t) in set.subgraphs.iter().zip(per_subgraph) {
        if sg.len() != rho_t.len() {
            return Err(Error::Structural("subgraph and FAP lengths differ".into()));
        }
        for (&c, &r) in sg.check_ids.iter().zip(rho_t) {
            if c >= m {
                return Err(Error::Structural(format!("check {c} out of range")));
            }
            candidates[c].push(r);
        }
    }
    let uncovered: Vec<usize> = (0..m).filter(|&c| candidates[c].is_empty()).collect();
    if !uncovered.is_empty() {
        return Err(Error::Structural(format!(
            "checks without FAP: {uncovered:?}"
        )));
    }

    let mean: Vec<f64> = candidates
        .iter()
        .map(|c| c.iter().sum::<f64>() / c.len() as f64)
        .collect();
    let mut merged = mean.clone();
    for c in 0..m {
        let mut vals = candidates[c].clone();
        vals.sort_by(f64::total_cmp);
        vals.dedup_by(|a, b| (*a - *b).abs() <= MERGE_TOLERANCE);
        if vals.len() == 1 {
            merged[c] = candidates[c][0];
            continue;
        }
        let mut best: Option<(u64, f64)> = None;
        for &v in &vals {
            let mut trial = mean.clone();
            trial[c] = v;
            let errors = pilot(&FapVector::new(trial)?)?;
            if best.is_none_or(|(e, _)| errors < e) {
                best = Some((errors, v));
            }
        }
        merged[c] = best.expect("at least two candidates").1;
    }
    FapVector::new(merged)
}

/// Seeds of the offline pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub expansion: u64,
    pub training: u64,
    pub pilot: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgraphRho {
    pub check_ids: Vec<usize>,
    pub rho_t: Vec<f64>,
    pub recursions: usize,
    pub converged: bool,
}

/// Persisted output of the offline phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoArtifact {
    pub code_hash: String,
    pub snr_db: f64,
    /// `None` when the whole graph was optimized as one subgraph.
    pub strategy: Option<Strategy>,
    pub d_max: Option<usize>,
    pub seeds: Seeds,
    pub step_rule: StepRule,
    pub rho: Vec<f64>,
    pub per_subgraph: Vec<SubgraphRho>,
}

impl RhoArtifact {
    pub fn fap_vector(&self) -> Result<FapVector> {
        FapVector::new(self.rho.clone())
    }

    pub fn all_converged(&self) -> bool {
        self.per_subgraph.iter().all(|s| s.converged)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let a: Self = serde_json::from_str(text)?;
        if a.rho.iter().any(|r| !(RHO_MIN..=1.0).contains(r)) {
            return Err(Error::Config("artifact FAP outside [rho_min, 1]".into()));
        }
        Ok(a)
    }
}
