use serde::{Deserialize, Serialize};

use crate::code::FactorGraph;
use crate::decoder::{boxplus_pair, BeliefState};
use crate::{Error, Result};

/// Largest clique handled by explicit enumeration.
pub const MAX_CLIQUE_DEGREE: usize = 20;

/// Mutual-information terms (nats), one per check of a subgraph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MutualInfoVector(pub Vec<f64>);

impl MutualInfoVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Joint belief of a check's variables, supported on even-parity assignments.
#[derive(Debug, Clone, PartialEq)]
pub struct CliqueBelief {
    pub check_id: usize,
    /// (assignment, probability); assignment bit `i` is variable slot `i`.
    pub configs: Vec<(Vec<u8>, f64)>,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^x) without overflow.
fn softplus(x: f64) -> f64 {
    if x == f64::INFINITY {
        x
    } else if x == f64::NEG_INFINITY {
        0.0
    } else {
        x.max(0.0) + (-x.abs()).exp().ln_1p()
    }
}

fn xlnx(p: f64) -> f64 {
    if p > 0.0 {
        p * p.ln()
    } else {
        0.0
    }
}

/// Binary entropy (nats) of a distribution with P(1) = p.
pub fn binary_entropy(p: f64) -> f64 {
    -xlnx(p) - xlnx(1.0 - p)
}

impl CliqueBelief {
    /// Enumerates the even-parity assignments weighted by the incoming LLRs
    /// (`ln p(1)/p(0)` per slot).
    pub fn from_llrs(check_id: usize, llrs: &[f64]) -> Result<Self> {
        let d = llrs.len();
        if d == 0 {
            return Err(Error::Domain("clique without variables".into()));
        }
        if d > MAX_CLIQUE_DEGREE {
            return Err(Error::Domain(format!(
                "clique degree {d} exceeds the enumeration bound {MAX_CLIQUE_DEGREE}"
            )));
        }
        if llrs.iter().any(|l| l.is_nan()) {
            return Err(Error::Domain("NaN LLR in clique".into()));
        }
        let p1: Vec<f64> = llrs.iter().map(|&l| sigmoid(l)).collect();
        let mut configs = Vec::with_capacity(1 << (d - 1));
        for mask in 0u32..(1 << d) {
            if mask.count_ones() % 2 == 1 {
                continue;
            }
            let bits: Vec<u8> = (0..d).map(|i| ((mask >> i) & 1) as u8).collect();
            let w: f64 = bits
                .iter()
                .zip(&p1)
                .map(|(&b, &p)| if b == 1 { p } else { 1.0 - p })
                .product();
            configs.push((bits, w));
        }
        let z: f64 = configs.iter().map(|c| c.1).sum();
        if z.is_nan() || z <= 0.0 {
            return Err(Error::Domain(
                "incoming messages exclude every even-parity assignment".into(),
            ));
        }
        configs.iter_mut().for_each(|c| c.1 /= z);
        Ok(Self { check_id, configs })
    }

    pub fn degree(&self) -> usize {
        self.configs.first().map_or(0, |c| c.0.len())
    }

    /// One-dimensional projections P(x_i = 1).
    pub fn marginals(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.degree()];
        for (bits, p) in &self.configs {
            for (mi, &b) in m.iter_mut().zip(bits) {
                if b == 1 {
                    *mi += p;
                }
            }
        }
        m
    }

    pub fn entropy(&self) -> f64 {
        -self.configs.iter().map(|c| xlnx(c.1)).sum::<f64>()
    }
}

/// Clique belief of local check `m` from the variable-to-check messages in `state`.
pub fn clique_belief(graph: &FactorGraph, state: &BeliefState, m: usize) -> Result<CliqueBelief> {
    CliqueBelief::from_llrs(m, &state.var_to_check[graph.check_edges(m)])
}

/// I = sum_n H(b_n) - H(b_C), with `marginals` given as P(x_n = 1).
pub fn mutual_information(belief: &CliqueBelief, marginals: &[f64]) -> f64 {
    let h: f64 = marginals.iter().map(|&p| binary_entropy(p)).sum();
    (h - belief.entropy()).max(0.0)
}

/// Mutual information of the parity clique without enumeration.
///
/// With q_n the product-form slot distributions and b the even-parity
/// restriction, I = -ln Z - sum_n KL(b_n || q_n), where Z is the even-parity
/// probability under q.
pub fn clique_information(llrs: &[f64]) -> f64 {
    let d = llrs.len();
    if d < 2 {
        return 0.0;
    }
    // Prefix/suffix box-plus sums without saturation (identity = +inf).
    let mut prefix = vec![f64::INFINITY; d + 1];
    let mut suffix = vec![f64::INFINITY; d + 1];
    for i in 0..d {
        prefix[i + 1] = boxplus_pair(prefix[i], llrs[i]);
        suffix[d - 1 - i] = boxplus_pair(suffix[d - i], llrs[d - 1 - i]);
    }
    // LLR of the XOR of all bits, ln P(odd)/P(even).
    let sign = |k: usize| if k % 2 == 1 { 1.0 } else { -1.0 };
    let xor_all = sign(d) * prefix[d];
    let neg_ln_z = softplus(xor_all);
    let mut kl = 0.0;
    for (i, &l) in llrs.iter().enumerate() {
        let others = sign(d - 1) * boxplus_pair(prefix[i], suffix[i + 1]);
        kl += kl_llr(l + others, l);
    }
    (neg_ln_z - kl).max(0.0)
}

/// KL divergence between binary distributions given by their LLRs.
fn kl_llr(beta: f64, psi: f64) -> f64 {
    if beta.is_nan() {
        return 0.0;
    }
    let b1 = sigmoid(beta);
    let b0 = sigmoid(-beta);
    // ln b1 - ln q1 = softplus(-psi) - softplus(-beta), and symmetric for 0.
    let t1 = if b1 > 0.0 {
        b1 * (softplus(-psi) - softplus(-beta))
    } else {
        0.0
    };
    let t0 = if b0 > 0.0 {
        b0 * (softplus(psi) - softplus(beta))
    } else {
        0.0
    };
    t1 + t0
}

/// Mutual-information vector of every check of `graph` at the current messages.
pub fn information_vector(graph: &FactorGraph, state: &BeliefState) -> MutualInfoVector {
    MutualInfoVector(
        (0..graph.n_checks())
            .map(|m| clique_information(&state.var_to_check[graph.check_edges(m)]))
            .collect(),
    )
}

/// Evaluates the reweighted free-energy objective at the current messages.
///
/// Variable beliefs come from the belief LLRs, clique beliefs from the
/// variable-to-check messages, and the channel potential is the normalized
/// likelihood P(x_n | y_n) implied by the channel LLR. The parity term is
/// zero because clique beliefs live on even-parity assignments.
pub fn trw_objective(graph: &FactorGraph, state: &BeliefState, rho: &[f64], llr_ch: &[f64]) -> f64 {
    let mut f = 0.0;
    for (&belief, &l) in state.beliefs.iter().zip(llr_ch) {
        let b1 = sigmoid(belief);
        f += binary_entropy(b1);
        // ln phi(1) = -softplus(-l), ln phi(0) = -softplus(l)
        let b0 = 1.0 - b1;
        if b1 > 0.0 {
            f -= b1 * softplus(-l);
        }
        if b0 > 0.0 {
            f -= b0 * softplus(l);
        }
    }
    for (m, &r) in rho.iter().enumerate().take(graph.n_checks()) {
        f -= r * clique_information(&state.var_to_check[graph.check_edges(m)]);
    }
    f
}
