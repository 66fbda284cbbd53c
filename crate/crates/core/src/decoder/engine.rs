use serde::{Deserialize, Serialize};

use super::boxplus::{absorb, boxplus_pair};
use super::{FapVector, Kernel, LLR_MAX};
use crate::code::{FactorGraph, ParityCheckMatrix};
use crate::{Error, Result};

/// Decoder settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoderConfig {
    pub max_iters: usize,
    pub kernel: Kernel,
    pub llr_max: f64,
    /// Stop as soon as the hard decision satisfies every check.
    pub early_stop: bool,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            max_iters: 60,
            kernel: Kernel::Jacobian,
            llr_max: LLR_MAX,
            early_stop: true,
        }
    }
}

/// Messages and beliefs of one decoding run, indexed by the graph's edge ids.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BeliefState {
    /// `Psi[n->m]` per edge.
    pub var_to_check: Vec<f64>,
    /// `Lam[m->n]` per edge.
    pub check_to_var: Vec<f64>,
    /// `belief[n]` per variable.
    pub beliefs: Vec<f64>,
    pub iteration: usize,
}

impl BeliefState {
    /// All-zero messages, beliefs equal to nothing yet.
    pub fn new(graph: &FactorGraph) -> Self {
        Self {
            var_to_check: vec![0.0; graph.n_edges()],
            check_to_var: vec![0.0; graph.n_edges()],
            beliefs: vec![0.0; graph.n_vars()],
            iteration: 0,
        }
    }

    fn reset(&mut self, graph: &FactorGraph) {
        self.var_to_check.clear();
        self.var_to_check.resize(graph.n_edges(), 0.0);
        self.check_to_var.clear();
        self.check_to_var.resize(graph.n_edges(), 0.0);
        self.beliefs.clear();
        self.beliefs.resize(graph.n_vars(), 0.0);
        self.iteration = 0;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeResult {
    pub hard_decision: Vec<u8>,
    pub converged: bool,
    pub iterations_used: usize,
    pub final_beliefs: Vec<f64>,
    /// The code has a degree-1 check.
    pub degenerate: bool,
}

#[inline]
fn clamp(x: f64, max: f64) -> f64 {
    x.clamp(-max, max)
}

/// Variable-to-check messages from the previous check-to-variable messages.
pub fn variable_update(graph: &FactorGraph, state: &mut BeliefState, llr: &[f64], rho: &FapVector) {
    variable_update_sat(graph, state, llr, rho, LLR_MAX)
}

fn variable_update_sat(
    graph: &FactorGraph,
    state: &mut BeliefState,
    llr: &[f64],
    rho: &FapVector,
    llr_max: f64,
) {
    let rho = rho.as_slice();
    let edges = graph.edges();
    for (n, &ch) in llr.iter().enumerate() {
        let var_edges = graph.var_edges(n);
        for &e in var_edges {
            let m = edges[e].check;
            let mut psi = ch;
            for &other in var_edges {
                if other != e {
                    psi += rho[edges[other].check] * state.check_to_var[other];
                }
            }
            psi -= (1.0 - rho[m]) * state.check_to_var[e];
            state.var_to_check[e] = clamp(psi, llr_max);
        }
    }
}

/// Check-to-variable messages from the current variable-to-check messages.
pub fn check_update(
    graph: &FactorGraph,
    state: &mut BeliefState,
    rho: &FapVector,
    kernel: Kernel,
    llr_max: f64,
) {
    let mut scratch = Scratch::default();
    check_update_with(graph, state, rho, kernel, llr_max, &mut scratch);
}

#[derive(Debug, Default)]
struct Scratch {
    a: Vec<f64>,
    prefix: Vec<(f64, f64)>,
    suffix: Vec<(f64, f64)>,
    fwd: Vec<f64>,
    bwd: Vec<f64>,
}

fn check_update_with(
    graph: &FactorGraph,
    state: &mut BeliefState,
    rho: &FapVector,
    kernel: Kernel,
    llr_max: f64,
    s: &mut Scratch,
) {
    let rho = rho.as_slice();
    for (m, &r) in rho.iter().enumerate() {
        let range = graph.check_edges(m);
        let d = range.len();
        let start = range.start;
        // Parity of the d-1 other bits, in the bit-1-positive convention.
        let parity_sign = if d.is_multiple_of(2) { 1.0 } else { -1.0 };
        s.a.clear();
        s.a.extend(state.var_to_check[range.clone()].iter().map(|&p| r * p));
        if d == 1 {
            let psi = state.var_to_check[start];
            // Empty box-plus is +inf (identity), saturated.
            state.check_to_var[start] = clamp(parity_sign * llr_max - (1.0 - r) * psi, llr_max);
            continue;
        }
        match kernel {
            Kernel::Tanh => {
                s.prefix.clear();
                s.suffix.clear();
                s.suffix.resize(d + 1, (1.0, 0.0));
                s.prefix.push((1.0, 0.0));
                let mut neg = 0usize;
                for &a in &s.a {
                    let (e, o) = *s.prefix.last().unwrap();
                    s.prefix.push(absorb(e, o, (-a.abs()).exp()));
                    neg += (a < 0.0) as usize;
                }
                for i in (0..d).rev() {
                    let (e, o) = s.suffix[i + 1];
                    s.suffix[i] = absorb(e, o, (-s.a[i].abs()).exp());
                }
                for i in 0..d {
                    let (pe, po) = s.prefix[i];
                    let (se, so) = s.suffix[i + 1];
                    let even = pe * se + po * so;
                    let odd = pe * so + po * se;
                    let others_neg = neg - (s.a[i] < 0.0) as usize;
                    let sign = if others_neg.is_multiple_of(2) {
                        1.0
                    } else {
                        -1.0
                    };
                    let bp = clamp(sign * (even / odd).ln(), llr_max);
                    let e = start + i;
                    let psi = state.var_to_check[e];
                    state.check_to_var[e] = clamp(parity_sign * bp - (1.0 - r) * psi, llr_max);
                }
            }
            Kernel::Jacobian => {
                s.fwd.clear();
                s.bwd.clear();
                s.bwd.resize(d + 1, f64::INFINITY);
                s.fwd.push(f64::INFINITY);
                for &a in &s.a {
                    let acc = *s.fwd.last().unwrap();
                    s.fwd.push(boxplus_pair(acc, a));
                }
                for i in (0..d).rev() {
                    s.bwd[i] = boxplus_pair(s.bwd[i + 1], s.a[i]);
                }
                for i in 0..d {
                    let bp = clamp(boxplus_pair(s.fwd[i], s.bwd[i + 1]), llr_max);
                    let e = start + i;
                    let psi = state.var_to_check[e];
                    state.check_to_var[e] = clamp(parity_sign * bp - (1.0 - r) * psi, llr_max);
                }
            }
        }
    }
}

/// Posterior LLRs `llr[n] + sum_m rho[m] Lam[m->n]`.
pub fn belief_update(graph: &FactorGraph, state: &mut BeliefState, llr: &[f64], rho: &FapVector) {
    let rho = rho.as_slice();
    let edges = graph.edges();
    for (n, &ch) in llr.iter().enumerate() {
        let mut b = ch;
        for &e in graph.var_edges(n) {
            b += rho[edges[e].check] * state.check_to_var[e];
        }
        state.beliefs[n] = b;
    }
}

/// Bit 1 iff the belief is strictly positive.
pub fn hard_decision(beliefs: &[f64]) -> Vec<u8> {
    beliefs.iter().map(|&b| (b > 0.0) as u8).collect()
}

/// `H x` over GF(2).
pub fn syndrome(matrix: &ParityCheckMatrix, bits: &[u8]) -> Vec<u8> {
    matrix
        .rows()
        .iter()
        .map(|row| row.iter().fold(0u8, |acc, &n| acc ^ (bits[n] & 1)))
        .collect()
}

fn syndrome_is_zero(matrix: &ParityCheckMatrix, bits: &[u8]) -> bool {
    matrix
        .rows()
        .iter()
        .all(|row| row.iter().fold(0u8, |acc, &n| acc ^ bits[n]) == 0)
}

/// Reusable decoder bound to one factor graph.
#[derive(Debug)]
pub struct ReweightedDecoder<'g> {
    graph: &'g FactorGraph,
    config: DecoderConfig,
    state: BeliefState,
    scratch: Scratch,
}

impl<'g> ReweightedDecoder<'g> {
    pub fn new(graph: &'g FactorGraph, config: DecoderConfig) -> Result<Self> {
        if config.max_iters == 0 {
            return Err(Error::Domain("max_iters must be at least 1".into()));
        }
        if config.llr_max.is_nan() || config.llr_max <= 0.0 {
            return Err(Error::Domain("llr_max must be positive".into()));
        }
        Ok(Self {
            graph,
            config,
            state: BeliefState::new(graph),
            scratch: Scratch::default(),
        })
    }

    pub fn graph(&self) -> &FactorGraph {
        self.graph
    }

    pub fn config(&self) -> &DecoderConfig {
        &self.config
    }

    /// Messages and beliefs left by the last call to [`decode`](Self::decode).
    pub fn state(&self) -> &BeliefState {
        &self.state
    }

    pub fn decode(&mut self, llr: &[f64], rho: &FapVector) -> Result<DecodeResult> {
        let g = self.graph;
        if llr.len() != g.n_vars() {
            return Err(Error::Domain(format!(
                "LLR vector has length {}, code has N={}",
                llr.len(),
                g.n_vars()
            )));
        }
        if rho.len() != g.n_checks() {
            return Err(Error::Domain(format!(
                "rho has length {}, code has M={}",
                rho.len(),
                g.n_checks()
            )));
        }
        if let Some(n) = llr.iter().position(|l| l.is_nan()) {
            return Err(Error::Domain(format!("channel LLR {n} is NaN")));
        }
        let cfg = self.config;
        self.state.reset(g);
        let mut bits = vec![0u8; g.n_vars()];
        let mut converged = false;
        for it in 1..=cfg.max_iters {
            variable_update_sat(g, &mut self.state, llr, rho, cfg.llr_max);
            check_update_with(
                g,
                &mut self.state,
                rho,
                cfg.kernel,
                cfg.llr_max,
                &mut self.scratch,
            );
            belief_update(g, &mut self.state, llr, rho);
            self.state.iteration = it;
            for (b, &l) in bits.iter_mut().zip(&self.state.beliefs) {
                *b = (l > 0.0) as u8;
            }
            converged = syndrome_is_zero(g.matrix(), &bits);
            if converged && cfg.early_stop {
                break;
            }
        }
        Ok(DecodeResult {
            hard_decision: bits,
            converged,
            iterations_used: self.state.iteration,
            final_beliefs: self.state.beliefs.clone(),
            degenerate: g.matrix().has_degree_one_check(),
        })
    }
}

/// One-shot decode.
pub fn decode(
    graph: &FactorGraph,
    llr: &[f64],
    rho: &FapVector,
    config: DecoderConfig,
) -> Result<DecodeResult> {
    ReweightedDecoder::new(graph, config)?.decode(llr, rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{peg_construct, CodeParams, DegreeProfile};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    fn graph(n_vars: usize, rows: Vec<Vec<usize>>) -> FactorGraph {
        FactorGraph::new(ParityCheckMatrix::from_rows(n_vars, rows).unwrap())
    }

    #[test]
    fn first_variable_messages_are_channel_llrs() {
        let g = graph(4, vec![vec![0, 1, 2], vec![1, 2, 3]]);
        let llr = [0.5, -1.0, 2.0, 0.25];
        let mut st = BeliefState::new(&g);
        variable_update(&g, &mut st, &llr, &FapVector::uniform(2, 0.7).unwrap());
        for (e, edge) in g.edges().iter().enumerate() {
            assert_eq!(st.var_to_check[e], llr[edge.var]);
        }
        belief_update(&g, &mut st, &llr, &FapVector::ones(2));
        assert_eq!(st.beliefs, llr);
    }

    #[test]
    fn variable_update_rho_one_is_standard_bp() {
        let g = graph(3, vec![vec![0, 1], vec![0, 2], vec![0, 1, 2]]);
        let llr = [0.3, -0.2, 1.0];
        let mut st = BeliefState::new(&g);
        st.check_to_var = vec![1.0, 2.0, -3.0, 0.5, 4.0, -1.5, 0.25];
        variable_update(&g, &mut st, &llr, &FapVector::ones(3));
        // variable 0 sits on edges 0 (c0), 2 (c1), 4 (c2)
        assert_abs_diff_eq!(st.var_to_check[0], 0.3 - 3.0 + 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(st.var_to_check[2], 0.3 + 1.0 + 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(st.var_to_check[4], 0.3 + 1.0 - 3.0, epsilon = 1e-15);
    }

    #[test]
    fn degree_one_variable_reweighting() {
        // variable 2 has degree 1: Psi = 1 - (1 - 0.8) * 3 = 0.4
        let g = graph(3, vec![vec![0, 1, 2]]);
        let mut st = BeliefState::new(&g);
        st.check_to_var = vec![0.0, 0.0, 3.0];
        variable_update(
            &g,
            &mut st,
            &[0.0, 0.0, 1.0],
            &FapVector::new(vec![0.8]).unwrap(),
        );
        assert_abs_diff_eq!(st.var_to_check[2], 0.4, epsilon = 1e-15);
    }

    #[test]
    fn check_update_examples() {
        let g = graph(3, vec![vec![0, 1, 2]]);
        for kernel in [Kernel::Tanh, Kernel::Jacobian] {
            // Psi = {2, 2} on the others, 1 on the target; rho = 0.8.
            // 2 atanh(tanh(0.8)^2) = 0.946806152602485 (mpmath); degree 3 makes
            // the parity sign negative.
            let mut st = BeliefState::new(&g);
            st.var_to_check = vec![2.0, 2.0, 1.0];
            check_update(
                &g,
                &mut st,
                &FapVector::new(vec![0.8]).unwrap(),
                kernel,
                LLR_MAX,
            );
            assert_abs_diff_eq!(st.check_to_var[2], -1.146_806_152_602_485, epsilon = 1e-12);

            // A zero input absorbs the box-plus term.
            st.var_to_check = vec![0.0, 5.0, 1.5];
            check_update(
                &g,
                &mut st,
                &FapVector::new(vec![0.6]).unwrap(),
                kernel,
                LLR_MAX,
            );
            assert_abs_diff_eq!(st.check_to_var[2], -0.4 * 1.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn check_update_rho_one_is_parity_rule() {
        // Degree-2 check copies; degree-3 check flips sign.
        let g = graph(5, vec![vec![0, 1], vec![2, 3, 4]]);
        let mut st = BeliefState::new(&g);
        st.var_to_check = vec![1.5, -0.5, 10.0, 10.0, 0.3];
        check_update(&g, &mut st, &FapVector::ones(2), Kernel::Tanh, LLR_MAX);
        assert_abs_diff_eq!(st.check_to_var[0], -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(st.check_to_var[1], 1.5, epsilon = 1e-12);
        // Both others strongly 1: their XOR is 0, so the message favors 0.
        assert!(st.check_to_var[4] < -9.0);
    }

    #[test]
    fn degree_one_check_forces_zero() {
        let g = graph(2, vec![vec![0, 1], vec![1]]);
        let mut st = BeliefState::new(&g);
        st.var_to_check = vec![0.0, 0.0, 2.0];
        check_update(
            &g,
            &mut st,
            &FapVector::new(vec![1.0, 0.5]).unwrap(),
            Kernel::Jacobian,
            LLR_MAX,
        );
        assert_abs_diff_eq!(st.check_to_var[2], -LLR_MAX, epsilon = 1e-12);
        let r = decode(
            &g,
            &[1.0, 1.0],
            &FapVector::ones(2),
            DecoderConfig::default(),
        )
        .unwrap();
        assert!(r.degenerate);
        assert_eq!(r.hard_decision, vec![0, 0]);
    }

    #[test]
    fn belief_example() {
        let g = graph(2, vec![vec![0, 1], vec![0, 1]]);
        let mut st = BeliefState::new(&g);
        // variable 0 on edges 0 (c0) and 2 (c1)
        st.check_to_var = vec![2.0, 0.0, -1.0, 0.0];
        belief_update(
            &g,
            &mut st,
            &[1.0, 0.0],
            &FapVector::new(vec![0.5, 0.5]).unwrap(),
        );
        assert_abs_diff_eq!(st.beliefs[0], 1.5, epsilon = 1e-15);
    }

    #[test]
    fn syndrome_examples() {
        let h = ParityCheckMatrix::from_rows(5, vec![vec![0, 1, 2], vec![2, 3], vec![0, 3, 4]])
            .unwrap();
        assert_eq!(syndrome(&h, &[0; 5]), vec![0, 0, 0]);
        for n in 0..5 {
            let mut bits = vec![0u8; 5];
            bits[n] = 1;
            let s = syndrome(&h, &bits);
            for (m, &sm) in s.iter().enumerate() {
                assert_eq!(sm == 1, h.col(n).contains(&m));
            }
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let dense = h.to_dense();
        for _ in 0..50 {
            let bits: Vec<u8> = (0..5).map(|_| rng.random_range(0..2)).collect();
            let oracle: Vec<u8> = dense
                .iter()
                .map(|r| r.iter().zip(&bits).map(|(a, b)| a * b).sum::<u8>() % 2)
                .collect();
            assert_eq!(syndrome(&h, &bits), oracle);
        }
    }

    #[test]
    fn noiseless_zero_word_converges_immediately() {
        let params = CodeParams::new(60, 30).unwrap();
        let h = peg_construct(params, &DegreeProfile::regular(3, 6).unwrap(), 1).unwrap();
        let g = FactorGraph::new(h);
        let llr = vec![-40.0; 60];
        for kernel in [Kernel::Tanh, Kernel::Jacobian] {
            let cfg = DecoderConfig {
                kernel,
                ..Default::default()
            };
            let r = decode(&g, &llr, &FapVector::uniform(30, 0.7).unwrap(), cfg).unwrap();
            assert!(r.converged);
            assert_eq!(r.iterations_used, 1);
            assert!(r.hard_decision.iter().all(|&b| b == 0));
        }
    }

    #[test]
    fn dimension_mismatch() {
        let g = graph(3, vec![vec![0, 1, 2]]);
        let cfg = DecoderConfig::default();
        assert!(decode(&g, &[0.0; 2], &FapVector::ones(1), cfg).is_err());
        assert!(decode(&g, &[0.0; 3], &FapVector::ones(2), cfg).is_err());
        let zero_iters = DecoderConfig {
            max_iters: 0,
            ..cfg
        };
        assert!(decode(&g, &[0.0; 3], &FapVector::ones(1), zero_iters).is_err());
    }
}
