use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::info::{information_vector, trw_objective, MutualInfoVector};
use super::lmo::lmo_hyperforest;
use crate::code::{FactorGraph, Girth};
use crate::decoder::{DecoderConfig, FapVector, ReweightedDecoder, RHO_MIN};
use crate::subgraph::Subgraph;
use crate::{Error, Result};

/// How the conditional-gradient step length is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepRule {
    /// alpha_r = 2 / (r + 2).
    #[default]
    Diminishing,
    /// Grid search over alpha in {0, 0.1, ..., 1} on the full objective,
    /// with fresh message passing at every grid point.
    Reevaluate,
}

impl fmt::Display for StepRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StepRule::Diminishing => "diminishing",
            StepRule::Reevaluate => "re-evaluate",
        })
    }
}

impl FromStr for StepRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "diminishing" => Ok(StepRule::Diminishing),
            "re-evaluate" | "reevaluate" => Ok(StepRule::Reevaluate),
            other => Err(Error::Config(format!("unknown step rule {other:?}"))),
        }
    }
}

pub fn diminishing_step(r: usize) -> f64 {
    2.0 / (r as f64 + 2.0)
}

/// Conditional-gradient iterate with its bound traces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    pub rho_t: Vec<f64>,
    pub recursion: usize,
    /// z^(r): best linearized lower bound so far.
    pub lower_bound: f64,
    /// f(rho^(r)) after every step.
    pub objective_trace: Vec<f64>,
    /// z^(r) after every step, aligned with `objective_trace`.
    pub lower_trace: Vec<f64>,
}

impl OptimizerState {
    pub fn new(rho_t: Vec<f64>) -> Self {
        Self {
            rho_t,
            recursion: 0,
            lower_bound: f64::NEG_INFINITY,
            objective_trace: Vec::new(),
            lower_trace: Vec::new(),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Moves `state` toward the oracle vertex for the linear objective -rho . info.
pub fn conditional_gradient_step(
    state: &OptimizerState,
    rows: &[Vec<usize>],
    n_vars: usize,
    info: &MutualInfoVector,
    alpha: f64,
) -> OptimizerState {
    let info = info.as_slice();
    let star = lmo_hyperforest(rows, n_vars, info);
    let f_lin = -dot(&star, info);
    let lower_bound = state.lower_bound.max(f_lin);
    let alpha = alpha.clamp(0.0, 1.0);
    let rho_t: Vec<f64> = state
        .rho_t
        .iter()
        .zip(&star)
        .map(|(&r, &s)| {
            if alpha == 1.0 {
                s
            } else {
                (r + alpha * (s - r)).clamp(RHO_MIN, 1.0)
            }
        })
        .collect();
    let mut next = state.clone();
    next.objective_trace.push(-dot(&rho_t, info));
    next.lower_trace.push(lower_bound);
    next.rho_t = rho_t;
    next.lower_bound = lower_bound;
    next.recursion += 1;
    next
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub max_recursions: usize,
    pub tol: f64,
    /// Constant starting value of every FAP.
    pub rho_init: f64,
    pub step_rule: StepRule,
    pub decoder: DecoderConfig,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_recursions: 60,
            tol: 1e-3,
            rho_init: 0.9,
            step_rule: StepRule::Diminishing,
            decoder: DecoderConfig::default(),
        }
    }
}

/// Result of optimizing one subgraph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgraphOptimization {
    pub check_ids: Vec<usize>,
    pub rho_t: Vec<f64>,
    pub recursions: usize,
    pub converged: bool,
    pub objective_trace: Vec<f64>,
    pub lower_trace: Vec<f64>,
}

/// Decodes every frame on `graph` at `rho` and returns the per-frame results
/// of `f` in frame order.
fn per_frame<T: Send>(
    graph: &FactorGraph,
    frames: &[Vec<f64>],
    rho: &FapVector,
    cfg: &DecoderConfig,
    f: impl Fn(&ReweightedDecoder, &[f64]) -> T + Sync,
) -> Result<Vec<T>> {
    ReweightedDecoder::new(graph, *cfg)?;
    frames
        .par_iter()
        .map_init(
            || ReweightedDecoder::new(graph, *cfg).expect("validated"),
            |dec, frame| {
                dec.decode(frame, rho)?;
                Ok(f(dec, frame))
            },
        )
        .collect()
}

/// Mutual-information vector averaged over frames (sequential sum, so the
/// result does not depend on thread scheduling).
pub fn average_information(
    graph: &FactorGraph,
    frames: &[Vec<f64>],
    rho: &FapVector,
    cfg: &DecoderConfig,
) -> Result<MutualInfoVector> {
    let per = per_frame(graph, frames, rho, cfg, |dec, _| {
        information_vector(graph, dec.state())
    })?;
    let mut acc = vec![0.0; graph.n_checks()];
    for v in &per {
        for (a, x) in acc.iter_mut().zip(v.as_slice()) {
            *a += x;
        }
    }
    let n = frames.len().max(1) as f64;
    Ok(MutualInfoVector(acc.into_iter().map(|a| a / n).collect()))
}

/// Frame-averaged objective at `rho`.
pub fn average_objective(
    graph: &FactorGraph,
    frames: &[Vec<f64>],
    rho: &FapVector,
    cfg: &DecoderConfig,
) -> Result<f64> {
    let per = per_frame(graph, frames, rho, cfg, |dec, frame| {
        trw_objective(graph, dec.state(), rho.as_slice(), frame)
    })?;
    Ok(per.iter().sum::<f64>() / frames.len().max(1) as f64)
}

fn fap(rho: &[f64]) -> Result<FapVector> {
    FapVector::new(rho.iter().map(|r| r.clamp(RHO_MIN, 1.0)).collect())
}

/// Optimizes the FAPs of one subgraph over training frames.
///
/// `training` holds full-length channel LLR frames of the parent code; only
/// the subgraph's variables are used. Acyclic subgraphs return all ones.
pub fn optimize_subgraph_faps(
    sub: &Subgraph,
    training: &[Vec<f64>],
    cfg: &OptimizerConfig,
) -> Result<SubgraphOptimization> {
    if !(RHO_MIN..=1.0).contains(&cfg.rho_init) {
        return Err(Error::Config(format!(
            "rho_init {} outside [{RHO_MIN}, 1]",
            cfg.rho_init
        )));
    }
    let (graph, vars) = sub.factor_graph()?;
    let l = graph.n_checks();
    if graph.girth() == Girth::Infinite {
        return Ok(SubgraphOptimization {
            check_ids: sub.check_ids.clone(),
            rho_t: vec![1.0; l],
            recursions: 0,
            converged: true,
            objective_trace: Vec::new(),
            lower_trace: Vec::new(),
        });
    }
    if training.is_empty() {
        return Err(Error::Config("no training frames".into()));
    }
    let frames: Vec<Vec<f64>> = training
        .iter()
        .map(|f| vars.iter().map(|&v| f[v]).collect())
        .collect();
    let rows = graph.matrix().rows();
    let n_vars = graph.n_vars();

    let mut state = OptimizerState::new(vec![cfg.rho_init; l]);
    let mut converged = false;
    for r in 0..cfg.max_recursions {
        let rho = fap(&state.rho_t)?;
        let info = average_information(&graph, &frames, &rho, &cfg.decoder)?;
        let alpha = match cfg.step_rule {
            StepRule::Diminishing => diminishing_step(r),
            StepRule::Reevaluate => {
                let star = lmo_hyperforest(rows, n_vars, info.as_slice());
                let mut best = (f64::INFINITY, 0.0);
                for k in 0..=10 {
                    let a = k as f64 / 10.0;
                    let trial: Vec<f64> = state
                        .rho_t
                        .iter()
                        .zip(&star)
                        .map(|(&x, &s)| x + a * (s - x))
                        .collect();
                    let f = average_objective(&graph, &frames, &fap(&trial)?, &cfg.decoder)?;
                    if f < best.0 {
                        best = (f, a);
                    }
                }
                best.1
            }
        };
        let next = conditional_gradient_step(&state, rows, n_vars, &info, alpha);
        let delta = next
            .rho_t
            .iter()
            .zip(&state.rho_t)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        state = next;
        if delta < cfg.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!(
            "subgraph with {l} checks did not converge within {} recursions",
            cfg.max_recursions
        );
    }
    Ok(SubgraphOptimization {
        check_ids: sub.check_ids.clone(),
        rho_t: state.rho_t,
        recursions: state.recursion,
        converged,
        objective_trace: state.objective_trace,
        lower_trace: state.lower_trace,
    })
}
