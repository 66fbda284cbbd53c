use rayon::prelude::*;

use crate::channel::{awgn_with, channel_llr, snr_to_sigma2};
use crate::code::FactorGraph;
use crate::decoder::{FapVector, ReweightedDecoder};
use crate::fap::{
    merge_faps, optimize_subgraph_faps, OptimizerConfig, RhoArtifact, Seeds, SubgraphOptimization,
    SubgraphRho,
};
use crate::rng::{domain, substream};
use crate::subgraph::{peg_expand, ExpansionConfig, SubgraphSet};
use crate::Result;

/// How the graph is split before optimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Partition {
    /// The whole graph as a single subgraph (T = 1).
    Whole,
    Expand(ExpansionConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OfflineConfig {
    pub partition: Partition,
    pub snr_db: f64,
    /// Training and pilot seeds; the expansion seed is taken from the
    /// partition when it expands.
    pub seeds: Seeds,
    pub optimizer: OptimizerConfig,
    pub training_frames: usize,
    /// Frames per candidate evaluation when merging disagreeing FAPs.
    pub pilot_frames: usize,
}

impl OfflineConfig {
    pub fn new(partition: Partition, snr_db: f64) -> Self {
        Self {
            partition,
            snr_db,
            seeds: Seeds {
                expansion: match partition {
                    Partition::Expand(e) => e.seed,
                    Partition::Whole => 0,
                },
                training: 1,
                pilot: 2,
            },
            optimizer: OptimizerConfig::default(),
            training_frames: 1000,
            pilot_frames: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OfflineResult {
    pub artifact: RhoArtifact,
    pub subgraphs: SubgraphSet,
    pub optimizations: Vec<SubgraphOptimization>,
}

/// Channel LLRs of `count` all-zero frames drawn from stream `(seed, stream_domain, i)`.
pub fn noisy_frames(
    n_vars: usize,
    sigma2: f64,
    seed: u64,
    stream_domain: u64,
    count: usize,
) -> Result<Vec<Vec<f64>>> {
    let symbols = vec![-1.0; n_vars];
    (0..count)
        .map(|i| {
            let y = awgn_with(&symbols, sigma2, substream(seed, stream_domain, i as u64));
            Ok(channel_llr(&y, sigma2)?.0)
        })
        .collect()
}

/// Runs expansion, per-subgraph optimization and merging, and packs the artifact.
pub fn run_offline(graph: &FactorGraph, cfg: &OfflineConfig) -> Result<OfflineResult> {
    let rate = graph.matrix().params()?.rate();
    let sigma2 = snr_to_sigma2(cfg.snr_db, rate);
    let mut seeds = cfg.seeds;
    let (set, strategy, d_max) = match cfg.partition {
        Partition::Whole => (SubgraphSet::whole(graph), None, None),
        Partition::Expand(e) => {
            seeds.expansion = e.seed;
            (peg_expand(graph, &e)?, Some(e.strategy), Some(e.d_max))
        }
    };
    let training = noisy_frames(
        graph.n_vars(),
        sigma2,
        seeds.training,
        domain::TRAINING,
        cfg.training_frames,
    )?;

    let optimizations: Vec<SubgraphOptimization> = set
        .subgraphs
        .par_iter()
        .map(|sg| optimize_subgraph_faps(sg, &training, &cfg.optimizer))
        .collect::<Result<_>>()?;

    let pilot_frames = noisy_frames(
        graph.n_vars(),
        sigma2,
        seeds.pilot,
        domain::PILOT,
        cfg.pilot_frames,
    )?;
    let dcfg = cfg.optimizer.decoder;
    let pilot = |rho: &FapVector| -> Result<u64> {
        let counts: Vec<u64> = pilot_frames
            .par_iter()
            .map_init(
                || ReweightedDecoder::new(graph, dcfg).expect("validated"),
                |dec, llr| {
                    let res = dec.decode(llr, rho)?;
                    Ok(res.hard_decision.iter().filter(|&&b| b == 1).count() as u64)
                },
            )
            .collect::<Result<_>>()?;
        Ok(counts.iter().sum())
    };
    ReweightedDecoder::new(graph, dcfg)?;
    let per_subgraph: Vec<Vec<f64>> = optimizations.iter().map(|o| o.rho_t.clone()).collect();
    let rho = merge_faps(&set, &per_subgraph, pilot)?;

    let artifact = RhoArtifact {
        code_hash: graph.matrix().content_hash(),
        snr_db: cfg.snr_db,
        strategy,
        d_max,
        seeds,
        step_rule: cfg.optimizer.step_rule,
        rho: rho.into_inner(),
        per_subgraph: optimizations
            .iter()
            .map(|o| SubgraphRho {
                check_ids: o.check_ids.clone(),
                rho_t: o.rho_t.clone(),
                recursions: o.recursions,
                converged: o.converged,
            })
            .collect(),
    };
    Ok(OfflineResult {
        artifact,
        subgraphs: set,
        optimizations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::ParityCheckMatrix;
    use crate::subgraph::Strategy;

    #[test]
    fn tree_code_gives_all_ones() {
        let h = ParityCheckMatrix::from_rows(7, vec![vec![0, 1, 2], vec![2, 3], vec![3, 4, 5, 6]])
            .unwrap();
        let g = FactorGraph::new(h);
        for partition in [
            Partition::Whole,
            Partition::Expand(ExpansionConfig::new(Strategy::Disjoint, 2, 3)),
        ] {
            let mut cfg = OfflineConfig::new(partition, 2.0);
            cfg.training_frames = 10;
            let out = run_offline(&g, &cfg).unwrap();
            assert_eq!(out.artifact.rho, vec![1.0; 3]);
            assert!(out.artifact.all_converged());
            assert_eq!(out.artifact.code_hash, g.matrix().content_hash());
        }
    }
}
