//! Monte Carlo evaluation, the offline pipeline driver and data export.

mod encoder;
mod export;
mod offline;

pub use encoder::Encoder;
pub use export::{
    export_results, export_rho_histogram, parse_results_csv, rho_histogram, HistogramBin,
    OutputFormat, RhoSummary,
};
pub use offline::{noisy_frames, run_offline, OfflineConfig, OfflineResult, Partition};

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{awgn_with, bpsk_modulate, channel_llr, snr_to_sigma2};
use crate::code::{CodeParams, DegreeProfile, FactorGraph};
use crate::decoder::{DecoderConfig, FapVector, Kernel, ReweightedDecoder, RHO_MIN};
use crate::rng::{domain, pair_index, substream};
use crate::{Error, Result};

/// Block length of the reference codes.
pub const REFERENCE_N: usize = 500;
/// Number of checks of the rate-1/2 reference codes.
pub const REFERENCE_M: usize = 250;

/// Column-weight-4 profile of the reference regular code.
pub fn regular_profile() -> DegreeProfile {
    DegreeProfile::column_regular(4).expect("valid profile")
}

/// Node-perspective variable profile of the reference irregular code.
pub fn irregular_profile() -> DegreeProfile {
    DegreeProfile::new(vec![(5, 0.21), (3, 0.25), (2, 0.25), (1, 0.29)], None)
        .expect("valid profile")
}

pub fn reference_params() -> CodeParams {
    CodeParams::new(REFERENCE_N, REFERENCE_M).expect("valid parameters")
}

/// Decoder used for a simulation.
#[derive(Debug, Clone, PartialEq)]
pub enum Variant {
    Bp,
    Urw(f64),
    Low(FapVector),
}

impl Variant {
    pub fn rho(&self, n_checks: usize) -> Result<FapVector> {
        match self {
            Variant::Bp => Ok(FapVector::ones(n_checks)),
            Variant::Urw(r) => FapVector::uniform(n_checks, *r),
            Variant::Low(rho) if rho.len() == n_checks => Ok(rho.clone()),
            Variant::Low(rho) => Err(Error::Config(format!(
                "FAP vector has {} entries for {n_checks} checks",
                rho.len()
            ))),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Bp => f.write_str("bp"),
            Variant::Urw(r) => write!(f, "urw:{r}"),
            Variant::Low(_) => f.write_str("low"),
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    /// Parses `bp` or `urw:<rho>`; LOW vectors come from artifacts.
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if s == "bp" => Ok(Variant::Bp),
            Some(("urw", r)) => r
                .parse()
                .map(Variant::Urw)
                .map_err(|_| Error::Config(format!("bad URW constant {r:?}"))),
            _ => Err(Error::Config(format!("unknown decoder variant {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub snr_points_db: Vec<f64>,
    pub max_iterations: usize,
    pub max_frames: u64,
    /// Stop a point once this many bit errors are counted; `None` runs all frames.
    pub min_bit_errors: Option<u64>,
    pub variant: Variant,
    pub kernel: Kernel,
    pub seed: u64,
    /// Transmit random codewords from a GF(2) encoder instead of all-zero.
    pub random_codewords: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            snr_points_db: vec![2.0],
            max_iterations: 60,
            max_frames: 10_000,
            min_bit_errors: Some(200),
            variant: Variant::Bp,
            kernel: Kernel::Jacobian,
            seed: 1,
            random_codewords: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.snr_points_db.is_empty() {
            return Err(Error::Config("no SNR points".into()));
        }
        if self.snr_points_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("non-finite SNR point".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        if let Variant::Urw(r) = self.variant {
            if !(RHO_MIN..=1.0).contains(&r) {
                return Err(Error::Config(format!(
                    "URW constant {r} outside [{RHO_MIN}, 1]"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub snr_db: f64,
    pub frames: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub ber: f64,
    pub fer: f64,
    pub mean_iterations: f64,
}

/// Outcome of one simulated frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameOutcome {
    pub bit_errors: u64,
    pub iterations: usize,
}

/// Frames decoded in parallel between stopping-rule checks.
const FRAME_BATCH: u64 = 64;

fn code_rate(graph: &FactorGraph) -> Result<f64> {
    Ok(graph.matrix().params()?.rate())
}

/// Simulates frames `frames` of SNR point `snr_index`, returning outcomes in frame order.
pub fn simulate_frames(
    graph: &FactorGraph,
    cfg: &SimConfig,
    snr_index: usize,
    frames: std::ops::Range<u64>,
) -> Result<Vec<FrameOutcome>> {
    cfg.validate()?;
    let n = graph.n_vars();
    let rho = cfg.variant.rho(graph.n_checks())?;
    let sigma2 = snr_to_sigma2(cfg.snr_points_db[snr_index], code_rate(graph)?);
    let dcfg = DecoderConfig {
        max_iters: cfg.max_iterations,
        kernel: cfg.kernel,
        ..DecoderConfig::default()
    };
    let encoder = cfg.random_codewords.then(|| Encoder::new(graph.matrix()));
    ReweightedDecoder::new(graph, dcfg)?;
    frames
        .into_par_iter()
        .map_init(
            || ReweightedDecoder::new(graph, dcfg).expect("validated"),
            |dec, f| {
                let stream = pair_index(snr_index as u64, f);
                let codeword = match &encoder {
                    Some(enc) => {
                        let mut rng = substream(cfg.seed, domain::PAYLOAD, stream);
                        let info: Vec<u8> = (0..enc.dimension())
                            .map(|_| rng.random_range(0..2))
                            .collect();
                        enc.encode(&info)?
                    }
                    None => vec![0u8; n],
                };
                let y = awgn_with(
                    &bpsk_modulate(&codeword)?,
                    sigma2,
                    substream(cfg.seed, domain::CHANNEL, stream),
                );
                let llr = channel_llr(&y, sigma2)?;
                let res = dec.decode(llr.as_slice(), &rho)?;
                let bit_errors = res
                    .hard_decision
                    .iter()
                    .zip(&codeword)
                    .filter(|(a, b)| a != b)
                    .count() as u64;
                Ok(FrameOutcome {
                    bit_errors,
                    iterations: res.iterations_used,
                })
            },
        )
        .collect()
}

/// Monte Carlo BER/FER curve.
///
/// Frames are keyed by (seed, SNR index, frame index), so every decoder
/// variant sees the same noise. Frames are tallied in order and the point
/// stops at the first frame that reaches `min_bit_errors`, which keeps the
/// result independent of the worker count.
pub fn run_ber(graph: &FactorGraph, cfg: &SimConfig) -> Result<Vec<BerPoint>> {
    cfg.validate()?;
    let n = graph.n_vars() as f64;
    let mut points = Vec::with_capacity(cfg.snr_points_db.len());
    for (si, &snr_db) in cfg.snr_points_db.iter().enumerate() {
        let (mut frames, mut bit_errors, mut frame_errors, mut iterations) =
            (0u64, 0u64, 0u64, 0u64);
        'point: while frames < cfg.max_frames {
            let end = (frames + FRAME_BATCH).min(cfg.max_frames);
            for o in simulate_frames(graph, cfg, si, frames..end)? {
                frames += 1;
                bit_errors += o.bit_errors;
                frame_errors += (o.bit_errors > 0) as u64;
                iterations += o.iterations as u64;
                if cfg.min_bit_errors.is_some_and(|m| bit_errors >= m) {
                    break 'point;
                }
            }
        }
        let f = frames.max(1) as f64;
        points.push(BerPoint {
            snr_db,
            frames,
            bit_errors,
            frame_errors,
            ber: bit_errors as f64 / (f * n),
            fer: frame_errors as f64 / f,
            mean_iterations: iterations as f64 / f,
        });
    }
    Ok(points)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UrwGrid {
    pub best: f64,
    /// (rho_u, bit errors) for every grid value.
    pub errors: Vec<(f64, u64)>,
}

/// Picks the constant FAP with the fewest bit errors over a fixed frame set;
/// ties go to the larger constant.
pub fn grid_search_urw(
    graph: &FactorGraph,
    snr_db: f64,
    grid: &[f64],
    frames: u64,
    base: &SimConfig,
) -> Result<UrwGrid> {
    if grid.is_empty() {
        return Err(Error::Config("empty URW grid".into()));
    }
    let mut errors = Vec::with_capacity(grid.len());
    for &r in grid {
        let cfg = SimConfig {
            snr_points_db: vec![snr_db],
            max_frames: frames,
            min_bit_errors: None,
            variant: Variant::Urw(r),
            ..base.clone()
        };
        errors.push((r, run_ber(graph, &cfg)?[0].bit_errors));
    }
    let best = errors
        .iter()
        .copied()
        .min_by(|a, b| a.1.cmp(&b.1).then(b.0.total_cmp(&a.0)))
        .expect("nonempty grid")
        .0;
    Ok(UrwGrid { best, errors })
}
