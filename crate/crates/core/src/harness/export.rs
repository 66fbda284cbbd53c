use serde::{Deserialize, Serialize};

use super::BerPoint;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown output format {other:?}"))),
        }
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Config(format!("csv: {e}"))
}

/// Serializes BER points; CSV columns follow the field order of [`BerPoint`].
pub fn export_results(points: &[BerPoint], format: OutputFormat) -> Result<Vec<u8>> {
    match format {
        OutputFormat::Json => Ok(serde_json::to_vec_pretty(points)?),
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            if points.is_empty() {
                w.write_record([
                    "snr_db",
                    "frames",
                    "bit_errors",
                    "frame_errors",
                    "ber",
                    "fer",
                    "mean_iterations",
                ])
                .map_err(csv_error)?;
            }
            for p in points {
                w.serialize(p).map_err(csv_error)?;
            }
            w.into_inner()
                .map_err(|e| Error::Config(format!("csv: {e}")))
        }
    }
}

pub fn parse_results_csv(bytes: &[u8]) -> Result<Vec<BerPoint>> {
    csv::Reader::from_reader(bytes)
        .deserialize()
        .map(|r| r.map_err(csv_error))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub bin_left: f64,
    pub bin_right: f64,
    pub count: u64,
}

/// Nonempty bins of width `bin_width` over [0, 1]; the last bin is closed.
pub fn rho_histogram(rho: &[f64], bin_width: f64) -> Result<Vec<HistogramBin>> {
    if !(bin_width > 0.0 && bin_width <= 1.0) {
        return Err(Error::Config(format!(
            "bin width {bin_width} outside (0, 1]"
        )));
    }
    let n_bins = (1.0 / bin_width - 1e-9).ceil() as usize;
    let mut counts = vec![0u64; n_bins];
    for &r in rho {
        let k = ((r / bin_width + 1e-9).floor() as usize).min(n_bins - 1);
        counts[k] += 1;
    }
    let edge = |k: usize| ((k as f64 * bin_width).min(1.0) * 1e12).round() / 1e12;
    Ok(counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(k, &count)| HistogramBin {
            bin_left: edge(k),
            bin_right: edge(k + 1),
            count,
        })
        .collect())
}

pub fn export_rho_histogram(rho: &[f64], bin_width: f64) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["bin_left", "bin_right", "count"])
        .map_err(csv_error)?;
    for b in rho_histogram(rho, bin_width)? {
        w.write_record([
            b.bin_left.to_string(),
            b.bin_right.to_string(),
            b.count.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.into_inner()
        .map_err(|e| Error::Config(format!("csv: {e}")))
}

/// Order statistics of a FAP vector (linear-interpolation quantiles).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoSummary {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

impl RhoSummary {
    pub fn new(rho: &[f64]) -> Result<Self> {
        if rho.is_empty() {
            return Err(Error::Domain("empty FAP vector".into()));
        }
        let mut s = rho.to_vec();
        s.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let x = p * (s.len() - 1) as f64;
            let (lo, hi) = (x.floor() as usize, x.ceil() as usize);
            s[lo] + (x - lo as f64) * (s[hi] - s[lo])
        };
        Ok(Self {
            min: s[0],
            q1: q(0.25),
            median: q(0.5),
            q3: q(0.75),
            max: s[s.len() - 1],
            mean: s.iter().sum::<f64>() / s.len() as f64,
        })
    }

    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}
