use std::collections::HashSet;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand};
use serde::Serialize;

use lowbp::channel::SNR_CONVENTION;
use lowbp::code::{load_alist, peg_construct, save_alist, CodeParams, DegreeProfile, FactorGraph};
use lowbp::decoder::{DecoderConfig, FapVector, Kernel, ReweightedDecoder};
use lowbp::fap::{RhoArtifact, StepRule};
use lowbp::harness::{
    export_results, export_rho_histogram, grid_search_urw, irregular_profile, regular_profile,
    run_ber, run_offline, OfflineConfig, OutputFormat, Partition, SimConfig, Variant,
};
use lowbp::rng::GAUSSIAN_GENERATOR;
use lowbp::subgraph::{peg_expand, validate, ExpansionConfig, Strategy};
use lowbp::{Error, Result};

const EXIT_CONFIG: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "lowbp",
    version,
    about = "Reweighted belief propagation for LDPC codes"
)]
struct Cli {
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[arg(long, global = true, default_value = "jacobian")]
    kernel: Kernel,
    #[arg(long, global = true, default_value_t = 60)]
    max_iters: usize,
    /// Eb/N0 points in dB, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    snr: Vec<f64>,
    /// key=value file; keys are long flag names, command-line flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a code by progressive edge growth and write it as alist.
    Construct {
        /// `regular`, `irregular`, `col:<w>` or `reg:<wv>,<wc>`.
        #[arg(long, default_value = "regular")]
        profile: String,
        #[arg(long, default_value_t = 500)]
        n: usize,
        #[arg(long, default_value_t = 250)]
        m: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the girth of an alist code.
    Girth { code: PathBuf },
    /// Split a code into subgraphs and write them as JSON.
    Expand {
        code: PathBuf,
        #[arg(long, default_value = "disjoint")]
        strategy: Strategy,
        #[arg(long, default_value_t = 4)]
        d_max: usize,
        #[arg(long, default_value_t = 1000)]
        max_subgraphs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the offline FAP optimization and write the artifact.
    Optimize {
        code: PathBuf,
        /// Optimize the whole graph as one subgraph.
        #[arg(long)]
        whole: bool,
        #[arg(long, default_value = "disjoint")]
        strategy: Strategy,
        #[arg(long, default_value_t = 4)]
        d_max: usize,
        #[arg(long, default_value_t = 1000)]
        training_frames: usize,
        #[arg(long, default_value_t = 100)]
        pilot_frames: usize,
        #[arg(long, default_value_t = 60)]
        max_recursions: usize,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[arg(long, default_value_t = 0.9)]
        rho_init: f64,
        #[arg(long, default_value = "diminishing")]
        step_rule: StepRule,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decode one frame of whitespace-separated channel LLRs read from stdin.
    Decode {
        code: PathBuf,
        #[arg(long, conflicts_with = "urw")]
        artifact: Option<PathBuf>,
        #[arg(long)]
        urw: Option<f64>,
    },
    /// Monte Carlo BER/FER simulation.
    Ber {
        code: PathBuf,
        /// `bp`, `urw:<rho>` or `low:<artifact path>`.
        #[arg(long, default_value = "bp")]
        variant: String,
        #[arg(long, default_value_t = 10_000)]
        max_frames: u64,
        /// 0 disables the error-count stopping rule.
        #[arg(long, default_value_t = 200)]
        min_bit_errors: u64,
        #[arg(long)]
        random_codewords: bool,
        #[arg(long, default_value = "csv")]
        format: OutputFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Best constant FAP over a grid.
    UrwGrid {
        code: PathBuf,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "0.7,0.75,0.8,0.85,0.9,0.95,1.0"
        )]
        grid: Vec<f64>,
        #[arg(long, default_value_t = 400)]
        frames: u64,
    },
    /// FAP histogram of an artifact as CSV.
    Histogram {
        artifact: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        bin_width: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Outcome {
    Done,
    NotConverged,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match merge_config(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let cli = Cli::parse_from(args);
    match run(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::NotConverged) => ExitCode::from(EXIT_NOT_CONVERGED),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Profile(_) => ExitCode::from(EXIT_CONFIG),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

/// Appends `--key value` for every config-file entry the command accepts
/// and the command line does not already set.
fn merge_config(mut args: Vec<String>) -> Result<Vec<String>> {
    let path = args.iter().enumerate().find_map(|(i, a)| {
        if a == "--config" {
            args.get(i + 1).cloned()
        } else {
            a.strip_prefix("--config=").map(str::to_owned)
        }
    });
    let Some(path) = path else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path).map_err(|e| Error::Config(format!("{path}: {e}")))?;

    let root = Cli::command();
    let longs = |c: &clap::Command| -> HashSet<String> {
        c.get_arguments()
            .filter_map(|a| a.get_long().map(str::to_owned))
            .collect()
    };
    let global = longs(&root);
    let mut all = global.clone();
    let mut accepted = global.clone();
    let chosen = args.iter().skip(1).find_map(|a| root.find_subcommand(a));
    for sub in root.get_subcommands() {
        let l = longs(sub);
        all.extend(l.iter().cloned());
        if chosen.is_some_and(|c| c.get_name() == sub.get_name()) {
            accepted.extend(l);
        }
    }

    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| Error::Config(format!("{path}:{}: expected key=value", i + 1)))?;
        if key == "config" || !all.contains(key) {
            return Err(Error::Config(format!(
                "{path}:{}: unknown key {key:?}",
                i + 1
            )));
        }
        let flag = format!("--{key}");
        let present = args
            .iter()
            .any(|a| *a == flag || a.starts_with(&format!("{flag}=")));
        if present || !accepted.contains(key) {
            continue;
        }
        match value {
            "true" => args.push(flag),
            "false" => {}
            v => {
                args.push(flag);
                args.push(v.to_owned());
            }
        }
    }
    Ok(args)
}

fn load_code(path: &Path) -> Result<FactorGraph> {
    Ok(FactorGraph::new(load_alist(&fs::read(path)?)?))
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => fs::write(p, bytes)?,
        None => io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn parse_profile(s: &str) -> Result<DegreeProfile> {
    let bad = || Error::Config(format!("unknown profile {s:?}"));
    match s {
        "regular" => Ok(regular_profile()),
        "irregular" => Ok(irregular_profile()),
        _ => match s.split_once(':') {
            Some(("col", w)) => DegreeProfile::column_regular(w.parse().map_err(|_| bad())?),
            Some(("reg", degrees)) => {
                let (v, c) = degrees.split_once(',').ok_or_else(bad)?;
                DegreeProfile::regular(v.parse().map_err(|_| bad())?, c.parse().map_err(|_| bad())?)
            }
            _ => Err(bad()),
        },
    }
}

fn load_artifact(path: &Path, graph: &FactorGraph) -> Result<RhoArtifact> {
    let artifact = RhoArtifact::from_json(&fs::read_to_string(path)?)?;
    if artifact.code_hash != graph.matrix().content_hash() {
        return Err(Error::Config(format!(
            "artifact {} was optimized for a different code",
            path.display()
        )));
    }
    Ok(artifact)
}

#[derive(Serialize)]
struct BerMeta<'a> {
    snr_convention: &'a str,
    gaussian_generator: &'a str,
    code_hash: String,
    variant: String,
    kernel: Kernel,
    max_iterations: usize,
    max_frames: u64,
    min_bit_errors: Option<u64>,
    seed: u64,
    random_codewords: bool,
}

fn run(cli: Cli) -> Result<Outcome> {
    let snr = if cli.snr.is_empty() {
        vec![2.0]
    } else {
        cli.snr.clone()
    };
    let decoder = DecoderConfig {
        max_iters: cli.max_iters,
        kernel: cli.kernel,
        ..DecoderConfig::default()
    };
    match cli.command {
        Command::Construct { profile, n, m, out } => {
            let h = peg_construct(CodeParams::new(n, m)?, &parse_profile(&profile)?, cli.seed)?;
            write_output(out.as_deref(), &save_alist(&h))?;
        }
        Command::Girth { code } => {
            println!("{}", load_code(&code)?.girth());
        }
        Command::Expand {
            code,
            strategy,
            d_max,
            max_subgraphs,
            out,
        } => {
            let graph = load_code(&code)?;
            let cfg = ExpansionConfig {
                strategy,
                d_max,
                seed: cli.seed,
                max_subgraphs,
            };
            let set = peg_expand(&graph, &cfg)?;
            let report = validate(&set, &graph);
            if !report.is_valid() {
                return Err(Error::Structural(report.violations.join("; ")));
            }
            write_output(out.as_deref(), set.to_json()?.as_bytes())?;
        }
        Command::Optimize {
            code,
            whole,
            strategy,
            d_max,
            training_frames,
            pilot_frames,
            max_recursions,
            tol,
            rho_init,
            step_rule,
            out,
        } => {
            let graph = load_code(&code)?;
            let partition = if whole {
                Partition::Whole
            } else {
                Partition::Expand(ExpansionConfig::new(strategy, d_max, cli.seed))
            };
            let mut cfg = OfflineConfig::new(partition, snr[0]);
            cfg.seeds.training = cli.seed;
            cfg.seeds.pilot = cli.seed.wrapping_add(1);
            cfg.training_frames = training_frames;
            cfg.pilot_frames = pilot_frames;
            cfg.optimizer.max_recursions = max_recursions;
            cfg.optimizer.tol = tol;
            cfg.optimizer.rho_init = rho_init;
            cfg.optimizer.step_rule = step_rule;
            cfg.optimizer.decoder = decoder;
            let result = run_offline(&graph, &cfg)?;
            write_output(out.as_deref(), result.artifact.to_json()?.as_bytes())?;
            if !result.artifact.all_converged() {
                eprintln!("warning: some subgraphs hit the recursion cap");
                return Ok(Outcome::NotConverged);
            }
        }
        Command::Decode {
            code,
            artifact,
            urw,
        } => {
            let graph = load_code(&code)?;
            let rho = match (artifact, urw) {
                (Some(p), _) => load_artifact(&p, &graph)?.fap_vector()?,
                (None, Some(r)) => FapVector::uniform(graph.n_checks(), r)?,
                (None, None) => FapVector::ones(graph.n_checks()),
            };
            let mut text = String::new();
            io::stdin().read_to_string(&mut text)?;
            let llr: Vec<f64> = text
                .split_whitespace()
                .map(|t| {
                    t.parse()
                        .map_err(|_| Error::Config(format!("bad LLR {t:?}")))
                })
                .collect::<Result<_>>()?;
            let res = ReweightedDecoder::new(&graph, decoder)?.decode(&llr, &rho)?;
            let bits: String = res
                .hard_decision
                .iter()
                .map(|b| char::from(b'0' + b))
                .collect();
            println!("{bits}");
            println!(
                "converged={} iterations={}",
                res.converged, res.iterations_used
            );
            if !res.converged {
                return Ok(Outcome::NotConverged);
            }
        }
        Command::Ber {
            code,
            variant,
            max_frames,
            min_bit_errors,
            random_codewords,
            format,
            out,
        } => {
            let graph = load_code(&code)?;
            let parsed = match variant.strip_prefix("low:") {
                Some(p) => Variant::Low(load_artifact(Path::new(p), &graph)?.fap_vector()?),
                None => variant.parse()?,
            };
            let cfg = SimConfig {
                snr_points_db: snr,
                max_iterations: cli.max_iters,
                max_frames,
                min_bit_errors: (min_bit_errors > 0).then_some(min_bit_errors),
                variant: parsed,
                kernel: cli.kernel,
                seed: cli.seed,
                random_codewords,
            };
            let points = run_ber(&graph, &cfg)?;
            write_output(out.as_deref(), &export_results(&points, format)?)?;
            if let Some(p) = out {
                let meta = BerMeta {
                    snr_convention: SNR_CONVENTION,
                    gaussian_generator: GAUSSIAN_GENERATOR,
                    code_hash: graph.matrix().content_hash(),
                    variant,
                    kernel: cli.kernel,
                    max_iterations: cli.max_iters,
                    max_frames,
                    min_bit_errors: cfg.min_bit_errors,
                    seed: cli.seed,
                    random_codewords,
                };
                let mut meta_path = p.into_os_string();
                meta_path.push(".meta.json");
                fs::write(meta_path, serde_json::to_vec_pretty(&meta)?)?;
            }
        }
        Command::UrwGrid { code, grid, frames } => {
            let graph = load_code(&code)?;
            let base = SimConfig {
                max_iterations: cli.max_iters,
                kernel: cli.kernel,
                seed: cli.seed,
                ..SimConfig::default()
            };
            let result = grid_search_urw(&graph, snr[0], &grid, frames, &base)?;
            println!("rho_u,bit_errors");
            for (r, e) in &result.errors {
                println!("{r},{e}");
            }
            println!("best,{}", result.best);
        }
        Command::Histogram {
            artifact,
            bin_width,
            out,
        } => {
            let a = RhoArtifact::from_json(&fs::read_to_string(&artifact)?)?;
            write_output(out.as_deref(), &export_rho_histogram(&a.rho, bin_width)?)?;
        }
    }
    Ok(Outcome::Done)
}
