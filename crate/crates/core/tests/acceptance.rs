mod common;

use std::collections::BTreeSet;
use std::process::Command;
use std::time::Instant;

use lowbp::channel::snr_to_sigma2;
use lowbp::code::{peg_construct, FactorGraph};
use lowbp::decoder::{f_boxplus, DecoderConfig, FapVector, Kernel, ReweightedDecoder};
use lowbp::fap::{lmo_hyperforest, SubgraphOptimization};
use lowbp::harness::{
    grid_search_urw, irregular_profile, noisy_frames, reference_params, regular_profile,
    run_offline, simulate_frames, OfflineConfig, Partition, RhoSummary, SimConfig, Variant,
};
use lowbp::rng::{domain, substream};
use lowbp::subgraph::{peg_expand, validate, ExpansionConfig, Strategy, Subgraph};
use rand::seq::SliceRandom;
use rand::Rng;

const CODE_SEED: u64 = 1;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn regular() -> FactorGraph {
    FactorGraph::new(peg_construct(reference_params(), &regular_profile(), CODE_SEED).unwrap())
}

fn irregular() -> FactorGraph {
    FactorGraph::new(peg_construct(reference_params(), &irregular_profile(), CODE_SEED).unwrap())
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn ones_equivalence(g: &FactorGraph) -> Outcome {
    let sigma2 = snr_to_sigma2(2.5, g.matrix().params().unwrap().rate());
    let frames = noisy_frames(g.n_vars(), sigma2, 11, domain::CHANNEL, 100).unwrap();
    let cfg = DecoderConfig {
        kernel: Kernel::Tanh,
        ..DecoderConfig::default()
    };
    let mut dec = ReweightedDecoder::new(g, cfg).unwrap();
    let ones = FapVector::ones(g.n_checks());
    let (mut worst, mut mismatched, mut failed) = (0.0f64, 0, 0);
    for llr in &frames {
        let res = dec.decode(llr, &ones).unwrap();
        let st = dec.state();
        let o = common::textbook_sum_product(g.matrix(), llr, cfg.max_iters, cfg.llr_max, true);
        if res.hard_decision != o.bits || res.iterations_used != o.iterations {
            mismatched += 1;
        }
        failed += (!res.converged) as usize;
        worst = worst
            .max(max_abs_diff(&st.check_to_var, &o.check_to_var))
            .max(max_abs_diff(&st.var_to_check, &o.var_to_check));
    }
    outcome(
        mismatched == 0 && worst <= 1e-9,
        format!("100 frames ({failed} undecoded), decision mismatches {mismatched}, max edge diff {worst:.2e}"),
    )
}

fn tree_exactness() -> Outcome {
    let mut rng = substream(7, 0xacc, 2);
    let mut worst = 0.0f64;
    let mut sizes = Vec::new();
    for _ in 0..20 {
        let h = common::random_tree_code(&mut rng, 16);
        let n = h.n_vars();
        let llr: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let exact = common::exact_posteriors(&h, &llr);
        let g = FactorGraph::new(h);
        let cfg = DecoderConfig {
            max_iters: 2 * n + 2,
            early_stop: false,
            ..DecoderConfig::default()
        };
        let res = ReweightedDecoder::new(&g, cfg)
            .unwrap()
            .decode(&llr, &FapVector::ones(g.n_checks()))
            .unwrap();
        worst = worst.max(max_abs_diff(&res.final_beliefs, &exact));
        sizes.push(n);
    }
    outcome(
        worst <= 1e-8,
        format!(
            "20 trees, N in {}..={}, max belief error {worst:.2e}",
            sizes.iter().min().unwrap(),
            sizes.iter().max().unwrap()
        ),
    )
}

fn kernel_agreement() -> Outcome {
    let mut rng = substream(7, 0xacc, 3);
    let mut worst = 0.0f64;
    let mut buf = Vec::with_capacity(10);
    for _ in 0..100_000 {
        let len = rng.random_range(2..=10);
        buf.clear();
        buf.extend((0..len).map(|_| rng.random_range(-30.0..=30.0)));
        let a = f_boxplus(&buf, Kernel::Tanh, 50.0).unwrap();
        let b = f_boxplus(&buf, Kernel::Jacobian, 50.0).unwrap();
        worst = worst.max((a - b).abs());
    }
    outcome(
        worst <= 1e-9,
        format!("1e5 lists, max |tanh - jacobian| {worst:.2e}"),
    )
}

fn subgraph_structure(codes: &[(&str, &FactorGraph)]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, g) in codes {
        let mut ts = Vec::new();
        for d in [2, 3, 4, 6] {
            let dj = peg_expand(g, &ExpansionConfig::new(Strategy::Disjoint, d, 1)).unwrap();
            let ra = peg_expand(g, &ExpansionConfig::new(Strategy::Ra, d, 1)).unwrap();
            let (vd, vr) = (validate(&dj, g), validate(&ra, g));
            let ok = vd.is_valid()
                && vr.is_valid()
                && vd.size_sum == g.n_checks()
                && ra.len() >= dj.len()
                && dj
                    .subgraphs
                    .iter()
                    .chain(&ra.subgraphs)
                    .all(|s| s.is_tree() || s.girth() > g.girth());
            pass &= ok;
            ts.push(format!("d{d}:{}/{}", dj.len(), ra.len()));
        }
        parts.push(format!("{name} T_dj/T_ra {}", ts.join(" ")));
    }
    outcome(pass, parts.join("; "))
}

/// Connected check cluster grown from a random check, each step adding a
/// neighbor that shares the most variables with the cluster so cycles appear.
fn random_cluster<R: Rng>(g: &FactorGraph, size: usize, rng: &mut R) -> Vec<usize> {
    let h = g.matrix();
    let mut cluster = BTreeSet::from([rng.random_range(0..g.n_checks())]);
    while cluster.len() < size {
        let vars: BTreeSet<usize> = cluster
            .iter()
            .flat_map(|&c| h.row(c).iter().copied())
            .collect();
        let mut cands: Vec<usize> = vars
            .iter()
            .flat_map(|&v| h.col(v).iter().copied())
            .filter(|m| !cluster.contains(m))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        cands.shuffle(rng);
        let shared = |m: usize| h.row(m).iter().filter(|v| vars.contains(v)).count();
        let Some(&best) = cands.iter().max_by_key(|&&m| shared(m)) else {
            break;
        };
        cluster.insert(best);
    }
    cluster.into_iter().collect()
}

fn lmo_correctness(codes: &[(&str, &FactorGraph)]) -> Outcome {
    let mut rng = substream(7, 0xacc, 5);
    let (mut bad, mut cyclic) = (0, 0);
    for i in 0..50 {
        let g = codes[i % codes.len()].1;
        let size = rng.random_range(2..=12);
        let sub = Subgraph::induced(g, random_cluster(g, size, &mut rng));
        let (rows, vars) = sub.local_rows();
        let info: Vec<f64> = (0..rows.len())
            .map(|_| rng.random_range(0.0..1.0))
            .collect();
        let rho = lmo_hyperforest(&rows, vars.len(), &info);
        let chosen: Vec<usize> = (0..rows.len()).filter(|&k| rho[k] == 1.0).collect();
        let greedy: f64 = chosen.iter().map(|&k| info[k]).sum();
        let best = common::brute_force_forest(&rows, &info);
        cyclic += (!common::spans_forest(&rows, &(0..rows.len()).collect::<Vec<_>>())) as usize;
        if !common::spans_forest(&rows, &chosen) || (greedy - best).abs() > 1e-12 {
            bad += 1;
        }
    }
    outcome(
        bad == 0,
        format!("50 clusters ({cyclic} with cycles), {bad} disagreements"),
    )
}

fn offline_config(partition: Partition, snr_db: f64) -> OfflineConfig {
    let mut cfg = OfflineConfig::new(partition, snr_db);
    cfg.training_frames = 1000;
    cfg.optimizer.max_recursions = 100;
    cfg
}

fn rho_shape(
    reg: &FactorGraph,
    irr: &FactorGraph,
    traces: &mut Vec<SubgraphOptimization>,
) -> Outcome {
    let mut summary = Vec::new();
    for g in [reg, irr] {
        let out = run_offline(g, &offline_config(Partition::Whole, 2.0)).unwrap();
        summary.push(RhoSummary::new(&out.artifact.rho).unwrap());
        traces.extend(out.optimizations);
    }
    let (r, i) = (&summary[0], &summary[1]);
    outcome(
        r.iqr() < i.iqr() && (0.7..=0.95).contains(&r.median),
        format!(
            "regular median {:.3} IQR {:.3}; irregular median {:.3} IQR {:.3}",
            r.median,
            r.iqr(),
            i.median,
            i.iqr()
        ),
    )
}

fn ber_improvement(g: &FactorGraph, traces: &mut Vec<SubgraphOptimization>) -> Outcome {
    let snrs = [2.0, 2.5];
    let frames = 400;
    let mut any_strict = false;
    let mut never_worse = true;
    let mut parts = Vec::new();
    for (si, &snr) in snrs.iter().enumerate() {
        let partition = Partition::Expand(ExpansionConfig::new(Strategy::Disjoint, 4, 1));
        let out = run_offline(g, &offline_config(partition, snr)).unwrap();
        let rho = out.artifact.fap_vector().unwrap();
        traces.extend(out.optimizations);
        let base = SimConfig {
            snr_points_db: snrs.to_vec(),
            max_frames: frames,
            min_bit_errors: None,
            ..SimConfig::default()
        };
        let bp = simulate_frames(g, &base, si, 0..frames).unwrap();
        let low_cfg = SimConfig {
            variant: Variant::Low(rho),
            ..base
        };
        let low = simulate_frames(g, &low_cfg, si, 0..frames).unwrap();
        let (eb, el): (u64, u64) = (
            bp.iter().map(|o| o.bit_errors).sum(),
            low.iter().map(|o| o.bit_errors).sum(),
        );
        let wins = bp
            .iter()
            .zip(&low)
            .filter(|(b, l)| l.bit_errors < b.bit_errors)
            .count() as u64;
        let losses = bp
            .iter()
            .zip(&low)
            .filter(|(b, l)| l.bit_errors > b.bit_errors)
            .count() as u64;
        let p = common::binomial_upper_tail(wins + losses, wins);
        never_worse &= el <= eb;
        any_strict |= el < eb && p < 0.05;
        parts.push(format!(
            "{snr} dB: BP {eb} LOW {el} (wins {wins}, losses {losses}, p {p:.3})"
        ));
    }
    outcome(never_worse && any_strict, parts.join("; "))
}

fn frank_wolfe_bounds(traces: &[SubgraphOptimization]) -> Outcome {
    let recorded: Vec<&SubgraphOptimization> = traces
        .iter()
        .filter(|t| !t.lower_trace.is_empty())
        .collect();
    let not_monotone = recorded
        .iter()
        .filter(|t| t.lower_trace.windows(2).any(|w| w[1] < w[0]))
        .count();
    let crossed = recorded
        .iter()
        .filter(|t| {
            t.objective_trace
                .iter()
                .zip(&t.lower_trace)
                .any(|(f, z)| f < z)
        })
        .count();
    outcome(
        !recorded.is_empty() && not_monotone == 0 && crossed == 0,
        format!(
            "{} traces: {not_monotone} with decreasing z, {crossed} with f < z",
            recorded.len()
        ),
    )
}

fn urw_reduction(g: &FactorGraph) -> Outcome {
    let grid: Vec<f64> = (0..=6).map(|k| (70 + 5 * k) as f64 / 100.0).collect();
    let res = grid_search_urw(g, 2.0, &grid, 400, &SimConfig::default()).unwrap();
    let errors: Vec<String> = res
        .errors
        .iter()
        .map(|(r, e)| format!("{r:.2}:{e}"))
        .collect();
    outcome(
        res.best == 1.0,
        format!("best {} [{}]", res.best, errors.join(" ")),
    )
}

fn run_cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_lowbp"))
        .args(args)
        .output()
        .unwrap()
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_owned();
    let code = p("code.alist");
    run_cli(&[
        "construct",
        "--n",
        "96",
        "--m",
        "48",
        "--profile",
        "col:3",
        "--out",
        &code,
    ]);
    let mut same = true;
    let mut bytes = Vec::new();
    for k in 0..2 {
        let art = p(&format!("rho{k}.json"));
        let csv = p(&format!("ber{k}.csv"));
        let o = run_cli(&[
            "optimize",
            &code,
            "--d-max",
            "3",
            "--training-frames",
            "50",
            "--pilot-frames",
            "20",
            "--max-recursions",
            "8",
            "--seed",
            "5",
            "--out",
            &art,
        ]);
        same &= matches!(o.status.code(), Some(0 | 3));
        let low = format!("low:{art}");
        let o = run_cli(&[
            "ber",
            &code,
            "--variant",
            &low,
            "--snr",
            "2,3",
            "--max-frames",
            "200",
            "--seed",
            "5",
            "--out",
            &csv,
        ]);
        same &= o.status.success();
        bytes.push((
            std::fs::read(&art).unwrap_or_default(),
            std::fs::read(&csv).unwrap_or_default(),
        ));
    }
    same &= !bytes[0].0.is_empty() && !bytes[0].1.is_empty() && bytes[0] == bytes[1];
    outcome(
        same,
        format!(
            "artifact {} bytes, csv {} bytes, reruns identical: {same}",
            bytes[0].0.len(),
            bytes[0].1.len()
        ),
    )
}

fn main() {
    let selected: Option<Vec<usize>> = std::env::var("LOWBP_ACCEPTANCE")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let wanted = |k: usize| selected.as_ref().is_none_or(|s| s.contains(&k));

    let reg = regular();
    let irr = irregular();
    let codes = [("regular", &reg), ("irregular", &irr)];
    let mut traces = Vec::new();
    let mut results: Vec<(usize, Outcome, f64)> = Vec::new();

    let mut run = |k: usize, f: &mut dyn FnMut() -> Outcome| {
        if !wanted(k) {
            return;
        }
        let t0 = Instant::now();
        let o = f();
        let secs = t0.elapsed().as_secs_f64();
        println!(
            "criterion {k}: {} {} [{secs:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push((k, o, secs));
    };
    run(1, &mut || ones_equivalence(&reg));
    run(2, &mut tree_exactness);
    run(3, &mut kernel_agreement);
    run(4, &mut || subgraph_structure(&codes));
    run(5, &mut || lmo_correctness(&codes));
    run(7, &mut || rho_shape(&reg, &irr, &mut traces));
    run(8, &mut || ber_improvement(&reg, &mut traces));
    run(6, &mut || frank_wolfe_bounds(&traces));
    run(9, &mut || urw_reduction(&irr));
    run(10, &mut determinism);

    results.sort_by_key(|r| r.0);
    println!("\nsummary");
    for (k, o, secs) in &results {
        println!(
            "criterion {k}: {} [{secs:.1}s]",
            if o.pass { "PASS" } else { "FAIL" }
        );
    }
    let failed: Vec<usize> = results.iter().filter(|r| !r.1.pass).map(|r| r.0).collect();
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
