#![allow(dead_code)]

use lowbp::code::{FactorGraph, ParityCheckMatrix};
use rand::Rng;

/// State of the reference decoder after a run, edges in row-major order.
pub struct OracleRun {
    pub bits: Vec<u8>,
    pub iterations: usize,
    pub var_to_check: Vec<f64>,
    pub check_to_var: Vec<f64>,
    pub beliefs: Vec<f64>,
}

/// `phi(x) = -ln tanh(x/2)`, an involution on `(0, inf]`.
fn phi(x: f64) -> f64 {
    if x == 0.0 {
        f64::INFINITY
    } else {
        (2.0 / x.exp_m1()).ln_1p()
    }
}

/// Flooding sum-product in the textbook sign/magnitude form.
///
/// Works with `L = ln p0/p1` internally and converts at the boundary.
pub fn textbook_sum_product(
    h: &ParityCheckMatrix,
    llr: &[f64],
    max_iters: usize,
    llr_max: f64,
    early_stop: bool,
) -> OracleRun {
    let rows = h.rows();
    let mut edge_of = std::collections::HashMap::new();
    let mut k = 0;
    for (m, row) in rows.iter().enumerate() {
        for &n in row {
            edge_of.insert((m, n), k);
            k += 1;
        }
    }
    let mut cols: Vec<Vec<usize>> = vec![Vec::new(); h.n_vars()];
    for (m, row) in rows.iter().enumerate() {
        for &n in row {
            cols[n].push(m);
        }
    }
    let sat = |x: f64| x.clamp(-llr_max, llr_max);
    let l0: Vec<f64> = llr.iter().map(|x| -x).collect();
    let mut q = vec![0.0; k];
    let mut r = vec![0.0; k];
    let mut post = l0.clone();
    let mut bits = vec![0u8; h.n_vars()];
    let mut iterations = 0;
    for it in 1..=max_iters {
        for (n, checks) in cols.iter().enumerate() {
            let total: f64 = checks.iter().map(|&m| r[edge_of[&(m, n)]]).sum();
            for &m in checks {
                let e = edge_of[&(m, n)];
                q[e] = sat(l0[n] + total - r[e]);
            }
        }
        for (m, row) in rows.iter().enumerate() {
            for &n in row {
                let mut sign = 1.0;
                let mut s = 0.0;
                for &n2 in row {
                    if n2 != n {
                        let x = q[edge_of[&(m, n2)]];
                        if x < 0.0 {
                            sign = -sign;
                        }
                        s += phi(x.abs());
                    }
                }
                let e = edge_of[&(m, n)];
                r[e] = sat(sign * phi(s));
            }
        }
        for (n, checks) in cols.iter().enumerate() {
            post[n] = l0[n] + checks.iter().map(|&m| r[edge_of[&(m, n)]]).sum::<f64>();
            bits[n] = (post[n] < 0.0) as u8;
        }
        iterations = it;
        let ok = rows
            .iter()
            .all(|row| row.iter().map(|&n| bits[n]).fold(0, |a, b| a ^ b) == 0);
        if ok && early_stop {
            break;
        }
    }
    OracleRun {
        bits,
        iterations,
        var_to_check: q.iter().map(|x| -x).collect(),
        check_to_var: r.iter().map(|x| -x).collect(),
        beliefs: post.iter().map(|x| -x).collect(),
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Exact bitwise posterior LLRs `ln P(x_n=1)/P(x_n=0)` by enumerating all
/// binary words and keeping the codewords.
pub fn exact_posteriors(h: &ParityCheckMatrix, llr: &[f64]) -> Vec<f64> {
    let n = h.n_vars();
    assert!(n <= 20);
    let masks: Vec<u32> = h
        .rows()
        .iter()
        .map(|row| row.iter().fold(0u32, |a, &v| a | (1 << v)))
        .collect();
    let mut one = vec![f64::NEG_INFINITY; n];
    let mut zero = vec![f64::NEG_INFINITY; n];
    for x in 0u32..(1 << n) {
        if masks.iter().any(|&m| (x & m).count_ones() % 2 == 1) {
            continue;
        }
        let w: f64 = (0..n).filter(|&i| x >> i & 1 == 1).map(|i| llr[i]).sum();
        for i in 0..n {
            if x >> i & 1 == 1 {
                one[i] = log_add(one[i], w);
            } else {
                zero[i] = log_add(zero[i], w);
            }
        }
    }
    one.iter().zip(&zero).map(|(a, b)| a - b).collect()
}

/// Random cycle-free code: each new check joins one existing variable to
/// at least one new variable, so every check has degree at least two.
pub fn random_tree_code<R: Rng>(rng: &mut R, max_vars: usize) -> ParityCheckMatrix {
    let target = rng.random_range(3..=max_vars);
    let mut n = 1;
    let mut rows = Vec::new();
    while n < target {
        let anchor = rng.random_range(0..n);
        let fresh = rng.random_range(1..=3.min(target - n));
        let mut row = vec![anchor];
        row.extend(n..n + fresh);
        n += fresh;
        rows.push(row);
    }
    ParityCheckMatrix::from_rows(n, rows).unwrap()
}

/// Whether the checks in `subset` span a forest: edges = nodes - components.
pub fn spans_forest(rows: &[Vec<usize>], subset: &[usize]) -> bool {
    let mut parent: std::collections::HashMap<(bool, usize), (bool, usize)> = Default::default();
    fn find(
        p: &mut std::collections::HashMap<(bool, usize), (bool, usize)>,
        x: (bool, usize),
    ) -> (bool, usize) {
        let up = *p.entry(x).or_insert(x);
        if up == x {
            x
        } else {
            let r = find(p, up);
            p.insert(x, r);
            r
        }
    }
    for &m in subset {
        for &v in &rows[m] {
            let a = find(&mut parent, (false, m));
            let b = find(&mut parent, (true, v));
            if a == b {
                return false;
            }
            parent.insert(a, b);
        }
    }
    true
}

/// Best total weight of a check subset that spans a forest, by exhaustion.
pub fn brute_force_forest(rows: &[Vec<usize>], weights: &[f64]) -> f64 {
    let l = rows.len();
    assert!(l <= 16);
    let mut best = 0.0f64;
    for mask in 0u32..(1 << l) {
        let subset: Vec<usize> = (0..l).filter(|&i| mask >> i & 1 == 1).collect();
        if spans_forest(rows, &subset) {
            best = best.max(subset.iter().map(|&i| weights[i]).sum());
        }
    }
    best
}

pub fn graph(h: ParityCheckMatrix) -> FactorGraph {
    FactorGraph::new(h)
}

/// `P(Bin(n, 1/2) >= k)`.
pub fn binomial_upper_tail(n: u64, k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let ln_half_n = -(n as f64) * std::f64::consts::LN_2;
    let mut ln_c = 0.0;
    let mut total = 0.0;
    for i in 0..=n {
        if i > 0 {
            ln_c += ((n - i + 1) as f64).ln() - (i as f64).ln();
        }
        if i >= k {
            total += (ln_c + ln_half_n).exp();
        }
    }
    total
}
