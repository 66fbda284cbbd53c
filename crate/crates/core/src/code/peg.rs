use rand::Rng;

use super::{CodeParams, DegreeProfile, ParityCheckMatrix};
use crate::rng::{domain, substream};
use crate::{Error, Result};

/// Progressive edge-growth construction.
///
/// Variables are processed in ascending degree order. The first edge of each
/// variable goes to a check of lowest current degree; every further edge goes
/// to a lowest-degree check among those farthest from the variable in the
/// graph built so far (unreachable checks if any exist, otherwise the checks
/// first reached at the deepest BFS level). When a check profile is given,
/// only checks below their target degree are eligible, so the farthest
/// eligible level is used. Ties are broken uniformly at random from the
/// seeded stream.
pub fn peg_construct(
    params: CodeParams,
    profile: &DegreeProfile,
    seed: u64,
) -> Result<ParityCheckMatrix> {
    let n_vars = params.n_vars();
    let n_checks = params.n_checks();
    let degrees = profile.variable_degree_sequence(n_vars);
    if let Some(&d) = degrees.iter().max().filter(|&&d| d > n_checks) {
        return Err(Error::Structural(format!(
            "variable degree {d} exceeds the number of checks {n_checks}"
        )));
    }
    profile.edge_count(n_vars, n_checks)?;
    let targets = profile.check_degree_sequence(n_checks);

    let mut rng = substream(seed, domain::PEG, 0);
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n_checks];
    let mut cols: Vec<Vec<usize>> = vec![Vec::new(); n_vars];
    let mut dist = vec![0usize; n_checks];
    let mut seen_var = vec![false; n_vars];
    let mut ties = Vec::new();

    for (v, &degree) in degrees.iter().enumerate() {
        for _ in 0..degree {
            check_distances(v, &rows, &cols, &mut dist, &mut seen_var);
            let has_room = |c: usize| match &targets {
                Some(t) => rows[c].len() < t[c],
                None => true,
            };
            // Adjacent checks have distance 0 and are never eligible.
            let eligible = |c: usize| dist[c] > 0 && has_room(c);
            let far = (0..n_checks)
                .filter(|&c| eligible(c))
                .map(|c| dist[c])
                .max()
                .ok_or_else(|| Error::Profile("no check left with spare degree".into()))?;
            let min_degree = (0..n_checks)
                .filter(|&c| eligible(c) && dist[c] == far)
                .map(|c| rows[c].len())
                .min()
                .expect("at least one farthest check");
            ties.clear();
            ties.extend(
                (0..n_checks)
                    .filter(|&c| eligible(c) && dist[c] == far && rows[c].len() == min_degree),
            );
            let chosen = ties[rng.random_range(0..ties.len())];
            rows[chosen].push(v);
            cols[v].push(chosen);
        }
    }
    ParityCheckMatrix::from_rows(n_vars, rows)
}

/// BFS level of every check as seen from `v` in the current graph: 0 for
/// adjacent checks, `usize::MAX` for unreachable ones.
fn check_distances(
    v: usize,
    rows: &[Vec<usize>],
    cols: &[Vec<usize>],
    dist: &mut [usize],
    seen_var: &mut [bool],
) {
    dist.iter_mut().for_each(|d| *d = usize::MAX);
    seen_var.iter_mut().for_each(|s| *s = false);
    seen_var[v] = true;
    let mut frontier: Vec<usize> = cols[v].clone();
    for &c in &frontier {
        dist[c] = 0;
    }
    let mut level = 0;
    while !frontier.is_empty() {
        level += 1;
        let mut next = Vec::new();
        for &c in &frontier {
            for &u in &rows[c] {
                if seen_var[u] {
                    continue;
                }
                seen_var[u] = true;
                for &c2 in &cols[u] {
                    if dist[c2] == usize::MAX {
                        dist[c2] = level;
                        next.push(c2);
                    }
                }
            }
        }
        frontier = next;
    }
}
