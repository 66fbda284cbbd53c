use petgraph::unionfind::UnionFind;

use crate::decoder::RHO_MIN;

/// True if the checks selected by `mask` form a hyperforest: every check's
/// variables lie in distinct components of the previously selected ones.
/// Admission order does not matter for this property.
pub fn is_hyperforest(
    rows: &[Vec<usize>],
    n_vars: usize,
    selected: impl IntoIterator<Item = usize>,
) -> bool {
    let mut uf = UnionFind::<usize>::new(n_vars);
    for c in selected {
        if !admit(&mut uf, &rows[c]) {
            return false;
        }
    }
    true
}

/// Merges the variables of `row` if they are pairwise disconnected.
fn admit(uf: &mut UnionFind<usize>, row: &[usize]) -> bool {
    let roots: Vec<usize> = row.iter().map(|&v| uf.find_mut(v)).collect();
    for (i, r) in roots.iter().enumerate() {
        if roots[i + 1..].contains(r) {
            return false;
        }
    }
    for w in row.windows(2) {
        uf.union(w[0], w[1]);
    }
    true
}

/// Linear minimization oracle over the hyperforest surrogate polytope.
///
/// Minimizes `-rho . info` by scanning checks in decreasing information
/// (ties by index) and keeping each check that leaves the selection acyclic.
/// Kept checks get 1, the others `RHO_MIN`.
pub fn lmo_hyperforest(rows: &[Vec<usize>], n_vars: usize, info: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| info[b].total_cmp(&info[a]).then(a.cmp(&b)));
    let mut uf = UnionFind::<usize>::new(n_vars);
    let mut rho = vec![RHO_MIN; rows.len()];
    for c in order {
        if admit(&mut uf, &rows[c]) {
            rho[c] = 1.0;
        }
    }
    rho
}
