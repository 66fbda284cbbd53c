use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Length of the shortest cycle of a bipartite graph.
///
/// Ordered so that every finite girth is smaller than [`Girth::Infinite`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Girth {
    Finite(usize),
    /// The graph is a forest.
    Infinite,
}

impl Girth {
    pub fn is_finite(&self) -> bool {
        matches!(self, Girth::Finite(_))
    }
}

impl fmt::Display for Girth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Girth::Finite(g) => write!(f, "{g}"),
            Girth::Infinite => f.write_str("inf"),
        }
    }
}

/// Girth of the bipartite graph with `n_vars` variables and the given check rows.
///
/// Runs a BFS from every variable node; a non-tree edge met at depths `a` and
/// `b` closes a walk of length `a + b + 1`, and the minimum over all roots is
/// the exact girth. Each BFS stops once its depth cannot improve the best
/// cycle found so far.
pub fn bipartite_girth(n_vars: usize, rows: &[Vec<usize>]) -> Girth {
    let n_checks = rows.len();
    let mut var_adj = vec![Vec::new(); n_vars];
    for (m, row) in rows.iter().enumerate() {
        for &n in row {
            var_adj[n].push(m);
        }
    }
    // Node ids: variables 0..n_vars, checks n_vars..n_vars+n_checks.
    let total = n_vars + n_checks;
    let mut dist = vec![usize::MAX; total];
    let mut parent = vec![usize::MAX; total];
    let mut touched = Vec::new();
    let mut queue = VecDeque::new();
    let mut best = usize::MAX;

    for root in 0..n_vars {
        if var_adj[root].is_empty() {
            continue;
        }
        for &t in &touched {
            dist[t] = usize::MAX;
            parent[t] = usize::MAX;
        }
        touched.clear();
        queue.clear();
        dist[root] = 0;
        touched.push(root);
        queue.push_back(root);
        'bfs: while let Some(u) = queue.pop_front() {
            if best != usize::MAX && 2 * dist[u] + 1 >= best {
                break;
            }
            let neighbors: &[usize] = if u < n_vars {
                &var_adj[u]
            } else {
                &rows[u - n_vars]
            };
            for &raw in neighbors {
                let w = if u < n_vars { raw + n_vars } else { raw };
                if w == parent[u] {
                    continue;
                }
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    parent[w] = u;
                    touched.push(w);
                    queue.push_back(w);
                } else {
                    let len = dist[u] + dist[w] + 1;
                    if len < best {
                        best = len;
                        if best == 4 {
                            break 'bfs;
                        }
                    }
                }
            }
        }
        if best == 4 {
            break;
        }
    }
    if best == usize::MAX {
        Girth::Infinite
    } else {
        Girth::Finite(best)
    }
}
