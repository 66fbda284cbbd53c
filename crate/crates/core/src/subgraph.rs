//! PEG-style expansion of a factor graph into subgraphs.
//!
//! A subgraph is a set of checks together with all of their edges. Subgraph
//! `t` is grown by visiting variable roots in ascending order; each root
//! first claims its candidate check of lowest degree under the current
//! subgraph (the number of the check's variables already present), then
//! expands breadth-first through the parent graph for at most `d_max` check
//! levels, stopping early when the neighborhood saturates. Every candidate
//! check reached is visited once per subgraph and admitted only if it closes
//! no cycle of length at most the parent girth, so each subgraph's girth is
//! strictly larger than the parent's (or it is a tree).
//!
//! With [`Strategy::Disjoint`] the checks rejected from subgraph `t` are the
//! candidates of subgraph `t + 1`. With [`Strategy::Ra`] every check is a
//! candidate in every round; uncovered checks are visited first and the root
//! order is rotated to start at the first variable touching an uncovered
//! check, so each round covers at least one new check.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::code::{bipartite_girth, Edge, FactorGraph, Girth, ParityCheckMatrix};
use crate::rng::{domain, substream};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Disjoint,
    /// Re-appearance: checks may belong to several subgraphs.
    Ra,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Disjoint => "disjoint",
            Strategy::Ra => "ra",
        })
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "disjoint" => Ok(Strategy::Disjoint),
            "ra" | "RA" => Ok(Strategy::Ra),
            other => Err(Error::Config(format!("unknown strategy {other:?}"))),
        }
    }
}

/// Default expansion depth.
pub const DEFAULT_D_MAX: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionConfig {
    pub strategy: Strategy,
    pub d_max: usize,
    pub seed: u64,
    pub max_subgraphs: usize,
}

impl ExpansionConfig {
    pub fn new(strategy: Strategy, d_max: usize, seed: u64) -> Self {
        Self {
            strategy,
            d_max,
            seed,
            max_subgraphs: 1000,
        }
    }
}

/// A set of checks of the parent graph with all their edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subgraph {
    /// Parent check ids, ascending; the position is the local index.
    pub check_ids: Vec<usize>,
    /// Parent edges incident to `check_ids`, as (check, variable) pairs.
    pub edges: Vec<(usize, usize)>,
}

impl Subgraph {
    /// Builds the subgraph induced by `check_ids` (all edges of those checks).
    pub fn induced(graph: &FactorGraph, mut check_ids: Vec<usize>) -> Self {
        check_ids.sort_unstable();
        check_ids.dedup();
        let edges = check_ids
            .iter()
            .flat_map(|&c| graph.matrix().row(c).iter().map(move |&v| (c, v)))
            .collect();
        Self { check_ids, edges }
    }

    pub fn len(&self) -> usize {
        self.check_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.check_ids.is_empty()
    }

    /// Local position of a parent check.
    pub fn local_index(&self, check: usize) -> Option<usize> {
        self.check_ids.binary_search(&check).ok()
    }

    /// Parent variable ids touched by the subgraph, ascending.
    pub fn var_ids(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.edges.iter().map(|&(_, v)| v).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Rows of the subgraph in local variable numbering, with the variable map.
    pub fn local_rows(&self) -> (Vec<Vec<usize>>, Vec<usize>) {
        let vars = self.var_ids();
        let mut rows = vec![Vec::new(); self.check_ids.len()];
        for &(c, v) in &self.edges {
            let lc = self
                .local_index(c)
                .expect("edge check belongs to the subgraph");
            let lv = vars.binary_search(&v).expect("edge variable is listed");
            rows[lc].push(lv);
        }
        (rows, vars)
    }

    /// Stand-alone factor graph of the subgraph (local numbering) and the
    /// parent id of each local variable.
    pub fn factor_graph(&self) -> Result<(FactorGraph, Vec<usize>)> {
        let (rows, vars) = self.local_rows();
        let h = ParityCheckMatrix::from_rows(vars.len(), rows)?;
        Ok((FactorGraph::new(h), vars))
    }

    pub fn girth(&self) -> Girth {
        let (rows, vars) = self.local_rows();
        bipartite_girth(vars.len(), &rows)
    }

    pub fn is_tree(&self) -> bool {
        self.girth() == Girth::Infinite
    }
}

/// Output of [`peg_expand`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgraphSet {
    pub strategy: Strategy,
    pub d_max: usize,
    pub seed: u64,
    pub parent_girth: Girth,
    pub subgraphs: Vec<Subgraph>,
    /// Number of subgraphs containing each check.
    pub coverage: Vec<usize>,
}

impl SubgraphSet {
    /// The whole graph as a single subgraph.
    pub fn whole(graph: &FactorGraph) -> Self {
        Self {
            strategy: Strategy::Disjoint,
            d_max: 0,
            seed: 0,
            parent_girth: graph.girth(),
            subgraphs: vec![Subgraph::induced(graph, (0..graph.n_checks()).collect())],
            coverage: vec![1; graph.n_checks()],
        }
    }

    /// Number of subgraphs T.
    pub fn len(&self) -> usize {
        self.subgraphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subgraphs.is_empty()
    }

    /// Subgraph sizes L_t.
    pub fn sizes(&self) -> Vec<usize> {
        self.subgraphs.iter().map(Subgraph::len).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Growing subgraph with incremental cycle-length admission.
struct Builder<'a> {
    graph: &'a FactorGraph,
    /// Admission bound: reject checks that would close a cycle of length <= this.
    max_forbidden: Option<usize>,
    checks: Vec<usize>,
    in_sub: Vec<bool>,
    var_checks: Vec<Vec<usize>>,
    var_present: Vec<bool>,
    dist: Vec<usize>,
    touched: Vec<usize>,
    queue: VecDeque<(usize, usize)>,
}

impl<'a> Builder<'a> {
    fn new(graph: &'a FactorGraph, parent_girth: Girth) -> Self {
        Self {
            graph,
            max_forbidden: match parent_girth {
                Girth::Finite(g) => Some(g),
                Girth::Infinite => None,
            },
            checks: Vec::new(),
            in_sub: vec![false; graph.n_checks()],
            var_checks: vec![Vec::new(); graph.n_vars()],
            var_present: vec![false; graph.n_vars()],
            dist: vec![usize::MAX; graph.n_vars()],
            touched: Vec::new(),
            queue: VecDeque::new(),
        }
    }

    /// Variables of `c` already in the subgraph.
    fn degree_under(&self, c: usize) -> usize {
        self.graph
            .matrix()
            .row(c)
            .iter()
            .filter(|&&v| self.var_present[v])
            .count()
    }

    /// True if adding `c` keeps every cycle longer than the parent girth.
    fn admissible(&mut self, c: usize) -> bool {
        let Some(g) = self.max_forbidden else {
            return true;
        };
        // A new cycle passes through c once: length = 2 + dist(u, v) for two
        // of its variables u, v. Reject if some dist(u, v) <= g - 2.
        let limit = g.saturating_sub(2);
        let row = self.graph.matrix().row(c);
        for (i, &u) in row.iter().enumerate() {
            if !self.var_present[u] {
                continue;
            }
            for &t in &self.touched {
                self.dist[t] = usize::MAX;
            }
            self.touched.clear();
            self.queue.clear();
            self.dist[u] = 0;
            self.touched.push(u);
            self.queue.push_back((u, 0));
            while let Some((x, d)) = self.queue.pop_front() {
                if d + 2 > limit {
                    continue;
                }
                for &c2 in &self.var_checks[x] {
                    for &y in self.graph.matrix().row(c2) {
                        if self.dist[y] == usize::MAX {
                            self.dist[y] = d + 2;
                            self.touched.push(y);
                            self.queue.push_back((y, d + 2));
                        }
                    }
                }
            }
            if row[i + 1..].iter().any(|&v| self.dist[v] <= limit) {
                return false;
            }
        }
        true
    }

    fn add(&mut self, c: usize) {
        self.in_sub[c] = true;
        self.checks.push(c);
        for &v in self.graph.matrix().row(c) {
            self.var_present[v] = true;
            self.var_checks[v].push(c);
        }
    }
}

/// Expands `graph` into subgraphs; see the module documentation.
pub fn peg_expand(graph: &FactorGraph, cfg: &ExpansionConfig) -> Result<SubgraphSet> {
    if cfg.d_max == 0 {
        return Err(Error::Config("d_max must be at least 1".into()));
    }
    if cfg.max_subgraphs == 0 {
        return Err(Error::Config("max_subgraphs must be at least 1".into()));
    }
    let n_checks = graph.n_checks();
    let n_vars = graph.n_vars();
    let parent_girth = graph.girth();
    let mut rng = substream(cfg.seed, domain::EXPANSION, 0);
    let mut coverage = vec![0usize; n_checks];
    let mut candidate = vec![true; n_checks];
    let mut subgraphs = Vec::new();

    while coverage.contains(&0) {
        if subgraphs.len() == cfg.max_subgraphs {
            return Err(Error::Coverage {
                subgraphs: subgraphs.len(),
                uncovered: (0..n_checks).filter(|&c| coverage[c] == 0).collect(),
            });
        }
        let mut b = Builder::new(graph, parent_girth);
        let mut visited = vec![false; n_checks];
        let ra = cfg.strategy == Strategy::Ra;
        let start = if ra {
            (0..n_vars)
                .find(|&v| graph.matrix().col(v).iter().any(|&c| coverage[c] == 0))
                .unwrap_or(0)
        } else {
            0
        };
        let open = |c: usize, visited: &[bool]| candidate[c] && !visited[c];

        for root in (start..n_vars).chain(0..start) {
            let first: Vec<usize> = graph
                .matrix()
                .col(root)
                .iter()
                .copied()
                .filter(|&c| open(c, &visited))
                .collect();
            if first.is_empty() {
                continue;
            }
            // First edge: lowest degree under the current subgraph.
            let key = |b: &Builder, c: usize| (ra && coverage[c] > 0, b.degree_under(c));
            let best = first.iter().map(|&c| key(&b, c)).min().unwrap();
            let ties: Vec<usize> = first
                .iter()
                .copied()
                .filter(|&c| key(&b, c) == best)
                .collect();
            let c0 = ties[rng.random_range(0..ties.len())];
            visited[c0] = true;
            if b.admissible(c0) {
                b.add(c0);
            }

            // Breadth-first expansion over check levels 1..=d_max.
            let mut reached = vec![false; n_checks];
            let mut seen_var = vec![false; n_vars];
            seen_var[root] = true;
            let mut level: Vec<usize> = graph.matrix().col(root).to_vec();
            for &c in &level {
                reached[c] = true;
            }
            for depth in 1..=cfg.d_max {
                let mut order: Vec<usize> = level
                    .iter()
                    .copied()
                    .filter(|&c| open(c, &visited))
                    .collect();
                order.sort_by_key(|&c| (key(&b, c), c));
                for c in order {
                    visited[c] = true;
                    if b.admissible(c) {
                        b.add(c);
                    }
                }
                if depth == cfg.d_max {
                    break;
                }
                let mut next = Vec::new();
                for &c in &level {
                    for &v in graph.matrix().row(c) {
                        if seen_var[v] {
                            continue;
                        }
                        seen_var[v] = true;
                        for &c2 in graph.matrix().col(v) {
                            if !reached[c2] {
                                reached[c2] = true;
                                next.push(c2);
                            }
                        }
                    }
                }
                if next.is_empty() {
                    break;
                }
                next.sort_unstable();
                level = next;
            }
        }

        debug_assert!(!b.checks.is_empty());
        for &c in &b.checks {
            coverage[c] += 1;
        }
        if !ra {
            for (cand, &taken) in candidate.iter_mut().zip(&b.in_sub) {
                *cand = *cand && !taken;
            }
        }
        subgraphs.push(Subgraph::induced(graph, b.checks));
    }

    Ok(SubgraphSet {
        strategy: cfg.strategy,
        d_max: cfg.d_max,
        seed: cfg.seed,
        parent_girth,
        subgraphs,
        coverage,
    })
}

/// Machine-readable result of [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub n_subgraphs: usize,
    pub sizes: Vec<usize>,
    pub size_sum: usize,
    pub n_checks: usize,
    pub parent_girth: Girth,
    pub local_girths: Vec<Girth>,
    pub coverage_ok: bool,
    pub size_identity_ok: bool,
    pub girth_ok: bool,
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks coverage, the size identity of the strategy and the local girth property.
pub fn validate(set: &SubgraphSet, graph: &FactorGraph) -> ValidationReport {
    let n_checks = graph.n_checks();
    let parent_girth = graph.girth();
    let mut violations = Vec::new();

    let mut coverage = vec![0usize; n_checks];
    for (t, sg) in set.subgraphs.iter().enumerate() {
        for &c in &sg.check_ids {
            if c >= n_checks {
                violations.push(format!("subgraph {t}: check {c} out of range"));
            } else {
                coverage[c] += 1;
            }
        }
        for &(c, v) in &sg.edges {
            if sg.local_index(c).is_none() {
                violations.push(format!("subgraph {t}: edge ({c},{v}) leaves the check set"));
            }
            if c < n_checks && !graph.matrix().row(c).contains(&v) {
                violations.push(format!("subgraph {t}: edge ({c},{v}) not in parent graph"));
            }
        }
    }
    let coverage_ok = match set.strategy {
        Strategy::Disjoint => coverage.iter().all(|&c| c == 1),
        Strategy::Ra => coverage.iter().all(|&c| c >= 1),
    };
    if !coverage_ok {
        let bad: Vec<usize> = (0..n_checks)
            .filter(|&c| match set.strategy {
                Strategy::Disjoint => coverage[c] != 1,
                Strategy::Ra => coverage[c] == 0,
            })
            .collect();
        violations.push(format!("coverage violated at checks {bad:?}"));
    }
    if coverage != set.coverage {
        violations.push("recorded coverage disagrees with subgraph contents".into());
    }

    let sizes = set.sizes();
    let size_sum: usize = sizes.iter().sum();
    let size_identity_ok = match set.strategy {
        Strategy::Disjoint => size_sum == n_checks,
        Strategy::Ra => size_sum >= n_checks,
    };
    if !size_identity_ok {
        violations.push(format!(
            "sum of subgraph sizes {size_sum} vs M = {n_checks}"
        ));
    }

    let local_girths: Vec<Girth> = set.subgraphs.iter().map(Subgraph::girth).collect();
    let mut girth_ok = true;
    for (t, &lg) in local_girths.iter().enumerate() {
        if lg != Girth::Infinite && lg <= parent_girth {
            girth_ok = false;
            violations.push(format!(
                "subgraph {t}: local girth {lg} does not exceed parent girth {parent_girth}"
            ));
        }
    }

    ValidationReport {
        n_subgraphs: set.len(),
        sizes,
        size_sum,
        n_checks,
        parent_girth,
        local_girths,
        coverage_ok,
        size_identity_ok,
        girth_ok,
        violations,
    }
}

/// Parent edges of a subgraph as [`Edge`] values.
pub fn subgraph_edges(sg: &Subgraph) -> Vec<Edge> {
    sg.edges
        .iter()
        .map(|&(check, var)| Edge { check, var })
        .collect()
}
