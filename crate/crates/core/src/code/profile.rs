use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const FRACTION_TOL: f64 = 1e-9;

/// Node-perspective degree distributions.
///
/// Each list holds `(degree, fraction of nodes)` pairs. The check side is
/// optional: when absent, construction balances check degrees as evenly as
/// it can and the achieved profile is reported afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeProfile {
    pub variable_degrees: Vec<(usize, f64)>,
    pub check_degrees: Option<Vec<(usize, f64)>>,
}

fn validate(list: &[(usize, f64)], side: &str) -> Result<()> {
    if list.is_empty() {
        return Err(Error::Profile(format!("{side} degree list is empty")));
    }
    for &(d, f) in list {
        if d == 0 {
            return Err(Error::Profile(format!("{side} degree 0 is not allowed")));
        }
        if !(f > 0.0 && f <= 1.0) {
            return Err(Error::Profile(format!(
                "{side} fraction {f} for degree {d} outside (0,1]"
            )));
        }
    }
    let total: f64 = list.iter().map(|&(_, f)| f).sum();
    if (total - 1.0).abs() > FRACTION_TOL {
        return Err(Error::Profile(format!(
            "{side} fractions sum to {total}, expected 1"
        )));
    }
    Ok(())
}

/// Splits `n` nodes according to `list` by the largest-remainder method.
fn node_counts(list: &[(usize, f64)], n: usize) -> Vec<usize> {
    let exact: Vec<f64> = list.iter().map(|&(_, f)| f * n as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..list.len()).collect();
    // Largest fractional part first; ties by list position.
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &i in order.iter().take(n.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

fn degree_sequence(list: &[(usize, f64)], n: usize) -> Vec<usize> {
    let counts = node_counts(list, n);
    let mut seq: Vec<usize> = list
        .iter()
        .zip(counts)
        .flat_map(|(&(d, _), c)| std::iter::repeat_n(d, c))
        .collect();
    seq.sort_unstable();
    seq
}

impl DegreeProfile {
    pub fn new(
        variable_degrees: Vec<(usize, f64)>,
        check_degrees: Option<Vec<(usize, f64)>>,
    ) -> Result<Self> {
        validate(&variable_degrees, "variable")?;
        if let Some(c) = &check_degrees {
            validate(c, "check")?;
        }
        Ok(Self {
            variable_degrees,
            check_degrees,
        })
    }

    /// Every variable has degree `dv`; check side unconstrained.
    pub fn column_regular(dv: usize) -> Result<Self> {
        Self::new(vec![(dv, 1.0)], None)
    }

    /// (dv, dc)-regular profile.
    pub fn regular(dv: usize, dc: usize) -> Result<Self> {
        Self::new(vec![(dv, 1.0)], Some(vec![(dc, 1.0)]))
    }

    /// Variable degrees for `n_vars` nodes, ascending.
    pub fn variable_degree_sequence(&self, n_vars: usize) -> Vec<usize> {
        degree_sequence(&self.variable_degrees, n_vars)
    }

    /// Target check degrees for `n_checks` nodes, ascending, if constrained.
    pub fn check_degree_sequence(&self, n_checks: usize) -> Option<Vec<usize>> {
        self.check_degrees
            .as_ref()
            .map(|c| degree_sequence(c, n_checks))
    }

    /// Checks edge consistency after rounding and returns the edge count.
    pub fn edge_count(&self, n_vars: usize, n_checks: usize) -> Result<usize> {
        let var_edges: usize = self.variable_degree_sequence(n_vars).iter().sum();
        if let Some(seq) = self.check_degree_sequence(n_checks) {
            let check_edges: usize = seq.iter().sum();
            if check_edges != var_edges {
                return Err(Error::Profile(format!(
                    "edge counts differ: variables give {var_edges}, checks give {check_edges}"
                )));
            }
        }
        Ok(var_edges)
    }

    /// Node-perspective profile of an observed degree sequence.
    pub fn observed(degrees: &[usize]) -> Vec<(usize, f64)> {
        let mut hist = std::collections::BTreeMap::new();
        for &d in degrees {
            *hist.entry(d).or_insert(0usize) += 1;
        }
        hist.into_iter()
            .map(|(d, c)| (d, c as f64 / degrees.len() as f64))
            .collect()
    }
}
