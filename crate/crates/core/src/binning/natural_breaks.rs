//! Fisher-Jenks natural breaks: the contiguous partition of sorted values
//! into `k` classes with the least total within-class sum of squared
//! deviations, solved exactly over weighted groups.

use super::groups::Groups;
use super::{degenerate_edges, ensure_sorted, BinningError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct NaturalBreaks {
    pub edges: Vec<f64>,
    /// Group index at which each class after the first begins.
    pub breaks: Vec<usize>,
    /// Total within-class sum of squared deviations.
    pub ssd: f64,
}

struct Prefix {
    w: Vec<f64>,
    s: Vec<f64>,
    q: Vec<f64>,
}

impl Prefix {
    fn new(groups: &Groups) -> Self {
        let m = groups.len();
        let mut p = Prefix {
            w: Vec::with_capacity(m + 1),
            s: Vec::with_capacity(m + 1),
            q: Vec::with_capacity(m + 1),
        };
        let (mut w, mut s, mut q) = (0.0, 0.0, 0.0);
        p.w.push(w);
        p.s.push(s);
        p.q.push(q);
        for g in &groups.groups {
            w += g.weight as f64;
            s += g.sum;
            q += g.sumsq;
            p.w.push(w);
            p.s.push(s);
            p.q.push(q);
        }
        p
    }

    /// SSD of groups `l..r`.
    #[inline]
    fn cost(&self, l: usize, r: usize) -> f64 {
        let w = self.w[r] - self.w[l];
        let s = self.s[r] - self.s[l];
        let q = self.q[r] - self.q[l];
        (q - s * s / w).max(0.0)
    }
}

pub fn natural_breaks_edges(sorted: &[f64], k: usize) -> Result<Vec<f64>> {
    Ok(natural_breaks(sorted, k, Some(super::DEFAULT_MAX_GROUPS))?.edges)
}

/// Optimal `k`-class partition; `k` is clipped to the number of groups.
/// Among equal-cost partitions the lexicographically smallest break vector
/// wins. `max_groups = None` forces the exact distinct-value DP.
pub fn natural_breaks(sorted: &[f64], k: usize, max_groups: Option<usize>) -> Result<NaturalBreaks> {
    if sorted.is_empty() {
        return Err(BinningError::EmptyInput);
    }
    if k == 0 {
        return Err(BinningError::InvalidBinCount);
    }
    ensure_sorted(sorted)?;
    let groups = Groups::from_sorted(sorted, max_groups);
    let prefix = Prefix::new(&groups);
    let m = groups.len();
    if groups.lo() == groups.hi() {
        return Ok(NaturalBreaks {
            edges: degenerate_edges(groups.lo()).to_vec(),
            breaks: Vec::new(),
            ssd: 0.0,
        });
    }
    let k = k.min(m);

    // suffix[c][i]: least cost of splitting groups i..m into c + 1 classes
    let mut suffix: Vec<Vec<f64>> = Vec::with_capacity(k);
    suffix.push((0..=m).map(|i| if i < m { prefix.cost(i, m) } else { f64::INFINITY }).collect());
    for c in 1..k {
        let prev = &suffix[c - 1];
        let mut row = vec![f64::INFINITY; m + 1];
        // need at least c + 1 groups remaining
        for (i, slot) in row.iter_mut().enumerate().take(m - c) {
            let mut best = f64::INFINITY;
            for j in (i + 1)..=(m - c) {
                let v = prefix.cost(i, j) + prev[j];
                if v < best {
                    best = v;
                }
            }
            *slot = best;
        }
        suffix.push(row);
    }

    let tol = 1e-10 * prefix.cost(0, m);
    let mut breaks = Vec::with_capacity(k - 1);
    let mut i = 0;
    for c in (1..k).rev() {
        let target = suffix[c][i] + tol;
        let j = ((i + 1)..=(m - c))
            .find(|&j| prefix.cost(i, j) + suffix[c - 1][j] <= target)
            .expect("optimum is attained");
        breaks.push(j);
        i = j;
    }

    let mut edges = Vec::with_capacity(k + 1);
    edges.push(groups.lo());
    edges.extend(breaks.iter().map(|&b| groups.boundary(b)));
    edges.push(groups.hi());
    Ok(NaturalBreaks {
        edges,
        breaks,
        ssd: suffix[k - 1][0],
    })
}
