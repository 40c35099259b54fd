//! Bayesian Blocks for event data.
//!
//! Optimal partition of the cell sequence by dynamic programming over the
//! last change point. Block fitness is `N (ln N - ln T)` for `N` events in a
//! block of width `T`; every block beyond the first costs the prior
//! `ncp_prior = 4 - ln(73.53 * p0 * n^-0.478)`.

use super::groups::Groups;
use super::{degenerate_edges, ensure_sorted, BinningError, Result};

/// Outcome of a Bayesian Blocks run.
#[derive(Debug, Clone, PartialEq)]
pub struct BlocksFit {
    pub edges: Vec<f64>,
    /// Group indices at which a new block starts (excluding 0).
    pub change_points: Vec<usize>,
    /// Sum of block fitness minus `(blocks - 1) * ncp_prior`.
    pub objective: f64,
}

pub fn ncp_prior(n: usize, p0: f64) -> f64 {
    4.0 - (73.53 * p0 * (n as f64).powf(-0.478)).ln()
}

#[inline]
pub(crate) fn block_fitness(count: f64, width: f64) -> f64 {
    count * (count.ln() - width.ln())
}

#[inline]
fn nearly_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1.0)
}

/// Bayesian Blocks edges over sorted samples with the default group cap.
pub fn bayesian_blocks_edges(sorted: &[f64], p0: f64) -> Result<Vec<f64>> {
    Ok(bayesian_blocks(sorted, p0, Some(super::DEFAULT_MAX_GROUPS))?.edges)
}

/// Full fit. `max_groups = None` runs on every distinct value.
pub fn bayesian_blocks(sorted: &[f64], p0: f64, max_groups: Option<usize>) -> Result<BlocksFit> {
    if sorted.is_empty() {
        return Err(BinningError::EmptyInput);
    }
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(BinningError::InvalidParameter(format!("p0 must lie in (0, 1), got {p0}")));
    }
    ensure_sorted(sorted)?;
    let groups = Groups::from_sorted(sorted, max_groups);
    if groups.lo() == groups.hi() {
        return Ok(BlocksFit {
            edges: degenerate_edges(groups.lo()).to_vec(),
            change_points: Vec::new(),
            objective: 0.0,
        });
    }

    let m = groups.len();
    let edges = groups.cell_edges();
    let prior = ncp_prior(sorted.len(), p0);
    let mut cum = Vec::with_capacity(m + 1);
    cum.push(0u64);
    for g in &groups.groups {
        cum.push(cum.last().unwrap() + g.weight);
    }

    // best[r]: optimum over the first r cells; last[r]: start of its final block
    let mut best = vec![0.0f64; m + 1];
    let mut blocks = vec![0usize; m + 1];
    let mut last = vec![0usize; m + 1];
    for r in 1..=m {
        let mut arg = 0;
        let mut val = f64::NEG_INFINITY;
        let mut nblocks = usize::MAX;
        for l in 0..r {
            let count = (cum[r] - cum[l]) as f64;
            let width = edges[r] - edges[l];
            let v = best[l] + block_fitness(count, width) - prior;
            let b = blocks[l] + 1;
            let take = if nearly_equal(v, val) { b < nblocks } else { v > val };
            if take {
                val = v;
                arg = l;
                nblocks = b;
            }
        }
        best[r] = val;
        blocks[r] = nblocks;
        last[r] = arg;
    }

    let mut change_points = Vec::new();
    let mut r = m;
    while r > 0 {
        let l = last[r];
        if l > 0 {
            change_points.push(l);
        }
        r = l;
    }
    change_points.reverse();

    let mut out = Vec::with_capacity(change_points.len() + 2);
    out.push(edges[0]);
    out.extend(change_points.iter().map(|&i| edges[i]));
    out.push(edges[m]);
    Ok(BlocksFit {
        edges: out,
        change_points,
        objective: best[m] + prior,
    })
}
