//! Weighted runs of sorted samples.
//!
//! Both adaptive binning strategies work on contiguous groups of sorted
//! values: exactly one group per distinct value in exact mode, or quantile
//! chunks of distinct values once the distinct count exceeds a cap.

/// A run of consecutive sorted samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Group {
    pub lo: f64,
    pub hi: f64,
    pub weight: u64,
    /// Sum and sum of squares of `x - shift`.
    pub sum: f64,
    pub sumsq: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Groups {
    pub groups: Vec<Group>,
}

impl Groups {
    /// Groups `sorted` by distinct value, then merges consecutive groups into
    /// at most `cap` chunks when the distinct count exceeds `cap`.
    pub fn from_sorted(sorted: &[f64], cap: Option<usize>) -> Self {
        debug_assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
        let shift = if sorted.is_empty() { 0.0 } else { sorted[sorted.len() / 2] };
        let mut distinct: Vec<Group> = Vec::new();
        for &x in sorted {
            let d = x - shift;
            match distinct.last_mut() {
                Some(g) if g.hi == x => {
                    g.weight += 1;
                    g.sum += d;
                    g.sumsq += d * d;
                }
                _ => distinct.push(Group { lo: x, hi: x, weight: 1, sum: d, sumsq: d * d }),
            }
        }
        let total = sorted.len() as u64;
        let groups = match cap {
            Some(cap) if distinct.len() > cap && cap >= 1 => merge_chunks(&distinct, total, cap),
            _ => distinct,
        };
        Self { groups }
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn lo(&self) -> f64 {
        self.groups[0].lo
    }

    pub fn hi(&self) -> f64 {
        self.groups[self.groups.len() - 1].hi
    }

    /// Candidate boundary between group `i - 1` and group `i`.
    pub fn boundary(&self, i: usize) -> f64 {
        0.5 * (self.groups[i - 1].hi + self.groups[i].lo)
    }

    /// Cell edges: row min, midpoints between consecutive groups, row max.
    pub fn cell_edges(&self) -> Vec<f64> {
        let m = self.groups.len();
        let mut edges = Vec::with_capacity(m + 1);
        edges.push(self.lo());
        edges.extend((1..m).map(|i| self.boundary(i)));
        edges.push(self.hi());
        edges
    }
}

/// Merges consecutive groups into at most `cap` chunks. Half of the budget
/// goes to equal-count cuts and half to equal-width cuts, so dense regions
/// stay finely resolved without long tails collapsing into a few wide chunks.
fn merge_chunks(distinct: &[Group], total: u64, cap: usize) -> Vec<Group> {
    let count_chunks = (cap / 2).max(1) as u128;
    let width_chunks = cap.saturating_sub(cap / 2).max(1);
    let lo = distinct[0].lo;
    let width = (distinct[distinct.len() - 1].hi - lo) / width_chunks as f64;
    let cell = |x: f64| (((x - lo) / width) as usize).min(width_chunks - 1);

    let mut out: Vec<Group> = Vec::with_capacity(cap);
    let mut current: Option<Group> = None;
    let mut cumulative: u64 = 0;
    let mut count_cuts: u128 = 0;
    for (i, g) in distinct.iter().enumerate() {
        cumulative += g.weight;
        let merged = match current.take() {
            None => *g,
            Some(mut c) => {
                c.hi = g.hi;
                c.weight += g.weight;
                c.sum += g.sum;
                c.sumsq += g.sumsq;
                c
            }
        };
        let reached = cumulative as u128 * count_chunks / total as u128;
        let by_count = reached > count_cuts;
        let by_width = distinct.get(i + 1).is_some_and(|next| cell(next.lo) != cell(g.hi));
        if by_count || by_width {
            count_cuts = reached;
            out.push(merged);
        } else {
            current = Some(merged);
        }
    }
    if let Some(c) = current {
        out.push(c);
    }
    out
}
