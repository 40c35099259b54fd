//! Bin edges and counts for ensemble rows.
//!
//! Three strategies are available: equal-width bins whose count follows
//! Sturges' rule on the largest row, Bayesian Blocks, and Fisher-Jenks
//! natural breaks. All histograms of one ensemble share the same outer
//! limits so stripes line up on a common axis.

mod bayesian_blocks;
mod groups;
mod natural_breaks;

pub use bayesian_blocks::{bayesian_blocks, bayesian_blocks_edges, ncp_prior, BlocksFit};
pub use natural_breaks::{natural_breaks, natural_breaks_edges, NaturalBreaks};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::EnsembleDataset;

/// Distinct-value cap above which adaptive strategies work on quantile chunks.
pub const DEFAULT_MAX_GROUPS: usize = 4096;

pub const DEFAULT_P0: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BinningError {
    #[error("empty input")]
    EmptyInput,
    #[error("bin count must be at least 1")]
    InvalidBinCount,
    #[error("samples must be sorted in ascending order")]
    Unsorted,
    #[error("edges must be strictly increasing with at least two entries")]
    InvalidEdges,
    #[error("sample {0} lies outside the edge range")]
    OutOfRange(f64),
    #[error("invalid range: {0}")]
    InvalidRange(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, BinningError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum BinningKind {
    Uniform,
    BayesianBlocks,
    NaturalBreaks,
}

/// Whether adaptive edges are fitted per row or once on the pooled samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum EdgeScope {
    #[default]
    PerRow,
    Pooled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BinningMethod {
    pub kind: BinningKind,
    /// False-positive rate for Bayesian Blocks.
    pub p0: f64,
    /// Class count override for natural breaks.
    pub class_count: Option<usize>,
    pub scope: EdgeScope,
    /// `None` runs the adaptive DPs on every distinct value.
    pub max_groups: Option<usize>,
}

impl BinningMethod {
    fn of(kind: BinningKind) -> Self {
        Self {
            kind,
            p0: DEFAULT_P0,
            class_count: None,
            scope: EdgeScope::PerRow,
            max_groups: Some(DEFAULT_MAX_GROUPS),
        }
    }

    pub fn uniform() -> Self {
        Self::of(BinningKind::Uniform)
    }

    pub fn bayesian_blocks() -> Self {
        Self::of(BinningKind::BayesianBlocks)
    }

    pub fn natural_breaks() -> Self {
        Self::of(BinningKind::NaturalBreaks)
    }

    pub fn with_p0(mut self, p0: f64) -> Self {
        self.p0 = p0;
        self
    }

    pub fn with_class_count(mut self, k: usize) -> Self {
        self.class_count = Some(k);
        self
    }

    pub fn pooled(mut self) -> Self {
        self.scope = EdgeScope::Pooled;
        self
    }

    pub fn exact(mut self) -> Self {
        self.max_groups = None;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p0 > 0.0 && self.p0 < 1.0) {
            return Err(BinningError::InvalidParameter(format!("p0 must lie in (0, 1), got {}", self.p0)));
        }
        if self.class_count == Some(0) {
            return Err(BinningError::InvalidParameter("classCount must be at least 1".into()));
        }
        if self.max_groups == Some(0) {
            return Err(BinningError::InvalidParameter("maxGroups must be at least 1".into()));
        }
        Ok(())
    }
}

/// Edges and per-bin counts of one row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub n: u64,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn max_count(&self) -> u64 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.edges[0], self.edges[self.edges.len() - 1])
    }
}

/// `ceil(1 + log2 n)`, computed exactly on integers.
pub fn sturges_bin_count(n: usize) -> Result<usize> {
    if n == 0 {
        return Err(BinningError::EmptyInput);
    }
    let ceil_log2 = (usize::BITS - (n - 1).leading_zeros()) as usize;
    Ok(1 + ceil_log2)
}

pub(crate) fn degenerate_edges(v: f64) -> [f64; 2] {
    [v - 0.5, v + 0.5]
}

pub(crate) fn ensure_sorted(xs: &[f64]) -> Result<()> {
    if xs.windows(2).all(|w| w[0] <= w[1]) {
        Ok(())
    } else {
        Err(BinningError::Unsorted)
    }
}

/// `k + 1` equally spaced edges; a zero-width range collapses to `[v-0.5, v+0.5]`.
pub fn uniform_edges(range: (f64, f64), k: usize) -> Result<Vec<f64>> {
    let (lo, hi) = range;
    if k == 0 {
        return Err(BinningError::InvalidBinCount);
    }
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(BinningError::InvalidRange(format!("[{lo}, {hi}]")));
    }
    if lo == hi {
        return Ok(degenerate_edges(lo).to_vec());
    }
    let width = hi - lo;
    let mut edges: Vec<f64> = (0..=k).map(|i| lo + width * (i as f64 / k as f64)).collect();
    edges[k] = hi;
    Ok(edges)
}

/// Counts samples per bin; bins are half-open except the last, which is closed.
pub fn histogram(samples: &[f64], edges: &[f64]) -> Result<Histogram> {
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(BinningError::InvalidEdges);
    }
    let k = edges.len() - 1;
    let (lo, hi) = (edges[0], edges[k]);
    let mut counts = vec![0u64; k];
    for &x in samples {
        if !(x >= lo && x <= hi) {
            return Err(BinningError::OutOfRange(x));
        }
        let i = edges.partition_point(|&e| e <= x).saturating_sub(1).min(k - 1);
        counts[i] += 1;
    }
    Ok(Histogram {
        edges: edges.to_vec(),
        counts,
        n: samples.len() as u64,
    })
}

/// Shared limits and bin budget for one binning pass over an ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinningFrame {
    pub lo: f64,
    pub hi: f64,
    /// Sturges count from the largest (filtered) row.
    pub k: usize,
}

/// Row samples restricted to `[lo, hi]` and sorted.
pub fn filtered_sorted(samples: &[f64], range: Option<(f64, f64)>) -> Vec<f64> {
    let mut xs: Vec<f64> = match range {
        Some((lo, hi)) => samples.iter().copied().filter(|&x| x >= lo && x <= hi).collect(),
        None => samples.to_vec(),
    };
    xs.sort_unstable_by(f64::total_cmp);
    xs
}

fn check_range(range: Option<(f64, f64)>) -> Result<()> {
    if let Some((lo, hi)) = range {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(BinningError::InvalidRange(format!("need lo < hi, got [{lo}, {hi}]")));
        }
    }
    Ok(())
}

/// Extends row-fitted edges so the outermost ones sit on the shared limits.
fn widen(edges: Vec<f64>, lo: f64, hi: f64) -> Vec<f64> {
    if lo == hi {
        return degenerate_edges(lo).to_vec();
    }
    let interior = &edges[1..edges.len() - 1];
    let mut out = Vec::with_capacity(edges.len());
    out.push(lo);
    out.extend(interior.iter().copied().filter(|&e| e > lo && e < hi));
    out.push(hi);
    out
}

fn adaptive_edges(sorted: &[f64], method: &BinningMethod, k: usize) -> Result<Vec<f64>> {
    match method.kind {
        BinningKind::BayesianBlocks => Ok(bayesian_blocks(sorted, method.p0, method.max_groups)?.edges),
        BinningKind::NaturalBreaks => {
            let classes = method.class_count.unwrap_or(k);
            Ok(natural_breaks(sorted, classes, method.max_groups)?.edges)
        }
        BinningKind::Uniform => unreachable!("uniform edges are shared"),
    }
}

/// Histograms for every row, in row order.
///
/// With `range`, samples outside `[lo, hi]` are dropped first and the range
/// becomes the shared limits. A row emptied by the filter gets one empty bin
/// spanning the limits.
pub fn bin_ensemble(
    ensemble: &EnsembleDataset,
    method: &BinningMethod,
    range: Option<(f64, f64)>,
) -> Result<Vec<Histogram>> {
    Ok(bin_ensemble_with_frame(ensemble, method, range)?.1)
}

pub fn bin_ensemble_with_frame(
    ensemble: &EnsembleDataset,
    method: &BinningMethod,
    range: Option<(f64, f64)>,
) -> Result<(BinningFrame, Vec<Histogram>)> {
    method.validate()?;
    check_range(range)?;
    if ensemble.is_empty() {
        return Err(BinningError::EmptyInput);
    }
    let (lo, hi) = range.unwrap_or((ensemble.global_min(), ensemble.global_max()));

    let rows: Vec<Vec<f64>> = ensemble
        .rows()
        .par_iter()
        .map(|r| match (method.kind, range) {
            // uniform counting needs no ordering
            (BinningKind::Uniform, None) => r.samples.clone(),
            (BinningKind::Uniform, Some((a, b))) => {
                r.samples.iter().copied().filter(|&x| x >= a && x <= b).collect()
            }
            _ => filtered_sorted(&r.samples, range),
        })
        .collect();
    let max_n = rows.iter().map(Vec::len).max().unwrap_or(0);
    let k = sturges_bin_count(max_n.max(1))?;
    let frame = BinningFrame { lo, hi, k };
    let full = if lo == hi { degenerate_edges(lo).to_vec() } else { vec![lo, hi] };

    let shared: Option<Vec<f64>> = match (method.kind, method.scope) {
        (BinningKind::Uniform, _) => Some(uniform_edges((lo, hi), k)?),
        (_, EdgeScope::Pooled) => {
            let mut pooled: Vec<f64> = rows.iter().flatten().copied().collect();
            if pooled.is_empty() {
                Some(full.clone())
            } else {
                pooled.sort_unstable_by(f64::total_cmp);
                Some(widen(adaptive_edges(&pooled, method, k)?, lo, hi))
            }
        }
        (_, EdgeScope::PerRow) => None,
    };

    let hists = rows
        .par_iter()
        .map(|row| {
            let edges = match &shared {
                Some(e) => e.clone(),
                None if row.is_empty() => full.clone(),
                None => widen(adaptive_edges(row, method, k)?, lo, hi),
            };
            histogram(row, &edges)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((frame, hists))
}
