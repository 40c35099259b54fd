//! Brute-force oracles and seeded data shared by the integration tests and
//! the acceptance gate.
#![allow(dead_code)]

pub mod suites;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` draws from a pool of `m` distinct continuous values, sorted.
pub fn pooled_sample(rng: &mut ChaCha8Rng, m: usize, n: usize, span: f64) -> Vec<f64> {
    let pool: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..span)).collect();
    let mut xs: Vec<f64> = (0..m).map(|i| pool[i]).collect();
    xs.extend((m..n).map(|_| pool[rng.random_range(0..m)]));
    xs.sort_by(f64::total_cmp);
    xs
}

pub fn lognormal_row(rng: &mut ChaCha8Rng, n: usize, mu: f64, sigma: f64) -> Vec<f64> {
    let d = LogNormal::new(mu, sigma).unwrap();
    (0..n).map(|_| d.sample(rng)).collect()
}

pub fn normal_row(rng: &mut ChaCha8Rng, n: usize, mean: f64, sd: f64) -> Vec<f64> {
    let d = Normal::new(mean, sd).unwrap();
    (0..n).map(|_| d.sample(rng)).collect()
}

pub fn sorted(mut xs: Vec<f64>) -> Vec<f64> {
    xs.sort_by(f64::total_cmp);
    xs
}

/// Distinct values with multiplicities.
pub fn distinct(sorted: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut v: Vec<f64> = Vec::new();
    let mut w: Vec<usize> = Vec::new();
    for &x in sorted {
        if v.last() == Some(&x) {
            *w.last_mut().unwrap() += 1;
        } else {
            v.push(x);
            w.push(1);
        }
    }
    (v, w)
}

fn nearly_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1.0)
}

/// Bayesian Blocks by scoring every subset of candidate edges.
/// Returns the edges and the objective.
pub fn bb_exhaustive(sorted: &[f64], p0: f64) -> (Vec<f64>, f64) {
    let (v, w) = distinct(sorted);
    let m = v.len();
    if m == 1 {
        return (vec![v[0] - 0.5, v[0] + 0.5], 0.0);
    }
    let mut cells = vec![v[0]];
    cells.extend(v.windows(2).map(|p| 0.5 * (p[0] + p[1])));
    cells.push(v[m - 1]);
    let n = sorted.len() as f64;
    let prior = 4.0 - (73.53 * p0 * n.powf(-0.478)).ln();

    let mut best = (f64::NEG_INFINITY, usize::MAX, Vec::new());
    for mask in 0u64..(1u64 << (m - 1)) {
        // bit i set: a block starts at cell i + 1
        let mut starts = vec![0usize];
        starts.extend((0..m - 1).filter(|i| mask >> i & 1 == 1).map(|i| i + 1));
        starts.push(m);
        let mut total = 0.0;
        for b in starts.windows(2) {
            let count: usize = w[b[0]..b[1]].iter().sum();
            let width = cells[b[1]] - cells[b[0]];
            let c = count as f64;
            total += c * (c.ln() - width.ln());
        }
        let blocks = starts.len() - 1;
        total -= (blocks - 1) as f64 * prior;
        let take = if nearly_equal(total, best.0) { blocks < best.1 } else { total > best.0 };
        if take {
            best = (total, blocks, starts.iter().map(|&i| cells[i]).collect());
        }
    }
    (best.2, best.0)
}

fn ssd(xs: &[f64]) -> f64 {
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| (x - mean).powi(2)).sum()
}

fn combinations(lo: usize, hi: usize, r: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if r == 0 {
        out.push(prefix.clone());
        return;
    }
    for i in lo..=hi.saturating_sub(r - 1) {
        if i > hi {
            break;
        }
        prefix.push(i);
        combinations(i + 1, hi, r - 1, prefix, out);
        prefix.pop();
    }
}

pub struct NbOracle {
    pub breaks: Vec<usize>,
    pub ssd: f64,
    pub edges: Vec<f64>,
}

/// Natural breaks by scoring every contiguous partition of the distinct
/// values; the lexicographically first break vector within 1e-10 of the
/// total SSD of the minimum wins.
pub fn nb_exhaustive(sorted: &[f64], k: usize) -> NbOracle {
    let (v, w) = distinct(sorted);
    let m = v.len();
    if m == 1 {
        return NbOracle { breaks: vec![], ssd: 0.0, edges: vec![v[0] - 0.5, v[0] + 0.5] };
    }
    let k = k.min(m);
    // first sample index of each distinct value
    let mut offset = vec![0usize];
    for &c in &w {
        offset.push(offset.last().unwrap() + c);
    }
    let mut all = Vec::new();
    combinations(1, m - 1, k - 1, &mut Vec::new(), &mut all);
    let costs: Vec<f64> = all
        .iter()
        .map(|br| {
            let mut b = vec![0];
            b.extend(br);
            b.push(m);
            b.windows(2).map(|p| ssd(&sorted[offset[p[0]]..offset[p[1]]])).sum()
        })
        .collect();
    let min = costs.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = 1e-10 * ssd(sorted);
    let pick = costs.iter().position(|&c| c <= min + tol).unwrap();
    let breaks = all[pick].clone();
    let mut edges = vec![v[0]];
    edges.extend(breaks.iter().map(|&b| 0.5 * (v[b - 1] + v[b])));
    edges.push(v[m - 1]);
    NbOracle { breaks, ssd: costs[pick], edges }
}

/// Counts per bin by scanning every bin for every sample.
pub fn naive_counts(samples: &[f64], edges: &[f64]) -> Vec<u64> {
    let k = edges.len() - 1;
    let mut counts = vec![0u64; k];
    for &x in samples {
        for i in 0..k {
            let last = i == k - 1;
            if x >= edges[i] && (x < edges[i + 1] || (last && x <= edges[i + 1])) {
                counts[i] += 1;
                break;
            }
        }
    }
    counts
}

/// Voxel centers `(i + 0.5)` strictly within distance `r` of `c`.
pub fn lattice_ball(c: [f64; 3], r: f64, dims: [usize; 3]) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for z in 0..dims[2] {
        let dz = z as f64 + 0.5 - c[2];
        if dz.abs() >= r {
            continue;
        }
        for y in 0..dims[1] {
            let dy = y as f64 + 0.5 - c[1];
            if dy.abs() >= r {
                continue;
            }
            for x in 0..dims[0] {
                let dx = x as f64 + 0.5 - c[0];
                if dx * dx + dy * dy + dz * dz < r * r {
                    out.push([x, y, z]);
                }
            }
        }
    }
    out
}

/// Crofton surface estimate by walking every lattice line in each of the
/// 13 directions and counting outside-to-inside transitions.
pub fn crofton_by_lines(inside: &dyn Fn(isize, isize, isize) -> bool, dims: [usize; 3]) -> f64 {
    const DIRS: [([isize; 3], f64); 13] = [
        ([1, 0, 0], 0.09155578240952),
        ([0, 1, 0], 0.09155578240952),
        ([0, 0, 1], 0.09155578240952),
        ([1, 1, 0], 0.07396125575216),
        ([1, -1, 0], 0.07396125575216),
        ([1, 0, 1], 0.07396125575216),
        ([1, 0, -1], 0.07396125575216),
        ([0, 1, 1], 0.07396125575216),
        ([0, 1, -1], 0.07396125575216),
        ([1, 1, 1], 0.07039127956464),
        ([1, 1, -1], 0.07039127956464),
        ([1, -1, 1], 0.07039127956464),
        ([1, -1, -1], 0.07039127956464),
    ];
    let (nx, ny, nz) = (dims[0] as isize, dims[1] as isize, dims[2] as isize);
    let within = |x: isize, y: isize, z: isize| x >= 0 && y >= 0 && z >= 0 && x < nx && y < ny && z < nz;
    let mut area = 0.0;
    for (d, w) in DIRS {
        let mut entries = 0u64;
        for z in 0..nz {
            for y in 0..ny {
                for x in 0..nx {
                    // a line starts where stepping back leaves the volume
                    if within(x - d[0], y - d[1], z - d[2]) {
                        continue;
                    }
                    let (mut px, mut py, mut pz) = (x, y, z);
                    let mut was_in = false;
                    while within(px, py, pz) {
                        let now = inside(px, py, pz);
                        if now && !was_in {
                            entries += 1;
                        }
                        was_in = now;
                        px += d[0];
                        py += d[1];
                        pz += d[2];
                    }
                }
            }
        }
        let len = ((d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) as f64).sqrt();
        area += w * entries as f64 / len;
    }
    4.0 * area
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut r = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &t in &idx[i..=j] {
            r[t] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (ranks(a), ranks(b));
    let n = ra.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

/// Shortest closed interval holding at least half of the samples.
pub fn shortest_half(sorted: &[f64]) -> (f64, f64) {
    let n = sorted.len();
    let h = n.div_ceil(2);
    (0..=n - h)
        .map(|i| (sorted[i], sorted[i + h - 1]))
        .min_by(|a, b| (a.1 - a.0).total_cmp(&(b.1 - b.0)))
        .unwrap()
}

/// `(min, max)` by a plain scan over every value.
pub fn scan_range<'a>(rows: impl IntoIterator<Item = &'a [f64]>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for row in rows {
        for &x in row {
            if x < lo {
                lo = x;
            }
            if x > hi {
                hi = x;
            }
        }
    }
    (lo, hi)
}

/// Three fixed rows: a tight peak, a wide spread with a gap, a skewed tail.
pub fn three_rows() -> accustripes::ingest::EnsembleDataset {
    let peak: Vec<f64> = (0..40).map(|i| 4.0 + 0.05 * (i % 20) as f64).collect();
    let mut spread: Vec<f64> = (0..20).map(|i| i as f64 * 0.4).collect();
    spread.extend((0..10).map(|i| 14.0 + i as f64 * 0.6));
    let tail: Vec<f64> = (1..=30).map(|i| (i as f64).powf(1.7) / 10.0).collect();
    accustripes::ingest::EnsembleDataset::from_rows(
        "volume",
        vec![
            accustripes::ingest::EnsembleRow { label: "tile_000".into(), samples: peak },
            accustripes::ingest::EnsembleRow { label: "tile_001".into(), samples: spread },
            accustripes::ingest::EnsembleRow { label: "tile_002".into(), samples: tail },
        ],
    )
    .unwrap()
}

pub fn golden(name: &str) -> std::path::PathBuf {
    std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}
