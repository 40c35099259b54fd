//! One function per acceptance criterion. Each returns a short detail
//! string on success and a reason on failure.
#![allow(dead_code)]

use std::io::{BufWriter, Write};
use std::path::Path;

use rand::Rng;

use accustripes::binning::{
    self, bayesian_blocks, bin_ensemble, histogram, natural_breaks, sturges_bin_count, BinningMethod,
};
use accustripes::compose::{build_scene, render_svg, Composition, SceneRequest};
use accustripes::density::{kde_curve, silverman_bandwidth, trapezoid};
use accustripes::ingest::{self, EnsembleDataset, EnsembleRow};
use accustripes::quantify::{
    self, quantify_volume, synth_volume, FixtureParams, FixtureSpec, QuantifyOptions, Shape,
};

use super::*;

pub type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($arg:tt)*) => {
        if !$cond {
            return Err(format!($($arg)*));
        }
    };
}

pub fn sturges_anchors() -> Outcome {
    let big = sturges_bin_count(20_200_000).map_err(|e| e.to_string())?;
    ensure!(big == 26, "n=20200000 gave {big}");
    for n in [262_145usize, 400_000, 524_288] {
        let k = sturges_bin_count(n).map_err(|e| e.to_string())?;
        ensure!(k == 20, "n={n} gave {k}");
    }
    Ok("26 at 20.2M; 20 at 262145, 400000, 524288".into())
}

pub fn bb_oracle(trials: u64) -> Outcome {
    let mut max_m = 0;
    for seed in 0..trials {
        let mut r = rng(seed);
        let m = r.random_range(1..=15);
        let n = m + r.random_range(0..40);
        let span = 10f64.powi(r.random_range(-2..4));
        let xs = pooled_sample(&mut r, m, n, span);
        let dp = bayesian_blocks(&xs, 0.05, None).map_err(|e| e.to_string())?;
        let (edges, objective) = bb_exhaustive(&xs, 0.05);
        ensure!(dp.edges == edges, "seed {seed}: dp {:?} vs exhaustive {:?}", dp.edges, edges);
        if m > 1 {
            ensure!(
                (dp.objective - objective).abs() <= 1e-9 * objective.abs().max(1.0),
                "seed {seed}: objective {} vs {}",
                dp.objective,
                objective
            );
        }
        max_m = max_m.max(m);
    }
    Ok(format!("{trials} datasets, up to {max_m} distinct values, edges identical"))
}

pub fn nb_oracle(trials: u64) -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..trials {
        let mut r = rng(1000 + seed);
        let n = r.random_range(1..=12);
        let k = r.random_range(1..=4);
        let xs = if seed % 2 == 0 {
            // small integers: duplicates and exact ties
            sorted((0..n).map(|_| r.random_range(0..6) as f64).collect())
        } else {
            sorted((0..n).map(|_| r.random_range(-5.0..5.0)).collect())
        };
        let dp = natural_breaks(&xs, k, None).map_err(|e| e.to_string())?;
        let oracle = nb_exhaustive(&xs, k);
        let diff = (dp.ssd - oracle.ssd).abs();
        worst = worst.max(diff);
        ensure!(diff <= 1e-9, "seed {seed}: ssd {} vs {}", dp.ssd, oracle.ssd);
        ensure!(dp.breaks == oracle.breaks, "seed {seed} {xs:?} k={k}: breaks {:?} vs {:?}", dp.breaks, oracle.breaks);
        ensure!(dp.edges == oracle.edges, "seed {seed}: edges {:?} vs {:?}", dp.edges, oracle.edges);
    }
    Ok(format!("{trials} datasets, max |dSSD| = {worst:.1e}, breaks identical"))
}

const AFFINE: [(f64, f64); 5] = [(2.0, 0.0), (0.5, 3.0), (10.0, -7.0), (0.01, 100.0), (3.7, -42.0)];

pub fn affine_equivariance(trials: u64) -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..trials {
        let mut r = rng(2000 + seed);
        let m = r.random_range(2..=40);
        let n = m + r.random_range(0..60);
        let xs = pooled_sample(&mut r, m, n, 10.0);
        let k = r.random_range(1..=6);
        let bb = binning::bayesian_blocks_edges(&xs, 0.05).map_err(|e| e.to_string())?;
        let nb = binning::natural_breaks_edges(&xs, k).map_err(|e| e.to_string())?;
        for (a, b) in AFFINE {
            let ys: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
            for (name, base, mapped) in [
                ("bb", &bb, binning::bayesian_blocks_edges(&ys, 0.05).map_err(|e| e.to_string())?),
                ("nb", &nb, binning::natural_breaks_edges(&ys, k).map_err(|e| e.to_string())?),
            ] {
                ensure!(
                    base.len() == mapped.len(),
                    "seed {seed} {name} x->{a}x+{b}: {} edges became {}",
                    base.len(),
                    mapped.len()
                );
                for (e, f) in base.iter().zip(&mapped) {
                    let d = (a * e + b - f).abs();
                    worst = worst.max(d);
                    ensure!(d <= 1e-9, "seed {seed} {name} x->{a}x+{b}: edge {e} maps to {f}");
                }
            }
        }
    }
    Ok(format!("{trials} datasets x {} maps, max edge error {worst:.1e}", AFFINE.len()))
}

pub fn kde_normalization(rows: u64) -> Outcome {
    let (mut lo_i, mut hi_i) = (f64::INFINITY, f64::NEG_INFINITY);
    for seed in 0..rows {
        let mut r = rng(3000 + seed);
        let n = r.random_range(100..2000);
        let xs = match seed % 3 {
            0 => normal_row(&mut r, n, 0.0, 1.0),
            1 => lognormal_row(&mut r, n, 3.0, 0.8),
            _ => {
                let mut v = normal_row(&mut r, n / 2, -4.0, 0.5);
                v.extend(normal_row(&mut r, n - n / 2, 6.0, 2.0));
                v
            }
        };
        let (min, max) = scan_range([xs.as_slice()]);
        let h = silverman_bandwidth(&xs, 1e-3 * (max - min)).map_err(|e| e.to_string())?;
        let (a, b) = (min - 4.0 * h, max + 4.0 * h);
        let points = (((b - a) / (h / 8.0)).ceil() as usize + 1).max(2048);
        let curve = kde_curve(&xs, h, a, b, points).map_err(|e| e.to_string())?;
        ensure!(curve.ys.iter().all(|&y| y >= 0.0), "row {seed}: negative density");
        let integral = trapezoid(&curve);
        ensure!((0.999..=1.001).contains(&integral), "row {seed}: integral {integral}");
        lo_i = lo_i.min(integral);
        hi_i = hi_i.max(integral);
    }
    Ok(format!("{rows} rows, integrals in [{lo_i:.6}, {hi_i:.6}]"))
}

pub fn lognormal_ensemble(rows: usize, seed: u64, n: std::ops::Range<usize>) -> EnsembleDataset {
    let mut r = rng(seed);
    let rows = (0..rows)
        .map(|i| {
            let len = r.random_range(n.clone());
            let mu = r.random_range(2.0..4.0);
            let sigma = r.random_range(0.6..1.2);
            EnsembleRow { label: ingest::tile_label(i), samples: lognormal_row(&mut r, len, mu, sigma) }
        })
        .collect();
    EnsembleDataset::from_rows("volume", rows).unwrap()
}

fn edges_within(edges: &[f64], (lo, hi): (f64, f64)) -> usize {
    edges.iter().filter(|&&e| e >= lo && e <= hi).count()
}

pub fn peak_resolution() -> Outcome {
    let ens = lognormal_ensemble(54, 4000, 800..2500);
    let ub = bin_ensemble(&ens, &BinningMethod::uniform(), None).map_err(|e| e.to_string())?;
    let bb = bin_ensemble(&ens, &BinningMethod::bayesian_blocks(), None).map_err(|e| e.to_string())?;
    let (mut total_bb, mut total_ub) = (0, 0);
    for (i, row) in ens.rows().iter().enumerate() {
        let half = shortest_half(&sorted(row.samples.clone()));
        let (b, u) = (edges_within(&bb[i].edges, half), edges_within(&ub[i].edges, half));
        ensure!(b >= u, "row {i}: {b} BB edges vs {u} UB edges in [{:.3}, {:.3}]", half.0, half.1);
        total_bb += b;
        total_ub += u;
    }
    Ok(format!("54 rows; edges inside the densest half: BB {total_bb}, UB {total_ub}"))
}

/// Rows of seven tight clusters where cluster `s` sits mostly just below
/// the `s`-th uniform edge.
pub fn distortion_ensemble() -> (EnsembleDataset, Vec<usize>, Vec<Vec<(f64, f64)>>) {
    // 63 samples per row: Sturges gives 7 classes, one per cluster
    let edges = binning::uniform_edges((0.0, 100.0), 7).unwrap();
    let mut rows = Vec::new();
    let mut straddle = Vec::new();
    let mut spans = Vec::new();
    for (i, s) in (1..=5).chain(1..=5).enumerate() {
        let mut r = rng(5000 + i as u64);
        let mut samples = Vec::new();
        let mut row_spans = Vec::new();
        for j in 0..7 {
            let (a, b) = match j {
                0 => (0.0, 1.0),
                6 => (99.0, 100.0),
                j if j == s => (edges[s] - 0.9, edges[s] + 0.1),
                j => {
                    let c = 0.5 * (edges[j] + edges[j + 1]);
                    (c - 0.5, c + 0.5)
                }
            };
            let mut cluster = vec![a];
            if j == s {
                cluster.push(edges[s] + 0.05);
                cluster.extend((0..7).map(|_| r.random_range(a..edges[s])));
            } else {
                cluster.push(b);
                cluster.extend((0..7).map(|_| r.random_range(a..b)));
            }
            let (lo, hi) = scan_range([cluster.as_slice()]);
            row_spans.push((lo, hi));
            samples.extend(cluster);
        }
        rows.push(EnsembleRow { label: format!("row_{i}"), samples });
        straddle.push(s);
        spans.push(row_spans);
    }
    (EnsembleDataset::from_rows("sphericity", rows).unwrap(), straddle, spans)
}

fn bin_of(edges: &[f64], x: f64) -> usize {
    let k = edges.len() - 1;
    (0..k)
        .find(|&i| x >= edges[i] && (x < edges[i + 1] || (i == k - 1 && x <= edges[i + 1])))
        .expect("sample inside the edges")
}

pub fn boundary_distortion() -> Outcome {
    let (ens, straddle, spans) = distortion_ensemble();
    let ub = bin_ensemble(&ens, &BinningMethod::uniform(), None).map_err(|e| e.to_string())?;
    let nb = bin_ensemble(&ens, &BinningMethod::natural_breaks(), None).map_err(|e| e.to_string())?;
    for (i, row) in ens.rows().iter().enumerate() {
        let s = straddle[i];
        let (lo, hi) = spans[i][s];
        let members: Vec<f64> = row.samples.iter().copied().filter(|&x| x >= lo && x <= hi).collect();
        let ub_bins: std::collections::BTreeSet<usize> = members.iter().map(|&x| bin_of(&ub[i].edges, x)).collect();
        ensure!(ub_bins.len() == 2, "row {i}: UB puts cluster {s} in bins {ub_bins:?}");
        let nb_bins: std::collections::BTreeSet<usize> = members.iter().map(|&x| bin_of(&nb[i].edges, x)).collect();
        ensure!(nb_bins.len() == 1, "row {i}: NB splits cluster {s} across {nb_bins:?}");
        let below = spans[i][s - 1].1;
        let above = spans[i][s + 1].0;
        let gap_edge = |a: f64, b: f64| nb[i].edges.iter().any(|&e| e > a && e < b);
        ensure!(gap_edge(below, lo), "row {i}: no NB edge in gap ({below}, {lo})");
        ensure!(gap_edge(hi, above), "row {i}: no NB edge in gap ({hi}, {above})");
    }
    Ok(format!("{} rows: UB splits the cluster, NB keeps it whole with edges in both gaps", ens.len()))
}

fn sphere_fixture(dims: [usize; 3], count: usize, seed: u64) -> Result<FixtureSpec, String> {
    let p = FixtureParams {
        dims,
        balls: count,
        ball_radius: (3.0, 14.0),
        agglomerates: 0,
        seed,
        ..Default::default()
    };
    quantify::random_fixture(&p).map_err(|e| e.to_string())
}

/// Crofton sphericity of a digitized ball of radius `r`.
pub fn ball_sphericity(r: f64) -> Result<(u64, f64, f64), String> {
    let d = (2.0 * r).ceil() as usize + 6;
    let c = d as f64 / 2.0 + 0.23;
    let spec = FixtureSpec {
        dims: [d; 3],
        shapes: vec![Shape::sphere([c, c - 0.11, c + 0.07], r, 1.0)],
        noise_sigma: 0.0,
        seed: 0,
    };
    let vol = synth_volume(&spec).map_err(|e| e.to_string())?;
    let (_, stats) = quantify_volume(&vol, &QuantifyOptions::default());
    ensure!(stats.len() == 1, "ball r={r} gave {} components", stats.len());
    Ok((stats[0].volume, stats[0].surface_area, stats[0].sphericity))
}

pub fn quantification_oracle(dims: [usize; 3]) -> Outcome {
    let spec = sphere_fixture(dims, 50, 8)?;
    ensure!(spec.shapes.len() == 50, "fixture has {} shapes", spec.shapes.len());
    let vol = synth_volume(&spec).map_err(|e| e.to_string())?;
    let (labels, stats) = quantify_volume(&vol, &QuantifyOptions::default());
    ensure!(stats.len() == 50, "found {} components, expected 50", stats.len());

    let mut seen = std::collections::BTreeSet::new();
    let mut worst_centroid: f64 = 0.0;
    for (i, shape) in spec.shapes.iter().enumerate() {
        let voxels = lattice_ball(shape.center, shape.radii[0], dims);
        let label = labels.get(voxels[0][0], voxels[0][1], voxels[0][2]);
        ensure!(label > 0, "sphere {i} not labelled");
        ensure!(voxels.iter().all(|v| labels.get(v[0], v[1], v[2]) == label), "sphere {i} split across labels");
        ensure!(seen.insert(label), "sphere {i} shares label {label}");
        let st = &stats[label as usize - 1];
        ensure!(
            st.volume == voxels.len() as u64,
            "sphere {i}: volume {} vs lattice count {}",
            st.volume,
            voxels.len()
        );
        let d = (0..3).map(|a| (st.centroid[a] - shape.center[a]).powi(2)).sum::<f64>().sqrt();
        worst_centroid = worst_centroid.max(d);
        ensure!(d <= 0.5, "sphere {i}: centroid off by {d:.3}");
    }
    let fg = quantify::threshold_mask(&vol, quantify::PROBABILITY_THRESHOLD).foreground_count() as u64;
    let total: u64 = stats.iter().map(|s| s.volume).sum();
    ensure!(total == fg, "sum of volumes {total} != foreground {fg}");

    let mut prev = 0.0;
    let mut seq = Vec::new();
    let mut raw = Vec::new();
    for r in [5.0, 8.0, 12.0, 16.0, 20.0] {
        let (v, a, s) = ball_sphericity(r)?;
        ensure!(s >= prev, "sphericity fell from {prev:.3} to {s:.3} at r={r}");
        prev = s;
        seq.push(format!("{s:.2}"));
        // before the clamp at 100
        raw.push(format!("{:.2}", 100.0 * std::f64::consts::PI.cbrt() * (6.0 * v as f64).powf(2.0 / 3.0) / a));
    }
    Ok(format!(
        "50/50 components, volumes exact, centroid error <= {worst_centroid:.3}; sphericity r=5..20: {} (unclamped {})",
        seq.join(" "),
        raw.join(" ")
    ))
}

pub fn mixed_fixture_stats(seed: u64) -> Result<Vec<quantify::ComponentStats>, String> {
    let spec = quantify::random_fixture(&FixtureParams { seed, ..Default::default() }).map_err(|e| e.to_string())?;
    let vol = synth_volume(&spec).map_err(|e| e.to_string())?;
    Ok(quantify_volume(&vol, &QuantifyOptions::default()).1)
}

pub fn volume_sphericity_correlation() -> Outcome {
    let stats = mixed_fixture_stats(7)?;
    let v: Vec<f64> = stats.iter().map(|s| s.volume as f64).collect();
    let s: Vec<f64> = stats.iter().map(|s| s.sphericity).collect();
    let rho = spearman(&v, &s);
    ensure!(rho < 0.0, "Spearman rho = {rho:.3} is not negative");
    Ok(format!("{} particles, Spearman rho = {rho:.3}", stats.len()))
}

fn cli(args: &[&str]) -> Result<(), String> {
    let argv = std::iter::once("accustripes").chain(args.iter().copied());
    match accustripes::cli::run(argv) {
        0 => Ok(()),
        code => Err(format!("`{}` exited with {code}", args.join(" "))),
    }
}

/// synth -> quantify -> split -> render in `dir`; returns the SVG bytes.
pub fn pipeline(dir: &Path, method: &str) -> Result<Vec<u8>, String> {
    let p = |name: &str| dir.join(name).to_string_lossy().into_owned();
    cli(&["synth", "--out", &p("fixture.json"), "--dims", "128x128x128", "--seed", "42"])?;
    cli(&["quantify", "--fixture", &p("fixture.json"), "--out", &p("particles.csv")])?;
    cli(&[
        "split", "--in", &p("particles.csv"), "--tiles", "54", "--grid", "3x3x6", "--dims", "128x128x128",
        "--out-dir", &p("tiles"),
    ])?;
    cli(&[
        "render", "--manifest", &p("tiles/manifest.json"), "--property", "volume", "--method", method,
        "--composition", "colorOnly", "--out", &p("volume.svg"),
    ])?;
    std::fs::read(dir.join("volume.svg")).map_err(|e| e.to_string())
}

/// Fill colors of the stripe rects, row by row.
pub fn stripe_fills(svg: &str) -> Vec<Vec<String>> {
    let mut rows: Vec<Vec<String>> = Vec::new();
    for line in svg.lines() {
        if line.starts_with("<g class=\"stripe\"") {
            rows.push(Vec::new());
        } else if line.starts_with("<g class=\"axis\"") {
            break;
        } else if line.starts_with("<rect") {
            if let (Some(row), Some(i)) = (rows.last_mut(), line.find("fill=\"")) {
                row.push(line[i + 6..i + 13].to_string());
            }
        }
    }
    rows
}

pub fn end_to_end_determinism() -> Outcome {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let first = pipeline(a.path(), "uniform")?;
    let second = pipeline(b.path(), "uniform")?;
    ensure!(first == second, "SVG bytes differ between runs");

    let manifest = a.path().join("tiles/manifest.json");
    let entries = ingest::read_manifest(&manifest).map_err(|e| e.to_string())?;
    ensure!(entries.len() == 54, "manifest lists {} tiles", entries.len());
    let ens = ingest::load_manifest(&manifest, "volume").map_err(|e| e.to_string())?;
    let hists = bin_ensemble(&ens, &BinningMethod::uniform(), None).map_err(|e| e.to_string())?;
    let fills = stripe_fills(std::str::from_utf8(&first).map_err(|e| e.to_string())?);
    ensure!(fills.len() == 54, "SVG has {} stripes", fills.len());
    let mut zeros = 0;
    for (row, (h, f)) in hists.iter().zip(&fills).enumerate() {
        ensure!(h.counts.len() == f.len(), "row {row}: {} bins vs {} rects", h.counts.len(), f.len());
        for (bin, (&c, color)) in h.counts.iter().zip(f).enumerate() {
            ensure!((c == 0) == (color == "#000000"), "row {row} bin {bin}: count {c} drawn {color}");
            zeros += usize::from(c == 0);
        }
    }
    ensure!(zeros > 0, "fixture produced no empty bins to check");
    Ok(format!("{} bytes identical across runs; {zeros} empty bins all #000000", first.len()))
}

/// Peak resident set size in bytes, when the platform reports it.
pub fn peak_rss() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

/// Writes `rows` particle CSVs holding `total` records plus a manifest.
pub fn write_scale_fixture(dir: &Path, rows: usize, total: usize) -> std::io::Result<()> {
    let mut manifest = Vec::with_capacity(rows);
    let mut r = rng(11);
    for i in 0..rows {
        let n = total / rows + usize::from(i < total % rows);
        let label = ingest::tile_label(i);
        let name = format!("{label}.csv");
        let mut w = BufWriter::with_capacity(1 << 20, std::fs::File::create(dir.join(&name))?);
        writeln!(w, "volume,sphericity,cx,cy,cz")?;
        let mu = r.random_range(3.0..4.5);
        let d = rand_distr::LogNormal::new(mu, 1.0).unwrap();
        for _ in 0..n {
            let v = (rand_distr::Distribution::<f64>::sample(&d, &mut r).ceil() as u64).max(1);
            let s: u32 = r.random_range(4000..10000);
            let c: [u32; 3] = [r.random_range(0..20000), r.random_range(0..20000), r.random_range(0..20000)];
            writeln!(w, "{v},{}.{:02},{}.{},{}.{},{}.{}", s / 100, s % 100, c[0] / 10, c[0] % 10, c[1] / 10, c[1] % 10, c[2] / 10, c[2] % 10)?;
        }
        w.flush()?;
        manifest.push(ingest::ManifestEntry { path: name, label });
    }
    let f = std::fs::File::create(dir.join("manifest.json"))?;
    ingest::write_manifest(f, &manifest).map_err(std::io::Error::other)
}

pub struct ScaleReport {
    pub records: usize,
    pub k: usize,
    pub load_bin_render: std::time::Duration,
    pub peak: Option<u64>,
    pub nb: std::time::Duration,
    pub nb_classes: usize,
}

pub fn scale(dir: &Path, total: usize) -> Result<ScaleReport, String> {
    write_scale_fixture(dir, 54, total).map_err(|e| e.to_string())?;
    let t = std::time::Instant::now();
    let ens = ingest::load_manifest(&dir.join("manifest.json"), "volume").map_err(|e| e.to_string())?;
    let req = SceneRequest { composition: Composition::ColorOnly, ..Default::default() };
    let scene = build_scene(&ens, &req).map_err(|e| e.to_string())?;
    let svg = render_svg(&scene).map_err(|e| e.to_string())?;
    let load_bin_render = t.elapsed();
    ensure!(svg.contains("</svg>"), "incomplete SVG");
    let records = ens.total_samples();
    let k = scene.stripes[0].rects.len();
    drop(ens);

    let mut r = rng(12);
    let row = lognormal_row(&mut r, 1_000_000, 3.5, 1.0);
    let t = std::time::Instant::now();
    let xs = sorted(row);
    let classes = sturges_bin_count(xs.len()).map_err(|e| e.to_string())?;
    let nb = natural_breaks(&xs, classes, Some(binning::DEFAULT_MAX_GROUPS)).map_err(|e| e.to_string())?;
    let nb_time = t.elapsed();
    let h = histogram(&xs, &nb.edges).map_err(|e| e.to_string())?;
    ensure!(h.n == 1_000_000, "NB histogram lost samples");
    Ok(ScaleReport { records, k, load_bin_render, peak: peak_rss(), nb: nb_time, nb_classes: nb.edges.len() - 1 })
}
