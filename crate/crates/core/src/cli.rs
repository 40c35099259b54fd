//! Batch entry point: synthesize, quantify, split, render, summarize, serve.

use std::fs::File;
use std::io::{BufReader, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::binning::{self, BinningMethod, Histogram};
use crate::compose::{
    build_scene, render_single_histogram, render_svg, AxisMode, ColorMode, Composition, CurveScaling, Normalization,
    SceneRequest,
};
use crate::ingest::{self, ColumnMap, EnsembleDataset, ManifestEntry, TileGrid};
use crate::quantify::{self, Connectivity, FixtureParams, FixtureSpec, QuantifyOptions, SurfaceEstimator};
use crate::service::{self, AppState};

type BoxError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Debug, Parser)]
#[command(name = "accustripes", version, about = "Stacked-stripe ensemble histograms and particle quantification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a random particle fixture spec (JSON).
    Synth(SynthArgs),
    /// Rasterize a fixture, label components, and write the particle CSV.
    Quantify(QuantifyArgs),
    /// Split a particle CSV into spatial tiles plus a manifest.
    Split(SplitArgs),
    /// Render an ensemble to SVG.
    Render(RenderArgs),
    /// Print sample counts, limits, and the Sturges bin count.
    Stats(StatsArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

fn parse_triplet(s: &str) -> Result<[usize; 3], String> {
    let parts: Vec<&str> = s.split(['x', 'X', ',']).collect();
    if parts.len() != 3 {
        return Err(format!("expected NxNxN, got `{s}`"));
    }
    let mut out = [0usize; 3];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.trim().parse().map_err(|_| format!("`{p}` is not a positive integer"))?;
        if *o == 0 {
            return Err("dimensions must be positive".into());
        }
    }
    Ok(out)
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected LO,HI, got `{s}`"))?;
    let lo: f64 = a.trim().parse().map_err(|_| format!("`{a}` is not a number"))?;
    let hi: f64 = b.trim().parse().map_err(|_| format!("`{b}` is not a number"))?;
    if !(lo < hi) {
        return Err("range needs LO < HI".into());
    }
    Ok((lo, hi))
}

fn parse_connectivity(s: &str) -> Result<u32, String> {
    match s {
        "6" => Ok(6),
        "26" => Ok(26),
        _ => Err(format!("connectivity must be 6 or 26, got `{s}`")),
    }
}

fn parse_bbox(s: &str) -> Result<([f64; 3], [f64; 3]), String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("`{p}` is not a number")))
        .collect::<Result<_, _>>()?;
    if v.len() != 6 {
        return Err("expected x0,y0,z0,x1,y1,z1".into());
    }
    Ok(([v[0], v[1], v[2]], [v[3], v[4], v[5]]))
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "128x128x128", value_parser = parse_triplet)]
    pub dims: [usize; 3],
    #[arg(long, default_value_t = 200)]
    pub balls: usize,
    #[arg(long, default_value_t = 20)]
    pub agglomerates: usize,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EstimatorArg {
    Crofton,
    #[value(name = "faceCount", alias = "face-count")]
    FaceCount,
}

#[derive(Debug, Args)]
pub struct QuantifyArgs {
    #[arg(long)]
    pub fixture: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = quantify::PROBABILITY_THRESHOLD)]
    pub threshold: f64,
    #[arg(long, default_value_t = 26, value_parser = parse_connectivity)]
    pub connectivity: u32,
    #[arg(long, value_enum, default_value = "crofton")]
    pub estimator: EstimatorArg,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long = "out-dir", default_value = "tiles")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 54)]
    pub tiles: usize,
    /// Explicit factorization; must multiply to --tiles.
    #[arg(long, value_parser = parse_triplet)]
    pub grid: Option<[usize; 3]>,
    /// Volume extent; the box is [0, dims].
    #[arg(long, value_parser = parse_triplet, conflicts_with = "bbox")]
    pub dims: Option<[usize; 3]>,
    /// x0,y0,z0,x1,y1,z1; defaults to the centroid extent.
    #[arg(long, value_parser = parse_bbox)]
    pub bbox: Option<([f64; 3], [f64; 3])>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    #[value(alias = "ub")]
    Uniform,
    #[value(alias = "bayesian-blocks")]
    Bb,
    #[value(alias = "natural-breaks")]
    Nb,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CompositionArg {
    #[value(name = "colorOnly", alias = "color-only")]
    ColorOnly,
    Overlay,
    #[value(name = "filledCurve", alias = "filled-curve")]
    FilledCurve,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ColorModeArg {
    Linear,
    Log1p,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NormalizationArg {
    Global,
    #[value(name = "perRow", alias = "per-row")]
    PerRow,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum HistogramAxis {
    Linear,
    Log,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct SourceArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Directory of CSVs, loaded in file-name order.
    #[arg(long)]
    pub dir: Option<PathBuf>,
}

impl SourceArgs {
    fn load(&self, property: &str) -> Result<EnsembleDataset, BoxError> {
        match (&self.manifest, &self.dir) {
            (Some(m), _) => Ok(ingest::load_manifest(m, property)?),
            (None, Some(d)) => Ok(ingest::load_dir(d, property)?),
            (None, None) => unreachable!("clap requires one source"),
        }
    }
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long)]
    pub property: String,
    #[arg(long, value_enum, default_value = "uniform")]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value = "colorOnly")]
    pub composition: CompositionArg,
    #[arg(long = "color-mode", value_enum, default_value = "linear")]
    pub color_mode: ColorModeArg,
    #[arg(long, value_enum, default_value = "global")]
    pub normalization: NormalizationArg,
    /// Scale every overlay curve by the ensemble-wide peak density.
    #[arg(long)]
    pub global_curves: bool,
    /// Zoom window LO,HI.
    #[arg(long, value_parser = parse_range)]
    pub range: Option<(f64, f64)>,
    #[arg(long, default_value_t = binning::DEFAULT_P0)]
    pub p0: f64,
    /// Natural-breaks class count (defaults to the Sturges count).
    #[arg(long)]
    pub classes: Option<usize>,
    /// Fit adaptive edges on all rows pooled instead of per row.
    #[arg(long)]
    pub pooled: bool,
    /// Run adaptive binning on every distinct value.
    #[arg(long)]
    pub exact: bool,
    /// Render one pooled histogram instead of the stacked stripes.
    #[arg(long = "global-histogram", value_enum)]
    pub global_histogram: Option<HistogramAxis>,
    /// Also write the scene JSON here.
    #[arg(long = "scene-json")]
    pub scene_json: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long)]
    pub property: String,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = service::PORT_ENV, default_value_t = service::DEFAULT_PORT)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Directory of static UI assets served at `/`.
    #[arg(long = "ui-dir")]
    pub ui_dir: Option<PathBuf>,
    /// Register this manifest at startup (needs --property).
    #[arg(long, requires = "property")]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub property: Option<String>,
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn synth(args: &SynthArgs) -> Result<(), BoxError> {
    let params = FixtureParams {
        dims: args.dims,
        balls: args.balls,
        agglomerates: args.agglomerates,
        noise_sigma: args.noise,
        seed: args.seed,
        ..Default::default()
    };
    let spec = quantify::random_fixture(&params)?;
    write_atomic(&args.out, serde_json::to_string_pretty(&spec)?.as_bytes())?;
    eprintln!("wrote {} shapes to {}", spec.shapes.len(), args.out.display());
    Ok(())
}

fn run_quantify(args: &QuantifyArgs) -> Result<(), BoxError> {
    let spec: FixtureSpec = serde_json::from_reader(BufReader::new(File::open(&args.fixture)?))?;
    let vol = quantify::synth_volume(&spec)?;
    let opts = QuantifyOptions {
        threshold: args.threshold,
        connectivity: Connectivity::from_count(args.connectivity).expect("validated by clap"),
        estimator: match args.estimator {
            EstimatorArg::Crofton => SurfaceEstimator::Crofton,
            EstimatorArg::FaceCount => SurfaceEstimator::FaceCount,
        },
    };
    let (_, stats) = quantify::quantify_volume(&vol, &opts);
    let table = quantify::to_particle_table(&stats, &args.fixture.display().to_string());
    let mut buf = Vec::new();
    ingest::write_table(&mut buf, &table)?;
    write_atomic(&args.out, &buf)?;
    eprintln!("wrote {} particles to {}", table.len(), args.out.display());
    Ok(())
}

fn split(args: &SplitArgs) -> Result<(), BoxError> {
    let table = ingest::parse_table(
        BufReader::new(File::open(&args.input)?),
        &ColumnMap::default(),
        &args.input.display().to_string(),
    )?;
    let (min, max) = match (args.dims, args.bbox) {
        (Some(d), _) => ([0.0; 3], d.map(|v| v as f64)),
        (None, Some(b)) => b,
        (None, None) => {
            let mut lo = [f64::INFINITY; 3];
            let mut hi = [f64::NEG_INFINITY; 3];
            for r in &table.records {
                for a in 0..3 {
                    lo[a] = lo[a].min(r.centroid[a]);
                    hi[a] = hi[a].max(r.centroid[a]);
                }
            }
            if table.is_empty() {
                return Err("input has no particles; pass --dims or --bbox".into());
            }
            (lo, hi)
        }
    };
    let grid = match args.grid {
        Some(g) => {
            if g.iter().product::<usize>() != args.tiles {
                return Err(format!("grid {}x{}x{} does not give {} tiles", g[0], g[1], g[2], args.tiles).into());
            }
            TileGrid::new(min, max, g)?
        }
        None => TileGrid::with_tile_count(min, max, args.tiles)?,
    };
    let tiles = ingest::split_into_tiles(&table, &grid)?;
    std::fs::create_dir_all(&args.out_dir)?;
    let mut manifest = Vec::with_capacity(tiles.len());
    for tile in &tiles {
        let name = format!("{}.csv", tile.source);
        let mut buf = Vec::new();
        ingest::write_table(&mut buf, tile)?;
        write_atomic(&args.out_dir.join(&name), &buf)?;
        manifest.push(ManifestEntry { path: name, label: tile.source.clone() });
    }
    let mut buf = Vec::new();
    ingest::write_manifest(&mut buf, &manifest)?;
    write_atomic(&args.out_dir.join("manifest.json"), &buf)?;
    let [nx, ny, nz] = grid.divisions;
    eprintln!(
        "wrote {} tiles ({nx}x{ny}x{nz}) with {} particles ({} skipped) to {}",
        tiles.len(),
        table.len(),
        table.skipped,
        args.out_dir.display()
    );
    Ok(())
}

fn method_of(args: &RenderArgs) -> BinningMethod {
    let mut m = match args.method {
        MethodArg::Uniform => BinningMethod::uniform(),
        MethodArg::Bb => BinningMethod::bayesian_blocks(),
        MethodArg::Nb => BinningMethod::natural_breaks(),
    }
    .with_p0(args.p0);
    m.class_count = args.classes;
    if args.pooled {
        m = m.pooled();
    }
    if args.exact {
        m = m.exact();
    }
    m
}

fn render(args: &RenderArgs) -> Result<(), BoxError> {
    let ensemble = args.source.load(&args.property)?;
    if let Some(axis) = args.global_histogram {
        let samples: Vec<f64> = ensemble
            .rows()
            .iter()
            .flat_map(|r| r.samples.iter().copied())
            .filter(|&x| args.range.is_none_or(|(lo, hi)| x >= lo && x <= hi))
            .collect();
        let hist: Histogram = global_histogram(&samples, args.range.unwrap_or(ingest::global_range(&ensemble)))?;
        let mode = match axis {
            HistogramAxis::Linear => AxisMode::LinearY,
            HistogramAxis::Log => AxisMode::LogY,
        };
        write_atomic(&args.out, render_single_histogram(&hist, mode).as_bytes())?;
        return Ok(());
    }
    let req = SceneRequest {
        method: method_of(args),
        composition: match args.composition {
            CompositionArg::ColorOnly => Composition::ColorOnly,
            CompositionArg::Overlay => Composition::Overlay,
            CompositionArg::FilledCurve => Composition::FilledCurve,
        },
        color_mode: match args.color_mode {
            ColorModeArg::Linear => ColorMode::Linear,
            ColorModeArg::Log1p => ColorMode::Log1p,
        },
        normalization: match args.normalization {
            NormalizationArg::Global => Normalization::Global,
            NormalizationArg::PerRow => Normalization::PerRow,
        },
        curve_scaling: if args.global_curves { CurveScaling::Global } else { CurveScaling::PerRow },
        range: args.range,
        ..Default::default()
    };
    let scene = build_scene(&ensemble, &req)?;
    write_atomic(&args.out, render_svg(&scene)?.as_bytes())?;
    if let Some(path) = &args.scene_json {
        write_atomic(path, serde_json::to_string(&scene)?.as_bytes())?;
    }
    Ok(())
}

/// Uniform Sturges histogram of pooled samples.
pub fn global_histogram(samples: &[f64], range: (f64, f64)) -> Result<Histogram, binning::BinningError> {
    let k = binning::sturges_bin_count(samples.len().max(1))?;
    let edges = binning::uniform_edges(range, k)?;
    binning::histogram(samples, &edges)
}

/// Text summary printed by `stats`.
pub fn stats_report(ensemble: &EnsembleDataset) -> Result<String, binning::BinningError> {
    let (lo, hi) = ingest::global_range(ensemble);
    let max_n = ensemble.max_row_len();
    let k = binning::sturges_bin_count(max_n.max(1))?;
    Ok(format!(
        "property: {}\nrows: {}\nsamples: {}\nskipped: {}\nmax row n: {}\nglobal min: {}\nglobal max: {}\nk={}\n",
        ensemble.property,
        ensemble.len(),
        ensemble.total_samples(),
        ensemble.skipped(),
        max_n,
        lo,
        hi,
        k
    ))
}

fn stats(args: &StatsArgs) -> Result<(), BoxError> {
    let ensemble = args.source.load(&args.property)?;
    print!("{}", stats_report(&ensemble)?);
    Ok(())
}

fn serve(args: &ServeArgs) -> Result<(), BoxError> {
    let state = Arc::new(AppState::new(args.ui_dir.clone()));
    if let (Some(m), Some(p)) = (&args.manifest, &args.property) {
        let meta = state.registry.insert(ingest::load_manifest(m, p)?).meta.clone();
        eprintln!("registered {} ({} rows)", meta.id, meta.row_count);
    }
    let addr: SocketAddr = format!("{}:{}", args.host, args.port).parse()?;
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(service::serve(addr, state))?;
    Ok(())
}

/// Runs the command line; returns the process exit status
/// (0 success, 1 runtime error, 2 usage error).
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match &cli.command {
        Command::Synth(a) => synth(a),
        Command::Quantify(a) => run_quantify(a),
        Command::Split(a) => split(a),
        Command::Render(a) => render(a),
        Command::Stats(a) => stats(a),
        Command::Serve(a) => serve(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
