//! CSV ingestion of particle tables, spatial tiling, and ensemble assembly.
//!
//! A particle table is the flat output of the quantification stage: one row
//! per connected component with its volume, sphericity and centroid. Tables
//! are split into spatial tiles by centroid, and tiles (one CSV per tile) are
//! gathered into an [`EnsembleDataset`] for a single property.

use std::fs::File;
use std::io::{self, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("missing column `{0}` in header")]
    MissingColumn(String),
    #[error("empty input: no header row")]
    MissingHeader,
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("record {index} has centroid {centroid:?} outside the tile grid bounds")]
    OutOfBounds { index: usize, centroid: [f64; 3] },
    #[error("invalid tile grid: {0}")]
    InvalidGrid(String),
    #[error("ensemble contains no samples")]
    EmptyEnsemble,
    #[error("no sources given")]
    NoSources,
    #[error("manifest error: {0}")]
    Manifest(String),
    #[error("source `{label}`: {source}")]
    Source {
        label: String,
        #[source]
        source: Box<IngestError>,
    },
}

impl IngestError {
    fn in_source(self, label: &str) -> Self {
        match self {
            e @ IngestError::Source { .. } => e,
            e => IngestError::Source {
                label: label.to_string(),
                source: Box::new(e),
            },
        }
    }

    /// The innermost error, with source labels stripped.
    pub fn root(&self) -> &IngestError {
        match self {
            IngestError::Source { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T> = std::result::Result<T, IngestError>;

/// One quantified component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParticleRecord {
    /// Voxel count.
    pub volume: u64,
    /// Percent in `[0, 100]`.
    pub sphericity: f64,
    /// Voxel units.
    pub centroid: [f64; 3],
}

impl ParticleRecord {
    fn is_valid(&self) -> bool {
        self.volume >= 1
            && (0.0..=100.0).contains(&self.sphericity)
            && self.centroid.iter().all(|c| c.is_finite() && *c >= 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParticleTable {
    pub records: Vec<ParticleRecord>,
    pub source: String,
    /// Data rows dropped because a mapped value was missing or invalid.
    pub skipped: usize,
}

impl ParticleTable {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Header names for the particle columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMap {
    pub volume: String,
    pub sphericity: String,
    pub cx: String,
    pub cy: String,
    pub cz: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self {
            volume: "volume".into(),
            sphericity: "sphericity".into(),
            cx: "cx".into(),
            cy: "cy".into(),
            cz: "cz".into(),
        }
    }
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader)
}

fn column_index(headers: &csv::ByteRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name.as_bytes())
        .ok_or_else(|| IngestError::MissingColumn(name.to_string()))
}

fn read_headers<R: Read>(rdr: &mut csv::Reader<R>) -> Result<csv::ByteRecord> {
    let headers = rdr.byte_headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(IngestError::MissingHeader);
    }
    Ok(headers)
}

fn parse_finite(field: Option<&[u8]>) -> Option<f64> {
    let s = std::str::from_utf8(field?).ok()?;
    if s.is_empty() {
        return None;
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Parses a particle table. Rows with missing, non-finite or out-of-range
/// values are skipped and counted; the remaining rows keep their order.
pub fn parse_table<R: Read>(reader: R, schema: &ColumnMap, source: &str) -> Result<ParticleTable> {
    let mut rdr = csv_reader(reader);
    let headers = read_headers(&mut rdr)?;
    let cols = [
        column_index(&headers, &schema.volume)?,
        column_index(&headers, &schema.sphericity)?,
        column_index(&headers, &schema.cx)?,
        column_index(&headers, &schema.cy)?,
        column_index(&headers, &schema.cz)?,
    ];

    let mut table = ParticleTable {
        source: source.to_string(),
        ..Default::default()
    };
    let mut row = csv::ByteRecord::new();
    while rdr.read_byte_record(&mut row)? {
        let vals: Option<Vec<f64>> = cols.iter().map(|&c| parse_finite(row.get(c))).collect();
        let record = vals.and_then(|v| {
            // volumes are integral voxel counts
            if v[0].fract() != 0.0 || v[0] < 1.0 {
                return None;
            }
            let rec = ParticleRecord {
                volume: v[0] as u64,
                sphericity: v[1],
                centroid: [v[2], v[3], v[4]],
            };
            rec.is_valid().then_some(rec)
        });
        match record {
            Some(r) => table.records.push(r),
            None => table.skipped += 1,
        }
    }
    Ok(table)
}

/// Samples of one named column plus the number of skipped rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ColumnSamples {
    pub values: Vec<f64>,
    pub skipped: usize,
    pub min: f64,
    pub max: f64,
}

/// Streams a single column, tracking the running min/max as it goes.
pub fn read_column<R: Read>(reader: R, column: &str) -> Result<ColumnSamples> {
    let mut rdr = csv_reader(reader);
    let headers = read_headers(&mut rdr)?;
    let idx = column_index(&headers, column)?;
    let mut out = ColumnSamples {
        min: f64::INFINITY,
        max: f64::NEG_INFINITY,
        ..Default::default()
    };
    let mut row = csv::ByteRecord::new();
    while rdr.read_byte_record(&mut row)? {
        match parse_finite(row.get(idx)) {
            Some(v) => {
                out.min = out.min.min(v);
                out.max = out.max.max(v);
                out.values.push(v);
            }
            None => out.skipped += 1,
        }
    }
    Ok(out)
}

/// Writes a particle table with the default column names.
pub fn write_table<W: Write>(writer: W, table: &ParticleTable) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["volume", "sphericity", "cx", "cy", "cz"])?;
    for r in &table.records {
        wtr.write_record(&[
            r.volume.to_string(),
            r.sphericity.to_string(),
            r.centroid[0].to_string(),
            r.centroid[1].to_string(),
            r.centroid[2].to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Axis-aligned box subdivided into `nx * ny * nz` equal tiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TileGrid {
    pub min: [f64; 3],
    pub max: [f64; 3],
    pub divisions: [usize; 3],
}

impl TileGrid {
    pub fn new(min: [f64; 3], max: [f64; 3], divisions: [usize; 3]) -> Result<Self> {
        for a in 0..3 {
            if !(min[a].is_finite() && max[a].is_finite() && min[a] < max[a]) {
                return Err(IngestError::InvalidGrid(format!(
                    "axis {a}: need min < max, got [{}, {}]",
                    min[a], max[a]
                )));
            }
            if divisions[a] == 0 {
                return Err(IngestError::InvalidGrid(format!("axis {a}: zero divisions")));
            }
        }
        Ok(Self { min, max, divisions })
    }

    /// Picks the factorization `nx * ny * nz = count` whose tiles are closest
    /// to cubes (smallest ratio of longest to shortest tile edge). Ties go to
    /// the lexicographically smallest `(nx, ny, nz)`.
    pub fn with_tile_count(min: [f64; 3], max: [f64; 3], count: usize) -> Result<Self> {
        if count == 0 {
            return Err(IngestError::InvalidGrid("tile count must be positive".into()));
        }
        let probe = Self::new(min, max, [1, 1, 1])?;
        let len = probe.extent();
        let mut best: Option<([usize; 3], f64)> = None;
        for nx in (1..=count).filter(|d| count.is_multiple_of(*d)) {
            let rest = count / nx;
            for ny in (1..=rest).filter(|d| rest.is_multiple_of(*d)) {
                let nz = rest / ny;
                let edges = [len[0] / nx as f64, len[1] / ny as f64, len[2] / nz as f64];
                let hi = edges.iter().cloned().fold(f64::MIN, f64::max);
                let lo = edges.iter().cloned().fold(f64::MAX, f64::min);
                let spread = hi / lo;
                let better = match best {
                    None => true,
                    Some((_, s)) => spread < s * (1.0 - 1e-12),
                };
                if better {
                    best = Some(([nx, ny, nz], spread));
                }
            }
        }
        Self::new(min, max, best.expect("count >= 1 has a factorization").0)
    }

    pub fn extent(&self) -> [f64; 3] {
        [
            self.max[0] - self.min[0],
            self.max[1] - self.min[1],
            self.max[2] - self.min[2],
        ]
    }

    pub fn tile_count(&self) -> usize {
        self.divisions.iter().product()
    }

    /// Per-axis tile coordinates; intervals are half-open except the last.
    pub fn tile_coords(&self, p: [f64; 3]) -> Option<[usize; 3]> {
        let mut out = [0usize; 3];
        for a in 0..3 {
            if !(p[a] >= self.min[a] && p[a] <= self.max[a]) {
                return None;
            }
            let n = self.divisions[a];
            let rel = (p[a] - self.min[a]) / (self.max[a] - self.min[a]);
            out[a] = ((rel * n as f64).floor() as usize).min(n - 1);
        }
        Some(out)
    }

    /// Linear tile index, x fastest then y then z.
    pub fn tile_index(&self, p: [f64; 3]) -> Option<usize> {
        let [i, j, k] = self.tile_coords(p)?;
        let [nx, ny, _] = self.divisions;
        Some(i + nx * (j + ny * k))
    }
}

/// Assigns each record to the tile containing its centroid.
pub fn split_into_tiles(table: &ParticleTable, grid: &TileGrid) -> Result<Vec<ParticleTable>> {
    let mut tiles: Vec<ParticleTable> = (0..grid.tile_count())
        .map(|t| ParticleTable {
            records: Vec::new(),
            source: tile_label(t),
            skipped: 0,
        })
        .collect();
    for (index, rec) in table.records.iter().enumerate() {
        let t = grid
            .tile_index(rec.centroid)
            .ok_or(IngestError::OutOfBounds {
                index,
                centroid: rec.centroid,
            })?;
        tiles[t].records.push(*rec);
    }
    Ok(tiles)
}

pub fn tile_label(index: usize) -> String {
    format!("tile_{index:03}")
}

/// One labelled distribution of an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleRow {
    pub label: String,
    pub samples: Vec<f64>,
}

/// Ordered rows of one property, sharing global limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleDataset {
    pub property: String,
    rows: Vec<EnsembleRow>,
    global_min: f64,
    global_max: f64,
    skipped: usize,
}

impl EnsembleDataset {
    pub fn from_rows(property: impl Into<String>, rows: Vec<EnsembleRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(IngestError::NoSources);
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut rows = rows;
        let mut skipped = 0;
        for row in &mut rows {
            let before = row.samples.len();
            row.samples.retain(|v| v.is_finite());
            skipped += before - row.samples.len();
            for &v in &row.samples {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if lo > hi {
            return Err(IngestError::EmptyEnsemble);
        }
        Ok(Self {
            property: property.into(),
            rows,
            global_min: lo,
            global_max: hi,
            skipped,
        })
    }

    pub fn rows(&self) -> &[EnsembleRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn global_min(&self) -> f64 {
        self.global_min
    }

    pub fn global_max(&self) -> f64 {
        self.global_max
    }

    /// Rows dropped while loading because of missing or non-finite values.
    pub fn skipped(&self) -> usize {
        self.skipped
    }

    pub fn max_row_len(&self) -> usize {
        self.rows.iter().map(|r| r.samples.len()).max().unwrap_or(0)
    }

    pub fn total_samples(&self) -> usize {
        self.rows.iter().map(|r| r.samples.len()).sum()
    }
}

/// Shared limits `(min, max)` of every row.
pub fn global_range(ensemble: &EnsembleDataset) -> (f64, f64) {
    (ensemble.global_min, ensemble.global_max)
}

/// Loads one column from each source. Sources are parsed in parallel; row
/// order follows the input order.
pub fn load_ensemble<R: Read + Send>(
    sources: Vec<(String, R)>,
    property: &str,
) -> Result<EnsembleDataset> {
    if sources.is_empty() {
        return Err(IngestError::NoSources);
    }
    let parsed: Vec<(String, ColumnSamples)> = sources
        .into_par_iter()
        .map(|(label, reader)| {
            read_column(reader, property)
                .map(|c| (label.clone(), c))
                .map_err(|e| e.in_source(&label))
        })
        .collect::<Result<_>>()?;

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut skipped = 0;
    let rows = parsed
        .into_iter()
        .map(|(label, col)| {
            lo = lo.min(col.min);
            hi = hi.max(col.max);
            skipped += col.skipped;
            EnsembleRow {
                label,
                samples: col.values,
            }
        })
        .collect();
    if lo > hi {
        return Err(IngestError::EmptyEnsemble);
    }
    Ok(EnsembleDataset {
        property: property.to_string(),
        rows,
        global_min: lo,
        global_max: hi,
        skipped,
    })
}

/// Manifest entry; `path` is relative to the manifest file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub label: String,
}

pub fn read_manifest(path: &Path) -> Result<Vec<(String, PathBuf)>> {
    let text = std::fs::read_to_string(path)?;
    let entries: Vec<ManifestEntry> =
        serde_json::from_str(&text).map_err(|e| IngestError::Manifest(e.to_string()))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    Ok(entries
        .into_iter()
        .map(|e| (e.label, base.join(e.path)))
        .collect())
}

pub fn write_manifest<W: Write>(writer: W, entries: &[ManifestEntry]) -> Result<()> {
    serde_json::to_writer_pretty(writer, entries).map_err(|e| IngestError::Manifest(e.to_string()))
}

fn open_sources(files: Vec<(String, PathBuf)>) -> Result<Vec<(String, BufReader<File>)>> {
    files
        .into_iter()
        .map(|(label, path)| {
            File::open(&path)
                .map(|f| (label.clone(), BufReader::with_capacity(1 << 20, f)))
                .map_err(|e| IngestError::Io(e).in_source(&label))
        })
        .collect()
}

/// Loads the ensemble listed in a JSON manifest.
pub fn load_manifest(path: &Path, property: &str) -> Result<EnsembleDataset> {
    load_ensemble(open_sources(read_manifest(path)?)?, property)
}

/// Loads every `*.csv` in a directory in lexicographic file-name order,
/// labelling rows by file stem.
pub fn load_dir(dir: &Path, property: &str) -> Result<EnsembleDataset> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    let labelled = files
        .into_iter()
        .map(|p| {
            let label = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            (label, p)
        })
        .collect();
    load_ensemble(open_sources(labelled)?, property)
}
