//! Desk-scale quantification: synthetic volumes, threshold segmentation,
//! connected-component labeling, and per-component shape statistics.

mod label;
mod measure;
mod volume;

pub use label::{connected_components, threshold_mask, Connectivity, LabelVolume, Mask};
pub use measure::{
    component_properties, crofton_area, sphericity, surface_area, ComponentStats, SurfaceEstimator,
    CROFTON_DIRECTIONS, CROFTON_WEIGHTS,
};
pub use volume::{synth_volume, Dims, FixtureSpec, Shape, ShapeKind, VoxelVolume};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{ParticleRecord, ParticleTable};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantifyError {
    #[error("fixture spec error: {0}")]
    Spec(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unknown label {0}")]
    UnknownLabel(u32),
}

/// Threshold applied to probability-map inputs.
pub const PROBABILITY_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QuantifyOptions {
    pub threshold: f64,
    pub connectivity: Connectivity,
    pub estimator: SurfaceEstimator,
}

impl Default for QuantifyOptions {
    fn default() -> Self {
        Self {
            threshold: PROBABILITY_THRESHOLD,
            connectivity: Connectivity::TwentySix,
            estimator: SurfaceEstimator::Crofton,
        }
    }
}

/// Segments, labels, and measures a volume.
pub fn quantify_volume(vol: &VoxelVolume, opts: &QuantifyOptions) -> (LabelVolume, Vec<ComponentStats>) {
    let mask = threshold_mask(vol, opts.threshold);
    let labels = connected_components(&mask, opts.connectivity);
    let stats = component_properties(&labels, opts.estimator);
    (labels, stats)
}

pub fn to_particle_table(stats: &[ComponentStats], source: &str) -> ParticleTable {
    ParticleTable {
        records: stats
            .iter()
            .map(|s| ParticleRecord { volume: s.volume, sphericity: s.sphericity, centroid: s.centroid })
            .collect(),
        source: source.to_string(),
        skipped: 0,
    }
}

/// Parameters for a random particle fixture: isolated balls plus fused
/// agglomerates of overlapping balls, all mutually separated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FixtureParams {
    pub dims: Dims,
    pub balls: usize,
    pub ball_radius: (f64, f64),
    pub agglomerates: usize,
    /// Balls fused into each agglomerate.
    pub parts: (usize, usize),
    pub part_radius: (f64, f64),
    pub intensity: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for FixtureParams {
    fn default() -> Self {
        Self {
            dims: [128, 128, 128],
            balls: 200,
            ball_radius: (1.5, 5.0),
            agglomerates: 20,
            parts: (2, 4),
            part_radius: (3.0, 6.0),
            intensity: 1.0,
            noise_sigma: 0.0,
            seed: 0,
        }
    }
}

/// Gap between bounding spheres that keeps digitized objects from touching
/// under 26-connectivity (adjacent voxel centers are at most sqrt(3) apart).
const SEPARATION: f64 = 2.0;
const MAX_ATTEMPTS: usize = 20_000;

fn uniform_in(rng: &mut ChaCha8Rng, range: (f64, f64)) -> f64 {
    if range.1 > range.0 {
        rng.random_range(range.0..range.1)
    } else {
        range.0
    }
}

fn random_direction(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-3 && n <= 1.0 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

/// Builds a random, fully separated fixture from a seed.
pub fn random_fixture(params: &FixtureParams) -> Result<FixtureSpec, QuantifyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let dims = params.dims.map(|d| d as f64);
    let mut placed: Vec<([f64; 3], f64)> = Vec::new();
    let mut shapes = Vec::new();

    let mut place = |rng: &mut ChaCha8Rng, members: Vec<([f64; 3], f64)>| -> Result<(), QuantifyError> {
        // members are relative to a local origin; the bounding radius covers all
        let bound = members
            .iter()
            .map(|(o, r)| (o[0] * o[0] + o[1] * o[1] + o[2] * o[2]).sqrt() + r)
            .fold(0.0, f64::max);
        for _ in 0..MAX_ATTEMPTS {
            let c: [f64; 3] = std::array::from_fn(|a| {
                if dims[a] > 2.0 * bound {
                    rng.random_range(bound..dims[a] - bound)
                } else {
                    dims[a] / 2.0
                }
            });
            if (0..3).any(|a| c[a] - bound < 0.0 || c[a] + bound > dims[a]) {
                continue;
            }
            let clear = placed.iter().all(|(p, r)| {
                let d2: f64 = (0..3).map(|a| (p[a] - c[a]).powi(2)).sum();
                d2.sqrt() > r + bound + SEPARATION
            });
            if clear {
                placed.push((c, bound));
                for (o, r) in members {
                    shapes.push(Shape::sphere([c[0] + o[0], c[1] + o[1], c[2] + o[2]], r, params.intensity));
                }
                return Ok(());
            }
        }
        Err(QuantifyError::Spec(format!(
            "could not place object of radius {bound:.2} after {MAX_ATTEMPTS} attempts; volume too crowded"
        )))
    };

    for _ in 0..params.agglomerates {
        let core = uniform_in(&mut rng, params.part_radius);
        let n = if params.parts.1 > params.parts.0 {
            rng.random_range(params.parts.0..=params.parts.1)
        } else {
            params.parts.0
        };
        let mut members = vec![([0.0; 3], core)];
        for _ in 1..n.max(1) {
            let r = uniform_in(&mut rng, params.part_radius);
            let dir = random_direction(&mut rng);
            // overlap with the core keeps the agglomerate in one piece
            let dist = (core + r) * rng.random_range(0.55..0.8);
            members.push(([dir[0] * dist, dir[1] * dist, dir[2] * dist], r));
        }
        place(&mut rng, members)?;
    }
    for _ in 0..params.balls {
        let r = uniform_in(&mut rng, params.ball_radius);
        place(&mut rng, vec![([0.0; 3], r)])?;
    }

    Ok(FixtureSpec {
        dims: params.dims,
        shapes,
        noise_sigma: params.noise_sigma,
        seed: params.seed,
    })
}
