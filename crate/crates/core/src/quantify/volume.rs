use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::QuantifyError;

/// Voxel grid dimensions; linear index is `x + dx * (y + dy * z)`.
pub type Dims = [usize; 3];

#[inline]
pub(crate) fn index(dims: Dims, x: usize, y: usize, z: usize) -> usize {
    x + dims[0] * (y + dims[1] * z)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoxelVolume {
    pub dims: Dims,
    pub values: Vec<f32>,
}

impl VoxelVolume {
    pub fn zeros(dims: Dims) -> Self {
        Self { dims, values: vec![0.0; dims.iter().product()] }
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> f32 {
        self.values[index(self.dims, x, y, z)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ShapeKind {
    Sphere,
    Ellipsoid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shape {
    pub kind: ShapeKind,
    pub center: [f64; 3],
    pub radii: [f64; 3],
    pub intensity: f64,
}

impl Shape {
    pub fn sphere(center: [f64; 3], r: f64, intensity: f64) -> Self {
        Self { kind: ShapeKind::Sphere, center, radii: [r; 3], intensity }
    }

    /// Whether the voxel with index `(x, y, z)` has its center strictly inside.
    #[inline]
    pub fn contains_voxel(&self, x: usize, y: usize, z: usize) -> bool {
        let p = [x as f64 + 0.5, y as f64 + 0.5, z as f64 + 0.5];
        let mut q = 0.0;
        for a in 0..3 {
            let d = (p[a] - self.center[a]) / self.radii[a];
            q += d * d;
        }
        q < 1.0
    }

    /// Voxel index range per axis that can contain the shape.
    pub(crate) fn voxel_bounds(&self, dims: Dims) -> [(usize, usize); 3] {
        let mut out = [(0, 0); 3];
        for a in 0..3 {
            let lo = (self.center[a] - self.radii[a] - 0.5).floor().max(0.0) as usize;
            let hi = ((self.center[a] + self.radii[a] + 0.5).ceil() as usize).min(dims[a]);
            out[a] = (lo, hi);
        }
        out
    }
}

/// Synthetic volume description, also the JSON fixture format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FixtureSpec {
    pub dims: Dims,
    pub shapes: Vec<Shape>,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub seed: u64,
}

impl FixtureSpec {
    pub fn validate(&self) -> Result<(), QuantifyError> {
        if self.dims.contains(&0) {
            return Err(QuantifyError::Spec(format!("dims must be positive, got {:?}", self.dims)));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(QuantifyError::Spec(format!("noiseSigma must be >= 0, got {}", self.noise_sigma)));
        }
        for (i, s) in self.shapes.iter().enumerate() {
            if s.radii.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
                return Err(QuantifyError::Spec(format!("shape {i}: radii must be positive")));
            }
            if s.kind == ShapeKind::Sphere && !(s.radii[0] == s.radii[1] && s.radii[1] == s.radii[2]) {
                return Err(QuantifyError::Spec(format!("shape {i}: sphere radii must be equal")));
            }
            for a in 0..3 {
                let (lo, hi) = (s.center[a] - s.radii[a], s.center[a] + s.radii[a]);
                if !(lo >= 0.0 && hi <= self.dims[a] as f64) {
                    return Err(QuantifyError::Spec(format!(
                        "shape {i} extends outside the volume on axis {a}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Rasterizes the shapes and adds seeded Gaussian noise.
///
/// A voxel takes the largest intensity of the shapes containing its center
/// (0 outside every shape). Noise comes from `ChaCha8Rng::seed_from_u64(seed)`
/// drawn in linear-index order, so the output depends only on the spec.
pub fn synth_volume(spec: &FixtureSpec) -> Result<VoxelVolume, QuantifyError> {
    spec.validate()?;
    let dims = spec.dims;
    let mut vol = VoxelVolume::zeros(dims);
    for shape in &spec.shapes {
        let [(x0, x1), (y0, y1), (z0, z1)] = shape.voxel_bounds(dims);
        let value = shape.intensity as f32;
        for z in z0..z1 {
            for y in y0..y1 {
                for x in x0..x1 {
                    if shape.contains_voxel(x, y, z) {
                        let v = &mut vol.values[index(dims, x, y, z)];
                        *v = v.max(value);
                    }
                }
            }
        }
    }
    if spec.noise_sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let normal = Normal::new(0.0, spec.noise_sigma).expect("sigma validated");
        for v in &mut vol.values {
            *v += normal.sample(&mut rng) as f32;
        }
    }
    Ok(vol)
}
