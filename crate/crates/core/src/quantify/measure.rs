//! Per-component volume, centroid, surface area, and sphericity.

use serde::{Deserialize, Serialize};

use super::label::LabelVolume;
use super::volume::{index, Dims};
use super::QuantifyError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SurfaceEstimator {
    /// Number of exposed unit faces.
    FaceCount,
    /// Cauchy-Crofton line-intercept estimate over 13 lattice directions.
    #[default]
    Crofton,
}

/// The 13 lattice directions of the 3x3x3 neighborhood, one per antipodal pair.
pub const CROFTON_DIRECTIONS: [[isize; 3]; 13] = [
    [1, 0, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 1, 0],
    [1, -1, 0],
    [1, 0, 1],
    [1, 0, -1],
    [0, 1, 1],
    [0, 1, -1],
    [1, 1, 1],
    [1, 1, -1],
    [1, -1, 1],
    [1, -1, -1],
];

/// Solid-angle weights of the directions above (Voronoi cells on the unit
/// sphere); axes, face diagonals, and body diagonals respectively. Sum to 1.
pub const CROFTON_WEIGHTS: [f64; 13] = [
    0.045_777_891_204_76 * 2.0,
    0.045_777_891_204_76 * 2.0,
    0.045_777_891_204_76 * 2.0,
    0.036_980_627_876_08 * 2.0,
    0.036_980_627_876_08 * 2.0,
    0.036_980_627_876_08 * 2.0,
    0.036_980_627_876_08 * 2.0,
    0.036_980_627_876_08 * 2.0,
    0.036_980_627_876_08 * 2.0,
    0.035_195_639_782_32 * 2.0,
    0.035_195_639_782_32 * 2.0,
    0.035_195_639_782_32 * 2.0,
    0.035_195_639_782_32 * 2.0,
];

/// Surface area from per-direction entry counts (unit voxels).
///
/// Each direction contributes `entries / |d|`, the projected area seen
/// along it; the mean projected area of a convex body is a quarter of its
/// surface.
pub fn crofton_area(entries: &[u64; 13]) -> f64 {
    4.0 * CROFTON_DIRECTIONS
        .iter()
        .zip(CROFTON_WEIGHTS)
        .zip(entries)
        .map(|((d, w), &n)| {
            let len = ((d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) as f64).sqrt();
            w * n as f64 / len
        })
        .sum::<f64>()
}

/// `100 * pi^(1/3) * (6V)^(2/3) / A`, capped at 100.
pub fn sphericity(volume: f64, area: f64) -> Result<f64, QuantifyError> {
    if !(volume > 0.0 && area > 0.0) {
        return Err(QuantifyError::Domain(format!(
            "sphericity needs positive volume and area, got V={volume}, A={area}"
        )));
    }
    let s = 100.0 * std::f64::consts::PI.cbrt() * (6.0 * volume).powf(2.0 / 3.0) / area;
    Ok(s.min(100.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ComponentStats {
    pub label: u32,
    pub volume: u64,
    /// Mean of voxel centers (`index + 0.5`).
    pub centroid: [f64; 3],
    pub surface_area: f64,
    pub sphericity: f64,
}

#[derive(Debug, Clone, Default)]
struct Accum {
    volume: u64,
    sum: [f64; 3],
    faces: u64,
    entries: [u64; 13],
}

#[inline]
fn neighbor(dims: Dims, x: usize, y: usize, z: usize, d: [isize; 3]) -> Option<usize> {
    let (nx, ny, nz) = (x as isize + d[0], y as isize + d[1], z as isize + d[2]);
    if nx < 0 || ny < 0 || nz < 0 || nx >= dims[0] as isize || ny >= dims[1] as isize || nz >= dims[2] as isize {
        None
    } else {
        Some(index(dims, nx as usize, ny as usize, nz as usize))
    }
}

const FACE_OFFSETS: [[isize; 3]; 6] = [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]];

/// One pass over the volume, accumulating `only` or every label.
fn accumulate(vol: &LabelVolume, only: Option<u32>) -> Vec<Accum> {
    let dims = vol.dims;
    let slots = if only.is_some() { 1 } else { vol.count as usize };
    let mut acc = vec![Accum::default(); slots];
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                let l = vol.labels[index(dims, x, y, z)];
                if l == 0 || only.is_some_and(|o| o != l) {
                    continue;
                }
                let a = &mut acc[if only.is_some() { 0 } else { l as usize - 1 }];
                a.volume += 1;
                a.sum[0] += x as f64 + 0.5;
                a.sum[1] += y as f64 + 0.5;
                a.sum[2] += z as f64 + 0.5;
                for d in FACE_OFFSETS {
                    if neighbor(dims, x, y, z, d).is_none_or(|w| vol.labels[w] != l) {
                        a.faces += 1;
                    }
                }
                // entering along +d: the previous point on the line is outside
                for (i, d) in CROFTON_DIRECTIONS.iter().enumerate() {
                    let back = [-d[0], -d[1], -d[2]];
                    if neighbor(dims, x, y, z, back).is_none_or(|w| vol.labels[w] != l) {
                        a.entries[i] += 1;
                    }
                }
            }
        }
    }
    acc
}

fn area_of(a: &Accum, estimator: SurfaceEstimator) -> f64 {
    match estimator {
        SurfaceEstimator::FaceCount => a.faces as f64,
        SurfaceEstimator::Crofton => crofton_area(&a.entries),
    }
}

pub fn surface_area(vol: &LabelVolume, label: u32, estimator: SurfaceEstimator) -> Result<f64, QuantifyError> {
    if label == 0 || label > vol.count {
        return Err(QuantifyError::UnknownLabel(label));
    }
    Ok(area_of(&accumulate(vol, Some(label))[0], estimator))
}

/// Statistics for labels `1..=count`, in label order.
pub fn component_properties(vol: &LabelVolume, estimator: SurfaceEstimator) -> Vec<ComponentStats> {
    accumulate(vol, None)
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let n = a.volume as f64;
            let area = area_of(a, estimator);
            ComponentStats {
                label: i as u32 + 1,
                volume: a.volume,
                centroid: [a.sum[0] / n, a.sum[1] / n, a.sum[2] / n],
                surface_area: area,
                sphericity: sphericity(n, area).expect("components are non-empty"),
            }
        })
        .collect()
}
