use serde::{Deserialize, Serialize};

use super::volume::{index, Dims, VoxelVolume};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    pub dims: Dims,
    pub bits: Vec<bool>,
}

impl Mask {
    pub fn foreground_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// Foreground where `value >= t`.
pub fn threshold_mask(vol: &VoxelVolume, t: f64) -> Mask {
    Mask {
        dims: vol.dims,
        bits: vol.values.iter().map(|&v| f64::from(v) >= t).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Connectivity {
    Six,
    #[default]
    TwentySix,
}

impl Connectivity {
    pub fn from_count(n: u32) -> Option<Self> {
        match n {
            6 => Some(Self::Six),
            26 => Some(Self::TwentySix),
            _ => None,
        }
    }

    /// Neighbor offsets that precede a voxel in scan order.
    fn backward_offsets(self) -> Vec<[isize; 3]> {
        match self {
            Connectivity::Six => vec![[-1, 0, 0], [0, -1, 0], [0, 0, -1]],
            Connectivity::TwentySix => {
                let mut v = Vec::with_capacity(13);
                for dz in -1..=1isize {
                    for dy in -1..=1isize {
                        for dx in -1..=1isize {
                            if dz < 0 || (dz == 0 && dy < 0) || (dz == 0 && dy == 0 && dx < 0) {
                                v.push([dx, dy, dz]);
                            }
                        }
                    }
                }
                v
            }
        }
    }
}

/// Component labels, 0 for background and `1..=count` otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVolume {
    pub dims: Dims,
    pub labels: Vec<u32>,
    pub count: u32,
}

impl LabelVolume {
    pub fn get(&self, x: usize, y: usize, z: usize) -> u32 {
        self.labels[index(self.dims, x, y, z)]
    }
}

fn find(parent: &mut [u32], mut v: u32) -> u32 {
    let mut root = v;
    while parent[root as usize] != root {
        root = parent[root as usize];
    }
    while parent[v as usize] != root {
        let next = parent[v as usize];
        parent[v as usize] = root;
        v = next;
    }
    root
}

/// Labels maximal connected foreground sets in first-encounter scan order.
///
/// Union-find over voxel indices; every root is the smallest index of its
/// set, so numbering roots as they are met yields scan-order labels.
pub fn connected_components(mask: &Mask, connectivity: Connectivity) -> LabelVolume {
    let dims = mask.dims;
    let n = mask.bits.len();
    assert!(n < u32::MAX as usize, "volume too large for 32-bit labels");
    let offsets = connectivity.backward_offsets();
    let mut parent: Vec<u32> = (0..n as u32).collect();

    for z in 0..dims[2] {
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                let v = index(dims, x, y, z);
                if !mask.bits[v] {
                    continue;
                }
                for o in &offsets {
                    let (nx, ny, nz) = (x as isize + o[0], y as isize + o[1], z as isize + o[2]);
                    if nx < 0 || ny < 0 || nz < 0 || nx >= dims[0] as isize || ny >= dims[1] as isize {
                        continue;
                    }
                    let w = index(dims, nx as usize, ny as usize, nz as usize);
                    if !mask.bits[w] {
                        continue;
                    }
                    let a = find(&mut parent, v as u32);
                    let b = find(&mut parent, w as u32);
                    if a != b {
                        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                        parent[hi as usize] = lo;
                    }
                }
            }
        }
    }

    let mut labels = vec![0u32; n];
    let mut count = 0u32;
    for v in 0..n {
        if !mask.bits[v] {
            continue;
        }
        let root = find(&mut parent, v as u32) as usize;
        if root == v {
            count += 1;
            labels[v] = count;
        } else {
            labels[v] = labels[root];
        }
    }
    LabelVolume { dims, labels, count }
}
