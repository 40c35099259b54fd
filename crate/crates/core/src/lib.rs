//! Stacked-stripe visualization of ensembles of univariate distributions.
//!
//! Each row of an [`ingest::EnsembleDataset`] (for example the particle
//! volumes of one spatial tile) is binned with equal-width, Bayesian Blocks,
//! or natural-breaks edges over limits shared by the whole ensemble, colored
//! with viridis (empty bins black), and stacked into one comparable scene.
//! The [`quantify`] module produces such data from synthetic voxel volumes.
//!
//! ```
//! use accustripes::binning::{bin_ensemble, BinningMethod};
//! use accustripes::ingest::{EnsembleDataset, EnsembleRow};
//!
//! let ensemble = EnsembleDataset::from_rows(
//!     "volume",
//!     vec![
//!         EnsembleRow { label: "tile_000".into(), samples: vec![1.0, 2.0, 2.5, 9.0] },
//!         EnsembleRow { label: "tile_001".into(), samples: vec![0.5, 1.5, 7.0] },
//!     ],
//! )
//! .unwrap();
//! let hists = bin_ensemble(&ensemble, &BinningMethod::uniform(), None).unwrap();
//! assert_eq!(hists[0].edges, hists[1].edges);
//! ```

pub mod binning;
pub mod cli;
pub mod compose;
pub mod density;
pub mod ingest;
pub mod quantify;
pub mod service;
