//! Stripe geometry, stacking, and rendering.

mod color;
mod scene;
mod stripe;
mod svg;
mod viridis_table;

pub use color::{map_color, viridis, ColorMode, ColorScale, Normalization, Rgb};
pub use scene::{axis_ticks, nice_step, stack_scene, Axis, Layout, SceneModel, Tick};
pub use stripe::{compose_stripe, Composition, CurveScale, Point, Rect, StripeModel};
pub use svg::{bar_heights, fmt3, render_single_histogram, render_svg, AxisMode};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::binning::{self, BinningError, BinningMethod, Histogram};
use crate::density::{self, DensityCurve, DensityError, DISPLAY_POINTS};
use crate::ingest::EnsembleDataset;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComposeError {
    #[error("composition needs a density curve")]
    MissingCurve,
    #[error("density curve does not span the histogram range [{lo}, {hi}]")]
    CurveSpan { lo: f64, hi: f64 },
    #[error("scene has no stripes")]
    EmptyScene,
    #[error("layout error: {0}")]
    Layout(String),
    #[error(transparent)]
    Binning(#[from] BinningError),
    #[error(transparent)]
    Density(#[from] DensityError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum CurveScaling {
    #[default]
    PerRow,
    Global,
}

/// Everything needed to turn an ensemble into a stacked scene.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SceneRequest {
    pub method: BinningMethod,
    pub composition: Composition,
    pub color_mode: ColorMode,
    pub normalization: Normalization,
    pub curve_scaling: CurveScaling,
    /// Zoom window; samples outside are dropped before binning.
    pub range: Option<(f64, f64)>,
    pub layout: Layout,
}

impl Default for SceneRequest {
    fn default() -> Self {
        Self {
            method: BinningMethod::uniform(),
            composition: Composition::ColorOnly,
            color_mode: ColorMode::Linear,
            normalization: Normalization::Global,
            curve_scaling: CurveScaling::PerRow,
            range: None,
            layout: Layout::default(),
        }
    }
}

/// Bandwidth used for rows whose samples have no spread.
pub fn fallback_bandwidth(lo: f64, hi: f64) -> f64 {
    let span = hi - lo;
    if span > 0.0 {
        1e-3 * span
    } else {
        1.0
    }
}

/// Density of one (already filtered) row on the display grid over `[lo, hi]`.
pub fn row_curve(samples: &[f64], lo: f64, hi: f64, fallback: f64) -> Result<DensityCurve, ComposeError> {
    if samples.is_empty() {
        return Ok(DensityCurve::flat(lo, hi, DISPLAY_POINTS, fallback));
    }
    let h = density::silverman_bandwidth(samples, fallback)?;
    Ok(density::kde_curve(samples, h, lo, hi, DISPLAY_POINTS)?)
}

/// Histograms plus, when needed, density curves for each row.
pub struct BinnedEnsemble {
    pub frame: binning::BinningFrame,
    pub histograms: Vec<Histogram>,
    pub curves: Option<Vec<DensityCurve>>,
}

pub fn bin_and_estimate(ensemble: &EnsembleDataset, req: &SceneRequest) -> Result<BinnedEnsemble, ComposeError> {
    let (frame, histograms) = binning::bin_ensemble_with_frame(ensemble, &req.method, req.range)?;
    let curves = if req.composition.needs_curve() {
        let fallback = fallback_bandwidth(ensemble.global_min(), ensemble.global_max());
        let curves = ensemble
            .rows()
            .par_iter()
            .zip(&histograms)
            .map(|(row, hist)| {
                let (lo, hi) = hist.range();
                let samples = binning::filtered_sorted(&row.samples, req.range);
                row_curve(&samples, lo, hi, fallback)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Some(curves)
    } else {
        None
    };
    Ok(BinnedEnsemble { frame, histograms, curves })
}

/// Full pipeline: bin, estimate densities, color, and stack.
pub fn build_scene(ensemble: &EnsembleDataset, req: &SceneRequest) -> Result<SceneModel, ComposeError> {
    let binned = bin_and_estimate(ensemble, req)?;
    let scales = ColorScale::for_histograms(req.color_mode, req.normalization, &binned.histograms);
    let curve_scale = match (&binned.curves, req.curve_scaling) {
        (Some(curves), CurveScaling::Global) => {
            CurveScale::Global(curves.iter().map(DensityCurve::max_density).fold(0.0, f64::max))
        }
        _ => CurveScale::PerRow,
    };
    let stripes = ensemble
        .rows()
        .par_iter()
        .enumerate()
        .map(|(i, row)| {
            let curve = binned.curves.as_ref().map(|c| &c[i]);
            compose_stripe(&row.label, &binned.histograms[i], curve, req.composition, &scales[i], curve_scale)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let limits = binned.histograms[0].range();
    stack_scene(stripes, limits, req.layout)
}
