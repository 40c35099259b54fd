use serde::{Deserialize, Serialize};

use super::color::{map_color, ColorScale, Rgb};
use super::ComposeError;
use crate::binning::Histogram;
use crate::density::DensityCurve;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Composition {
    #[default]
    ColorOnly,
    Overlay,
    FilledCurve,
}

impl Composition {
    pub fn needs_curve(&self) -> bool {
        !matches!(self, Composition::ColorOnly)
    }
}

/// How a density curve is scaled to the stripe height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum CurveScale {
    /// The row's own peak reaches the stripe top.
    PerRow,
    /// This density reaches the stripe top in every row.
    Global(f64),
}

/// Point in stripe-local coordinates: `x` in data units, `y` as a fraction
/// of the stripe height measured from its bottom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

/// One bin of a stripe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    /// Height fraction; for filled curves, the peak of the clipped outline.
    pub h: f64,
    pub color: Rgb,
    /// Upper outline of the area under the curve within `[x0, x1]`
    /// (filled-curve stripes only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top: Option<Vec<Point>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripeModel {
    pub label: String,
    pub composition: Composition,
    pub rects: Vec<Rect>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve: Option<Vec<Point>>,
}

/// Scales a curve to stripe units and clips it at the stripe top, adding
/// the crossing points so the clipped outline stays piecewise linear.
fn scaled_polyline(curve: &DensityCurve, scale: CurveScale) -> Vec<Point> {
    let peak = match scale {
        CurveScale::PerRow => curve.max_density(),
        CurveScale::Global(m) => m,
    };
    let factor = if peak > 0.0 { 1.0 / peak } else { 0.0 };
    let raw: Vec<Point> = curve
        .xs
        .iter()
        .zip(&curve.ys)
        .map(|(&x, &y)| Point { x, y: y * factor })
        .collect();

    let mut out = Vec::with_capacity(raw.len());
    for (i, p) in raw.iter().enumerate() {
        if i > 0 {
            let q = raw[i - 1];
            if (q.y > 1.0) != (p.y > 1.0) {
                let t = (1.0 - q.y) / (p.y - q.y);
                out.push(Point { x: q.x + t * (p.x - q.x), y: 1.0 });
            }
        }
        out.push(Point { x: p.x, y: p.y.min(1.0) });
    }
    out
}

fn interpolate(line: &[Point], x: f64) -> f64 {
    let i = line.partition_point(|p| p.x <= x);
    if i == 0 {
        return line[0].y;
    }
    if i == line.len() {
        return line[line.len() - 1].y;
    }
    let (a, b) = (line[i - 1], line[i]);
    if b.x == a.x {
        return b.y;
    }
    a.y + (x - a.x) / (b.x - a.x) * (b.y - a.y)
}

/// Outline of the area under `line` restricted to `[x0, x1]`.
fn clip_outline(line: &[Point], x0: f64, x1: f64) -> Vec<Point> {
    let mut top = vec![Point { x: x0, y: interpolate(line, x0) }];
    top.extend(line.iter().copied().filter(|p| p.x > x0 && p.x < x1));
    top.push(Point { x: x1, y: interpolate(line, x1) });
    top
}

/// Builds the stripe for one histogram.
pub fn compose_stripe(
    label: &str,
    hist: &Histogram,
    curve: Option<&DensityCurve>,
    composition: Composition,
    scale: &ColorScale,
    curve_scale: CurveScale,
) -> Result<StripeModel, ComposeError> {
    let mut rects: Vec<Rect> = hist
        .edges
        .windows(2)
        .zip(&hist.counts)
        .map(|(e, &c)| Rect {
            x0: e[0],
            x1: e[1],
            h: 1.0,
            color: map_color(c, scale),
            top: None,
        })
        .collect();
    if !composition.needs_curve() {
        return Ok(StripeModel { label: label.to_string(), composition, rects, curve: None });
    }

    let curve = curve.ok_or(ComposeError::MissingCurve)?;
    let (lo, hi) = hist.range();
    let span_ok = curve.xs.len() >= 2
        && curve.xs[0] <= lo + 1e-9 * (hi - lo)
        && curve.xs[curve.xs.len() - 1] >= hi - 1e-9 * (hi - lo);
    if !span_ok {
        return Err(ComposeError::CurveSpan { lo, hi });
    }
    let line = scaled_polyline(curve, curve_scale);
    if composition == Composition::FilledCurve {
        for r in &mut rects {
            let top = clip_outline(&line, r.x0, r.x1);
            r.h = top.iter().map(|p| p.y).fold(0.0, f64::max);
            r.top = Some(top);
        }
    }
    Ok(StripeModel {
        label: label.to_string(),
        composition,
        rects,
        curve: Some(line),
    })
}
