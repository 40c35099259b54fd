//! Deterministic SVG output.
//!
//! Every coordinate is printed with three decimals and elements are emitted
//! in a fixed order (stripes top to bottom, bins left to right, curves after
//! bins, axis last), so equal scenes always give equal bytes.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::scene::{axis_ticks, nice_step, SceneModel};
use super::stripe::{Composition, Point};
use super::ComposeError;
use crate::binning::Histogram;

const BACKGROUND: &str = "#ffffff";
const INK: &str = "#333333";
const BAR: &str = "#3b528b";
const FONT: &str = "font-family=\"sans-serif\" font-size=\"10\"";

/// Fixed three-decimal formatting without negative zero.
pub fn fmt3(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".to_string()
    } else {
        s
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn header(out: &mut String, width: f64, height: f64) {
    let (w, h) = (fmt3(width), fmt3(height));
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    );
    let _ = writeln!(out, "<rect x=\"0.000\" y=\"0.000\" width=\"{w}\" height=\"{h}\" fill=\"{BACKGROUND}\"/>");
}

fn points_attr(points: impl Iterator<Item = (f64, f64)>) -> String {
    points
        .map(|(x, y)| format!("{},{}", fmt3(x), fmt3(y)))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Renders a stacked scene as a standalone SVG 1.1 document.
pub fn render_svg(scene: &SceneModel) -> Result<String, ComposeError> {
    let layout = &scene.layout;
    if !(layout.plot_width > 0.0 && layout.stripe_height > 0.0) || scene.stripes.is_empty() {
        return Err(ComposeError::Layout("plot area has zero size".into()));
    }
    let (min, max) = (scene.axis.min, scene.axis.max);
    if !(min < max) {
        return Err(ComposeError::Layout(format!("axis range [{min}, {max}] is empty")));
    }
    let px = |x: f64| layout.label_gutter + (x - min) / (max - min) * layout.plot_width;
    let sh = layout.stripe_height;

    let mut out = String::new();
    header(&mut out, scene.width(), scene.height());
    for (row, stripe) in scene.stripes.iter().enumerate() {
        let top = layout.stripe_top(row);
        let bottom = top + sh;
        let _ = writeln!(out, "<g class=\"stripe\" data-row=\"{row}\">");
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" dominant-baseline=\"middle\" {FONT} fill=\"{INK}\">{}</text>",
            fmt3(layout.label_gutter - 4.0),
            fmt3(top + 0.5 * sh),
            escape(&stripe.label)
        );
        for r in &stripe.rects {
            let color = r.color.hex();
            match (&r.top, stripe.composition) {
                (Some(outline), Composition::FilledCurve) => {
                    let pts = std::iter::once((px(r.x0), bottom))
                        .chain(outline.iter().map(|p| (px(p.x), bottom - p.y * sh)))
                        .chain(std::iter::once((px(r.x1), bottom)));
                    let _ = writeln!(out, "<polygon points=\"{}\" fill=\"{color}\"/>", points_attr(pts));
                }
                _ => {
                    let h = r.h * sh;
                    let _ = writeln!(
                        out,
                        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{color}\"/>",
                        fmt3(px(r.x0)),
                        fmt3(bottom - h),
                        fmt3(px(r.x1) - px(r.x0)),
                        fmt3(h)
                    );
                }
            }
        }
        if let (Some(curve), Composition::Overlay) = (&stripe.curve, stripe.composition) {
            let pts = curve.iter().map(|p: &Point| (px(p.x), bottom - p.y * sh));
            let _ = writeln!(
                out,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"#ffffff\" stroke-width=\"1\"/>",
                points_attr(pts)
            );
        }
        out.push_str("</g>\n");
    }

    let axis_y = layout.stack_height(scene.stripes.len()) + 4.0;
    out.push_str("<g class=\"axis\">\n");
    let _ = writeln!(
        out,
        "<line x1=\"{}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"{INK}\" stroke-width=\"1\"/>",
        fmt3(px(min)),
        fmt3(px(max)),
        y = fmt3(axis_y)
    );
    for t in &scene.axis.ticks {
        let x = fmt3(px(t.x));
        let _ = writeln!(
            out,
            "<line x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{}\" stroke=\"{INK}\" stroke-width=\"1\"/>",
            fmt3(axis_y),
            fmt3(axis_y + 4.0)
        );
        let _ = writeln!(
            out,
            "<text x=\"{x}\" y=\"{}\" text-anchor=\"middle\" {FONT} fill=\"{INK}\">{}</text>",
            fmt3(axis_y + 15.0),
            escape(&t.label)
        );
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum AxisMode {
    #[default]
    LinearY,
    LogY,
}

/// Relative bar heights; `None` for empty bins.
pub fn bar_heights(hist: &Histogram, mode: AxisMode) -> Vec<Option<f64>> {
    let max = hist.max_count();
    let scale = |c: u64| match mode {
        AxisMode::LinearY => c as f64,
        AxisMode::LogY => ((c + 1) as f64).log10(),
    };
    hist.counts
        .iter()
        .map(|&c| (c > 0).then(|| scale(c) / scale(max)))
        .collect()
}

/// Classic bar chart of one histogram.
pub fn render_single_histogram(hist: &Histogram, mode: AxisMode) -> String {
    let (width, height) = (640.0, 400.0);
    let (left, right, top, bottom) = (60.0, 20.0, 10.0, 40.0);
    let plot_w = width - left - right;
    let plot_h = height - top - bottom;
    let (lo, hi) = hist.range();
    let px = |x: f64| left + (x - lo) / (hi - lo) * plot_w;
    let base = top + plot_h;

    let mut out = String::new();
    header(&mut out, width, height);
    out.push_str("<g class=\"bars\">\n");
    for (i, h) in bar_heights(hist, mode).into_iter().enumerate() {
        let Some(h) = h else { continue };
        let (x0, x1) = (px(hist.edges[i]), px(hist.edges[i + 1]));
        let _ = writeln!(
            out,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{BAR}\" stroke=\"{BACKGROUND}\" stroke-width=\"0.5\"/>",
            fmt3(x0),
            fmt3(base - h * plot_h),
            fmt3(x1 - x0),
            fmt3(h * plot_h)
        );
    }
    out.push_str("</g>\n<g class=\"axis\">\n");
    let _ = writeln!(
        out,
        "<line x1=\"{}\" y1=\"{b}\" x2=\"{}\" y2=\"{b}\" stroke=\"{INK}\" stroke-width=\"1\"/>",
        fmt3(left),
        fmt3(left + plot_w),
        b = fmt3(base)
    );
    let _ = writeln!(
        out,
        "<line x1=\"{l}\" y1=\"{}\" x2=\"{l}\" y2=\"{}\" stroke=\"{INK}\" stroke-width=\"1\"/>",
        fmt3(top),
        fmt3(base),
        l = fmt3(left)
    );
    for t in axis_ticks(lo, hi) {
        let x = fmt3(px(t.x));
        let _ = writeln!(
            out,
            "<text x=\"{x}\" y=\"{}\" text-anchor=\"middle\" {FONT} fill=\"{INK}\">{}</text>",
            fmt3(base + 15.0),
            escape(&t.label)
        );
    }
    let max = hist.max_count();
    let y_ticks: Vec<(f64, String)> = match mode {
        AxisMode::LinearY if max > 0 => {
            let step = nice_step(max as f64, 5).max(1.0);
            (0..)
                .map(|i| i as f64 * step)
                .take_while(|&v| v <= max as f64)
                .map(|v| (v / max as f64, format!("{v:.0}")))
                .collect()
        }
        AxisMode::LogY if max > 0 => {
            let top_log = ((max + 1) as f64).log10();
            (0..)
                .map(|e| 10u64.pow(e))
                .take_while(|&v| v <= max)
                .map(|v| (((v + 1) as f64).log10() / top_log, v.to_string()))
                .collect()
        }
        _ => Vec::new(),
    };
    for (frac, label) in y_ticks {
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" dominant-baseline=\"middle\" {FONT} fill=\"{INK}\">{}</text>",
            fmt3(left - 4.0),
            fmt3(base - frac * plot_h),
            label
        );
    }
    out.push_str("</g>\n</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compose::color::Rgb;
    use crate::compose::scene::{stack_scene, Layout};
    use crate::compose::stripe::{Rect, StripeModel};

    fn scene() -> SceneModel {
        let rects = vec![
            Rect { x0: 0.0, x1: 1.0, h: 1.0, color: Rgb(68, 1, 84), top: None },
            Rect { x0: 1.0, x1: 2.0, h: 1.0, color: Rgb::BLACK, top: None },
        ];
        let s = StripeModel { label: "a<b".into(), composition: Composition::ColorOnly, rects, curve: None };
        stack_scene(vec![s], (0.0, 2.0), Layout::default()).unwrap()
    }

    #[test]
    fn deterministic_and_single_black_fill() {
        let a = render_svg(&scene()).unwrap();
        let b = render_svg(&scene()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.matches("fill=\"#000000\"").count(), 1);
        assert!(a.contains("a&lt;b"));
    }

    #[test]
    fn zero_area_layout_is_rejected() {
        let mut s = scene();
        s.layout.plot_width = 0.0;
        assert!(matches!(render_svg(&s), Err(ComposeError::Layout(_))));
    }

    #[test]
    fn log_bars() {
        let h = Histogram { edges: vec![0.0, 1.0, 2.0, 3.0], counts: vec![10, 1, 0], n: 11 };
        let bars = bar_heights(&h, AxisMode::LogY);
        assert_eq!(bars[0], Some(1.0));
        assert!((bars[1].unwrap() - 2f64.log10() / 11f64.log10()).abs() < 1e-15);
        assert_eq!(bars[2], None);
        let svg = render_single_histogram(&h, AxisMode::LogY);
        assert_eq!(svg.matches(&format!("fill=\"{BAR}\"")).count(), 2);
    }

    #[test]
    fn equal_counts_give_equal_bars() {
        let h = Histogram { edges: vec![0.0, 1.0, 2.0], counts: vec![4, 4], n: 8 };
        assert_eq!(bar_heights(&h, AxisMode::LinearY), vec![Some(1.0), Some(1.0)]);
    }

    #[test]
    fn fmt3_has_no_negative_zero() {
        assert_eq!(fmt3(-0.0001), "0.000");
        assert_eq!(fmt3(1.23456), "1.235");
    }
}
