use serde::{Deserialize, Serialize};

use super::stripe::StripeModel;
use super::ComposeError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Layout {
    pub stripe_height: f64,
    pub gap: f64,
    pub label_gutter: f64,
    pub plot_width: f64,
    /// Height reserved below the stripes for the shared axis.
    pub axis_band: f64,
    pub right_margin: f64,
}

impl Default for Layout {
    fn default() -> Self {
        Self {
            stripe_height: 14.0,
            gap: 2.0,
            label_gutter: 60.0,
            plot_width: 1200.0,
            axis_band: 30.0,
            right_margin: 20.0,
        }
    }
}

impl Layout {
    pub fn stack_height(&self, rows: usize) -> f64 {
        rows as f64 * (self.stripe_height + self.gap) - self.gap
    }

    pub fn height(&self, rows: usize) -> f64 {
        self.stack_height(rows) + self.axis_band
    }

    pub fn width(&self) -> f64 {
        self.label_gutter + self.plot_width + self.right_margin
    }

    pub fn stripe_top(&self, row: usize) -> f64 {
        row as f64 * (self.stripe_height + self.gap)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tick {
    pub x: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub ticks: Vec<Tick>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneModel {
    pub axis: Axis,
    pub stripes: Vec<StripeModel>,
    pub layout: Layout,
}

impl SceneModel {
    pub fn height(&self) -> f64 {
        self.layout.height(self.stripes.len())
    }

    pub fn width(&self) -> f64 {
        self.layout.width()
    }
}

/// Step from the 1-2-5 progression giving at most `target + 1` ticks.
pub fn nice_step(span: f64, target: usize) -> f64 {
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let m = [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .find(|&m| m >= norm * (1.0 - 1e-12))
        .unwrap_or(10.0);
    m * mag
}

fn tick_label(v: f64, step: f64) -> String {
    let decimals = (-(step.log10() + 1e-9).floor()).max(0.0) as usize;
    let s = format!("{v:.decimals$}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        // avoid "-0"
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

/// Round-number ticks inside `[min, max]`, about eight of them.
pub fn axis_ticks(min: f64, max: f64) -> Vec<Tick> {
    if !(min < max) {
        return vec![Tick { x: min, label: tick_label(min, 1.0) }];
    }
    let step = nice_step(max - min, 8);
    let first = (min / step - 1e-9).ceil() as i64;
    let last = (max / step + 1e-9).floor() as i64;
    (first..=last)
        .map(|i| {
            let x = i as f64 * step;
            Tick { x, label: tick_label(x, step) }
        })
        .filter(|t| t.x >= min - 1e-9 * step && t.x <= max + 1e-9 * step)
        .collect()
}

/// Stacks stripes top to bottom above one shared axis.
pub fn stack_scene(stripes: Vec<StripeModel>, limits: (f64, f64), layout: Layout) -> Result<SceneModel, ComposeError> {
    if stripes.is_empty() {
        return Err(ComposeError::EmptyScene);
    }
    let (min, max) = limits;
    if !(min < max) {
        return Err(ComposeError::Layout(format!("axis range [{min}, {max}] is empty")));
    }
    Ok(SceneModel {
        axis: Axis { min, max, ticks: axis_ticks(min, max) },
        stripes,
        layout,
    })
}
