use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::viridis_table::VIRIDIS;
use crate::binning::Histogram;

/// 8-bit sRGB color.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rgb(pub u8, pub u8, pub u8);

impl Rgb {
    pub const BLACK: Rgb = Rgb(0, 0, 0);
    pub const WHITE: Rgb = Rgb(255, 255, 255);

    pub fn hex(&self) -> String {
        format!("#{:02x}{:02x}{:02x}", self.0, self.1, self.2)
    }

    pub fn parse_hex(s: &str) -> Option<Rgb> {
        let s = s.strip_prefix('#')?;
        if s.len() != 6 {
            return None;
        }
        let c = |i: usize| u8::from_str_radix(&s[i..i + 2], 16).ok();
        Some(Rgb(c(0)?, c(2)?, c(4)?))
    }
}

impl fmt::Display for Rgb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.hex())
    }
}

impl Serialize for Rgb {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.hex())
    }
}

impl<'de> Deserialize<'de> for Rgb {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Rgb::parse_hex(&s).ok_or_else(|| serde::de::Error::custom(format!("invalid color `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ColorMode {
    #[default]
    Linear,
    Log1p,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Normalization {
    #[default]
    Global,
    PerRow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ColorScale {
    pub mode: ColorMode,
    pub normalization: Normalization,
    /// Count mapped to the top of the ramp; at least 1.
    pub domain_max: u64,
}

impl ColorScale {
    pub fn new(mode: ColorMode, normalization: Normalization, domain_max: u64) -> Self {
        Self {
            mode,
            normalization,
            domain_max: domain_max.max(1),
        }
    }

    /// One scale per histogram: a shared domain for global normalization,
    /// each row's own maximum otherwise.
    pub fn for_histograms(mode: ColorMode, normalization: Normalization, hists: &[Histogram]) -> Vec<ColorScale> {
        match normalization {
            Normalization::Global => {
                let max = hists.iter().map(Histogram::max_count).max().unwrap_or(0);
                vec![ColorScale::new(mode, normalization, max); hists.len()]
            }
            Normalization::PerRow => hists
                .iter()
                .map(|h| ColorScale::new(mode, normalization, h.max_count()))
                .collect(),
        }
    }

    /// Ramp position of a non-zero count, in `(0, 1]`.
    pub fn position(&self, count: u64) -> f64 {
        let c = count.min(self.domain_max) as f64;
        let d = self.domain_max as f64;
        match self.mode {
            ColorMode::Linear => c / d,
            ColorMode::Log1p => c.ln_1p() / d.ln_1p(),
        }
    }
}

/// Viridis ramp at `t` in `[0, 1]`, linearly interpolated between table entries.
pub fn viridis(t: f64) -> Rgb {
    let t = if t.is_nan() { 0.0 } else { t.clamp(0.0, 1.0) };
    let pos = t * (VIRIDIS.len() - 1) as f64;
    let i = (pos.floor() as usize).min(VIRIDIS.len() - 2);
    let f = pos - i as f64;
    let ch = |c: usize| {
        let v = VIRIDIS[i][c] * (1.0 - f) + VIRIDIS[i + 1][c] * f;
        (v * 255.0).round() as u8
    };
    Rgb(ch(0), ch(1), ch(2))
}

/// Bin color: empty bins are black, the rest follow viridis.
pub fn map_color(count: u64, scale: &ColorScale) -> Rgb {
    if count == 0 {
        return Rgb::BLACK;
    }
    viridis(scale.position(count))
}
