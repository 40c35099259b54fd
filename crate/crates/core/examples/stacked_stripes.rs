//! Stacks a 54-row ensemble into stripes with each binning method and writes
//! one SVG per method plus the scene JSON of the last one.
//!
//!     cargo run --example stacked_stripes -- out_dir

use std::path::PathBuf;

use accustripes::binning::BinningMethod;
use accustripes::compose::{build_scene, render_svg, ColorMode, Composition, SceneRequest};
use accustripes::ingest::{EnsembleDataset, EnsembleRow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "stripes".into()));
    std::fs::create_dir_all(&dir)?;

    let mut rng = ChaCha8Rng::seed_from_u64(54);
    let rows = (0..54)
        .map(|i| {
            let n = rng.random_range(300..1500);
            let dist = LogNormal::new(3.0 + 0.02 * i as f64, 0.5 + 0.005 * i as f64).unwrap();
            EnsembleRow { label: format!("tile_{i:03}"), samples: (0..n).map(|_| dist.sample(&mut rng)).collect() }
        })
        .collect();
    let ensemble = EnsembleDataset::from_rows("volume", rows)?;

    for (name, method, composition) in [
        ("ub", BinningMethod::uniform(), Composition::ColorOnly),
        ("bb", BinningMethod::bayesian_blocks(), Composition::Overlay),
        ("nb", BinningMethod::natural_breaks(), Composition::FilledCurve),
    ] {
        let req = SceneRequest { method, composition, color_mode: ColorMode::Log1p, ..Default::default() };
        let scene = build_scene(&ensemble, &req)?;
        let path = dir.join(format!("{name}.svg"));
        std::fs::write(&path, render_svg(&scene)?)?;
        let rects: usize = scene.stripes.iter().map(|s| s.rects.len()).sum();
        println!("{name}: {} stripes, {rects} rects, {}x{} px -> {}", scene.stripes.len(), scene.width(), scene.height(), path.display());
        if name == "nb" {
            std::fs::write(dir.join("nb.json"), serde_json::to_string_pretty(&scene)?)?;
        }
    }
    Ok(())
}
