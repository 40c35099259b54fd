//! Silverman bandwidth and a Gaussian KDE drawn over a histogram stripe.
//!
//!     cargo run --example density_overlay -- overlay.svg

use accustripes::binning::{histogram, sturges_bin_count, uniform_edges};
use accustripes::compose::{
    compose_stripe, render_svg, stack_scene, ColorMode, ColorScale, Composition, CurveScale, Layout,
    Normalization,
};
use accustripes::density::{kde_curve, silverman_bandwidth, trapezoid};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "overlay.svg".into());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (a, b) = (Normal::new(10.0, 1.5)?, Normal::new(18.0, 0.8)?);
    let mut xs: Vec<f64> = (0..600).map(|i| if i % 3 == 0 { b.sample(&mut rng) } else { a.sample(&mut rng) }).collect();
    xs.sort_by(f64::total_cmp);
    let (lo, hi) = (xs[0], xs[xs.len() - 1]);

    let h = silverman_bandwidth(&xs, 1.0)?;
    let curve = kde_curve(&xs, h, lo, hi, 512)?;
    let wide = kde_curve(&xs, h, lo - 4.0 * h, hi + 4.0 * h, 512)?;
    println!("n={} bandwidth={h:.4} peak density={:.4}", xs.len(), curve.max_density());
    println!("integral over the padded grid: {:.5}", trapezoid(&wide));

    let hist = histogram(&xs, &uniform_edges((lo, hi), sturges_bin_count(xs.len())?)?)?;
    let scale = ColorScale::new(ColorMode::Linear, Normalization::Global, hist.max_count());
    let stripes = [Composition::ColorOnly, Composition::Overlay, Composition::FilledCurve]
        .into_iter()
        .map(|c| compose_stripe(&format!("{c:?}"), &hist, Some(&curve), c, &scale, CurveScale::PerRow))
        .collect::<Result<Vec<_>, _>>()?;
    let scene = stack_scene(stripes, (lo, hi), Layout::default())?;
    std::fs::write(&out, render_svg(&scene)?)?;
    println!("wrote {out}");
    Ok(())
}
