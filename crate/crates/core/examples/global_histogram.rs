//! One pooled histogram of the whole ensemble on linear and log axes, for
//! comparison with the stacked view.
//!
//!     cargo run --example global_histogram

use accustripes::cli::global_histogram;
use accustripes::compose::{bar_heights, render_single_histogram, AxisMode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Pareto};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let dist = Pareto::new(10.0, 1.2)?;
    let xs: Vec<f64> = (0..50_000).map(|_| dist.sample(&mut rng)).collect();
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let hist = global_histogram(&xs, (lo, hi))?;
    println!("{} bins over [{lo:.1}, {hi:.1}]", hist.bins());

    for (mode, file) in [(AxisMode::LinearY, "global_linear.svg"), (AxisMode::LogY, "global_log.svg")] {
        let bars: Vec<String> = bar_heights(&hist, mode)
            .iter()
            .take(8)
            .map(|h| h.map_or("-".into(), |h| format!("{h:.2}")))
            .collect();
        println!("{mode:?}: {} ...", bars.join(" "));
        std::fs::write(file, render_single_histogram(&hist, mode))?;
    }
    Ok(())
}
