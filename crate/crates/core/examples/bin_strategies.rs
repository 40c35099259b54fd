//! Bins one skewed ensemble three ways and prints the edges of the first row.
//!
//!     cargo run --example bin_strategies

use accustripes::binning::{bin_ensemble_with_frame, BinningMethod};
use accustripes::ingest::{EnsembleDataset, EnsembleRow};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let rows = (0..6)
        .map(|i| {
            let dist = LogNormal::new(2.0 + 0.2 * i as f64, 0.6).unwrap();
            EnsembleRow { label: format!("tile_{i:03}"), samples: (0..2000).map(|_| dist.sample(&mut rng)).collect() }
        })
        .collect();
    let ensemble = EnsembleDataset::from_rows("volume", rows)?;

    for (name, method) in [
        ("uniform", BinningMethod::uniform()),
        ("bayesian blocks", BinningMethod::bayesian_blocks()),
        ("natural breaks", BinningMethod::natural_breaks()),
    ] {
        let (frame, hists) = bin_ensemble_with_frame(&ensemble, &method, None)?;
        let h = &hists[0];
        println!("{name}: k={} limits=[{:.2}, {:.2}]", frame.k, frame.lo, frame.hi);
        let edges: Vec<String> = h.edges.iter().map(|e| format!("{e:.1}")).collect();
        println!("  edges  {}", edges.join(" "));
        println!("  counts {:?}", h.counts);
    }

    // zooming re-bins inside the window only
    let (_, zoomed) = bin_ensemble_with_frame(&ensemble, &BinningMethod::bayesian_blocks(), Some((5.0, 15.0)))?;
    println!("zoomed to [5, 15]: {} blocks, {} samples", zoomed[0].bins(), zoomed[0].n);
    Ok(())
}
