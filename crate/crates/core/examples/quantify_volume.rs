//! Synthesizes a particle volume, labels it and prints shape statistics.
//!
//!     cargo run --example quantify_volume

use accustripes::quantify::{
    quantify_volume, random_fixture, synth_volume, Connectivity, FixtureParams, QuantifyOptions, SurfaceEstimator,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = FixtureParams { dims: [96; 3], balls: 60, agglomerates: 8, noise_sigma: 0.05, seed: 9, ..Default::default() };
    let spec = random_fixture(&params)?;
    let volume = synth_volume(&spec)?;
    println!("{} shapes in a {:?} volume", spec.shapes.len(), spec.dims);

    for estimator in [SurfaceEstimator::Crofton, SurfaceEstimator::FaceCount] {
        let opts = QuantifyOptions { estimator, connectivity: Connectivity::TwentySix, ..Default::default() };
        let (labels, stats) = quantify_volume(&volume, &opts);
        let mean_s = stats.iter().map(|s| s.sphericity).sum::<f64>() / stats.len() as f64;
        println!("{estimator:?}: {} components, mean sphericity {mean_s:.1}", labels.count);
    }

    let (_, mut stats) = quantify_volume(&volume, &QuantifyOptions::default());
    stats.sort_by_key(|s| std::cmp::Reverse(s.volume));
    println!("largest components:");
    println!("{:>6} {:>8} {:>10} {:>10}  centroid", "label", "volume", "area", "sphericity");
    for s in stats.iter().take(5) {
        let c = s.centroid;
        println!(
            "{:>6} {:>8} {:>10.1} {:>10.1}  ({:.1}, {:.1}, {:.1})",
            s.label, s.volume, s.surface_area, s.sphericity, c[0], c[1], c[2]
        );
    }
    Ok(())
}
