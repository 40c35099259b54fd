//! Splits a quantified particle table into 54 spatial tiles and loads them
//! back as an ensemble.
//!
//!     cargo run --example tile_split -- tiles

use std::fs::File;
use std::path::PathBuf;

use accustripes::ingest::{
    load_manifest, split_into_tiles, write_manifest, write_table, ManifestEntry, TileGrid,
};
use accustripes::quantify::{quantify_volume, random_fixture, synth_volume, to_particle_table, FixtureParams, QuantifyOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "tiles".into()));
    std::fs::create_dir_all(&dir)?;

    let spec = random_fixture(&FixtureParams { seed: 42, ..Default::default() })?;
    let (_, stats) = quantify_volume(&synth_volume(&spec)?, &QuantifyOptions::default());
    let table = to_particle_table(&stats, "fixture");

    let side = spec.dims.map(|d| d as f64);
    let grid = TileGrid::with_tile_count([0.0; 3], side, 54)?;
    println!("{} particles into a {:?} grid", table.len(), grid.divisions);

    let tiles = split_into_tiles(&table, &grid)?;
    let mut entries = Vec::new();
    for tile in &tiles {
        let name = format!("{}.csv", tile.source);
        write_table(File::create(dir.join(&name))?, tile)?;
        entries.push(ManifestEntry { path: name, label: tile.source.clone() });
    }
    let manifest = dir.join("manifest.json");
    write_manifest(File::create(&manifest)?, &entries)?;

    let ensemble = load_manifest(&manifest, "sphericity")?;
    let busiest = ensemble.rows().iter().max_by_key(|r| r.samples.len()).unwrap();
    println!(
        "loaded {} rows, {} samples, sphericity in [{:.1}, {:.1}]; busiest tile {} with {}",
        ensemble.len(),
        ensemble.total_samples(),
        ensemble.global_min(),
        ensemble.global_max(),
        busiest.label,
        busiest.samples.len()
    );
    Ok(())
}
