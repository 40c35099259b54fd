//! Starts the HTTP service with a generated dataset registered.
//!
//!     cargo run --example serve_api
//!     curl 'http://127.0.0.1:8787/datasets'
//!     curl 'http://127.0.0.1:8787/datasets/ds1/stripes?method=bb&composition=overlay'
//!     curl 'http://127.0.0.1:8787/datasets/ds1/rows/0?lo=10&hi=40'
//!
//! Pass `--once` to run a few requests in-process and exit instead.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::Arc;

use accustripes::ingest::{EnsembleDataset, EnsembleRow};
use accustripes::service::{self, handle_row_detail, handle_stripes, AppState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let rows = (0..12)
        .map(|i| {
            let dist = Gamma::new(2.0 + i as f64 * 0.5, 4.0).unwrap();
            EnsembleRow { label: format!("tile_{i:03}"), samples: (0..800).map(|_| dist.sample(&mut rng)).collect() }
        })
        .collect();
    let state = Arc::new(AppState::new(None));
    let meta = state.registry.insert(EnsembleDataset::from_rows("volume", rows)?).meta.clone();
    println!("registered {} with {} rows", meta.id, meta.row_count);

    if std::env::args().any(|a| a == "--once") {
        let q: BTreeMap<String, String> =
            [("method", "bb"), ("composition", "overlay")].map(|(k, v)| (k.to_string(), v.to_string())).into();
        let scene = handle_stripes(&state, &meta.id, &q).map_err(|e| e.message)?;
        println!("stripes: {} bytes of scene JSON", scene.len());
        let detail = handle_row_detail(&state, &meta.id, 0, &BTreeMap::new()).map_err(|e| e.message)?;
        println!("row 0: n={} median={:?}", detail.stats.n, detail.stats.median);
        return Ok(());
    }

    let port = std::env::var(service::PORT_ENV).ok().and_then(|p| p.parse().ok()).unwrap_or(service::DEFAULT_PORT);
    let addr = SocketAddr::from(([127, 0, 0, 1], port));
    tokio::runtime::Runtime::new()?.block_on(service::serve(addr, state))?;
    Ok(())
}
