//! The sampling-based variant for sparse graphs. Its guarantee holds with
//! high probability, so this runs several seeds and reports the worst stretch.
//!
//! cargo run --release --example sparse_estimator

use dsssp::cli::{generate_graph, Family, GraphSpec};
use dsssp::oracle::ExactOracle;
use dsssp::sssp::{CombinedEstimator, Preset, ScaleStructure, Variant};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let eps = 0.5;
    for seed in 0..4u64 {
        let g = generate_graph(&GraphSpec { family: Family::ErdosRenyi, n: 90, m: 270, max_weight: 1 }, seed);
        let mut est = CombinedEstimator::new(&g, 0, Variant::Sparse, Preset::Conservative, eps, 1.0, seed)?;
        let sampled = est.scales().iter().filter(|s| matches!(s.structure, ScaleStructure::Sparse(_))).count();
        let mut exact = ExactOracle::new(&g, 0);
        let mut order: Vec<usize> = g.alive_edges().collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut worst: f64 = 1.0;
        for e in order {
            est.delete(e)?;
            exact.delete(e);
            for (v, d) in exact.distances().iter().enumerate() {
                if let (Some(d), Some(a)) = (d, est.query(v)) {
                    if *d > 0 {
                        worst = worst.max(a as f64 / *d as f64);
                    }
                }
            }
        }
        let c = est.counters();
        println!(
            "seed {seed}: {sampled} sampled scales, worst stretch {worst:.3}, {} local trees, {} super-edge insertions",
            c.local_trees, c.super_inserts
        );
    }
    println!("target stretch (1+2ε)² = {:.3}", (1.0 + 2.0 * eps) * (1.0 + 2.0 * eps));
    Ok(())
}
