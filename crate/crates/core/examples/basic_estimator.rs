//! Maintain approximate distances from a source while edges are deleted, and
//! compare every answer with an exact recomputation.
//!
//! cargo run --release --example basic_estimator

use dsssp::cli::{generate_graph, Family, GraphSpec};
use dsssp::oracle::ExactOracle;
use dsssp::sssp::{CombinedEstimator, Preset, Variant};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let eps = 0.5;
    let g = generate_graph(&GraphSpec { family: Family::Layered, n: 120, m: 480, max_weight: 1 }, 7);
    let mut est = CombinedEstimator::new(&g, 0, Variant::Dense, Preset::Conservative, eps, 1.0, 7)?;
    let mut exact = ExactOracle::new(&g, 0);
    println!("{} vertices, {} edges, {} distance scales", g.n(), g.alive_count(), est.scales().len());

    let mut order: Vec<usize> = g.alive_edges().collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(7));
    let mut worst: f64 = 1.0;
    for (step, e) in order.into_iter().enumerate() {
        est.delete(e)?;
        exact.delete(e);
        let truth = exact.distances();
        for v in 0..g.n() {
            match (est.query(v), truth[v]) {
                (Some(a), Some(d)) if d > 0 => {
                    assert!(a >= d, "estimates never undershoot");
                    worst = worst.max(a as f64 / d as f64);
                }
                (None, None) | (Some(_), Some(_)) => {}
                (a, d) => panic!("reachability disagrees at {v}: {a:?} vs {d:?}"),
            }
        }
        if step % 100 == 0 {
            let reachable = truth.iter().filter(|d| d.is_some()).count();
            println!("after {step:>3} deletions: {reachable:>3} reachable, worst ratio so far {worst:.3}");
        }
    }
    println!("worst stretch {worst:.3} (allowed {:.3})", 1.0 + eps);
    let c = est.counters();
    println!("work: {} tree scans, {} ES scans, {} repartitions", c.tree_scans, c.es_scans, c.repartitions);
    Ok(())
}
