//! Ask for an actual path, not just a distance, and check it edge by edge.
//!
//! cargo run --release --example report_paths

use dsssp::cli::{generate_graph, Family, GraphSpec};
use dsssp::oracle::{check_path, ExactOracle};
use dsssp::sssp::{CombinedEstimator, Preset, Variant};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut g = generate_graph(&GraphSpec { family: Family::SccGadgets, n: 80, m: 320, max_weight: 1 }, 3);
    let mut est = CombinedEstimator::new(&g, 0, Variant::Dense, Preset::Conservative, 1.0, 1.0, 3)?;
    let mut exact = ExactOracle::new(&g, 0);
    let mut order: Vec<usize> = g.alive_edges().collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(3));

    for batch in order.chunks(60) {
        for &e in batch {
            g.delete_edge(e)?;
            est.delete(e)?;
            exact.delete(e);
        }
        let target = (0..g.n()).rev().find(|&v| exact.distance(v).is_some_and(|d| d > 2));
        let Some(v) = target else { break };
        let path = est.report_path(v)?.expect("reachable vertices have a path");
        let length = check_path(&g, 0, v, &path)?;
        println!(
            "{} edges left: vertex {v} exact {} estimate {} path length {length} via {:?}",
            g.alive_count(),
            exact.distance(v).unwrap(),
            est.query(v).unwrap(),
            path
        );
    }
    Ok(())
}
