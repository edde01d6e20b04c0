//! Positive integer weights go through one weight-range reduction per
//! distance scale; answers come back in original units.
//!
//! cargo run --release --example weighted_graph

use dsssp::graph::DecrementalGraph;
use dsssp::oracle::ExactOracle;
use dsssp::sssp::{Preset, Variant, WeightedEstimator};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // A fast heavy route and a slow light detour to vertex 4.
    let edges = [(0, 1, 50), (1, 4, 50), (0, 2, 3), (2, 3, 4), (3, 4, 5), (4, 5, 1), (5, 0, 9)];
    let mut g = DecrementalGraph::load(6, &edges)?;
    let eps = 0.25;
    let mut est = WeightedEstimator::new(&g, 0, Variant::Dense, Preset::Conservative, eps, 1.0, 1)?;
    let mut exact = ExactOracle::new(&g, 0);
    println!("{} reductions", est.levels().len());
    let show = |est: &WeightedEstimator, exact: &ExactOracle| {
        for v in 0..6 {
            println!("  vertex {v}: exact {:?} estimate {:?}", exact.distance(v), est.query(v));
        }
    };
    show(&est, &exact);
    let e = g.find_edge(2, 3).unwrap();
    g.delete_edge(e)?;
    est.delete(e)?;
    exact.delete(e);
    println!("after deleting 2->3 the heavy route is the only one:");
    show(&est, &exact);
    if let Some(path) = est.report_path(5)? {
        println!("path to 5: {path:?}");
    }
    Ok(())
}
