//! One static low-diameter partition: remove few vertices so every remaining
//! strongly connected component has small diameter.
//!
//! cargo run --release --example separator

use dsssp::cli::{generate_graph, Family, GraphSpec};
use dsssp::separators::{lg, partition};
use dsssp::subgraph::Subgraph;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 200;
    let g = generate_graph(&GraphSpec { family: Family::Layered, n, m: 800, max_weight: 1 }, 1);
    for d in [16u64, 32, 64, 128] {
        let res = partition(&Subgraph::whole(&g), d)?;
        let charge: f64 = res.sccs.iter().map(|c| c.len() as f64 * (lg(n) - lg(c.len()))).sum();
        let largest = res.sccs.iter().map(|c| c.len()).max().unwrap_or(0);
        println!(
            "d={d:>3}: separator {:>3} (bound {:>7.1}), {} components, largest {largest}",
            res.separator.len(),
            4.0 * lg(n) / d as f64 * charge,
            res.sccs.len()
        );
    }
    Ok(())
}
