//! Operation counters instead of wall-clock time: a small sweep printed as CSV.
//!
//! cargo run --release --example bench_counters

use dsssp::cli::{cmd_bench, Family, GraphSpec};
use dsssp::sssp::{Preset, Variant};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let specs: Vec<GraphSpec> =
        [50, 100, 200].iter().map(|&n| GraphSpec { family: Family::Layered, n, m: 4 * n, max_weight: 1 }).collect();
    let csv = cmd_bench(&specs, &[Variant::Exact, Variant::Adaptive, Variant::Dense], &[1.0], Preset::Conservative, 0, 1)?;
    print!("{csv}");
    Ok(())
}
