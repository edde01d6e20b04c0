//! Maintain a low-diameter decomposition under deletions: pieces are strongly
//! connected, their diameters stay bounded, and each split is balanced.
//!
//! cargo run --release --example decomposition

use dsssp::cli::{generate_graph, Family, GraphSpec};
use dsssp::decomp::{DecompConfig, Decomposition};
use dsssp::oracle::check_decomposition;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = generate_graph(&GraphSpec { family: Family::SccGadgets, n: 60, m: 240, max_weight: 1 }, 5);
    let mut dec = Decomposition::new(g.clone(), DecompConfig::adaptive(32, 48), 5)?;
    println!("start: {} pieces, separator {}", dec.piece_count(), dec.separator_size());
    let mut order: Vec<usize> = g.alive_edges().collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(5));
    for (step, e) in order.into_iter().enumerate() {
        let ev = dec.delete(e)?;
        if !ev.separator.is_empty() || ev.refinement.is_some() {
            let split = ev.refinement.as_ref().map(|r| {
                let sizes: Vec<usize> = r.pieces.iter().map(|&p| dec.piece(p).len()).collect();
                format!("piece of {} split into {sizes:?}", r.old_size)
            });
            println!("step {step}: {} into separator, {}", ev.separator.len(), split.unwrap_or_default());
        }
        check_decomposition(&dec)?;
    }
    let c = dec.counters();
    println!("end: {} pieces, separator {}, {} repartitions", dec.piece_count(), dec.separator_size(), c.repartitions);
    Ok(())
}
