//! Seeded trials against deletion policies, including ones that watch the
//! answers and aim at the structure's weak spots.
//!
//! cargo run --release --example adversaries

use dsssp::cli::{Family, GraphSpec};
use dsssp::oracle::{run_trial, PolicyKind, TrialConfig};
use dsssp::sssp::Variant;

fn main() {
    let spec = GraphSpec { family: Family::Layered, n: 100, m: 400, max_weight: 1 };
    for policy in [PolicyKind::ObliviousRandom, PolicyKind::AdaptiveGreedy, PolicyKind::RootHunter] {
        let mut cfg = TrialConfig::new(spec.clone(), Variant::Adaptive, 1.0);
        cfg.policy = policy;
        cfg.query_every = 1;
        for seed in 0..3 {
            let r = run_trial(&cfg, seed);
            println!(
                "{:<16} seed {seed}: {} deletions, {} answers observed, {} violations, worst ratio {:.3}, {} repartitions",
                policy.name(),
                r.steps,
                r.interaction.answers,
                r.violations.total(),
                r.worst_ratio,
                r.counters.repartitions
            );
        }
    }
}
