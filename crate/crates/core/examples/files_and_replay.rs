//! Write a graph and a deletion script to disk, replay them, and verify the
//! same files against the exact oracle.
//!
//! cargo run --release --example files_and_replay

use dsssp::cli::{cmd_generate, cmd_run, cmd_verify_files, trial_config, Family, GraphSpec, RunConfig, ScriptSource};
use dsssp::oracle::PolicyKind;
use dsssp::sssp::{Preset, Variant};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("dsssp-example");
    std::fs::create_dir_all(&dir)?;
    let spec = GraphSpec { family: Family::ErdosRenyi, n: 50, m: 200, max_weight: 1 };
    let made = cmd_generate(&spec, 9, 10, &dir.join("demo"))?;
    println!("wrote {} and {}", made.graph_file.display(), made.script_file.display());

    let cfg = RunConfig {
        graph: made.graph_file.clone(),
        script: ScriptSource::File(made.script_file.clone()),
        variant: Variant::Dense,
        epsilon: 0.5,
        preset: Preset::Conservative,
        c_param: 1.0,
        source: 0,
        seed: 9,
        out: None,
    };
    let lines = cmd_run(&cfg)?;
    for line in lines.lines().take(3) {
        println!("{line}");
    }
    println!("... {} events", lines.lines().count());

    let tc = trial_config(spec, Variant::Dense, Preset::Conservative, 0.5, PolicyKind::ObliviousScripted, None);
    let (summary, _) = cmd_verify_files(&tc, &made.graph_file, Some(&made.script_file), 9)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}
