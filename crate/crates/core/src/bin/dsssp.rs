use clap::{Args, Parser, Subcommand, ValueEnum};
use dsssp::cli::{self, Family, GraphSpec, RunConfig, ScriptSource};
use dsssp::oracle::{Fault, PolicyKind};
use dsssp::sssp::{Preset, Variant};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "dsssp", version, about = "Decremental approximate SSSP harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random graph and a deletion script.
    Generate {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        query_every: usize,
        /// Output prefix; writes <out>.graph and <out>.script.
        #[arg(long)]
        out: PathBuf,
    },
    /// Replay a script and print one JSON line per query.
    Run {
        /// A saved RunConfig; the other flags are ignored when given.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, required_unless_present = "config")]
        graph: Option<PathBuf>,
        /// Without a script, every edge is deleted in random order.
        #[arg(long)]
        script: Option<PathBuf>,
        #[command(flatten)]
        algo: AlgoArgs,
        #[arg(long, default_value_t = 0)]
        source: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Save the effective configuration here.
        #[arg(long)]
        save_config: Option<PathBuf>,
    },
    /// Check seeded trials against the exact oracle; exits nonzero on failure.
    Verify {
        /// Verify this graph instead of generated ones.
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long, requires = "graph")]
        script: Option<PathBuf>,
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        algo: AlgoArgs,
        #[arg(long, value_enum, default_value_t = PolicyArg::ObliviousRandom)]
        policy: PolicyArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        trials: u64,
        /// Check decompositions and the ordering invariant after every deletion.
        #[arg(long)]
        invariants: bool,
        /// Deliberately broken answers, to see the harness fail.
        #[arg(long, value_enum)]
        inject: Option<FaultArg>,
        /// Trial reports as JSON lines.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Counter tables over a sweep, as CSV.
    Bench {
        #[arg(long, value_enum, default_value_t = FamilyArg::Layered)]
        family: FamilyArg,
        #[arg(long, value_delimiter = ',', default_values_t = [50usize, 100, 200])]
        n: Vec<usize>,
        /// Edges per vertex.
        #[arg(long, default_value_t = 4)]
        density: usize,
        #[arg(long, default_value_t = 1)]
        max_weight: u64,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [VariantArg::Exact, VariantArg::Adaptive, VariantArg::Dense, VariantArg::Sparse])]
        variant: Vec<VariantArg>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.5f64, 1.0])]
        epsilon: Vec<f64>,
        #[arg(long, value_enum, default_value_t = PresetArg::Conservative)]
        preset: PresetArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        trials: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SpecArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::Layered)]
    family: FamilyArg,
    #[arg(long = "vertices", default_value_t = 100)]
    vertices: usize,
    #[arg(long = "edges", default_value_t = 400)]
    edges: usize,
    #[arg(long, default_value_t = 1)]
    max_weight: u64,
}

impl SpecArgs {
    fn spec(&self) -> GraphSpec {
        GraphSpec { family: self.family.into(), n: self.vertices, m: self.edges, max_weight: self.max_weight }
    }
}

#[derive(Args)]
struct AlgoArgs {
    #[arg(long, value_enum, default_value_t = VariantArg::Dense)]
    variant: VariantArg,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    #[arg(long, value_enum, default_value_t = PresetArg::Conservative)]
    preset: PresetArg,
    /// Constant in front of the lg²n factor of the paper preset.
    #[arg(long, default_value_t = 1.0)]
    c_param: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Adaptive,
    Dense,
    Sparse,
    Exact,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Adaptive => Variant::Adaptive,
            VariantArg::Dense => Variant::Dense,
            VariantArg::Sparse => Variant::Sparse,
            VariantArg::Exact => Variant::Exact,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Conservative,
    Paper,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::Conservative => Preset::Conservative,
            PresetArg::Paper => Preset::Paper,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    ErdosRenyi,
    Layered,
    SccGadgets,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::ErdosRenyi => Family::ErdosRenyi,
            FamilyArg::Layered => Family::Layered,
            FamilyArg::SccGadgets => Family::SccGadgets,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    ObliviousRandom,
    AdaptiveGreedy,
    RootHunter,
}

impl From<PolicyArg> for PolicyKind {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::ObliviousRandom => PolicyKind::ObliviousRandom,
            PolicyArg::AdaptiveGreedy => PolicyKind::AdaptiveGreedy,
            PolicyArg::RootHunter => PolicyKind::RootHunter,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    DropAdditive,
}

/// Writes to stdout; a closed pipe is not an error.
fn say(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), cli::CliError> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => say(text),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn run(args: Cli) -> Result<ExitCode, cli::CliError> {
    match args.command {
        Command::Generate { spec, seed, query_every, out } => {
            let made = cli::cmd_generate(&spec.spec(), seed, query_every, &out)?;
            say(&(serde_json::to_string(&made)? + "\n"));
        }
        Command::Run { config, graph, script, algo, source, seed, out, save_config } => {
            let cfg = match config {
                Some(p) => RunConfig::load(&p)?,
                None => RunConfig {
                    graph: graph.expect("clap requires --graph"),
                    script: script.map_or(ScriptSource::Random { query_every: 5 }, ScriptSource::File),
                    variant: algo.variant.into(),
                    epsilon: algo.epsilon,
                    preset: algo.preset.into(),
                    c_param: algo.c_param,
                    source,
                    seed,
                    out,
                },
            };
            if let Some(p) = save_config {
                cfg.save(&p)?;
            }
            let lines = cli::cmd_run(&cfg)?;
            if cfg.out.is_none() {
                say(&lines);
            }
        }
        Command::Verify { graph, script, spec, algo, policy, seed, trials, invariants, inject, out } => {
            let mut cfg = cli::trial_config(
                spec.spec(),
                algo.variant.into(),
                algo.preset.into(),
                algo.epsilon,
                policy.into(),
                inject.map(|FaultArg::DropAdditive| Fault::DropAdditive),
            );
            cfg.c_param = algo.c_param;
            cfg.check_invariants = invariants;
            let (summary, jsonl) = match graph {
                Some(g) => cli::cmd_verify_files(&cfg, &g, script.as_deref(), seed)?,
                None => cli::cmd_verify(&cfg, seed, trials),
            };
            if let Some(p) = &out {
                std::fs::write(p, jsonl)?;
            }
            say(&(serde_json::to_string(&summary)? + "\n"));
            if !summary.passed {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Bench { family, n, density, max_weight, variant, epsilon, preset, seed, trials, out } => {
            let specs: Vec<GraphSpec> =
                n.iter().map(|&n| GraphSpec { family: family.into(), n, m: n * density, max_weight }).collect();
            let variants: Vec<Variant> = variant.into_iter().map(Into::into).collect();
            let csv = cli::cmd_bench(&specs, &variants, &epsilon, preset.into(), seed, trials)?;
            emit(out.as_ref(), &csv)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}
