//! Harness plumbing behind the `dsssp` binary: instance generators, script
//! replay, verification against the oracle and counter benchmarks.

use crate::graph::{parse_graph, parse_script, write_graph, write_script, DecrementalGraph, EdgeId, GraphError, ScriptOp};
use crate::oracle::{self, Fault, PolicyKind, TrialConfig, TrialReport};
use crate::sssp::{CombinedEstimator, EstimatorCounters, Preset, SsspError, Variant, WeightedEstimator};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const RUN_SCHEMA: &str = "dsssp.run.v1";
pub const VERIFY_SCHEMA: &str = "dsssp.verify.v1";
pub const BENCH_SCHEMA: &str = "dsssp.bench.v1";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Sssp(#[from] SsspError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

// ---------------------------------------------------------------------------
// Generators

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `m` distinct ordered pairs drawn uniformly.
    ErdosRenyi,
    /// Layers of about `√n/2` vertices; forward edges between consecutive
    /// layers, back edges anywhere earlier. Distances grow with the layer.
    Layered,
    /// A chain of small cycles with chords, forward links and a few back links.
    SccGadgets,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::ErdosRenyi => "erdos-renyi",
            Family::Layered => "layered",
            Family::SccGadgets => "scc-gadgets",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GraphSpec {
    pub family: Family,
    pub n: usize,
    pub m: usize,
    /// Weights are uniform in `1..=max_weight`; 1 gives an unweighted graph.
    pub max_weight: u64,
}

struct Builder {
    n: usize,
    target: usize,
    seen: HashSet<(usize, usize)>,
    edges: Vec<(usize, usize)>,
}

impl Builder {
    fn add(&mut self, u: usize, v: usize) -> bool {
        if u == v || self.full() || !self.seen.insert((u, v)) {
            return false;
        }
        self.edges.push((u, v));
        true
    }

    fn full(&self) -> bool {
        self.edges.len() >= self.target
    }

    /// Fills the rest with `pick`, then with whatever pairs remain.
    fn fill(&mut self, rng: &mut ChaCha8Rng, mut pick: impl FnMut(&mut ChaCha8Rng) -> (usize, usize)) {
        let mut misses = 0;
        while !self.full() && misses < 50 * self.target + 1000 {
            let (u, v) = pick(rng);
            if !self.add(u, v) {
                misses += 1;
            }
        }
        if !self.full() {
            let mut rest: Vec<(usize, usize)> =
                (0..self.n).flat_map(|u| (0..self.n).map(move |v| (u, v))).filter(|&(u, v)| u != v && !self.seen.contains(&(u, v))).collect();
            rest.shuffle(rng);
            for (u, v) in rest {
                self.add(u, v);
            }
        }
    }
}

/// Deterministic in `(spec, seed)`. Vertex 0 is meant as the source and
/// reaches every vertex in the layered and gadget families when `m` allows.
pub fn generate_graph(spec: &GraphSpec, seed: u64) -> DecrementalGraph {
    let n = spec.n.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = Builder { n, target: spec.m.min(n * (n - 1)), seen: HashSet::new(), edges: Vec::new() };
    match spec.family {
        Family::ErdosRenyi => b.fill(&mut rng, |r| (r.gen_range(0..n), r.gen_range(0..n))),
        Family::Layered => {
            let width = ((n as f64).sqrt() / 2.0).max(1.0) as usize;
            let layer = |v: usize| v.div_ceil(width);
            let members = |l: usize| {
                if l == 0 {
                    0..1
                } else {
                    (1 + (l - 1) * width)..(1 + l * width).min(n)
                }
            };
            for v in 1..n {
                let prev = members(layer(v) - 1);
                let u = rng.gen_range(prev);
                b.add(u, v);
            }
            b.fill(&mut rng, |r| {
                let v = r.gen_range(1..n);
                let l = layer(v);
                match r.gen_range(0..10) {
                    0..=4 => (r.gen_range(members(l - 1)), v),
                    5..=6 => (r.gen_range(members(l)), v),
                    _ => (v, r.gen_range(0..members(l).start.max(1))),
                }
            });
        }
        Family::SccGadgets => {
            let mut bounds = vec![0usize];
            while *bounds.last().unwrap() < n {
                let start = *bounds.last().unwrap();
                bounds.push((start + rng.gen_range(3..=8)).min(n));
            }
            let gadgets = bounds.len() - 1;
            let range = |j: usize| bounds[j]..bounds[j + 1];
            for j in 0..gadgets {
                let r = range(j);
                for v in r.clone() {
                    let next = if v + 1 == r.end { r.start } else { v + 1 };
                    b.add(v, next);
                }
                if j + 1 < gadgets {
                    let (u, v) = (rng.gen_range(range(j)), rng.gen_range(range(j + 1)));
                    b.add(u, v);
                }
            }
            let gadget_of = |v: usize| bounds.partition_point(|&s| s <= v) - 1;
            b.fill(&mut rng, |r| {
                let u = r.gen_range(0..n);
                let j = gadget_of(u);
                let to = match r.gen_range(0..10) {
                    0..=3 => j,
                    4..=8 => (j + 1 + r.gen_range(0..2)).min(gadgets - 1),
                    _ => j.saturating_sub(1),
                };
                (u, r.gen_range(range(to)))
            });
        }
    }
    let weighted: Vec<(usize, usize, u64)> = b
        .edges
        .iter()
        .map(|&(u, v)| (u, v, if spec.max_weight > 1 { rng.gen_range(1..=spec.max_weight) } else { 1 }))
        .collect();
    DecrementalGraph::load(n, &weighted).expect("generated endpoints are in range")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SccStats {
    pub components: usize,
    pub largest: usize,
    /// Components with more than one vertex.
    pub nontrivial: usize,
    pub reachable_from_0: usize,
}

pub fn scc_stats(g: &DecrementalGraph) -> SccStats {
    let edges: Vec<(usize, usize)> = g.alive_edges().map(|e| (g.edge(e).from, g.edge(e).to)).collect();
    let comp = oracle::kosaraju(g.n(), &edges);
    let k = comp.iter().max().map_or(0, |&c| c + 1);
    let mut sizes = vec![0usize; k];
    for &c in &comp {
        sizes[c] += 1;
    }
    SccStats {
        components: k,
        largest: sizes.iter().copied().max().unwrap_or(0),
        nontrivial: sizes.iter().filter(|&&s| s > 1).count(),
        reachable_from_0: if g.n() == 0 { 0 } else { oracle::bfs(g, 0).iter().flatten().count() },
    }
}

/// Every edge deleted in random order; after each block of `query_every`
/// deletions, a `q` for every vertex and a `p` for one of them.
pub fn generate_script(g: &DecrementalGraph, seed: u64, query_every: usize) -> Vec<ScriptOp> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5c71_97e0_0000_0001);
    let mut order: Vec<EdgeId> = g.alive_edges().collect();
    order.shuffle(&mut rng);
    let every = query_every.max(1);
    let mut ops = Vec::new();
    let queries = |ops: &mut Vec<ScriptOp>, rng: &mut ChaCha8Rng| {
        ops.extend((0..g.n()).map(ScriptOp::Query));
        ops.push(ScriptOp::Path(rng.gen_range(0..g.n())));
    };
    queries(&mut ops, &mut rng);
    for (i, e) in order.into_iter().enumerate() {
        ops.push(ScriptOp::Delete(e));
        if (i + 1) % every == 0 {
            queries(&mut ops, &mut rng);
        }
    }
    ops
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generated {
    pub graph_file: PathBuf,
    pub script_file: PathBuf,
    pub n: usize,
    pub m: usize,
    pub scc: SccStats,
}

/// Writes `<out>.graph` and `<out>.script`.
pub fn cmd_generate(spec: &GraphSpec, seed: u64, query_every: usize, out: &Path) -> Result<Generated, CliError> {
    let g = generate_graph(spec, seed);
    let script = generate_script(&g, seed, query_every);
    let graph_file = out.with_extension("graph");
    let script_file = out.with_extension("script");
    std::fs::write(&graph_file, write_graph(&g))?;
    std::fs::write(&script_file, write_script(&script))?;
    Ok(Generated { graph_file, script_file, n: g.n(), m: g.alive_count(), scc: scc_stats(&g) })
}

// ---------------------------------------------------------------------------
// Replay

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScriptSource {
    File(PathBuf),
    /// Random full deletion order with queries every so many deletions.
    Random { query_every: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub graph: PathBuf,
    pub script: ScriptSource,
    pub variant: Variant,
    pub epsilon: f64,
    pub preset: Preset,
    pub c_param: f64,
    pub source: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

/// One output line of a replay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEvent {
    pub schema: String,
    pub step: usize,
    /// `q` or `p`.
    pub op: char,
    pub vertex: usize,
    /// `q` lines; `null` means unreachable.
    pub estimate: Option<f64>,
    /// `p` lines; `null` means unreachable or refused.
    pub path: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    pub counters: EstimatorCounters,
}

enum Structure {
    Plain(CombinedEstimator),
    Weighted(WeightedEstimator),
}

impl Structure {
    fn build(g: &DecrementalGraph, cfg: &RunConfig) -> Result<Self, SsspError> {
        Ok(if g.is_unweighted() {
            Structure::Plain(CombinedEstimator::new(g, cfg.source, cfg.variant, cfg.preset, cfg.epsilon, cfg.c_param, cfg.seed)?)
        } else {
            Structure::Weighted(WeightedEstimator::new(g, cfg.source, cfg.variant, cfg.preset, cfg.epsilon, cfg.c_param, cfg.seed)?)
        })
    }

    fn counters(&self) -> EstimatorCounters {
        match self {
            Structure::Plain(e) => e.counters(),
            Structure::Weighted(w) => {
                let mut c = EstimatorCounters::default();
                for lv in w.levels() {
                    let x = lv.estimator.counters();
                    c.scales += x.scales;
                    c.deletions = c.deletions.max(x.deletions);
                    c.tree_scans += x.tree_scans;
                    c.es_scans += x.es_scans;
                    c.heap_ops += x.heap_ops;
                    c.repartitions += x.repartitions;
                    c.splits += x.splits;
                    c.multigraph_work += x.multigraph_work;
                }
                c
            }
        }
    }
}

/// Replays the script; returns the JSON-lines output.
pub fn cmd_run(cfg: &RunConfig) -> Result<String, CliError> {
    let g = parse_graph(&std::fs::read_to_string(&cfg.graph)?)?;
    let script = match &cfg.script {
        ScriptSource::File(p) => parse_script(&std::fs::read_to_string(p)?)?,
        ScriptSource::Random { query_every } => generate_script(&g, cfg.seed, *query_every),
    };
    let out = run_script(&g, &script, cfg)?;
    if let Some(path) = &cfg.out {
        std::fs::write(path, &out)?;
    }
    Ok(out)
}

pub fn run_script(g: &DecrementalGraph, script: &[ScriptOp], cfg: &RunConfig) -> Result<String, CliError> {
    if cfg.source >= g.n() {
        return Err(CliError::Usage(format!("source {} out of range", cfg.source)));
    }
    let mut s = Structure::build(g, cfg)?;
    let mut out = String::new();
    let mut step = 0;
    for op in script {
        let event = match *op {
            ScriptOp::Delete(e) => {
                match &mut s {
                    Structure::Plain(x) => x.delete(e).map(|_| ())?,
                    Structure::Weighted(x) => x.delete(e)?,
                }
                step += 1;
                continue;
            }
            ScriptOp::Query(v) => {
                let q = match &s {
                    Structure::Plain(x) => x.query(v).map(|q| q as f64),
                    Structure::Weighted(x) => x.query(v),
                };
                RunEvent { schema: RUN_SCHEMA.into(), step, op: 'q', vertex: v, estimate: q, path: None, error: None, counters: s.counters() }
            }
            ScriptOp::Path(v) => {
                let p = match &mut s {
                    Structure::Plain(x) => x.report_path(v),
                    Structure::Weighted(x) => x.report_path(v),
                };
                let (path, error) = match p {
                    Ok(p) => (p, None),
                    Err(err) => (None, Some(err.to_string())),
                };
                RunEvent { schema: RUN_SCHEMA.into(), step, op: 'p', vertex: v, estimate: None, path, error, counters: s.counters() }
            }
        };
        out.push_str(&serde_json::to_string(&event)?);
        out.push('\n');
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Verification

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub schema: String,
    pub config_hash: String,
    pub trials: u64,
    pub first_seed: u64,
    pub lower: u64,
    pub upper: u64,
    pub scale_upper: u64,
    pub path: u64,
    pub potential: u64,
    pub invariant: u64,
    pub error: u64,
    /// Trials with any upper-bound violation.
    pub trials_over: u64,
    /// Trials allowed to have upper-bound violations.
    pub budget: f64,
    pub worst_ratio: f64,
    pub passed: bool,
}

/// Upper-bound failures tolerated over `trials` trials on `n` vertices:
/// none for deterministic variants, `trials/n` for sparse.
pub fn failure_budget(variant: Variant, trials: u64, n: usize) -> f64 {
    match variant {
        Variant::Sparse => trials as f64 / n.max(1) as f64,
        _ => 0.0,
    }
}

pub fn summarize(cfg: &TrialConfig, reports: &[TrialReport], first_seed: u64) -> VerifySummary {
    let mut s = VerifySummary {
        schema: VERIFY_SCHEMA.into(),
        config_hash: cfg.hash(),
        trials: reports.len() as u64,
        first_seed,
        lower: 0,
        upper: 0,
        scale_upper: 0,
        path: 0,
        potential: 0,
        invariant: 0,
        error: 0,
        trials_over: 0,
        budget: failure_budget(cfg.variant, reports.len() as u64, cfg.graph.n),
        worst_ratio: 1.0,
        passed: false,
    };
    for r in reports {
        let v = &r.violations;
        s.lower += v.lower;
        s.upper += v.upper;
        s.scale_upper += v.scale_upper;
        s.path += v.path;
        s.potential += v.potential;
        s.invariant += v.invariant;
        s.error += v.error;
        if v.upper + v.scale_upper > 0 {
            s.trials_over += 1;
        }
        s.worst_ratio = s.worst_ratio.max(r.worst_ratio);
    }
    s.passed = s.lower + s.path + s.potential + s.invariant + s.error == 0 && s.trials_over as f64 <= s.budget;
    s
}

/// Runs `trials` seeded trials; returns the summary and the JSON-lines reports.
pub fn cmd_verify(cfg: &TrialConfig, first_seed: u64, trials: u64) -> (VerifySummary, String) {
    let reports = oracle::run_trials(cfg, first_seed, trials);
    (summarize(cfg, &reports, first_seed), oracle::to_jsonl(&reports))
}

/// Verifies a fixed instance and script, once.
pub fn cmd_verify_files(cfg: &TrialConfig, graph: &Path, script: Option<&Path>, seed: u64) -> Result<(VerifySummary, String), CliError> {
    let g = parse_graph(&std::fs::read_to_string(graph)?)?;
    let deletions = match script {
        Some(p) => Some(
            parse_script(&std::fs::read_to_string(p)?)?
                .into_iter()
                .filter_map(|op| if let ScriptOp::Delete(e) = op { Some(e) } else { None })
                .collect(),
        ),
        None => None,
    };
    let mut cfg = cfg.clone();
    cfg.graph.n = g.n();
    cfg.graph.m = g.alive_count();
    let report = oracle::run_trial_on(&cfg, &g, seed, deletions);
    let reports = [report];
    Ok((summarize(&cfg, &reports, seed), oracle::to_jsonl(&reports)))
}

// ---------------------------------------------------------------------------
// Benchmarks

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub schema: String,
    pub family: Family,
    pub n: usize,
    pub m: usize,
    pub epsilon: f64,
    pub variant: Variant,
    pub seed: u64,
    pub counters: EstimatorCounters,
}

pub const BENCH_HEADER: &str = "schema,family,n,m,epsilon,variant,seed,deletions,scales,exact_scales,es_scans,tree_scans,heap_ops,repartitions,splits,threshold_rounds,relevels,super_inserts,local_trees,multigraph_work";

impl BenchRow {
    pub fn csv(&self) -> String {
        let c = &self.counters;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.schema,
            self.family.name(),
            self.n,
            self.m,
            self.epsilon,
            self.variant.name(),
            self.seed,
            c.deletions,
            c.scales,
            c.exact_scales,
            c.es_scans,
            c.tree_scans,
            c.heap_ops,
            c.repartitions,
            c.splits,
            c.threshold_rounds,
            c.relevels,
            c.super_inserts,
            c.local_trees,
            c.multigraph_work
        )
    }
}

/// Full random deletion of one generated instance, counters only.
pub fn bench_one(spec: &GraphSpec, variant: Variant, preset: Preset, epsilon: f64, seed: u64) -> Result<BenchRow, CliError> {
    let g = generate_graph(spec, seed);
    let cfg = RunConfig {
        graph: PathBuf::new(),
        script: ScriptSource::Random { query_every: usize::MAX },
        variant,
        epsilon,
        preset,
        c_param: 1.0,
        source: 0,
        seed,
        out: None,
    };
    let mut s = Structure::build(&g, &cfg)?;
    let mut order: Vec<EdgeId> = g.alive_edges().collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0xbe4c_0000_0000_0001));
    for e in order {
        match &mut s {
            Structure::Plain(x) => x.delete(e).map(|_| ())?,
            Structure::Weighted(x) => x.delete(e)?,
        }
    }
    Ok(BenchRow {
        schema: BENCH_SCHEMA.into(),
        family: spec.family,
        n: g.n(),
        m: g.alive_count().max(spec.m.min(g.n() * g.n().saturating_sub(1))),
        epsilon,
        variant,
        seed,
        counters: s.counters(),
    })
}

/// The cross product of the sweep as CSV, rows in sweep order.
pub fn cmd_bench(
    specs: &[GraphSpec],
    variants: &[Variant],
    epsilons: &[f64],
    preset: Preset,
    seed: u64,
    trials: u64,
) -> Result<String, CliError> {
    let mut jobs = Vec::new();
    for spec in specs {
        for &variant in variants {
            for &eps in epsilons {
                for t in 0..trials {
                    jobs.push((spec.clone(), variant, eps, seed + t));
                }
            }
        }
    }
    let rows: Result<Vec<BenchRow>, CliError> =
        jobs.par_iter().map(|(spec, v, eps, s)| bench_one(spec, *v, preset, *eps, *s)).collect();
    let mut out = String::from(BENCH_HEADER);
    out.push('\n');
    for row in rows? {
        let _ = writeln!(out, "{}", row.csv());
    }
    Ok(out)
}

/// Trial configuration from the common flags.
pub fn trial_config(
    spec: GraphSpec,
    variant: Variant,
    preset: Preset,
    epsilon: f64,
    policy: PolicyKind,
    fault: Option<Fault>,
) -> TrialConfig {
    let mut cfg = TrialConfig::new(spec, variant, epsilon);
    cfg.preset = preset;
    cfg.policy = policy;
    cfg.fault = fault;
    cfg
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("dsssp-cli-{}-{name}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn generators_are_deterministic_and_honor_edge_counts() {
        for family in [Family::ErdosRenyi, Family::Layered, Family::SccGadgets] {
            for (n, m) in [(10, 90), (10, 200), (50, 300), (100, 1500)] {
                let spec = GraphSpec { family, n, m, max_weight: 1 };
                let a = generate_graph(&spec, 7);
                assert_eq!(a.alive_count(), m.min(n * (n - 1)), "{family:?} {n} {m}");
                assert_eq!(write_graph(&a), write_graph(&generate_graph(&spec, 7)));
            }
        }
    }

    #[test]
    fn structured_families_reach_everything_from_zero() {
        for family in [Family::Layered, Family::SccGadgets] {
            let g = generate_graph(&GraphSpec { family, n: 80, m: 400, max_weight: 1 }, 1);
            assert_eq!(scc_stats(&g).reachable_from_0, 80);
        }
    }

    #[test]
    fn scc_statistics_match_hand_counts() {
        // A 3-cycle, a 2-cycle and a lone vertex.
        let g = DecrementalGraph::load_unweighted(6, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 3), (4, 5)]).unwrap();
        assert_eq!(scc_stats(&g), SccStats { components: 3, largest: 3, nontrivial: 2, reachable_from_0: 6 });
        let gadgets = generate_graph(&GraphSpec { family: Family::SccGadgets, n: 60, m: 60, max_weight: 1 }, 3);
        let s = scc_stats(&gadgets);
        assert!(s.nontrivial >= 60 / 8 && s.largest <= 8, "{s:?}");
    }

    #[test]
    fn generated_files_are_identical_per_seed() {
        let spec = GraphSpec { family: Family::Layered, n: 30, m: 100, max_weight: 4 };
        let a = cmd_generate(&spec, 5, 5, &tmp("a")).unwrap();
        let b = cmd_generate(&spec, 5, 5, &tmp("b")).unwrap();
        assert_eq!(std::fs::read(&a.graph_file).unwrap(), std::fs::read(&b.graph_file).unwrap());
        assert_eq!(std::fs::read(&a.script_file).unwrap(), std::fs::read(&b.script_file).unwrap());
        assert_eq!(a.m, 100);
    }

    #[test]
    fn run_config_round_trips() {
        let cfg = RunConfig {
            graph: "g.graph".into(),
            script: ScriptSource::Random { query_every: 3 },
            variant: Variant::Sparse,
            epsilon: 0.25,
            preset: Preset::Paper,
            c_param: 1.5,
            source: 2,
            seed: 99,
            out: Some("o.jsonl".into()),
        };
        let p = tmp("cfg.json");
        cfg.save(&p).unwrap();
        assert_eq!(RunConfig::load(&p).unwrap(), cfg);
    }

    fn replay(variant: Variant, spec: &GraphSpec) -> (DecrementalGraph, Vec<ScriptOp>, Vec<RunEvent>) {
        let g = generate_graph(spec, 2);
        let script = generate_script(&g, 2, 4);
        let cfg = RunConfig {
            graph: PathBuf::new(),
            script: ScriptSource::Random { query_every: 4 },
            variant,
            epsilon: 0.5,
            preset: Preset::Conservative,
            c_param: 1.0,
            source: 0,
            seed: 2,
            out: None,
        };
        let out = run_script(&g, &script, &cfg).unwrap();
        (g, script, out.lines().map(|l| serde_json::from_str(l).unwrap()).collect())
    }

    #[test]
    fn exact_replay_reproduces_oracle_distances() {
        let spec = GraphSpec { family: Family::SccGadgets, n: 30, m: 90, max_weight: 1 };
        let (mut g, script, events) = replay(Variant::Exact, &spec);
        let mut events = events.into_iter();
        let mut prev = 0;
        for op in script {
            match op {
                ScriptOp::Delete(e) => g.delete_edge(e).unwrap(),
                ScriptOp::Query(v) => {
                    let ev = events.next().unwrap();
                    assert_eq!(ev.estimate, oracle::bfs(&g, 0)[v].map(|d| d as f64));
                    assert!(ev.counters.es_scans >= prev);
                    prev = ev.counters.es_scans;
                }
                ScriptOp::Path(v) => {
                    let ev = events.next().unwrap();
                    if let Some(p) = ev.path {
                        assert!(oracle::check_path(&g, 0, v, &p).is_ok());
                    }
                }
            }
        }
    }

    #[test]
    fn dense_and_adaptive_replays_respect_the_lower_bound() {
        let spec = GraphSpec { family: Family::Layered, n: 40, m: 120, max_weight: 1 };
        for variant in [Variant::Dense, Variant::Adaptive] {
            let (mut g, script, events) = replay(variant, &spec);
            let mut events = events.into_iter();
            for op in script {
                match op {
                    ScriptOp::Delete(e) => g.delete_edge(e).unwrap(),
                    ScriptOp::Query(v) => {
                        let ev = events.next().unwrap();
                        match (oracle::bfs(&g, 0)[v], ev.estimate) {
                            (Some(d), Some(q)) => assert!(q >= d as f64),
                            (d, q) => assert_eq!(d.is_none(), q.is_none()),
                        }
                    }
                    ScriptOp::Path(_) => {
                        let ev = events.next().unwrap();
                        if variant == Variant::Dense {
                            assert!(ev.error.is_none());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn verify_is_seeded_and_fails_on_the_injected_fault() {
        let spec = GraphSpec { family: Family::Layered, n: 80, m: 300, max_weight: 1 };
        let cfg = trial_config(spec, Variant::Dense, Preset::Conservative, 1.0, PolicyKind::ObliviousRandom, None);
        let (a, ja) = cmd_verify(&cfg, 0, 4);
        let (b, jb) = cmd_verify(&cfg, 0, 4);
        assert_eq!((a.clone(), ja), (b, jb));
        assert!(a.passed, "{a:?}");
        let bad = TrialConfig { fault: Some(Fault::DropAdditive), ..cfg };
        assert!(!cmd_verify(&bad, 0, 4).0.passed);
    }

    #[test]
    fn bench_csv_schema_is_stable() {
        let specs = [GraphSpec { family: Family::Layered, n: 30, m: 90, max_weight: 1 }];
        let csv = cmd_bench(&specs, &[Variant::Exact, Variant::Dense], &[0.5], Preset::Conservative, 1, 1).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], BENCH_HEADER);
        assert_eq!(lines.len(), 3);
        let cols = BENCH_HEADER.split(',').count();
        for l in &lines[1..] {
            assert_eq!(l.split(',').count(), cols);
            assert!(l.starts_with(BENCH_SCHEMA));
        }
    }
}
