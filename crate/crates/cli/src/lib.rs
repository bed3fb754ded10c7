//! `qtree` command-line front end.
//!
//! ```text
//! qtree <gen|tree|lca|experiment|validate> [flags]
//! ```
//!
//! Exit codes: 0 on success, 1 when a check or consistency test fails, 2 on
//! usage, configuration or input errors. Everything random flows from
//! `--seed`, so identical invocations write identical bytes to stdout.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qtree_core::experiments::{self, ExperimentConfig, ExperimentKind, ExposureSource, Report, TreeMode};
use qtree_core::graph::{load_graph, write_edge_list};
use qtree_core::{
    mis_query, query_tree_exact, query_tree_quantized, verify_consistency, ExplorationTrace, GraphSpec,
    LcaAnswer, Quantizer, RankMode, RankOracle, Seed,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "qtree", version, about = "Query trees on bounded-degree graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// 64-bit seed, decimal or 0x-hex [default: 0].
    #[arg(long, global = true)]
    seed: Option<Seed>,

    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,

    /// Write the main output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads: a count or `auto`. Falls back to $QTREE_THREADS.
    #[arg(long, global = true)]
    threads: Option<Threads>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Threads {
    Auto,
    Count(usize),
}

impl std::str::FromStr for Threads {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "auto" => Ok(Threads::Auto),
            k => match k.parse::<usize>() {
                Ok(0) | Err(_) => Err(format!("expected a positive thread count or `auto`, got {k:?}")),
                Ok(k) => Ok(Threads::Count(k)),
            },
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a graph in edge-list format.
    Gen(GenArgs),
    /// Explore one query tree.
    Tree(TreeArgs),
    /// Local computation algorithms.
    Lca {
        #[command(subcommand)]
        command: LcaCommand,
    },
    /// Run a Monte Carlo experiment.
    Experiment(ExperimentArgs),
    /// Check that a graph file is well formed.
    Validate {
        #[arg(long)]
        graph: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GraphKind {
    Regular,
    Cycle,
    Grid,
    #[value(alias = "capped-random")]
    Capped,
    File,
}

#[derive(Debug, Args)]
struct GraphArgs {
    /// Vertex count.
    #[arg(long)]
    n: Option<usize>,
    /// Degree (regular) or degree cap (capped).
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    /// Edge probability for capped random graphs.
    #[arg(long)]
    p: Option<f64>,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long = "type", value_enum)]
    kind: GraphKind,
    #[command(flatten)]
    graph: GraphArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExploreMode {
    Exact,
    Quantized,
}

#[derive(Debug, Args)]
struct TreeArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    root: usize,
    #[arg(long, value_enum, default_value = "exact")]
    mode: ExploreMode,
    /// Layer count for quantized mode; defaults to 4(d+1).
    #[arg(long = "L")]
    layers: Option<usize>,
    /// `full` or `kwise:<k>`.
    #[arg(long, default_value = "full")]
    rank_mode: RankMode,
}

#[derive(Debug, Subcommand)]
enum LcaCommand {
    /// Greedy maximal independent set membership.
    Mis(MisArgs),
}

#[derive(Debug, Args)]
struct MisArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, conflicts_with = "all", required_unless_present_any = ["all", "check"])]
    vertex: Option<usize>,
    #[arg(long)]
    all: bool,
    /// Compare all local answers with the global greedy MIS.
    #[arg(long)]
    check: bool,
    #[arg(long, default_value = "full")]
    rank_mode: RankMode,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    #[arg(value_enum)]
    name: ExperimentName,
    /// JSON config file; flags given alongside override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    graph_type: Option<GraphKind>,
    /// Graph file for `--graph-type file`.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[command(flatten)]
    shape: GraphArgs,
    #[arg(long = "L")]
    layers: Option<usize>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated vertex counts for `tmax`.
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    #[arg(long)]
    mode: Option<RankMode>,
    #[arg(long)]
    compare_mode: Option<RankMode>,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    sigmas: Option<f64>,
    #[arg(long, value_enum)]
    tree: Option<TreeArg>,
    #[arg(long, value_enum)]
    exposure: Option<ExposureArg>,
    /// Also write the per-cell CSV rows to this file.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExperimentName {
    Expectation,
    Tmax,
    Layers,
    Exposure,
    Paths,
    Seedlen,
}

impl From<ExperimentName> for ExperimentKind {
    fn from(n: ExperimentName) -> Self {
        match n {
            ExperimentName::Expectation => ExperimentKind::Expectation,
            ExperimentName::Tmax => ExperimentKind::Tmax,
            ExperimentName::Layers => ExperimentKind::Layers,
            ExperimentName::Exposure => ExperimentKind::Exposure,
            ExperimentName::Paths => ExperimentKind::Paths,
            ExperimentName::Seedlen => ExperimentKind::Seedlen,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TreeArg {
    Exact,
    Quantized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExposureArg {
    Auto,
    Trace,
    Synthetic,
}

/// Failure of one command, mapped onto an exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Check(String),
}

impl From<qtree_core::Error> for Failure {
    fn from(e: qtree_core::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

struct Ctx<'a> {
    seed: u64,
    explicit_seed: bool,
    json: bool,
    out: Option<PathBuf>,
    threads: Option<usize>,
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn emit(&mut self, bytes: &[u8]) -> CmdResult {
        match &self.out {
            Some(path) => write_file(path, bytes),
            None => self.stdout.write_all(bytes).map_err(|e| Failure::Usage(format!("stdout: {e}"))),
        }
    }

    fn log(&mut self, msg: impl AsRef<str>) {
        let _ = writeln!(self.stderr, "{}", msg.as_ref());
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> CmdResult {
    std::fs::write(path, bytes).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn json_line<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

fn resolve_threads(flag: Option<Threads>, env: Option<String>) -> Result<Option<usize>, Failure> {
    let choice = match (flag, env) {
        (Some(t), _) => t,
        (None, Some(v)) if !v.trim().is_empty() => {
            v.parse().map_err(|e| Failure::Usage(format!("QTREE_THREADS: {e}")))?
        }
        _ => Threads::Auto,
    };
    Ok(match choice {
        Threads::Auto => None,
        Threads::Count(k) => Some(k),
    })
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if code == EXIT_OK { stdout } else { stderr };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    let threads = match resolve_threads(cli.threads, std::env::var("QTREE_THREADS").ok()) {
        Ok(t) => t,
        Err(Failure::Usage(m) | Failure::Check(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            return EXIT_USAGE;
        }
    };
    let mut ctx = Ctx { seed: cli.seed.map_or(0, |s| s.0), explicit_seed: cli.seed.is_some(), json: cli.json, out: cli.out, threads, stdout, stderr };
    let result = match cli.command {
        Command::Gen(args) => cmd_gen(&mut ctx, args),
        Command::Tree(args) => cmd_tree(&mut ctx, args),
        Command::Lca { command: LcaCommand::Mis(args) } => cmd_mis(&mut ctx, args),
        Command::Experiment(args) => cmd_experiment(&mut ctx, args),
        Command::Validate { graph } => cmd_validate(&mut ctx, &graph),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Check(m)) => {
            ctx.log(format!("check failed: {m}"));
            EXIT_CHECK_FAILED
        }
        Err(Failure::Usage(m)) => {
            ctx.log(format!("error: {m}"));
            EXIT_USAGE
        }
    }
}

fn need<T>(value: Option<T>, flag: &str, kind: &str) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::Usage(format!("--{flag} is required for {kind} graphs")))
}

fn graph_spec(kind: GraphKind, a: &GraphArgs, file: Option<&PathBuf>, seed: Option<Seed>) -> Result<GraphSpec, Failure> {
    Ok(match kind {
        GraphKind::Regular => GraphSpec::Regular {
            n: need(a.n, "n", "regular")?,
            d: need(a.d, "d", "regular")?,
            seed,
        },
        GraphKind::Cycle => GraphSpec::Cycle { n: need(a.n, "n", "cycle")? },
        GraphKind::Grid => GraphSpec::Grid {
            rows: need(a.rows, "rows", "grid")?,
            cols: need(a.cols, "cols", "grid")?,
        },
        GraphKind::Capped => GraphSpec::CappedRandom {
            n: need(a.n, "n", "capped")?,
            p: need(a.p, "p", "capped")?,
            d: need(a.d, "d", "capped")?,
            seed,
        },
        GraphKind::File => GraphSpec::File { path: need(file.cloned(), "graph", "file")? },
    })
}

fn cmd_gen(ctx: &mut Ctx, args: GenArgs) -> CmdResult {
    if args.kind == GraphKind::File {
        return Err(Failure::Usage("gen cannot produce a file graph".into()));
    }
    let spec = graph_spec(args.kind, &args.graph, None, Some(Seed(ctx.seed)))?;
    let g = spec.build(ctx.seed)?;
    ctx.log(format!(
        "# generated {}: n={} m={} d={}",
        serde_json::to_string(&spec).expect("serializable"),
        g.n(),
        g.edge_count(),
        g.d_bound()
    ));
    let mut buf = Vec::new();
    write_edge_list(&g, &mut buf).map_err(|e| Failure::Usage(e.to_string()))?;
    ctx.emit(&buf)
}

#[derive(Serialize)]
struct ExactTreeOutput {
    mode: &'static str,
    seed: u64,
    rank_mode: RankMode,
    root: usize,
    size: usize,
    #[serde(rename = "T")]
    tree: Vec<usize>,
}

#[derive(Serialize)]
struct QuantizedTreeOutput<'a> {
    mode: &'static str,
    seed: u64,
    rank_mode: RankMode,
    size: usize,
    #[serde(flatten)]
    trace: &'a ExplorationTrace,
}

fn cmd_tree(ctx: &mut Ctx, args: TreeArgs) -> CmdResult {
    let g = load_graph(&args.graph)?;
    let o = RankOracle::new(ctx.seed, args.rank_mode, g.n())?;
    let bytes = match args.mode {
        ExploreMode::Exact => {
            let tree: Vec<usize> = query_tree_exact(&g, &o, args.root)?.into_iter().collect();
            let out = ExactTreeOutput {
                mode: "exact",
                seed: ctx.seed,
                rank_mode: args.rank_mode,
                root: args.root,
                size: tree.len(),
                tree,
            };
            if ctx.json {
                json_line(&out)
            } else {
                format!(
                    "mode=exact seed={} rank_mode={} root={} size={}\nT: {}\n",
                    out.seed,
                    out.rank_mode,
                    out.root,
                    out.size,
                    join(&out.tree)
                )
                .into_bytes()
            }
        }
        ExploreMode::Quantized => {
            let layers = args.layers.unwrap_or_else(|| qtree_core::default_l(g.d_bound()));
            let q = Quantizer::new(layers)?;
            let trace = query_tree_quantized(&g, &o, q, args.root)?;
            let out = QuantizedTreeOutput {
                mode: "quantized",
                seed: ctx.seed,
                rank_mode: args.rank_mode,
                size: trace.tree.len(),
                trace: &trace,
            };
            if ctx.json {
                json_line(&out)
            } else {
                format!(
                    "mode=quantized seed={} rank_mode={} L={} root={} root_layer={} size={} |R|={} probes={}\nT: {}\nR: {}\nlayer_prefix_sizes: {}\n",
                    ctx.seed,
                    args.rank_mode,
                    trace.layers,
                    trace.root,
                    trace.root_layer,
                    trace.tree.len(),
                    trace.reached.len(),
                    trace.probes,
                    join(&trace.tree),
                    join(&trace.reached),
                    join(&trace.layer_prefix_sizes)
                )
                .into_bytes()
            }
        }
    };
    ctx.emit(&bytes)
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

#[derive(Serialize)]
struct MisOutput {
    seed: u64,
    rank_mode: RankMode,
    answers: Vec<LcaAnswer>,
    #[serde(skip_serializing_if = "Option::is_none")]
    consistency: Option<qtree_core::ConsistencyReport>,
}

fn cmd_mis(ctx: &mut Ctx, args: MisArgs) -> CmdResult {
    let g = load_graph(&args.graph)?;
    let o = RankOracle::new(ctx.seed, args.rank_mode, g.n())?;
    let vertices: Vec<usize> = match args.vertex {
        Some(v) => vec![v],
        None if args.all => (0..g.n()).collect(),
        None => Vec::new(),
    };
    let answers = experiments::with_threads(ctx.threads, || {
        use rayon::prelude::*;
        vertices.par_iter().map(|&v| mis_query(&g, &o, v)).collect::<qtree_core::Result<Vec<_>>>()
    })??;
    let consistency = if args.check {
        Some(experiments::with_threads(ctx.threads, || verify_consistency(&g, &o))??)
    } else {
        None
    };
    let out = MisOutput { seed: ctx.seed, rank_mode: args.rank_mode, answers, consistency };
    let bytes = if ctx.json {
        json_line(&out)
    } else {
        let mut s = format!("seed={} rank_mode={}\nvertex in_mis probes explored\n", out.seed, out.rank_mode);
        for a in &out.answers {
            s.push_str(&format!("{} {} {} {}\n", a.vertex, a.in_mis, a.probes, a.explored));
        }
        if let Some(c) = &out.consistency {
            s.push_str(&format!(
                "consistent={} independent={} maximal={} mis_size={} mean_probes={:.3} max_probes={} mean_explored={:.3} max_explored={}\n",
                c.consistent, c.independent, c.maximal, c.mis_size, c.mean_probes, c.max_probes, c.mean_explored, c.max_explored
            ));
            if !c.mismatches.is_empty() {
                s.push_str(&format!("mismatches: {}\n", join(&c.mismatches)));
            }
        }
        s.into_bytes()
    };
    ctx.emit(&bytes)?;
    match &out.consistency {
        Some(c) if !c.ok() => Err(Failure::Check(format!(
            "local answers disagree with the global greedy MIS at {} vertices",
            c.mismatches.len()
        ))),
        _ => Ok(()),
    }
}

fn experiment_config(ctx: &Ctx, args: &ExperimentArgs) -> Result<ExperimentConfig, Failure> {
    let kind = ExperimentKind::from(args.name);
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            let cfg = ExperimentConfig::from_json(&text)?;
            if cfg.experiment != kind {
                return Err(Failure::Usage(format!(
                    "config file describes `{}` but `{}` was requested",
                    cfg.experiment, kind
                )));
            }
            cfg
        }
        None => {
            let graph_kind = args.graph_type.unwrap_or(GraphKind::Regular);
            let mut shape = GraphArgs { ..args.shape };
            if graph_kind == GraphKind::Regular {
                shape.n = shape.n.or(Some(10_000));
                shape.d = shape.d.or(Some(3));
            }
            let spec = graph_spec(graph_kind, &shape, args.graph.as_ref(), None)?;
            let mut cfg = ExperimentConfig::new(kind, spec, 1000, ctx.seed);
            if kind == ExperimentKind::Tmax {
                cfg.n_list = (10..=13).map(|e| 1 << e).collect();
            }
            cfg
        }
    };
    if ctx.explicit_seed {
        cfg.base_seed = Seed(ctx.seed);
    }
    if let Some(d) = args.shape.d {
        cfg.d = Some(d);
    }
    if args.layers.is_some() {
        cfg.l = args.layers;
    }
    if args.c.is_some() {
        cfg.c = args.c;
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(list) = &args.n_list {
        cfg.n_list = list.clone();
    }
    if let Some(m) = args.mode {
        cfg.mode = m;
    }
    if args.compare_mode.is_some() {
        cfg.compare_mode = args.compare_mode;
    }
    if args.k_max.is_some() {
        cfg.k_max = args.k_max;
    }
    if args.alpha.is_some() {
        cfg.alpha = args.alpha;
    }
    if args.sigmas.is_some() {
        cfg.sigmas = args.sigmas;
    }
    if let Some(t) = args.tree {
        cfg.tree = match t {
            TreeArg::Exact => TreeMode::Exact,
            TreeArg::Quantized => TreeMode::Quantized,
        };
    }
    if let Some(e) = args.exposure {
        cfg.exposure = match e {
            ExposureArg::Auto => ExposureSource::Auto,
            ExposureArg::Trace => ExposureSource::Trace,
            ExposureArg::Synthetic => ExposureSource::Synthetic,
        };
    }
    Ok(cfg)
}

fn render_text(report: &Report) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "experiment: {}\nconfig: {}\n",
        report.experiment,
        serde_json::to_string(&report.config).expect("serializable")
    ));
    s.push_str(&format!("trials: {}\n", report.tally.trials));
    for (k, v) in &report.derived {
        s.push_str(&format!("  {k} = {v}\n"));
    }
    for c in &report.checks {
        s.push_str(&format!(
            "[{}] {}: {} {} {}\n",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.relation,
            c.threshold
        ));
    }
    for n in &report.notes {
        s.push_str(&format!("note: {n}\n"));
    }
    s.push_str(if report.passed { "result: PASS\n" } else { "result: FAIL\n" });
    s
}

fn cmd_experiment(ctx: &mut Ctx, args: ExperimentArgs) -> CmdResult {
    let cfg = experiment_config(ctx, &args)?;
    let start = Instant::now();
    let report = experiments::run(&cfg, ctx.threads)?;
    ctx.log(format!("# {} finished in {:.2}s", report.experiment, start.elapsed().as_secs_f64()));
    let bytes = if ctx.json { report.to_json().into_bytes() } else { render_text(&report).into_bytes() };
    ctx.emit(&bytes)?;
    if let Some(path) = &args.csv {
        write_file(path, report.to_csv().as_bytes())?;
    }
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        Err(Failure::Check(failed.join("; ")))
    }
}

fn cmd_validate(ctx: &mut Ctx, path: &Path) -> CmdResult {
    match load_graph(path) {
        Ok(g) => {
            let msg = format!("ok: n={} m={} d={}\n", g.n(), g.edge_count(), g.d_bound());
            ctx.emit(msg.as_bytes())
        }
        Err(e @ qtree_core::Error::Io { .. }) => Err(Failure::Usage(e.to_string())),
        Err(e) => Err(Failure::Check(format!("{}: {e}", path.display()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use qtree_core::graph;

    #[test]
    fn thread_resolution() {
        assert_eq!(resolve_threads(Some(Threads::Count(3)), Some("5".into())).unwrap(), Some(3));
        assert_eq!(resolve_threads(None, Some("5".into())).unwrap(), Some(5));
        assert_eq!(resolve_threads(None, Some("auto".into())).unwrap(), None);
        assert_eq!(resolve_threads(None, None).unwrap(), None);
        assert!(resolve_threads(None, Some("zero".into())).is_err());
        assert!("0".parse::<Threads>().is_err());
    }

    #[test]
    fn graph_module_is_reexported() {
        // gen and validate agree on the format
        let g = graph::gen_cycle(5).unwrap();
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        assert_eq!(graph::parse_edge_list(std::str::from_utf8(&buf).unwrap()).unwrap(), g);
    }
}
