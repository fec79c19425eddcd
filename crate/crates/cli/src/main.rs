//! `qbg`: community detection with the generalized bipartite modularity
//! density from the command line.
//!
//! Exit codes: 0 on success, 2 for unreadable or invalid input, 3 when a
//! generator spec cannot be realized.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::SystemTime;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use qbg_core::analytic::{
    critical_density_qb, critical_density_qbg, critical_density_qbg_asymptotic, phase_grid, ring_modularity,
    ring_threshold, ObjectiveKind,
};
use qbg_core::generators::{gen_benchmark, gen_hierarchy, gen_ring, BenchmarkSpec, GenError, HierarchySpec, RingSpec};
use qbg_core::io::{
    read_biadjacency, read_edge_list, read_partition_csv, write_atomic, write_counts_csv, write_dot, write_edge_list,
    write_partition_csv, write_phase_grid, write_record, Delimiter, EdgeListOptions, HeaderMode, InputDescriptor,
    LabeledGraph, RunRecord, Timing,
};
use qbg_core::objective::{evaluate_qb, evaluate_qbg};
use qbg_core::optimizer::detect;
use qbg_core::sweep::{sweep_chi, SweepConfig};
use qbg_core::{DensityMode, OptimizerConfig, Partition, Resolution};

#[derive(Parser, Debug)]
#[command(name = "qbg", version, about = "Multi-resolution community detection in bipartite networks")]
struct Cli {
    /// TOML file with default values for the options below.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Omit timestamps and timings so repeated runs write identical files.
    #[arg(long, global = true)]
    reproducible: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Best partition at a single resolution.
    Detect(DetectArgs),
    /// Best partitions over a resolution grid.
    Sweep(SweepArgs),
    /// Write a synthetic network and its planted partitions.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Merge/split phase diagram of the two-clique benchmark as CSV.
    Phase(PhaseArgs),
    /// Score a partition file.
    Eval(EvalArgs),
    /// Critical values for the clique ring and the two-clique benchmark.
    #[command(subcommand)]
    Threshold(ThresholdCommand),
}

#[derive(Args, Debug, Clone)]
struct InputArgs {
    /// Edge list (red, blue[, weight]) or biadjacency matrix.
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Auto)]
    format: Format,
    /// Edge-list delimiter; detected from the first line by default.
    #[arg(long, value_enum)]
    delimiter: Option<DelimiterArg>,
    /// Whether the edge list starts with a header row.
    #[arg(long, value_enum, default_value_t = HeaderArg::Auto)]
    header: HeaderArg,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    /// A matrix when the first row has more than three fields.
    Auto,
    Edges,
    Matrix,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum DelimiterArg {
    Tab,
    Comma,
    Space,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum HeaderArg {
    Auto,
    Yes,
    No,
}

#[derive(Args, Debug, Clone, Default)]
struct OptimizerArgs {
    /// unweighted or weighted; weighted by default when any weight differs from 1.
    #[arg(long)]
    density_mode: Option<String>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct DetectArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, allow_hyphen_values = true)]
    chi: Option<f64>,
    #[command(flatten)]
    optimizer: OptimizerArgs,
    /// Run record (JSON); printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the partition as label,community CSV.
    #[arg(long)]
    partition_csv: Option<PathBuf>,
    /// Also write a Graphviz file coloured by community.
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, allow_hyphen_values = true)]
    chi_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    chi_max: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// Bisect each transition down to this width.
    #[arg(long)]
    refine: Option<f64>,
    #[command(flatten)]
    optimizer: OptimizerArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write chi,communities,objective rows.
    #[arg(long)]
    counts: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum GenCommand {
    /// Ring of n complete K_{k,k} cliques joined by single links.
    Ring {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// Directory for graph.tsv and the planted partitions.
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Two cliques plus an external component, from nondimensional d and t.
    Benchmark {
        #[arg(long, default_value_t = 10)]
        side1: usize,
        #[arg(long, default_value_t = 10)]
        side2: usize,
        #[arg(long)]
        d: f64,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        n_a: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        external_link_weight: f64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Nested cliques with level weights alpha_k = levels + 1 - k.
    Hierarchy {
        #[arg(long)]
        levels: usize,
        #[arg(long, default_value_t = 3)]
        base: usize,
        #[arg(long, default_value_t = 6)]
        branching: usize,
        /// Explicit comma-separated level weights, innermost first.
        #[arg(long, value_delimiter = ',')]
        alpha: Option<Vec<f64>>,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum PhaseObjective {
    Qb,
    Qbg,
}

#[derive(Args, Debug)]
struct PhaseArgs {
    #[arg(value_enum)]
    objective: PhaseObjective,
    #[arg(long, allow_hyphen_values = true)]
    chi: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    /// `start:end:count` or a comma-separated list.
    #[arg(long, default_value = "0.05:1:20")]
    p_axis: String,
    #[arg(long, default_value = "0.05:1:20")]
    d_axis: String,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[command(flatten)]
    input: InputArgs,
    /// label,community CSV.
    #[arg(long)]
    partition: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    chi: Option<f64>,
    #[arg(long)]
    density_mode: Option<String>,
}

#[derive(Subcommand, Debug)]
enum ThresholdCommand {
    /// Smallest resolvable clique side, and Q_b of both partitions for a given k.
    Ring {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Critical inter-clique density of Q_b and Q_bg.
    Benchmark {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        chi: Option<f64>,
    },
}

/// Values read from `--config`. Flags override them.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    chi: Option<f64>,
    chi_min: Option<f64>,
    chi_max: Option<f64>,
    steps: Option<usize>,
    refine: Option<f64>,
    density_mode: Option<String>,
    restarts: Option<usize>,
    seed: Option<u64>,
    t: Option<f64>,
    reproducible: Option<bool>,
}

/// Exit status 3 marks generator specs that cannot be realized.
#[derive(Debug)]
struct Infeasible(GenError);

impl std::fmt::Display for Infeasible {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "generator: {}", self.0)
    }
}

impl std::error::Error for Infeasible {}

fn infeasible(e: GenError) -> anyhow::Error {
    Infeasible(e).into()
}

struct Settings {
    file: FileConfig,
    reproducible: bool,
}

impl Settings {
    fn optimizer(&self, args: &OptimizerArgs) -> Result<(OptimizerConfig, Option<DensityMode>)> {
        let defaults = OptimizerConfig::default();
        let config = OptimizerConfig {
            restarts: args.restarts.or(self.file.restarts).unwrap_or(defaults.restarts),
            seed: args.seed.or(self.file.seed).unwrap_or(defaults.seed),
            ..defaults
        };
        let mode = args
            .density_mode
            .as_ref()
            .or(self.file.density_mode.as_ref())
            .map(|s| s.parse::<DensityMode>().map_err(|e| anyhow!(e)))
            .transpose()?;
        Ok((config, mode))
    }

    fn stamp(&self, record: &mut RunRecord, started: SystemTime) {
        if !self.reproducible {
            record.timing = Some(Timing::since(started));
        }
    }
}

fn load(input: &InputArgs) -> Result<(LabeledGraph, InputDescriptor)> {
    let path = &input.input;
    let format = match input.format {
        Format::Auto => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let first = text.lines().find(|l| !l.trim().is_empty() && !l.starts_with('#')).unwrap_or("");
            let fields = match Delimiter::detect(first) {
                Delimiter::Tab => first.split('\t').count(),
                Delimiter::Comma => first.split(',').count(),
                Delimiter::Whitespace => first.split_whitespace().count(),
            };
            if fields > 3 {
                Format::Matrix
            } else {
                Format::Edges
            }
        }
        f => f,
    };
    let labeled = match format {
        Format::Matrix => read_biadjacency(path),
        _ => {
            let options = EdgeListOptions {
                delimiter: input.delimiter.map(|d| match d {
                    DelimiterArg::Tab => Delimiter::Tab,
                    DelimiterArg::Comma => Delimiter::Comma,
                    DelimiterArg::Space => Delimiter::Whitespace,
                }),
                header: match input.header {
                    HeaderArg::Auto => HeaderMode::Auto,
                    HeaderArg::Yes => HeaderMode::Present,
                    HeaderArg::No => HeaderMode::Absent,
                },
            };
            read_edge_list(path, options)
        }
    }
    .with_context(|| format!("reading {}", path.display()))?;
    Ok((labeled, InputDescriptor::from_file(path)?))
}

fn emit_record(record: &RunRecord, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => write_record(path, record).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{}", qbg_core::io::format_record(record)?);
            Ok(())
        }
    }
}

fn run_detect(ctx: &Settings, args: &DetectArgs) -> Result<()> {
    let started = SystemTime::now();
    let (labeled, input) = load(&args.input)?;
    let chi = args.chi.or(ctx.file.chi).unwrap_or(0.0);
    let (optimizer, mode) = ctx.optimizer(&args.optimizer)?;
    let mode = mode.unwrap_or_else(|| DensityMode::default_for(&labeled.graph));
    let result = detect(&labeled.graph, Resolution::new(chi, mode), &optimizer)?;
    let config = SweepConfig {
        optimizer,
        density_mode: Some(mode),
        ..SweepConfig::default()
    };
    let mut record = RunRecord::from_detection(input, config, &labeled, mode, &result);
    ctx.stamp(&mut record, started);
    emit_record(&record, args.out.as_deref())?;
    if let Some(path) = &args.partition_csv {
        write_partition_csv(path, &labeled, &result.partition)?;
    }
    if let Some(path) = &args.dot {
        write_dot(path, &labeled, &result.partition)?;
    }
    if args.out.is_some() {
        println!(
            "chi = {chi}: {} communities, Q_bg = {:.6}",
            result.num_communities(),
            result.objective.total
        );
    }
    Ok(())
}

fn run_sweep(ctx: &Settings, args: &SweepArgs) -> Result<()> {
    let started = SystemTime::now();
    let (labeled, input) = load(&args.input)?;
    let chi_min = args.chi_min.or(ctx.file.chi_min).unwrap_or(-1.0);
    let chi_max = args.chi_max.or(ctx.file.chi_max).unwrap_or(2.0);
    let steps = args.steps.or(ctx.file.steps).unwrap_or(31);
    let (optimizer, density_mode) = ctx.optimizer(&args.optimizer)?;
    let config = SweepConfig {
        optimizer,
        density_mode,
        refine_tolerance: args.refine.or(ctx.file.refine),
        ..SweepConfig::default()
    };
    let profile = sweep_chi(&labeled.graph, chi_min, chi_max, steps, &config)?;
    let mut record = RunRecord::from_profile(input, config, &labeled, &profile);
    ctx.stamp(&mut record, started);
    emit_record(&record, args.out.as_deref())?;
    if let Some(path) = &args.counts {
        write_counts_csv(path, &profile)?;
    }
    if args.out.is_some() {
        for t in &profile.transitions {
            println!(
                "{} -> {} communities near chi = {:.4}",
                t.communities_below,
                t.communities_above,
                t.chi()
            );
        }
    }
    Ok(())
}

fn write_instance(
    out_dir: &Path,
    labeled: &LabeledGraph,
    spec: &impl serde::Serialize,
    parts: &[(&str, &Partition)],
) -> Result<()> {
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    write_edge_list(&out_dir.join("graph.tsv"), labeled)?;
    for (name, p) in parts {
        write_partition_csv(&out_dir.join(format!("{name}.csv")), labeled, p)?;
    }
    let mut json = serde_json::to_string_pretty(spec)?;
    json.push('\n');
    write_atomic(&out_dir.join("spec.json"), json.as_bytes())?;
    Ok(())
}

fn run_gen(cmd: &GenCommand) -> Result<()> {
    match cmd {
        GenCommand::Ring { n, k, out_dir } => {
            let ring = gen_ring(RingSpec { n: *n, k: *k }).map_err(infeasible)?;
            let labeled = LabeledGraph::with_default_labels(ring.graph.clone());
            let merged = if n % 2 == 0 { Some(ring.merged().map_err(infeasible)?) } else { None };
            let mut parts = vec![("split", &ring.split)];
            if let Some(m) = &merged {
                parts.push(("merged", m));
            }
            write_instance(out_dir, &labeled, &ring.spec, &parts)?;
            let (s, m) = ring_modularity(*n, *k);
            println!("Q_b(split) = {s:.6}, Q_b(merged) = {m:.6}");
        }
        GenCommand::Benchmark {
            side1,
            side2,
            d,
            t,
            n_a,
            external_link_weight,
            seed,
            out_dir,
        } => {
            let spec = BenchmarkSpec {
                n_a: *n_a,
                external_link_weight: *external_link_weight,
                ..BenchmarkSpec::from_nondim(*side1, *side2, *d, t.unwrap_or(0.0))
            };
            let bench = gen_benchmark(&spec, seed.unwrap_or(0)).map_err(infeasible)?;
            let labeled = LabeledGraph::with_default_labels(bench.graph.clone());
            write_instance(out_dir, &labeled, &spec, &[("split", &bench.split), ("merged", &bench.merged)])?;
        }
        GenCommand::Hierarchy {
            levels,
            base,
            branching,
            alpha,
            out_dir,
        } => {
            let mut spec = HierarchySpec::linear(*levels, *base, *branching);
            if let Some(a) = alpha {
                spec.alpha = a.clone();
            }
            let h = gen_hierarchy(&spec).map_err(infeasible)?;
            let labeled = LabeledGraph::with_default_labels(h.graph.clone());
            let names: Vec<String> = (1..=h.levels.len()).map(|j| format!("level{j}")).collect();
            let parts: Vec<(&str, &Partition)> = names.iter().map(String::as_str).zip(h.levels.iter()).collect();
            write_instance(out_dir, &labeled, &spec, &parts)?;
        }
    }
    Ok(())
}

fn parse_axis(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() == 3 {
        let start: f64 = parts[0].trim().parse()?;
        let end: f64 = parts[1].trim().parse()?;
        let count: usize = parts[2].trim().parse()?;
        if count == 0 {
            bail!("axis {spec:?} has no points");
        }
        if count == 1 {
            return Ok(vec![start]);
        }
        let step = (end - start) / (count - 1) as f64;
        return Ok((0..count)
            .map(|i| if i + 1 == count { end } else { start + step * i as f64 })
            .collect());
    }
    spec.split(',')
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("axis value {s:?}")))
        .collect()
}

fn run_phase(ctx: &Settings, args: &PhaseArgs) -> Result<()> {
    let p_axis = parse_axis(&args.p_axis)?;
    let d_axis = parse_axis(&args.d_axis)?;
    if p_axis.iter().any(|p| !(*p > 0.0 && *p <= 1.0)) {
        bail!("p must lie in (0, 1]");
    }
    let t = args.t.or(ctx.file.t).unwrap_or(1e3);
    let (kind, chi) = match args.objective {
        PhaseObjective::Qb => (ObjectiveKind::Qb, 0.0),
        PhaseObjective::Qbg => (ObjectiveKind::Qbg, args.chi.or(ctx.file.chi).unwrap_or(1.0)),
    };
    let grid = phase_grid(kind, chi, t, &p_axis, &d_axis);
    match &args.out {
        Some(path) => write_phase_grid(path, &grid)?,
        None => print!("{}", qbg_core::io::format_phase_grid(&grid)),
    }
    Ok(())
}

fn run_eval(ctx: &Settings, args: &EvalArgs) -> Result<()> {
    let (labeled, _) = load(&args.input)?;
    let partition = read_partition_csv(&args.partition, &labeled)
        .with_context(|| format!("reading {}", args.partition.display()))?;
    let chi = args.chi.or(ctx.file.chi).unwrap_or(0.0);
    let mode = match args.density_mode.as_ref().or(ctx.file.density_mode.as_ref()) {
        Some(s) => s.parse::<DensityMode>().map_err(|e| anyhow!(e))?,
        None => DensityMode::default_for(&labeled.graph),
    };
    let qb = evaluate_qb(&labeled.graph, &partition)?;
    let qbg = evaluate_qbg(&labeled.graph, &partition, Resolution::new(chi, mode))?;
    println!("communities = {}", partition.num_communities());
    println!("Q_b = {}", qb.total);
    println!("Q_bg(chi = {chi}) = {}", qbg.total);
    Ok(())
}

fn run_threshold(ctx: &Settings, cmd: &ThresholdCommand) -> Result<()> {
    match cmd {
        ThresholdCommand::Ring { n, k } => {
            if *n < 3 {
                bail!("a ring needs at least 3 cliques");
            }
            println!("k must exceed {:.6}", ring_threshold(*n));
            if let Some(k) = k {
                let (s, m) = ring_modularity(*n, *k);
                let verdict = if s > m { "split" } else { "merged" };
                println!("Q_b(split) = {s:.6}, Q_b(merged) = {m:.6}: {verdict} preferred");
            }
        }
        ThresholdCommand::Benchmark { p, t, chi } => {
            if !(*p > 0.0 && *p <= 1.0) {
                bail!("p must lie in (0, 1]");
            }
            let t = t.or(ctx.file.t).unwrap_or(1e3);
            let chi = chi.or(ctx.file.chi).unwrap_or(1.0);
            println!("Q_b critical density: {:.6}", critical_density_qb(t).delta);
            println!("Q_bg critical density (chi = {chi}): {:.6}", critical_density_qbg(*p, t, chi).delta);
            if let Some(a) = critical_density_qbg_asymptotic(*p, chi) {
                println!("large-t limit: {:.6}", a.delta);
            }
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => FileConfig::default(),
    };
    let ctx = Settings {
        reproducible: cli.reproducible || file.reproducible.unwrap_or(false),
        file,
    };
    match &cli.command {
        Command::Detect(a) => run_detect(&ctx, a),
        Command::Sweep(a) => run_sweep(&ctx, a),
        Command::Gen(g) => run_gen(g),
        Command::Phase(a) => run_phase(&ctx, a),
        Command::Eval(a) => run_eval(&ctx, a),
        Command::Threshold(t) => run_threshold(&ctx, t),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Infeasible>().is_some() {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
