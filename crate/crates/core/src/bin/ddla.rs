//! `ddla`: grow, verify, measure and render directed DLA clusters.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Serialize, Serializer};

use ddla::activity::activity_distribution;
use ddla::analysis::{
    activation_decay, activity_lower_constant, continuous_rates, cone_occupation, geometric_points,
    height_floor_violation, never_added_estimator, pooled_exponents, row_occupancy,
    sample_curve, speed_estimate,
};
use ddla::dynamics::{run_continuous, run_dfpp, run_discrete, Acceptance, ContinuousMode, GrowthTrace, Sampler};
use ddla::influence::{coupling_report, red_scaling_experiment, run_colored_certified, truncated_line, DEFAULT_WINDOW, MAX_WINDOW};
use ddla::io::{self, ImageFormat, Meta, Snapshot};
use ddla::lattice::Slope;
use ddla::verify::{animal_corpus, run_checks, activity_total, Check, VerifyConfig};
use ddla::{Cluster, Dyadic, Error, HarrisSystem, Site, VERSION};

const EXIT_USAGE: u8 = 1;
const EXIT_CHECK: u8 = 2;
const EXIT_IO: u8 = 3;

/// A half-open seed range, written `a..b`; a bare `n` means `0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Seeds {
    start: u64,
    end: u64,
}

impl Seeds {
    fn to_vec(self) -> Vec<u64> {
        (self.start..self.end).collect()
    }
}

impl FromStr for Seeds {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |x: &str| x.trim().parse::<u64>().map_err(|e| format!("{x:?}: {e}"));
        let (start, end) = match s.split_once("..") {
            Some((a, b)) => (num(a)?, num(b)?),
            None => (0, num(s)?),
        };
        if start >= end {
            return Err(format!("empty seed range {s:?}"));
        }
        Ok(Seeds { start, end })
    }
}

impl Serialize for Seeds {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}..{}", self.start, self.end))
    }
}

fn parse_site(s: &str) -> Result<Site, String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected a,b, found {s:?}"))?;
    let num = |x: &str| x.trim().parse::<i64>().map_err(|e| format!("{x:?}: {e}"));
    Ok(Site::new(num(a)?, num(b)?))
}

fn serialize_sites<S: Serializer>(sites: &[Site], s: S) -> Result<S::Ok, S::Error> {
    let v: Vec<String> = sites.iter().map(|p| format!("{},{}", p.a, p.b)).collect();
    s.serialize_str(&v.join(";"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum CtMode {
    /// Event-driven, acceptance by an explicit upward walk.
    Gillespie,
    /// Event-driven, acceptance with the exact escape probability.
    GillespieExact,
    /// Replay of a keyed Harris system.
    Harris,
}

impl From<CtMode> for ContinuousMode {
    fn from(m: CtMode) -> Self {
        match m {
            CtMode::Gillespie => ContinuousMode::Gillespie(Acceptance::Walk),
            CtMode::GillespieExact => ContinuousMode::Gillespie(Acceptance::ExactProbability),
            CtMode::Harris => ContinuousMode::Harris,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Start {
    Origin,
    Line,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Pgm,
    Svg,
}

#[derive(Debug, Parser)]
#[command(name = "ddla", version = VERSION, about = "Directed diffusion-limited aggregation on the square lattice")]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "DDLA_OUT_DIR", default_value = ".")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Discrete-time growth from the origin.
    Grow(GrowArgs),
    /// Continuous-time growth from the origin.
    GrowCt(GrowCtArgs),
    /// First-passage comparison dynamics under a Harris system.
    Dfpp(DfppArgs),
    /// Red/black coloured dynamics from a perturbation of the truncated line.
    Influence(InfluenceArgs),
    /// Exact-identity and coupling checks.
    Verify(VerifyArgs),
    /// Statistical experiments.
    Stats(StatsArgs),
    /// Draw a snapshot, trace or coloured trace as PGM or SVG.
    Render(RenderArgs),
}

#[derive(Debug, Args, Serialize)]
struct GrowArgs {
    /// Number of additions.
    #[arg(long, default_value_t = 1000)]
    n: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Replica seed range; replaces --seed and writes aggregate files.
    #[arg(long)]
    seeds: Option<Seeds>,
    #[arg(long, default_value = "line")]
    sampler: Sampler,
}

#[derive(Debug, Args, Serialize)]
struct GrowCtArgs {
    /// Time horizon.
    #[arg(long, default_value_t = 20.0)]
    t: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    seeds: Option<Seeds>,
    #[arg(long, value_enum, default_value_t = CtMode::Gillespie)]
    mode: CtMode,
    /// Number of equally spaced times in the summary grid.
    #[arg(long, default_value_t = 20)]
    grid: usize,
}

#[derive(Debug, Args, Serialize)]
struct DfppArgs {
    #[arg(long, default_value_t = 10.0)]
    t: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Start::Origin)]
    start: Start,
    /// Half-width of the truncated line for `--start line`.
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    window: i64,
}

#[derive(Debug, Args, Serialize)]
struct InfluenceArgs {
    /// Perturbation sites `a,b`; repeatable.
    #[arg(long = "f", value_parser = parse_site, default_value = "0,0")]
    #[serde(serialize_with = "serialize_sites")]
    f: Vec<Site>,
    /// Also check coupling against this subset of F; repeatable.
    #[arg(long = "g", value_parser = parse_site)]
    #[serde(serialize_with = "serialize_sites")]
    g: Vec<Site>,
    /// Run the coupling check even when G is empty.
    #[arg(long)]
    coupling: bool,
    #[arg(long, default_value_t = 4.0)]
    t: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Initial half-width of the strip; doubled until certified.
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    window: i64,
}

#[derive(Debug, Args, Serialize)]
struct VerifyArgs {
    /// Restrict to these checks (comma-separated).
    #[arg(long, value_delimiter = ',')]
    only: Vec<Check>,
    #[arg(long, default_value = "0..200")]
    seeds: Seeds,
    /// Largest animal in the exact-identity corpus.
    #[arg(long, default_value_t = 40)]
    max_size: u64,
}

#[derive(Debug, Args, Serialize)]
struct RenderArgs {
    /// Snapshot, trace or coloured trace file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Pgm)]
    format: Format,
    /// Image path; defaults to the input name with the format extension in the output directory.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct StatsArgs {
    #[command(subcommand)]
    #[serde(flatten)]
    kind: Stats,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum Stats {
    /// Exact next-site law of a snapshot (the origin by default).
    Law {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Pooled height and width exponents of discrete growth.
    Exponents {
        #[arg(long, default_value_t = 100_000)]
        n: u64,
        #[arg(long, default_value = "0..20")]
        seeds: Seeds,
        #[arg(long, default_value = "line")]
        sampler: Sampler,
        /// Fit window start.
        #[arg(long, default_value_t = 1000)]
        from: u64,
        #[arg(long, default_value_t = 10)]
        per_decade: u32,
    },
    /// Mean height and width of continuous growth on a time grid.
    Rates {
        #[arg(long, default_value_t = 200.0)]
        t: f64,
        #[arg(long, default_value = "0..20")]
        seeds: Seeds,
        #[arg(long, value_enum, default_value_t = CtMode::Gillespie)]
        mode: CtMode,
        #[arg(long, default_value_t = 20)]
        grid: usize,
    },
    /// Activation probability by height for first-passage growth from the line.
    Decay {
        #[arg(long, default_value_t = 0.5)]
        t0: f64,
        #[arg(long, default_value_t = 10)]
        max_height: i64,
        #[arg(long, default_value = "0..10000")]
        seeds: Seeds,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: i64,
    },
    /// Fraction of runs (first addition (0,1)) in which (1,0) is still absent.
    NeverAdded {
        #[arg(long, default_value_t = 2000)]
        n: u64,
        #[arg(long, default_value = "0..10000")]
        seeds: Seeds,
        #[arg(long, default_value = "line")]
        sampler: Sampler,
        #[arg(long, value_delimiter = ',', default_value = "10,100,500,1000")]
        checkpoints: Vec<u64>,
    },
    /// Occupancy of the rows {(a, row)} after discrete growth.
    Rows {
        #[arg(long, default_value_t = 10_000)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
        rows: Vec<i64>,
        #[arg(long, default_value = "line")]
        sampler: Sampler,
    },
    /// Whether discrete growth reaches the double cones at the given apexes.
    Cones {
        #[arg(long, default_value_t = 10_000)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "apex", value_parser = parse_site, required = true)]
        #[serde(serialize_with = "serialize_sites")]
        apexes: Vec<Site>,
        #[arg(long, default_value_t = 0.5)]
        slope: f64,
        #[arg(long, default_value = "line")]
        sampler: Sampler,
    },
    /// Mean red extent over time for F = {(0,0)}.
    RedScaling {
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
        times: Vec<f64>,
        #[arg(long, default_value = "0..200")]
        seeds: Seeds,
    },
    /// Vertical speed of a tilted interface in a periodic strip.
    Speed {
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long, default_value_t = 128)]
        width: i64,
        #[arg(long, default_value_t = 20.0)]
        t: f64,
        #[arg(long, default_value = "0..8")]
        seeds: Seeds,
    },
    /// Smallest activity / max(|d|, sqrt h) over an animal corpus.
    Activity {
        #[arg(long, default_value = "0..200")]
        seeds: Seeds,
        #[arg(long, default_value_t = 40)]
        max_size: u64,
    },
}

/// Everything that determines a run's outputs, written as `config.json`.
#[derive(Debug, Serialize)]
struct RunConfig<'a> {
    version: &'static str,
    #[serde(flatten)]
    command: &'a Command,
}

/// Failure of a command: either a library error or a failed check.
enum Failure {
    Lib(Error),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = Result<(), Failure>;

struct Ctx {
    out: PathBuf,
    meta: Meta,
}

impl Ctx {
    fn new(out: PathBuf, command: &Command) -> Self {
        let value = serde_json::to_value(RunConfig { version: VERSION, command }).expect("serializable config");
        let mut meta = Meta::new();
        if let serde_json::Value::Object(map) = value {
            for (k, v) in map {
                let v = match v {
                    serde_json::Value::String(s) => s,
                    other => other.to_string(),
                };
                meta = meta.with(&k, v);
            }
        }
        Ctx { out, meta }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write(&self, name: &str, text: &str) -> Result<(), Error> {
        let path = self.path(name);
        io::write_text(&path, text)?;
        println!("wrote {}", path.display());
        Ok(())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let ctx = Ctx::new(cli.out.clone(), &cli.command);
    let config = io::to_json(&RunConfig { version: VERSION, command: &cli.command });
    let result = ctx.write("config.json", &config).map_err(Failure::from).and_then(|_| dispatch(&cli.command, &ctx));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(EXIT_CHECK)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Io { .. } | Error::Parse { .. } => EXIT_IO,
                _ => EXIT_USAGE,
            })
        }
    }
}

fn dispatch(command: &Command, ctx: &Ctx) -> Outcome {
    match command {
        Command::Grow(a) => grow(a, ctx),
        Command::GrowCt(a) => grow_ct(a, ctx),
        Command::Dfpp(a) => dfpp(a, ctx),
        Command::Influence(a) => influence(a, ctx),
        Command::Verify(a) => verify(a, ctx),
        Command::Stats(a) => stats(&a.kind, ctx),
        Command::Render(a) => render(a, ctx),
    }
}

fn grow_one(n: u64, sampler: Sampler, seed: u64) -> Result<GrowthTrace, Error> {
    let mut c = Cluster::origin();
    run_discrete(&mut c, n, sampler, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn write_cluster(ctx: &Ctx, trace: &GrowthTrace) -> Result<(), Error> {
    ctx.write("snapshot.txt", &Snapshot::new(ctx.meta.clone(), trace.final_cluster().sorted_sites()).to_text())?;
    ctx.write("trace.csv", &io::trace_to_csv(trace, &ctx.meta))
}

fn cells(row: &[&dyn ToString]) -> Vec<String> {
    row.iter().map(|x| x.to_string()).collect()
}

fn grow(a: &GrowArgs, ctx: &Ctx) -> Outcome {
    let Some(seeds) = a.seeds else {
        let trace = grow_one(a.n, a.sampler, a.seed)?;
        write_cluster(ctx, &trace)?;
        let curve = sample_curve(&trace, &[&[0], geometric_points(1, a.n.max(1), 10).as_slice()].concat());
        let rows: Vec<Vec<String>> =
            (0..curve.n.len()).map(|i| cells(&[&curve.n[i], &curve.heights[i], &curve.widths[i]])).collect();
        ctx.write("summary.csv", &io::table_to_csv("growth-curve", &ctx.meta, &["n", "height", "width"], &rows))?;
        return Ok(());
    };
    let finals: Vec<(u64, Cluster, u64)> = seeds
        .to_vec()
        .par_iter()
        .map(|&s| grow_one(a.n, a.sampler, s).map(|t| (s, t.final_cluster(), t.failed_attempts)))
        .collect::<Result<_, _>>()?;
    let mut counts: FxHashMap<Site, u64> = FxHashMap::default();
    let mut rows = Vec::new();
    for (s, c, failed) in &finals {
        for &p in c.sites() {
            *counts.entry(p).or_default() += 1;
        }
        rows.push(cells(&[s, &c.len(), &c.height(), &c.dabs(), failed]));
    }
    ctx.write(
        "summary.csv",
        &io::table_to_csv("replicas", &ctx.meta, &["seed", "size", "height", "width", "failed_attempts"], &rows),
    )?;
    let mut occ: Vec<(Site, u64)> = counts.into_iter().collect();
    occ.sort_unstable();
    let replicas = finals.len() as f64;
    let rows: Vec<Vec<String>> =
        occ.iter().map(|(p, k)| cells(&[&p.a, &p.b, k, &(*k as f64 / replicas)])).collect();
    ctx.write(
        "occupancy.csv",
        &io::table_to_csv("occupancy", &ctx.meta, &["site_a", "site_b", "count", "frequency"], &rows),
    )?;
    Ok(())
}

fn time_grid(t: f64, k: usize) -> Vec<f64> {
    let k = k.max(1);
    (1..=k).map(|i| t * i as f64 / k as f64).collect()
}

fn grow_ct(a: &GrowCtArgs, ctx: &Ctx) -> Outcome {
    let mode = ContinuousMode::from(a.mode);
    let seeds = a.seeds.map(Seeds::to_vec).unwrap_or_else(|| vec![a.seed]);
    let traces: Vec<GrowthTrace> = seeds
        .par_iter()
        .map(|&s| run_continuous(&Cluster::origin(), a.t, mode, s))
        .collect::<Result<_, _>>()?;
    if a.seeds.is_none() {
        write_cluster(ctx, &traces[0])?;
    }
    if a.t > 0.0 {
        let table = continuous_rates(&traces, &time_grid(a.t, a.grid))?;
        let rows: Vec<Vec<String>> = table
            .rows
            .iter()
            .map(|r| cells(&[&r.t, &r.mean_height, &r.mean_width, &r.mean_height_over_t, &r.mean_width_over_t]))
            .collect();
        let meta = ctx
            .meta
            .clone()
            .with("height_fit_r2", table.height_fit.r_squared)
            .with("width_constant", table.width_constant);
        ctx.write(
            "summary.csv",
            &io::table_to_csv("rates", &meta, &["t", "mean_height", "mean_width", "height_over_t", "width_over_t"], &rows),
        )?;
    }
    Ok(())
}

fn dfpp(a: &DfppArgs, ctx: &Ctx) -> Outcome {
    let start = match a.start {
        Start::Origin => Cluster::origin(),
        Start::Line => truncated_line(a.window),
    };
    let trace = run_dfpp(&start, a.t, &HarrisSystem::new(a.seed))?;
    write_cluster(ctx, &trace)?;
    Ok(())
}

fn influence(a: &InfluenceArgs, ctx: &Ctx) -> Outcome {
    if a.window < 4 || a.window > MAX_WINDOW {
        return Err(Error::InvalidParameter(format!("window must be in 4..={MAX_WINDOW}")).into());
    }
    let harris = HarrisSystem::new(a.seed);
    let run = run_colored_certified(&a.f, a.t, &harris, a.window)?;
    let meta = ctx.meta.clone().with("certified_window", run.trace.window);
    ctx.write("colored.csv", &io::colored_to_csv(&run.trace, &meta))?;
    let state = run.trace.final_state();
    let summary = serde_json::json!({
        "window": run.trace.window,
        "rejected_windows": run.rejected_windows,
        "red_sites": state.red.len(),
        "black_sites": state.black.len(),
        "red_extent": state.red_extent(),
    });
    ctx.write("influence.json", &io::to_json(&summary))?;
    if !(a.coupling || !a.g.is_empty()) {
        return Ok(());
    }
    let mut window = a.window;
    let report = loop {
        match coupling_report(&a.f, &a.g, a.t, &harris, window) {
            Err(Error::WindowBreach { .. }) if window < MAX_WINDOW => window *= 2,
            other => break other?,
        }
    };
    let json = serde_json::json!({
        "window": window,
        "checked_times": report.checked_times,
        "holds": report.holds(),
        "violation": report.violation.map(|(t, p)| serde_json::json!({"time": t, "site": p})),
    });
    ctx.write("coupling.json", &io::to_json(&json))?;
    match report.violation {
        None => {
            println!("coupling holds ({} event times)", report.checked_times);
            Ok(())
        }
        Some((t, p)) => Err(Failure::Check(format!("coupled runs differ at {p} outside the red set at time {t}"))),
    }
}

fn verify(a: &VerifyArgs, ctx: &Ctx) -> Outcome {
    let checks = if a.only.is_empty() { Check::ALL.to_vec() } else { a.only.clone() };
    let config = VerifyConfig { seeds: a.seeds.to_vec(), max_size: a.max_size, ..VerifyConfig::default() };
    let reports = run_checks(&checks, &config, activity_total)?;
    let mut rows = Vec::new();
    for r in &reports {
        let status = if r.passed { "PASS" } else { "FAIL" };
        println!("{status} {:<11} cases={:<4} {}", r.check.name(), r.cases, r.detail);
        rows.push(cells(&[&r.check.name(), &status, &r.cases, &r.detail.replace(',', ";")]));
    }
    ctx.write("verify.csv", &io::table_to_csv("verify", &ctx.meta, &["check", "status", "cases", "detail"], &rows))?;
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.check.name()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(failed.join(", ")))
    }
}

fn render(a: &RenderArgs, ctx: &Ctx) -> Outcome {
    let path = a.input.display().to_string();
    let text = io::read_text(&a.input)?;
    let state = if text.starts_with(&format!("# ddla {}", io::COLORED_TRACE)) {
        io::colored_state_from_csv(&path, &text)?.1
    } else if text.starts_with(&format!("# ddla {}", io::TRACE)) {
        let c = io::trace_from_csv(&path, &text)?.1.final_cluster();
        ddla::influence::ColoredState { black: c.sites().iter().copied().collect(), ..Default::default() }
    } else {
        let s = Snapshot::parse(&path, &text)?;
        ddla::influence::ColoredState { black: s.sites.into_iter().collect(), ..Default::default() }
    };
    let (format, ext) = match a.format {
        Format::Pgm => (ImageFormat::Pgm, "pgm"),
        Format::Svg => (ImageFormat::Svg, "svg"),
    };
    let image = io::render(&state, format);
    let target = a.output.clone().unwrap_or_else(|| {
        let stem = a.input.file_stem().unwrap_or_default().to_string_lossy().into_owned();
        ctx.path(&format!("{stem}.{ext}"))
    });
    io::write_text(&target, &image)?;
    println!("wrote {}", target.display());
    Ok(())
}

fn stats(kind: &Stats, ctx: &Ctx) -> Outcome {
    match kind {
        Stats::Law { input } => {
            let c = match input {
                Some(p) => Cluster::from_sites(Snapshot::load(p)?.sites),
                None => Cluster::origin(),
            };
            let dist = activity_distribution::<Dyadic>(&c)?;
            ctx.write("activity.csv", &io::activity_table(&dist, &ctx.meta.clone().with("total", dist.total)))?;
        }
        Stats::Exponents { n, seeds, sampler, from, per_decade } => {
            let points = geometric_points((*from).max(1), *n, *per_decade);
            let curves = seeds
                .to_vec()
                .par_iter()
                .map(|&s| {
                    let trace = grow_one(*n, *sampler, s)?;
                    if let Some(k) = height_floor_violation(&trace) {
                        return Err(Failure::Check(format!("seed {s}: height floor fails at n = {k}")));
                    }
                    Ok(sample_curve(&trace, &points))
                })
                .collect::<Result<Vec<_>, Failure>>()?;
            let (bh, bd) = pooled_exponents(&curves)?;
            let rows: Vec<Vec<String>> = curves
                .iter()
                .zip(seeds.to_vec())
                .flat_map(|(c, s)| (0..c.n.len()).map(move |i| cells(&[&s, &c.n[i], &c.heights[i], &c.widths[i]])))
                .collect();
            let meta = ctx
                .meta
                .clone()
                .with("beta_h", bh.slope)
                .with("beta_h_stderr", bh.slope_stderr)
                .with("beta_d", bd.slope)
                .with("beta_d_stderr", bd.slope_stderr);
            ctx.write("exponents.csv", &io::table_to_csv("exponents", &meta, &["seed", "n", "height", "width"], &rows))?;
            println!("beta_h = {:.4} +- {:.4}", bh.slope, bh.slope_stderr);
            println!("beta_d = {:.4} +- {:.4}", bd.slope, bd.slope_stderr);
        }
        Stats::Rates { t, seeds, mode, grid } => {
            let mode = ContinuousMode::from(*mode);
            let traces: Vec<GrowthTrace> = seeds
                .to_vec()
                .par_iter()
                .map(|&s| run_continuous(&Cluster::origin(), *t, mode, s))
                .collect::<Result<_, _>>()?;
            let table = continuous_rates(&traces, &time_grid(*t, *grid))?;
            ctx.write("rates.json", &io::to_json(&table))?;
            let rows: Vec<Vec<String>> = table
                .rows
                .iter()
                .map(|r| cells(&[&r.t, &r.mean_height, &r.mean_width, &r.mean_height_over_t, &r.mean_width_over_t]))
                .collect();
            ctx.write(
                "rates.csv",
                &io::table_to_csv("rates", &ctx.meta, &["t", "mean_height", "mean_width", "height_over_t", "width_over_t"], &rows),
            )?;
        }
        Stats::Decay { t0, max_height, seeds, window } => {
            let heights: Vec<i64> = (0..=*max_height).collect();
            let table = activation_decay(*t0, &heights, &seeds.to_vec(), *window)?;
            let rows: Vec<Vec<String>> =
                table.rows.iter().map(|r| cells(&[&r.height, &r.activated, &r.trials, &r.probability])).collect();
            let mut meta = ctx.meta.clone();
            if let Some(f) = &table.fit {
                meta = meta.with("log_slope", f.slope).with("r_squared", f.r_squared);
            }
            ctx.write("decay.csv", &io::table_to_csv("decay", &meta, &["height", "activated", "trials", "probability"], &rows))?;
        }
        Stats::NeverAdded { n, seeds, sampler, checkpoints } => {
            let r = never_added_estimator(*n, &seeds.to_vec(), *sampler, checkpoints)?;
            let rows: Vec<Vec<String>> = r
                .points
                .iter()
                .map(|p| cells(&[&p.n, &p.absent, &r.conditioned, &p.estimate, &p.wilson_lo, &p.wilson_hi]))
                .collect();
            ctx.write(
                "never_added.csv",
                &io::table_to_csv(
                    "never-added",
                    &ctx.meta.clone().with("replicas", r.replicas),
                    &["n", "absent", "conditioned", "estimate", "wilson_lo", "wilson_hi"],
                    &rows,
                ),
            )?;
        }
        Stats::Rows { n, seed, rows, sampler } => {
            let trace = grow_one(*n, *sampler, *seed)?;
            let table: Vec<Vec<String>> = row_occupancy(&trace, rows)
                .iter()
                .map(|r| cells(&[&r.row, &r.count, &r.last_addition.map_or(String::new(), |k| k.to_string())]))
                .collect();
            ctx.write("rows.csv", &io::table_to_csv("rows", &ctx.meta, &["row", "count", "last_addition"], &table))?;
        }
        Stats::Cones { n, seed, apexes, slope, sampler } => {
            let trace = grow_one(*n, *sampler, *seed)?;
            let b = Slope::from_f64(*slope)?;
            let table: Vec<Vec<String>> = cone_occupation(&trace, apexes, b)
                .iter()
                .map(|h| cells(&[&h.apex.a, &h.apex.b, &h.first_hit.map_or(String::new(), |k| k.to_string())]))
                .collect();
            ctx.write("cones.csv", &io::table_to_csv("cones", &ctx.meta, &["apex_a", "apex_b", "first_hit"], &table))?;
        }
        Stats::RedScaling { times, seeds } => {
            let r = red_scaling_experiment(times, &seeds.to_vec())?;
            let rows: Vec<Vec<String>> = r
                .rows
                .iter()
                .map(|row| cells(&[&row.time, &row.mean_red_height, &row.mean_red_dev, &row.replicas, &row.window]))
                .collect();
            ctx.write(
                "red_scaling.csv",
                &io::table_to_csv(
                    "red-scaling",
                    &ctx.meta.clone().with("slope_vs_log_t", r.slope_vs_log_t),
                    &["t", "mean_red_height", "mean_red_dev", "replicas", "window"],
                    &rows,
                ),
            )?;
        }
        Stats::Speed { alpha, width, t, seeds } => {
            let v = speed_estimate(*alpha, *width, *t, &seeds.to_vec())?;
            ctx.write("speed.json", &io::to_json(&v))?;
            println!("speed = {:.4} +- {:.4}", v.speed, v.stderr);
        }
        Stats::Activity { seeds, max_size } => {
            let corpus = animal_corpus(&seeds.to_vec(), *max_size)?;
            let k = activity_lower_constant(&corpus)?;
            let rows = vec![cells(&[&corpus.len(), &k])];
            ctx.write("activity_constant.csv", &io::table_to_csv("activity-constant", &ctx.meta, &["animals", "constant"], &rows))?;
        }
    }
    Ok(())
}
