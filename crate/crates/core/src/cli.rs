//! Command-line front end: `solve`, `optimize`, `sweep`, `simulate` and
//! `reproduce`.
//!
//! Settings come from explicit flags, then an optional `--config` JSON file,
//! then built-in defaults. Every file written starts with a header line that
//! records the resolved settings, so `--config` on that header's `config`
//! object regenerates the file.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::equilibrium::{EquilibriumSolver, ProfileDocument};
use crate::error::AuctionError;
use crate::metrics::{auction_metrics, MetricsBundle};
use crate::model::{MarketConfig, NumericalSettings, TimeCostSpec, ValueDistribution};
use crate::optimize::{
    comparative_sweep, default_mu_grid, default_n_grid, ratio_figure, revenue_curve,
    FigurePoint, Objective, OptimizationResult, StartingPriceSearch, SweepAxis, SweepRow,
};
use crate::simulate::{monte_carlo, simulate_records, SimulationRecord};

pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_REPRODUCE: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error(transparent)]
    Auction(#[from] AuctionError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{failed} of {total} reproduction checks failed")]
    Reproduce { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Auction(e) if e.is_validation() => EXIT_VALIDATION,
            CliError::Auction(_) => EXIT_SOLVER,
            CliError::Io { .. } => EXIT_IO,
            CliError::Reproduce { .. } => EXIT_REPRODUCE,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn bad<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Validation(msg.into()))
}

#[derive(Debug, Parser)]
#[command(name = "flower-auction", version, about = "Equilibrium, optimal starting price and simulation for the hybrid Dutch/English clock auction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the equilibrium at one starting price; writes profile.json, curve.csv and metrics.json
    Solve(CommonArgs),
    /// Find the optimal starting price; writes optimize.json or optimize.csv
    Optimize(CommonArgs),
    /// Optimize over grids of mu and n; writes sweep.csv or sweep.json
    Sweep(CommonArgs),
    /// Monte Carlo play of the equilibrium; writes records.csv and summary.json
    Simulate(CommonArgs),
    /// Rerun a published result and compare against its printed values
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Example,
    Table1,
    Fig1,
    Fig2,
    Fig3,
}

impl Target {
    fn name(self) -> &'static str {
        match self {
            Target::Example => "example",
            Target::Table1 => "table1",
            Target::Fig1 => "fig1",
            Target::Fig2 => "fig2",
            Target::Fig3 => "fig3",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub target: Target,
    /// Output directory [default: .]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads, 0 for all cores [default: 0]
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Default, Args)]
pub struct CommonArgs {
    /// JSON settings file; explicit flags take precedence
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Bidder count; a comma list for sweep [default: 2, sweep 2..20]
    #[arg(long, value_name = "N")]
    pub n: Option<String>,
    /// Value distribution [default: uniform]
    #[arg(long)]
    pub dist: Option<String>,
    /// Time cost as kind:mu, kind in none|linear|exponential|hyperbolic [default: linear:0.5]
    #[arg(long)]
    pub cost: Option<String>,
    /// Starting price [default: the auctioneer-optimal price]
    #[arg(long)]
    pub s: Option<f64>,
    /// auctioneer|bidder|welfare|duration|all [default: auctioneer]
    #[arg(long)]
    pub objective: Option<String>,
    /// Sweep impatience grid, a comma list or a:b:step [default: 0:0.8:0.05]
    #[arg(long)]
    pub mu: Option<String>,
    /// Simulated auctions [default: 100000]
    #[arg(long)]
    pub draws: Option<u64>,
    /// Random seed [default: 1]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Simulation clock step [default: 0.0001]
    #[arg(long)]
    pub tick: Option<f64>,
    /// Output directory [default: .]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format for optimize and sweep [default: json for optimize, csv for sweep]
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads, 0 for all cores [default: 0]
    #[arg(long)]
    pub threads: Option<usize>,
}

/// One bidder count or a list of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Counts {
    One(usize),
    Many(Vec<usize>),
}

/// A list of impatience values or an `a:b:step` range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MuGrid {
    List(Vec<f64>),
    Range(String),
}

/// Settings accepted by `--config`, and echoed (resolved) in output headers.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<Counts>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dist: Option<ValueDistribution>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<TimeCostSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<MuGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub draws: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tick: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub numerics: Option<NumericalSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))
    }

    /// Explicit flags layered over `self`.
    fn overlay(mut self, a: &CommonArgs) -> CliResult<Self> {
        if let Some(n) = &a.n {
            self.n = Some(parse_counts(n)?);
        }
        if let Some(d) = &a.dist {
            self.dist = Some(d.parse()?);
        }
        if let Some(c) = &a.cost {
            self.cost = Some(c.parse()?);
        }
        if a.s.is_some() {
            self.s = a.s;
        }
        if let Some(o) = &a.objective {
            self.objective = Some(o.clone());
        }
        if let Some(m) = &a.mu {
            self.mu = Some(MuGrid::Range(m.clone()));
        }
        if a.draws.is_some() {
            self.draws = a.draws;
        }
        if a.seed.is_some() {
            self.seed = a.seed;
        }
        if a.tick.is_some() {
            self.tick = a.tick;
        }
        if a.format.is_some() {
            self.format = a.format;
        }
        if a.out.is_some() {
            self.out = a.out.clone();
        }
        if a.threads.is_some() {
            self.threads = a.threads;
        }
        Ok(self)
    }

    fn single_n(&self) -> CliResult<usize> {
        match &self.n {
            None => Ok(2),
            Some(Counts::One(n)) => Ok(*n),
            Some(Counts::Many(v)) if v.len() == 1 => Ok(v[0]),
            Some(Counts::Many(v)) => bad(format!("expected one bidder count, got {v:?}")),
        }
    }

    fn n_list(&self) -> Vec<usize> {
        match &self.n {
            None => default_n_grid(),
            Some(Counts::One(n)) => vec![*n],
            Some(Counts::Many(v)) => v.clone(),
        }
    }

    fn mu_list(&self) -> CliResult<Vec<f64>> {
        match &self.mu {
            None => Ok(default_mu_grid()),
            Some(MuGrid::List(v)) => Ok(v.clone()),
            Some(MuGrid::Range(s)) => parse_mu_grid(s),
        }
    }

    fn market(&self, n: usize) -> CliResult<MarketConfig> {
        Ok(MarketConfig::with_numerics(
            n,
            self.dist.unwrap_or_default(),
            self.cost.unwrap_or_default(),
            self.numerics.unwrap_or_default(),
        )?)
    }

    fn objectives(&self) -> CliResult<Vec<Objective>> {
        match self.objective.as_deref().map(str::trim) {
            None => Ok(vec![Objective::Auctioneer]),
            Some(o) if o.eq_ignore_ascii_case("all") => Ok(Objective::ALL.to_vec()),
            Some(o) => Ok(vec![o.parse()?]),
        }
    }

    fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    /// Copy without fields that cannot change file contents.
    fn for_header(&self) -> RunConfig {
        RunConfig {
            out: None,
            threads: None,
            ..self.clone()
        }
    }
}

fn parse_counts(text: &str) -> CliResult<Counts> {
    let v = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Validation(format!("bad bidder count `{t}`")))
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(if v.len() == 1 { Counts::One(v[0]) } else { Counts::Many(v) })
}

/// `0.1,0.7` or `a:b:step` (inclusive of `b`).
pub fn parse_mu_grid(text: &str) -> CliResult<Vec<f64>> {
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| CliError::Validation(format!("bad number `{t}` in mu grid")))
    };
    let parts: Vec<&str> = text.split(':').collect();
    match parts.len() {
        1 => text.split(',').map(num).collect(),
        3 => {
            let (a, b, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
            if !(step > 0.0) || b < a {
                return bad(format!("mu range `{text}` needs a <= b and step > 0"));
            }
            let count = ((b - a) / step + 1e-9).floor() as usize;
            // rounding keeps 0.15 from printing as 0.15000000000000002
            Ok((0..=count)
                .map(|k| ((a + k as f64 * step) * 1e12).round() / 1e12)
                .collect())
        }
        _ => bad(format!("mu grid `{text}` must be a comma list or a:b:step")),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn header(command: &str, cfg: &RunConfig) -> Value {
    json!({
        "tool": "flower-auction",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": cfg.for_header(),
    })
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(io_err(path))
}

/// JSON document `{"header": ..., <key>: ...}` on a single line.
fn write_json<T: Serialize>(path: &Path, header: &Value, key: &str, body: &T) -> CliResult<()> {
    let mut text = format!("{{\"header\":{header},\"{key}\":");
    text.push_str(&serde_json::to_string(body).expect("output serializes"));
    text.push_str("}\n");
    write_text(path, &text)
}

/// CSV with a `# <header>` first line and LF line ends.
fn write_csv<I, R>(path: &Path, header: &Value, columns: &[String], rows: I) -> CliResult<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let file = File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "# {header}").map_err(io_err(path))?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let csv_err = |e: csv::Error| CliError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    };
    w.write_record(columns).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

fn strings(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|c| c.to_string()).collect()
}

fn configure_threads(threads: Option<usize>) {
    if let Some(t) = threads.filter(|&t| t > 0) {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command) -> CliResult<()> {
    match command {
        Command::Reproduce(a) => {
            configure_threads(a.threads);
            let out = a.out.unwrap_or_else(|| PathBuf::from("."));
            cmd_reproduce(a.target, &out)
        }
        Command::Solve(a) => with_config(&a, cmd_solve),
        Command::Optimize(a) => with_config(&a, cmd_optimize),
        Command::Sweep(a) => with_config(&a, cmd_sweep),
        Command::Simulate(a) => with_config(&a, cmd_simulate),
    }
}

fn with_config(a: &CommonArgs, f: fn(RunConfig) -> CliResult<()>) -> CliResult<()> {
    let base = match &a.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    let cfg = base.overlay(a)?;
    configure_threads(cfg.threads);
    f(cfg)
}

/// Records the market settings actually used in `cfg`.
fn pin_market(cfg: &mut RunConfig, market: &MarketConfig) {
    cfg.dist = Some(market.dist);
    cfg.cost = Some(market.cost);
    cfg.numerics = Some(market.num);
}

/// Auctioneer-optimal starting price unless `s` is given.
fn resolve_s(cfg: &mut RunConfig, market: &MarketConfig) -> CliResult<f64> {
    let s = match cfg.s {
        Some(s) => s,
        None => StartingPriceSearch::new(market)?
            .optimize(Objective::Auctioneer)?
            .s_star,
    };
    if !(0.0..=1.0).contains(&s) {
        return bad(format!("starting price s = {s} must lie in [0, 1]"));
    }
    cfg.s = Some(s);
    Ok(s)
}

fn cmd_solve(mut cfg: RunConfig) -> CliResult<()> {
    let n = cfg.single_n()?;
    let market = cfg.market(n)?;
    let s = resolve_s(&mut cfg, &market)?;
    cfg.n = Some(Counts::One(n));
    pin_market(&mut cfg, &market);
    let solver = EquilibriumSolver::new(&market)?;
    let profile = solver.profile(s)?;
    let metrics = auction_metrics(&profile)?;
    let dutch = auction_metrics(&solver.profile(1.0)?)?;
    let english = auction_metrics(&solver.profile(0.0)?)?;

    let dir = cfg.out_dir();
    ensure_dir(&dir)?;
    let head = header("solve", &cfg);
    let doc = ProfileDocument {
        header: Some(head.clone()),
        ..profile.to_document()
    };
    let mut profile_json = serde_json::to_string(&doc).expect("profile serializes");
    profile_json.push('\n');
    write_text(&dir.join("profile.json"), &profile_json)?;
    let curve = match profile.dutch_curve() {
        Some(c) => c.to_csv(),
        None => "v,b\n".to_string(),
    };
    write_text(&dir.join("curve.csv"), &format!("# {head}\n{curve}"))?;
    write_json(
        &dir.join("metrics.json"),
        &head,
        "metrics",
        &json!({ "flower": metrics, "dutch": dutch, "english": english, "p": profile.cutoff(), "s_tilde": profile.s_tilde().value }),
    )?;
    println!(
        "s = {s:.6}  p = {:.6}  s_tilde = {:.6}",
        profile.cutoff(),
        profile.s_tilde().value
    );
    println!("{}\n{}", MetricsBundle::CSV_HEADER, metrics.csv_row());
    Ok(())
}

fn cmd_optimize(mut cfg: RunConfig) -> CliResult<()> {
    let n = cfg.single_n()?;
    let market = cfg.market(n)?;
    let objectives = cfg.objectives()?;
    cfg.n = Some(Counts::One(n));
    pin_market(&mut cfg, &market);
    let format = *cfg.format.get_or_insert(Format::Json);
    let search = StartingPriceSearch::new(&market)?;
    let results = objectives
        .iter()
        .map(|&o| search.optimize(o))
        .collect::<crate::Result<Vec<OptimizationResult>>>()?;

    let dir = cfg.out_dir();
    ensure_dir(&dir)?;
    let head = header("optimize", &cfg);
    match format {
        Format::Json => write_json(&dir.join("optimize.json"), &head, "results", &results)?,
        Format::Csv => {
            let rows = results.iter().map(|r| {
                SweepRow {
                    mu: market.cost.mu,
                    n,
                    objective: r.objective,
                    outcome: Ok(r.clone()),
                }
                .csv_record()
            });
            write_csv(&dir.join("optimize.csv"), &head, &strings(&SweepRow::CSV_HEADER), rows)?
        }
    }
    for r in &results {
        println!(
            "{:<10} s* = {:.6}  p = {:.6}  value = {:.6}  vs dutch = {:.4}",
            r.objective,
            r.s_star,
            r.p_star,
            r.value(),
            r.objective.value(&r.metrics) / r.objective.value(&r.dutch)
        );
    }
    Ok(())
}

fn cmd_sweep(mut cfg: RunConfig) -> CliResult<()> {
    let mus = cfg.mu_list()?;
    let ns = cfg.n_list();
    let objectives = cfg.objectives()?;
    let base = cfg.market(ns.first().copied().unwrap_or(2).max(2))?;
    cfg.n = Some(Counts::Many(ns.clone()));
    cfg.mu = Some(MuGrid::List(mus.clone()));
    pin_market(&mut cfg, &base);
    let format = *cfg.format.get_or_insert(Format::Csv);
    let rows = comparative_sweep(&base, &mus, &ns, &objectives)?;

    let dir = cfg.out_dir();
    ensure_dir(&dir)?;
    let head = header("sweep", &cfg);
    match format {
        Format::Csv => write_csv(
            &dir.join("sweep.csv"),
            &head,
            &strings(&SweepRow::CSV_HEADER),
            rows.iter().map(SweepRow::csv_record),
        )?,
        Format::Json => {
            let body: Vec<Value> = rows
                .iter()
                .map(|r| match &r.outcome {
                    Ok(res) => json!({ "mu": r.mu, "n": r.n, "objective": r.objective, "result": res }),
                    Err(e) => json!({ "mu": r.mu, "n": r.n, "objective": r.objective, "error": e }),
                })
                .collect();
            write_json(&dir.join("sweep.json"), &head, "rows", &body)?
        }
    }
    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    println!("{} rows, {failed} failed", rows.len());
    for r in rows.iter().filter(|r| r.outcome.is_err()) {
        eprintln!("row mu={} n={} {}: {}", r.mu, r.n, r.objective, r.outcome.as_ref().unwrap_err());
    }
    if failed == rows.len() {
        return Err(CliError::Auction(AuctionError::RootNotBracketed(
            "every sweep row failed".into(),
        )));
    }
    Ok(())
}

fn cmd_simulate(mut cfg: RunConfig) -> CliResult<()> {
    let n = cfg.single_n()?;
    let market = cfg.market(n)?;
    let s = resolve_s(&mut cfg, &market)?;
    let draws = *cfg.draws.get_or_insert(100_000);
    let seed = *cfg.seed.get_or_insert(1);
    let tick = *cfg.tick.get_or_insert(1e-4);
    cfg.n = Some(Counts::One(n));
    pin_market(&mut cfg, &market);
    let profile = EquilibriumSolver::new(&market)?.profile(s)?;
    let summary = monte_carlo(&profile, draws, seed, tick)?;
    let records = simulate_records(&profile, draws, seed, tick)?;
    let quadrature = auction_metrics(&profile)?;

    let dir = cfg.out_dir();
    ensure_dir(&dir)?;
    let head = header("simulate", &cfg);
    write_csv(
        &dir.join("records.csv"),
        &head,
        &SimulationRecord::csv_header(),
        records.iter().enumerate().map(|(i, r)| r.csv_record(i as u64)),
    )?;
    let z = json!({
        "eu_a": summary.eu_a.z_score(quadrature.eu_auctioneer),
        "eu_b": summary.eu_b.z_score(quadrature.eu_bidder),
        "eu_s": summary.eu_s.z_score(quadrature.eu_social),
        "ed": summary.ed.z_score(quadrature.expected_duration),
    });
    write_json(
        &dir.join("summary.json"),
        &head,
        "summary",
        &json!({ "monte_carlo": summary, "quadrature": quadrature, "z_scores": z }),
    )?;
    println!("metric  empirical  se  quadrature");
    for (name, e, q) in [
        ("eu_a", summary.eu_a, quadrature.eu_auctioneer),
        ("eu_b", summary.eu_b, quadrature.eu_bidder),
        ("eu_s", summary.eu_s, quadrature.eu_social),
        ("ed", summary.ed, quadrature.expected_duration),
    ] {
        println!("{name}  {:.6}  {:.2e}  {:.6}", e.mean, e.se, q);
    }
    println!("inefficient share {}  no-winner {}", summary.inefficiency, summary.no_winner);
    Ok(())
}

/// One line of a reproduction report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub target: String,
    pub computed: String,
    pub tolerance: String,
    pub pass: bool,
}

impl Check {
    pub fn abs(name: impl Into<String>, target: f64, computed: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            target: format!("{target}"),
            computed: format!("{computed:.6}"),
            tolerance: format!("±{tol}"),
            pass: (computed - target).abs() <= tol,
        }
    }

    /// `computed` within `rel` of `target`, relative to `target`.
    pub fn rel(name: impl Into<String>, target: f64, computed: f64, rel: f64) -> Self {
        Check {
            name: name.into(),
            target: format!("{target}"),
            computed: format!("{computed:.4}"),
            tolerance: format!("±{}% rel", rel * 100.0),
            pass: (computed - target).abs() <= rel * target.abs(),
        }
    }

    pub fn holds(name: impl Into<String>, claim: &str, pass: bool) -> Self {
        Check {
            name: name.into(),
            target: claim.to_string(),
            computed: if pass { "holds" } else { "violated" }.to_string(),
            tolerance: "-".to_string(),
            pass,
        }
    }
}

/// Published figures for the two-bidder example with `c(t) = 1 - 0.5 t`.
pub mod published {
    pub const EXAMPLE_S_STAR: f64 = 0.462;
    pub const EXAMPLE_CUTOFF: f64 = 0.847;
    pub const EXAMPLE_S_TILDE: f64 = 0.557;
    pub const EXAMPLE_EU_A: f64 = 0.338;
    pub const EXAMPLE_EU_A_DUTCH: f64 = 0.227;
    pub const EXAMPLE_EU_A_ENGLISH: f64 = 0.269;
    pub const EXAMPLE_ED: f64 = 0.138;
    /// Percent gains over Dutch and English for the auctioneer.
    pub const EXAMPLE_GAIN_DUTCH: f64 = 49.0;
    pub const EXAMPLE_GAIN_ENGLISH: f64 = 26.0;
    pub const EXAMPLE_BIDDER_GAIN: f64 = 58.0;
    pub const EXAMPLE_WELFARE_GAIN: f64 = 53.0;
    /// Percent reduction of expected duration against Dutch.
    pub const EXAMPLE_DURATION_CUT: f64 = 82.0;

    /// `(n, mu, [auctioneer, buyer, welfare, duration])` ratios to Dutch in
    /// percent, at the auctioneer-optimal starting price.
    pub const TABLE: [(usize, f64, [f64; 4]); 4] = [
        (2, 0.1, [105.75, 107.73, 106.73, 18.87]),
        (2, 0.7, [207.74, 231.87, 218.19, 17.21]),
        (10, 0.1, [101.38, 168.19, 108.00, 28.85]),
        (10, 0.7, [130.11, 385.39, 152.83, 16.64]),
    ];
}

pub const TABLE_RATIO_REL_TOL: f64 = 0.02;
pub const TABLE_DURATION_TOL: f64 = 1.5;
pub const EXAMPLE_VALUE_TOL: f64 = 0.005;
pub const EXAMPLE_UTILITY_TOL: f64 = 0.003;
pub const EXAMPLE_AUCTIONEER_GAIN_TOL: f64 = 2.0;
pub const EXAMPLE_OTHER_GAIN_TOL: f64 = 3.0;
/// Lowest auctioneer ratio to Dutch tolerated under another objective.
pub const ALTERNATIVE_OBJECTIVE_FLOOR: f64 = 0.97;

fn example_market() -> crate::Result<MarketConfig> {
    MarketConfig::uniform(2, TimeCostSpec::linear(0.5))
}

fn pct_gain(new: f64, old: f64) -> f64 {
    100.0 * (new / old - 1.0)
}

/// Checks for the two-bidder linear-cost example.
pub fn reproduce_example() -> crate::Result<Vec<Check>> {
    use published::*;
    let r = StartingPriceSearch::new(&example_market()?)?.optimize(Objective::Auctioneer)?;
    let (f, d, e) = (r.metrics, r.dutch, r.english);
    let v = EXAMPLE_VALUE_TOL;
    let u = EXAMPLE_UTILITY_TOL;
    Ok(vec![
        Check::abs("s_star", EXAMPLE_S_STAR, r.s_star, v),
        Check::abs("cutoff", EXAMPLE_CUTOFF, r.p_star, v),
        Check::abs("s_tilde", EXAMPLE_S_TILDE, r.s_tilde, v),
        Check::abs("eu_a", EXAMPLE_EU_A, f.eu_auctioneer, u),
        Check::abs("eu_a_dutch", EXAMPLE_EU_A_DUTCH, d.eu_auctioneer, u),
        Check::abs("eu_a_english", EXAMPLE_EU_A_ENGLISH, e.eu_auctioneer, u),
        Check::abs("ed", EXAMPLE_ED, f.expected_duration, u),
        Check::abs(
            "gain_vs_dutch_pct",
            EXAMPLE_GAIN_DUTCH,
            pct_gain(f.eu_auctioneer, d.eu_auctioneer),
            EXAMPLE_AUCTIONEER_GAIN_TOL,
        ),
        Check::abs(
            "gain_vs_english_pct",
            EXAMPLE_GAIN_ENGLISH,
            pct_gain(f.eu_auctioneer, e.eu_auctioneer),
            EXAMPLE_AUCTIONEER_GAIN_TOL,
        ),
        Check::abs(
            "bidder_gain_pct",
            EXAMPLE_BIDDER_GAIN,
            pct_gain(f.eu_bidder, d.eu_bidder),
            EXAMPLE_OTHER_GAIN_TOL,
        ),
        Check::abs(
            "welfare_gain_pct",
            EXAMPLE_WELFARE_GAIN,
            pct_gain(f.eu_social, d.eu_social),
            EXAMPLE_OTHER_GAIN_TOL,
        ),
        Check::abs(
            "duration_cut_pct",
            EXAMPLE_DURATION_CUT,
            -pct_gain(f.expected_duration, d.expected_duration),
            EXAMPLE_OTHER_GAIN_TOL,
        ),
    ])
}

/// Ratios to Dutch at the auctioneer optimum for the four published cells.
pub fn reproduce_table() -> crate::Result<Vec<Check>> {
    let base = example_market()?;
    let mut checks = Vec::new();
    for (n, mu, target) in published::TABLE {
        let rows = comparative_sweep(&base, &[mu], &[n], &[Objective::Auctioneer])?;
        let r = rows[0]
            .outcome
            .clone()
            .map_err(AuctionError::RootNotBracketed)?;
        let got = r.ratios;
        let tag = format!("n={n} mu={mu}");
        checks.push(Check::rel(format!("{tag} auctioneer_pct"), target[0], 100.0 * got.eu_a, TABLE_RATIO_REL_TOL));
        checks.push(Check::rel(format!("{tag} buyer_pct"), target[1], 100.0 * got.eu_b, TABLE_RATIO_REL_TOL));
        checks.push(Check::rel(format!("{tag} welfare_pct"), target[2], 100.0 * got.eu_s, TABLE_RATIO_REL_TOL));
        checks.push(Check::abs(format!("{tag} duration_pct"), target[3], 100.0 * got.ed, TABLE_DURATION_TOL));
    }
    Ok(checks)
}

/// Revenue curve of the example over `s`, with its shape checks.
pub fn reproduce_fig1() -> crate::Result<(Vec<FigurePoint>, Vec<Check>)> {
    let cfg = example_market()?;
    let points = revenue_curve(&cfg, cfg.num.scan_points)?;
    let s_tilde = EquilibriumSolver::new(&cfg)?.s_tilde().value;
    let flower: Vec<&FigurePoint> = points.iter().filter(|p| p.series == "flower").collect();
    let peak = flower
        .iter()
        .copied()
        .fold(flower[0], |a, b| if b.y > a.y { b } else { a });
    let first = flower[0].y;
    let last = flower[flower.len() - 1].y;
    let checks = vec![
        Check::holds("interior_peak", "argmax of EU_A in (0, s_tilde)", peak.x > 0.0 && peak.x < s_tilde),
        Check::holds("dutch_below_english", "EU_A(1) < EU_A(0)", last < first),
    ];
    Ok((points, checks))
}

fn shape_checks(rows: &[SweepRow], axis: SweepAxis) -> Vec<Check> {
    let mut checks = Vec::new();
    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    checks.push(Check::holds("rows_solved", "every sweep row solves", failed == 0));
    let groups: Vec<f64> = match axis {
        SweepAxis::Mu => vec![2.0, 10.0],
        SweepAxis::N => vec![0.1, 0.7],
    };
    for g in groups {
        let series: Vec<&SweepRow> = rows
            .iter()
            .filter(|r| r.objective == Objective::Auctioneer)
            .filter(|r| match axis {
                SweepAxis::Mu => r.n as f64 == g,
                SweepAxis::N => r.mu == g,
            })
            .collect();
        let ratios: Vec<f64> = series
            .iter()
            .filter_map(|r| r.outcome.as_ref().ok().map(|o| o.ratios.eu_a))
            .collect();
        let (name, claim, ok) = match axis {
            SweepAxis::Mu => (
                format!("n={g} increasing_in_mu"),
                "auctioneer ratio increases in mu",
                ratios.windows(2).all(|w| w[1] > w[0]),
            ),
            SweepAxis::N => (
                format!("mu={g} decreasing_in_n"),
                "auctioneer ratio decreases in n",
                ratios.windows(2).all(|w| w[1] < w[0]),
            ),
        };
        checks.push(Check::holds(name, claim, ok && ratios.len() == series.len()));
    }
    let floor_ok = rows
        .iter()
        .filter(|r| r.objective != Objective::Auctioneer && r.mu > 0.0)
        .filter_map(|r| r.outcome.as_ref().ok())
        .all(|o| o.ratios.eu_a >= ALTERNATIVE_OBJECTIVE_FLOOR);
    checks.push(Check::holds(
        "alternative_objective_floor",
        "auctioneer ratio >= 0.97 under the other objectives",
        floor_ok,
    ));
    checks
}

/// Auctioneer ratio against `mu` for two and ten bidders.
pub fn reproduce_fig2() -> crate::Result<(Vec<FigurePoint>, Vec<Check>)> {
    let rows = comparative_sweep(&example_market()?, &default_mu_grid(), &[2, 10], &Objective::ALL)?;
    Ok((ratio_figure(&rows, SweepAxis::Mu), shape_checks(&rows, SweepAxis::Mu)))
}

/// Auctioneer ratio against `n` for low and high impatience.
pub fn reproduce_fig3() -> crate::Result<(Vec<FigurePoint>, Vec<Check>)> {
    let rows = comparative_sweep(&example_market()?, &[0.1, 0.7], &default_n_grid(), &Objective::ALL)?;
    Ok((ratio_figure(&rows, SweepAxis::N), shape_checks(&rows, SweepAxis::N)))
}

fn cmd_reproduce(target: Target, dir: &Path) -> CliResult<()> {
    ensure_dir(dir)?;
    let head = json!({
        "tool": "flower-auction",
        "version": env!("CARGO_PKG_VERSION"),
        "command": "reproduce",
        "target": target.name(),
    });
    let (points, checks) = match target {
        Target::Example => (None, reproduce_example()?),
        Target::Table1 => (None, reproduce_table()?),
        Target::Fig1 => {
            let (p, c) = reproduce_fig1()?;
            (Some(p), c)
        }
        Target::Fig2 => {
            let (p, c) = reproduce_fig2()?;
            (Some(p), c)
        }
        Target::Fig3 => {
            let (p, c) = reproduce_fig3()?;
            (Some(p), c)
        }
    };
    if let Some(points) = points {
        write_csv(
            &dir.join(format!("{}.csv", target.name())),
            &head,
            &strings(&["x", "y", "series"]),
            points
                .iter()
                .map(|p| vec![p.x.to_string(), p.y.to_string(), p.series.clone()]),
        )?;
    }
    write_csv(
        &dir.join(format!("{}_report.csv", target.name())),
        &head,
        &strings(&["check", "target", "computed", "tolerance", "status"]),
        checks.iter().map(|c| {
            vec![
                c.name.clone(),
                c.target.clone(),
                c.computed.clone(),
                c.tolerance.clone(),
                if c.pass { "PASS" } else { "FAIL" }.to_string(),
            ]
        }),
    )?;
    println!("{:<28} {:>12} {:>12} {:>14}  status", "check", "target", "computed", "tolerance");
    for c in &checks {
        println!(
            "{:<28} {:>12} {:>12} {:>14}  {}",
            c.name,
            c.target,
            c.computed,
            c.tolerance,
            if c.pass { "PASS" } else { "FAIL" }
        );
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    if failed > 0 {
        return Err(CliError::Reproduce {
            failed,
            total: checks.len(),
        });
    }
    Ok(())
}
