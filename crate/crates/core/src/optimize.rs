//! Starting-price search for the four objectives and the comparative sweeps
//! over impatience `mu` and bidder count `n`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::EquilibriumSolver;
use crate::error::{invalid, AuctionError, Result};
use crate::metrics::{auction_metrics, MetricRatios, MetricsBundle};
use crate::model::{MarketConfig, TimeCostKind, TimeCostSpec};
use crate::numeric::golden_section_max;

/// Spread below which a scanned objective counts as flat.
const FLAT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Auctioneer,
    Bidder,
    Welfare,
    Duration,
}

impl Objective {
    pub const ALL: [Objective; 4] = [
        Objective::Auctioneer,
        Objective::Bidder,
        Objective::Welfare,
        Objective::Duration,
    ];

    /// Value of the objective in `m`.
    pub fn value(self, m: &MetricsBundle) -> f64 {
        match self {
            Objective::Auctioneer => m.eu_auctioneer,
            Objective::Bidder => m.eu_bidder,
            Objective::Welfare => m.eu_social,
            Objective::Duration => m.expected_duration,
        }
    }

    /// Quantity maximized by the search (duration is minimized).
    fn score(self, m: &MetricsBundle) -> f64 {
        match self {
            Objective::Duration => -m.expected_duration,
            other => other.value(m),
        }
    }

    pub fn minimizes(self) -> bool {
        self == Objective::Duration
    }

    pub fn name(self) -> &'static str {
        match self {
            Objective::Auctioneer => "auctioneer",
            Objective::Bidder => "bidder",
            Objective::Welfare => "welfare",
            Objective::Duration => "duration",
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Objective {
    type Err = AuctionError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auctioneer" => Ok(Objective::Auctioneer),
            "bidder" | "buyer" => Ok(Objective::Bidder),
            "welfare" | "social" => Ok(Objective::Welfare),
            "duration" => Ok(Objective::Duration),
            other => invalid(format!(
                "unknown objective `{other}` (expected auctioneer, bidder, welfare or duration)"
            )),
        }
    }
}

/// Conditions worth reporting alongside an optimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizationFlag {
    /// The objective did not vary over the scan; the smallest `s` is returned.
    FlatObjective,
    /// No time cost, so `s̃ = 1` is a convention.
    DegenerateThreshold,
}

impl fmt::Display for OptimizationFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptimizationFlag::FlatObjective => "flat_objective",
            OptimizationFlag::DegenerateThreshold => "degenerate_threshold",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub objective: Objective,
    pub s_star: f64,
    pub p_star: f64,
    pub s_tilde: f64,
    pub metrics: MetricsBundle,
    pub dutch: MetricsBundle,
    pub english: MetricsBundle,
    /// `metrics` relative to the Dutch benchmark.
    pub ratios: MetricRatios,
    pub flags: Vec<OptimizationFlag>,
}

impl OptimizationResult {
    /// Objective value at the optimum.
    pub fn value(&self) -> f64 {
        self.objective.value(&self.metrics)
    }

    pub fn has_flag(&self, flag: OptimizationFlag) -> bool {
        self.flags.contains(&flag)
    }
}

/// Coarse scan of every metric over a uniform `s`-grid, shared by all
/// objectives of one market.
#[derive(Debug, Clone)]
pub struct StartingPriceSearch {
    solver: EquilibriumSolver,
    scan: Vec<MetricsBundle>,
}

impl StartingPriceSearch {
    pub fn new(cfg: &MarketConfig) -> Result<Self> {
        cfg.validate()?;
        let solver = EquilibriumSolver::new(cfg)?;
        let points = cfg.num.scan_points;
        let scan = (0..points)
            .map(|i| {
                let s = i as f64 / (points - 1) as f64;
                auction_metrics(&solver.profile(s)?)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { solver, scan })
    }

    pub fn solver(&self) -> &EquilibriumSolver {
        &self.solver
    }

    /// Metrics at the scan nodes, `s = 0` first.
    pub fn scan(&self) -> &[MetricsBundle] {
        &self.scan
    }

    pub fn dutch(&self) -> MetricsBundle {
        *self.scan.last().expect("scan has at least 3 points")
    }

    pub fn english(&self) -> MetricsBundle {
        self.scan[0]
    }

    pub fn metrics_at(&self, s: f64) -> Result<MetricsBundle> {
        auction_metrics(&self.solver.profile(s)?)
    }

    /// Best scan node, then golden-section refinement on its neighbours.
    pub fn optimize(&self, objective: Objective) -> Result<OptimizationResult> {
        let cfg = self.solver.config();
        let scores: Vec<f64> = self.scan.iter().map(|m| objective.score(m)).collect();
        let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let worst = scores.iter().copied().fold(f64::INFINITY, f64::min);
        let mut flags = Vec::new();
        if self.solver.s_tilde().degenerate {
            flags.push(OptimizationFlag::DegenerateThreshold);
        }
        let (s_star, metrics) = if best - worst <= FLAT_TOLERANCE {
            flags.push(OptimizationFlag::FlatObjective);
            (self.scan[0].s, self.scan[0])
        } else {
            // ties resolve to the smallest s
            let i = scores
                .iter()
                .position(|&v| v >= best - 1e-12)
                .expect("non-empty scan");
            let last = self.scan.len() - 1;
            let lo = self.scan[i.saturating_sub(1)].s;
            let hi = self.scan[(i + 1).min(last)].s;
            let refined = golden_section_max(
                |s| Ok(objective.score(&self.metrics_at(s)?)),
                lo,
                hi,
                cfg.num.opt_tol,
            )?;
            if refined.value > scores[i] {
                (refined.x, self.metrics_at(refined.x)?)
            } else {
                (self.scan[i].s, self.scan[i])
            }
        };
        let p_star = self.solver.profile(s_star)?.cutoff();
        let dutch = self.dutch();
        Ok(OptimizationResult {
            objective,
            s_star,
            p_star,
            s_tilde: self.solver.s_tilde().value,
            metrics,
            dutch,
            english: self.english(),
            ratios: metrics.ratios_to(&dutch),
            flags,
        })
    }
}

/// Optimal starting price for one objective.
pub fn optimize_starting_price(cfg: &MarketConfig, objective: Objective) -> Result<OptimizationResult> {
    StartingPriceSearch::new(cfg)?.optimize(objective)
}

/// One `(mu, n, objective)` cell of a sweep. Failures are kept per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub mu: f64,
    pub n: usize,
    pub objective: Objective,
    pub outcome: std::result::Result<OptimizationResult, String>,
}

impl SweepRow {
    pub const CSV_HEADER: [&'static str; 11] = [
        "mu",
        "n",
        "objective",
        "s_star",
        "p_star",
        "s_tilde",
        "eu_a_ratio",
        "eu_b_ratio",
        "eu_s_ratio",
        "ed_ratio",
        "flags",
    ];

    pub fn csv_record(&self) -> Vec<String> {
        let mut rec = vec![self.mu.to_string(), self.n.to_string(), self.objective.to_string()];
        match &self.outcome {
            Ok(r) => {
                rec.extend(
                    [
                        r.s_star,
                        r.p_star,
                        r.s_tilde,
                        r.ratios.eu_a,
                        r.ratios.eu_b,
                        r.ratios.eu_s,
                        r.ratios.ed,
                    ]
                    .iter()
                    .map(|x| x.to_string()),
                );
                let flags: Vec<String> = r.flags.iter().map(|f| f.to_string()).collect();
                rec.push(flags.join(";"));
            }
            Err(e) => {
                rec.extend(std::iter::repeat(String::new()).take(7));
                rec.push(format!("error: {e}"));
            }
        }
        rec
    }
}

/// Market for one sweep cell: `base` with the cost parameter replaced by
/// `mu` (a costless base switches to the linear family).
pub fn sweep_market(base: &MarketConfig, mu: f64, n: usize) -> Result<MarketConfig> {
    let kind = match base.cost.kind {
        TimeCostKind::None => TimeCostKind::Linear,
        k => k,
    };
    let cost = if mu == 0.0 {
        TimeCostSpec::NONE
    } else {
        TimeCostSpec::new(kind, mu)
    };
    MarketConfig::with_numerics(n, base.dist, cost, base.num)
}

/// Optimizes every `(mu, n, objective)` cell. Cells run in parallel; rows
/// come back `mu`-major, then `n`, then objective in the given order.
pub fn comparative_sweep(
    base: &MarketConfig,
    mu_grid: &[f64],
    n_grid: &[usize],
    objectives: &[Objective],
) -> Result<Vec<SweepRow>> {
    if mu_grid.is_empty() || n_grid.is_empty() || objectives.is_empty() {
        return invalid("sweep grids must be non-empty");
    }
    if let Some(mu) = mu_grid.iter().find(|m| !(0.0..1.0).contains(*m)) {
        return invalid(format!("sweep mu = {mu} must lie in [0, 1)"));
    }
    let cells: Vec<(f64, usize)> = mu_grid
        .iter()
        .flat_map(|&mu| n_grid.iter().map(move |&n| (mu, n)))
        .collect();
    let rows: Vec<Vec<SweepRow>> = cells
        .par_iter()
        .map(|&(mu, n)| {
            let search = sweep_market(base, mu, n).and_then(|cfg| StartingPriceSearch::new(&cfg));
            objectives
                .iter()
                .map(|&objective| SweepRow {
                    mu,
                    n,
                    objective,
                    outcome: search
                        .as_ref()
                        .map_err(|e| e.to_string())
                        .and_then(|s| s.optimize(objective).map_err(|e| e.to_string())),
                })
                .collect()
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

/// Default impatience grid `0, 0.05, ..., 0.8`.
pub fn default_mu_grid() -> Vec<f64> {
    (0..=16).map(|i| i as f64 * 0.05).collect()
}

/// Default bidder counts `2, ..., 20`.
pub fn default_n_grid() -> Vec<usize> {
    (2..=20).collect()
}

/// One `(x, y, series)` point of plot data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigurePoint {
    pub x: f64,
    pub y: f64,
    pub series: String,
}

/// Auctioneer utility over a uniform `s`-grid, with the two benchmarks as
/// flat series.
pub fn revenue_curve(cfg: &MarketConfig, points: usize) -> Result<Vec<FigurePoint>> {
    let solver = EquilibriumSolver::new(cfg)?;
    let points = points.max(2);
    let curve = (0..points)
        .map(|i| {
            let s = i as f64 / (points - 1) as f64;
            Ok((s, auction_metrics(&solver.profile(s)?)?.eu_auctioneer))
        })
        .collect::<Result<Vec<_>>>()?;
    let english = curve[0].1;
    let dutch = curve[points - 1].1;
    let mut out = Vec::with_capacity(3 * points);
    for &(s, y) in &curve {
        out.push(FigurePoint { x: s, y, series: "flower".into() });
    }
    for &(s, _) in &curve {
        out.push(FigurePoint { x: s, y: dutch, series: "dutch".into() });
    }
    for &(s, _) in &curve {
        out.push(FigurePoint { x: s, y: english, series: "english".into() });
    }
    Ok(out)
}

/// Sweep axis used as `x` in [`ratio_figure`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Mu,
    N,
}

/// Auctioneer ratio against the Dutch benchmark, one series per objective
/// and fixed value of the other axis. Failed rows are skipped.
pub fn ratio_figure(rows: &[SweepRow], axis: SweepAxis) -> Vec<FigurePoint> {
    rows.iter()
        .filter_map(|r| {
            let res = r.outcome.as_ref().ok()?;
            let (x, series) = match axis {
                SweepAxis::Mu => (r.mu, format!("n={} {}", r.n, r.objective)),
                SweepAxis::N => (r.n as f64, format!("mu={} {}", r.mu, r.objective)),
            };
            Some(FigurePoint {
                x,
                y: res.ratios.eu_a,
                series,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> MarketConfig {
        MarketConfig::uniform(2, TimeCostSpec::linear(0.5)).unwrap()
    }

    #[test]
    fn example_optimum() {
        let r = optimize_starting_price(&example(), Objective::Auctioneer).unwrap();
        assert!((r.s_star - 0.462).abs() < 0.005, "{r:?}");
        assert!((r.ratios.eu_a - 1.49).abs() < 0.02);
        assert!((r.value() / r.english.eu_auctioneer - 1.26).abs() < 0.02);
        assert!(r.flags.is_empty());
    }

    #[test]
    fn duration_optimum_beats_both_benchmarks() {
        let r = optimize_starting_price(&example(), Objective::Duration).unwrap();
        let ed = r.metrics.expected_duration;
        assert!(ed < r.dutch.expected_duration.min(r.english.expected_duration));
        assert!(r.s_star > 0.0 && r.s_star < r.s_tilde);
    }

    #[test]
    fn costless_auctioneer_objective_is_flat() {
        let cfg = MarketConfig::uniform(2, TimeCostSpec::NONE).unwrap();
        let r = optimize_starting_price(&cfg, Objective::Auctioneer).unwrap();
        assert!(r.has_flag(OptimizationFlag::FlatObjective));
        assert!(r.has_flag(OptimizationFlag::DegenerateThreshold));
        assert_eq!(r.s_star, 0.0);
        assert!((r.value() - 1.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn objective_parsing() {
        for o in Objective::ALL {
            assert_eq!(o.to_string().parse::<Objective>().unwrap(), o);
        }
        assert!("speed".parse::<Objective>().is_err());
    }

    #[test]
    fn sweep_row_order_and_error_capture() {
        let base = example();
        let rows = comparative_sweep(&base, &[0.1, 0.0], &[3, 2], &[Objective::Duration, Objective::Auctioneer]).unwrap();
        let keys: Vec<(f64, usize, Objective)> = rows.iter().map(|r| (r.mu, r.n, r.objective)).collect();
        assert_eq!(
            keys,
            vec![
                (0.1, 3, Objective::Duration),
                (0.1, 3, Objective::Auctioneer),
                (0.1, 2, Objective::Duration),
                (0.1, 2, Objective::Auctioneer),
                (0.0, 3, Objective::Duration),
                (0.0, 3, Objective::Auctioneer),
                (0.0, 2, Objective::Duration),
                (0.0, 2, Objective::Auctioneer),
            ]
        );
        let bad = comparative_sweep(&base, &[0.1], &[1, 2], &[Objective::Auctioneer]).unwrap();
        assert!(bad[0].outcome.is_err());
        assert!(bad[0].csv_record()[10].starts_with("error:"));
        assert!(bad[1].outcome.is_ok());
        assert!(comparative_sweep(&base, &[1.2], &[2], &[Objective::Auctioneer]).is_err());
    }

    #[test]
    fn costless_cell_is_payoff_equivalent() {
        let rows = comparative_sweep(&example(), &[0.0], &[2], &[Objective::Auctioneer]).unwrap();
        let r = rows[0].outcome.as_ref().unwrap();
        for x in [r.ratios.eu_a, r.ratios.eu_b, r.ratios.eu_s] {
            assert!((x - 1.0).abs() < 1e-3, "{:?}", r.ratios);
        }
    }

    #[test]
    fn revenue_curve_peaks_inside() {
        let pts = revenue_curve(&example(), 101).unwrap();
        let flower: Vec<&FigurePoint> = pts.iter().filter(|p| p.series == "flower").collect();
        let peak = flower
            .iter()
            .max_by(|a, b| a.y.partial_cmp(&b.y).unwrap())
            .unwrap();
        assert!(peak.x > 0.0 && peak.x < 0.557);
        assert!(flower[100].y < flower[0].y);
    }
}
