//! Auctioneer revenue, per-bidder expected utility, social welfare and
//! expected duration of one equilibrium profile.
//!
//! The ascending-phase double integrals have integrands of the form
//! `A(v) B(x)` over `p <= x <= v <= 1`; they are evaluated after swapping the
//! order of integration, so the inner `v`-integral becomes one of the closed
//! forms `1 - F(x)` or `∫_x^1 v f(v) dv`.

use serde::{Deserialize, Serialize};

use crate::equilibrium::{
    bid_slope_v, exit_slope, uncapped_curve, EquilibriumProfile, EquilibriumSolver,
};
use crate::error::{invalid, Result};
use crate::model::MarketConfig;
use crate::numeric::{simpson, simpson_many};

/// The four auction characteristics at one starting price.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsBundle {
    pub s: f64,
    #[serde(rename = "eu_a")]
    pub eu_auctioneer: f64,
    /// Ex-ante expected utility of a single bidder.
    #[serde(rename = "eu_b")]
    pub eu_bidder: f64,
    #[serde(rename = "eu_s")]
    pub eu_social: f64,
    #[serde(rename = "ed")]
    pub expected_duration: f64,
}

impl MetricsBundle {
    pub const CSV_HEADER: &'static str = "s,eu_a,eu_b,eu_s,ed";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.s, self.eu_auctioneer, self.eu_bidder, self.eu_social, self.expected_duration
        )
    }

    /// Componentwise ratios against a benchmark (`self / other`).
    pub fn ratios_to(&self, other: &MetricsBundle) -> MetricRatios {
        MetricRatios {
            eu_a: self.eu_auctioneer / other.eu_auctioneer,
            eu_b: self.eu_bidder / other.eu_bidder,
            eu_s: self.eu_social / other.eu_social,
            ed: self.expected_duration / other.expected_duration,
        }
    }

    /// `eu_social - (eu_auctioneer + n eu_bidder)`.
    pub fn additivity_gap(&self, n: usize) -> f64 {
        self.eu_social - (self.eu_auctioneer + n as f64 * self.eu_bidder)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricRatios {
    pub eu_a: f64,
    pub eu_b: f64,
    pub eu_s: f64,
    pub ed: f64,
}

/// Evaluates revenue, bidder utility, welfare and duration for `profile`.
pub fn auction_metrics(profile: &EquilibriumProfile) -> Result<MetricsBundle> {
    let cfg = profile.config();
    let s = profile.starting_price();
    let p = profile.cutoff();
    let n = cfg.n as f64;
    let cost = cfg.cost;
    let dist = cfg.dist;
    let nodes = cfg.num.quad_nodes;

    // descending phase on [0, p]
    let [mut eu_a, mut eu_b, mut eu_s, mut ed] = simpson_many(
        |v| {
            let b = profile.bid_clamped(v);
            let t = s - b;
            let discounted = cost.c(t) * v;
            let w = cfg.max_value_pdf(v);
            let gf = cfg.rival_cdf(v) * dist.pdf(v);
            Ok([b * w, (discounted - b) * gf, discounted * w, t * w])
        },
        0.0,
        p,
        nodes,
    )?;

    // ascending phase on [p, 1]
    let [a2, b2, s2, d2] = simpson_many(
        |x| {
            let m = profile.exit_price(x)?;
            let t = m - s;
            let survival = 1.0 - dist.cdf(x);
            let g = cfg.rival_pdf(x);
            let pair = n * g * survival;
            let upper_mean = dist.upper_partial_mean(x);
            Ok([
                m * pair,
                g * (cost.c(t) * upper_mean - m * survival),
                cost.c(t) * n * g * upper_mean,
                t * pair,
            ])
        },
        p,
        1.0,
        nodes,
    )?;

    // single opening bidder: sale at s with zero duration
    let fp = dist.cdf(p);
    let gp = cfg.rival_cdf(p);
    eu_a += a2 + s * n * gp * (1.0 - fp);
    eu_b += b2 + gp * (dist.upper_partial_mean(p) - s * (1.0 - fp));
    eu_s += s2 + n * gp * dist.upper_partial_mean(p);
    ed += d2;

    Ok(MetricsBundle {
        s,
        eu_auctioneer: eu_a,
        eu_bidder: eu_b,
        eu_social: eu_s,
        expected_duration: ed,
    })
}

/// Metrics of the pure descending auction (`s = 1`).
pub fn dutch_benchmark(cfg: &MarketConfig) -> Result<MetricsBundle> {
    auction_metrics(&EquilibriumSolver::new(cfg)?.profile(1.0)?)
}

/// Metrics of the pure ascending auction (`s = 0`).
pub fn english_benchmark(cfg: &MarketConfig) -> Result<MetricsBundle> {
    auction_metrics(&EquilibriumSolver::new(cfg)?.profile(0.0)?)
}

/// Revenue with no time cost: `∫_0^1 [v - (1 - F)/f] dF^n`.
pub fn myerson_baseline(cfg: &MarketConfig) -> Result<f64> {
    let dist = cfg.dist;
    for i in 1..=1000 {
        let v = i as f64 / 1000.0;
        if dist.pdf(v) <= 0.0 {
            return invalid(format!("value density vanishes at v = {v}"));
        }
    }
    Ok(simpson(
        |v| (v - (1.0 - dist.cdf(v)) / dist.pdf(v)) * cfg.max_value_pdf(v),
        0.0,
        1.0,
        cfg.num.quad_nodes,
    ))
}

/// Terms of `dEU_A/ds` in the order: descending-cap jump, ascending entry,
/// single-bidder sale, exit-price shift, bid shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RevenueSlope {
    pub s: f64,
    pub cutoff_slope: f64,
    pub terms: [f64; 5],
}

impl RevenueSlope {
    pub fn total(&self) -> f64 {
        self.terms.iter().sum()
    }
}

/// Derivative of the auctioneer's expected utility in `s`, term by term.
/// `∂b/∂s` comes from central differences of the uncapped bid curve with
/// step `ds`; `∂m/∂s` and `dp/ds` are analytic.
pub fn revenue_slope(solver: &EquilibriumSolver, s: f64, ds: f64) -> Result<RevenueSlope> {
    let cfg = solver.config();
    let profile = solver.profile(s)?;
    let p = profile.cutoff();
    let n = cfg.n as f64;
    let dist = cfg.dist;
    let lo = (s - ds).max(0.0);
    let hi = (s + ds).min(1.0);
    // past the cutoff the uncapped curve leaves the model (b > s)
    let reach = p.max(f64::EPSILON);
    let up = uncapped_curve(cfg, hi, reach)?;
    let down = uncapped_curve(cfg, lo, reach)?;
    let bid_ds = |v: f64| (up.bid_clamped(v) - down.bid_clamped(v)) / (hi - lo);

    let cutoff_slope = if p > 0.0 && p < 1.0 {
        let b_v = bid_slope_v(cfg, s, p, s)?;
        (1.0 - bid_ds(p)) / b_v
    } else if p == 0.0 {
        // near s = 0 the cutoff follows the series start b = a v
        n / ((n - 1.0) * cfg.cost.c(0.0))
    } else {
        0.0
    };
    let fp = dist.cdf(p);
    let b_p = profile.bid(p).unwrap_or(0.0);
    let m_p = profile.exit_price(p)?;
    let t1 = -cutoff_slope * (s - b_p) * n * cfg.rival_cdf(p) * dist.pdf(p);
    let t2 = -cutoff_slope * (m_p - s) * n * cfg.rival_pdf(p) * (1.0 - fp);
    let t3 = n * (1.0 - fp) * cfg.rival_cdf(p);
    let mut err = None;
    let t4 = simpson(
        |x| match exit_slope(&cfg.cost, x, s, cfg.num.exit_tol) {
            Ok(dm) => dm * n * cfg.rival_pdf(x) * (1.0 - dist.cdf(x)),
            Err(e) => {
                err = Some(e);
                0.0
            }
        },
        p,
        1.0,
        cfg.num.quad_nodes,
    );
    if let Some(e) = err {
        return Err(e);
    }
    let t5 = simpson(|v| bid_ds(v) * cfg.max_value_pdf(v), 0.0, p, cfg.num.quad_nodes);
    Ok(RevenueSlope {
        s,
        cutoff_slope,
        terms: [t1, t2, t3, t4, t5],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TimeCostSpec;

    fn example() -> MarketConfig {
        MarketConfig::uniform(2, TimeCostSpec::linear(0.5)).unwrap()
    }

    #[test]
    fn example_values() {
        let cfg = example();
        let solver = EquilibriumSolver::new(&cfg).unwrap();
        let m = auction_metrics(&solver.profile(0.462).unwrap()).unwrap();
        assert!((m.eu_auctioneer - 0.338).abs() < 0.003, "{m:?}");
        assert!((m.expected_duration - 0.138).abs() < 0.003, "{m:?}");
        let d = dutch_benchmark(&cfg).unwrap();
        assert!((d.eu_auctioneer - 0.227).abs() < 0.003, "{d:?}");
        let e = english_benchmark(&cfg).unwrap();
        assert!((e.eu_auctioneer - 0.269).abs() < 0.003, "{e:?}");
    }

    #[test]
    fn costless_english_duration_is_second_order_statistic() {
        let cfg = MarketConfig::uniform(2, TimeCostSpec::NONE).unwrap();
        let e = english_benchmark(&cfg).unwrap();
        assert!((e.expected_duration - 1.0 / 3.0).abs() < 1e-3);
        assert_eq!(e.expected_duration, e.eu_auctioneer);
    }

    #[test]
    fn myerson_examples() {
        for (n, expect) in [(2usize, 1.0 / 3.0), (3, 0.5), (10, 9.0 / 11.0)] {
            let cfg = MarketConfig::uniform(n, TimeCostSpec::NONE).unwrap();
            assert!((myerson_baseline(&cfg).unwrap() - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn social_welfare_is_additive() {
        for (n, mu) in [(2usize, 0.5), (5, 0.2), (10, 0.7)] {
            let cfg = MarketConfig::uniform(n, TimeCostSpec::linear(mu)).unwrap();
            let solver = EquilibriumSolver::new(&cfg).unwrap();
            for s in [0.0, 0.2, 0.5, 0.8, 1.0] {
                let m = auction_metrics(&solver.profile(s).unwrap()).unwrap();
                assert!(m.additivity_gap(n).abs() < 1e-6);
                assert!(m.eu_auctioneer >= 0.0 && m.eu_bidder >= 0.0);
                assert!(m.expected_duration >= 0.0 && m.expected_duration <= 1.0);
            }
        }
    }

    #[test]
    fn boundary_benchmarks_share_the_code_path() {
        let cfg = example();
        let solver = EquilibriumSolver::new(&cfg).unwrap();
        let at_one = auction_metrics(&solver.profile(1.0).unwrap()).unwrap();
        let at_zero = auction_metrics(&solver.profile(0.0).unwrap()).unwrap();
        assert_eq!(at_one, dutch_benchmark(&cfg).unwrap());
        assert_eq!(at_zero, english_benchmark(&cfg).unwrap());
    }

    #[test]
    fn csv_row_shape() {
        let m = MetricsBundle {
            s: 0.5,
            eu_auctioneer: 0.25,
            eu_bidder: 0.125,
            eu_social: 0.5,
            expected_duration: 0.1,
        };
        assert_eq!(m.csv_row(), "0.5,0.25,0.125,0.5,0.1");
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(json, r#"{"s":0.5,"eu_a":0.25,"eu_b":0.125,"eu_s":0.5,"ed":0.1}"#);
    }

    #[test]
    fn revenue_slope_matches_finite_difference() {
        let cfg = example();
        let solver = EquilibriumSolver::new(&cfg).unwrap();
        let eu = |s: f64| auction_metrics(&solver.profile(s).unwrap()).unwrap().eu_auctioneer;
        for s in [0.1, 0.3, 0.45, 0.7] {
            let h = 1e-4;
            let fd = (eu(s + h) - eu(s - h)) / (2.0 * h);
            let slope = revenue_slope(&solver, s, 1e-5).unwrap();
            assert!((slope.total() - fd).abs() < 2e-3, "s = {s}: {} vs {fd}", slope.total());
        }
        let at_zero = revenue_slope(&solver, 0.0, 1e-5).unwrap();
        assert!(at_zero.total() > 0.0);
        assert!(revenue_slope(&solver, 0.8, 1e-5).unwrap().total() < 0.0);
    }
}
