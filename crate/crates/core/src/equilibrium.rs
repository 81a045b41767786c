//! Symmetric equilibrium for a given starting price `s`.
//!
//! Bidders with value at least the cutoff `p(s)` bid at the opening price and
//! play an ascending phase, leaving at `m(v, s)`, the price where
//! `c(m - s) v = m`. Everyone else waits for the descending phase and claims
//! at `b(v, s)`, the solution of
//!
//! ```text
//! db/dv = (g/G)(v) * (c(s - b) v - b) / (1 + c'(s - b) v),   b(0, s) = 0
//! ```
//!
//! The cutoff satisfies `b(p(s), s) = s` when `p(s) < 1`. Above the
//! threshold `s̃` (where `b(1, s̃) = s̃`) everyone waits and `p(s) = 1`.

use serde::Serialize;
use serde_json::value::RawValue;

use crate::error::{invalid, AuctionError, Result};
use crate::model::{MarketConfig, TimeCostKind, TimeCostSpec};
use crate::numeric::{bisect, bisect_newton, bisect_predicate, MonotoneCubic};

/// Smallest admissible value of `1 + c'(s - b) v`.
const MIN_DENOMINATOR: f64 = 1e-12;

/// Right-hand side and one-step integrator for the descending-phase ODE.
#[derive(Debug, Clone, Copy)]
struct DutchOde<'a> {
    cfg: &'a MarketConfig,
    s: f64,
}

impl<'a> DutchOde<'a> {
    /// Slope of the series start `b ≈ a v` at the origin.
    fn start_slope(&self) -> f64 {
        let n = self.cfg.n as f64;
        (n - 1.0) * self.cfg.cost.c(self.s) / n
    }

    fn rhs(&self, v: f64, b: f64) -> Result<f64> {
        if v <= 0.0 {
            return Ok(self.start_slope());
        }
        let t = self.s - b;
        let cost = &self.cfg.cost;
        let denominator = 1.0 + cost.dc(t) * v;
        if denominator < MIN_DENOMINATOR {
            return Err(AuctionError::SingularDenominator { v, denominator });
        }
        Ok(self.cfg.rival_hazard(v) * (cost.c(t) * v - b) / denominator)
    }

    /// Advances `b` from `v` by `h`. From the origin the series start is used.
    /// Near the origin the hazard `(n - 1)/v` makes the equation stiff, so the
    /// step is split until `(n - 1) h / v <= 1` on every piece.
    fn step(&self, v: f64, b: f64, h: f64) -> Result<f64> {
        if v <= 0.0 {
            return Ok(self.start_slope() * h);
        }
        let pieces = ((self.cfg.n - 1) as f64 * h / v).ceil().max(1.0) as usize;
        if pieces == 1 {
            return self.rk4(v, b, h);
        }
        let dh = h / pieces as f64;
        let mut b = b;
        for i in 0..pieces {
            b = self.rk4(v + i as f64 * dh, b, dh)?;
        }
        Ok(b)
    }

    fn rk4(&self, v: f64, b: f64, h: f64) -> Result<f64> {
        let k1 = self.rhs(v, b)?;
        let k2 = self.rhs(v + 0.5 * h, b + 0.5 * h * k1)?;
        let k3 = self.rhs(v + 0.5 * h, b + 0.5 * h * k2)?;
        let k4 = self.rhs(v + h, b + h * k3)?;
        Ok(b + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0)
    }
}

/// Bracket `[lo, hi]` of grid nodes where the bid curve first exceeds `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    pub lo: f64,
    pub hi: f64,
    /// Bid at `lo` (at most `s`).
    pub bid_lo: f64,
}

/// Tabulated descending-phase bid curve `b(·, s)` with monotone cubic
/// interpolation between nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct DutchBidCurve {
    s: f64,
    interp: MonotoneCubic,
    crossing: Option<Crossing>,
}

impl DutchBidCurve {
    pub fn starting_price(&self) -> f64 {
        self.s
    }

    pub fn grid(&self) -> &[f64] {
        self.interp.nodes()
    }

    pub fn bids(&self) -> &[f64] {
        self.interp.values()
    }

    /// Right end of the tabulated domain.
    pub fn v_max(&self) -> f64 {
        self.interp.domain().1
    }

    /// Where integration stopped because the bid would exceed `s`.
    pub fn crossing(&self) -> Option<Crossing> {
        self.crossing
    }

    /// `b(v, s)`; errors outside `[0, v_max]`.
    pub fn bid(&self, v: f64) -> Result<f64> {
        let hi = self.v_max();
        if !(0.0..=hi + 1e-12).contains(&v) {
            return Err(AuctionError::OutOfDomain {
                what: "bid curve argument",
                value: v,
                lo: 0.0,
                hi,
            });
        }
        Ok(self.interp.eval(v))
    }

    /// Unchecked interpolation (clamped to the domain).
    #[inline]
    pub fn bid_clamped(&self, v: f64) -> f64 {
        self.interp.eval(v)
    }

    /// Value whose bid equals `price`; prices above the last bid map to
    /// `v_max`.
    pub fn inverse(&self, price: f64) -> f64 {
        self.interp.inverse(price, 1e-13)
    }

    /// Curve as CSV with columns `v,b`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("v,b\n");
        for (v, b) in self.grid().iter().zip(self.bids()) {
            out.push_str(&format!("{v:.16e},{b:.16e}\n"));
        }
        out
    }
}

fn check_unit(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return invalid(format!("{name} = {x} must lie in [0, 1]"));
    }
    Ok(())
}

fn integrate(cfg: &MarketConfig, s: f64, v_max: f64, capped: bool) -> Result<DutchBidCurve> {
    let ode = DutchOde { cfg, s };
    let steps = cfg.num.ode_steps;
    let h = v_max / steps as f64;
    let mut grid = Vec::with_capacity(steps + 2);
    let mut bids = Vec::with_capacity(steps + 2);
    let mut slopes = Vec::with_capacity(steps + 2);
    grid.push(0.0);
    bids.push(0.0);
    slopes.push(ode.start_slope());
    let mut crossing = None;
    for k in 0..steps {
        let v = k as f64 * h;
        let b = bids[k];
        let next_v = if k + 1 == steps { v_max } else { (k + 1) as f64 * h };
        let next_b = ode.step(v, b, next_v - v)?;
        if !(next_b > b) {
            return Err(AuctionError::NonMonotone {
                v: next_v,
                from: b,
                to: next_b,
            });
        }
        if capped && next_b > s {
            crossing = Some(Crossing {
                lo: v,
                hi: next_v,
                bid_lo: b,
            });
            break;
        }
        grid.push(next_v);
        bids.push(next_b);
        slopes.push(ode.rhs(next_v, next_b)?);
    }
    if grid.len() == 1 {
        // crossed inside the first step, where the series start b = a v is exact
        let a = ode.start_slope();
        grid.push(s / a);
        bids.push(s);
        slopes.push(a);
    }
    Ok(DutchBidCurve {
        s,
        interp: MonotoneCubic::new(grid, bids, slopes),
        crossing,
    })
}

/// Integrates the descending-phase bid curve from `v = 0` on
/// `cfg.num.ode_steps` uniform RK4 steps over `[0, v_max]`, stopping at the
/// first node where the bid would exceed `s`.
pub fn solve_dutch_curve(cfg: &MarketConfig, s: f64, v_max: f64) -> Result<DutchBidCurve> {
    cfg.validate()?;
    if !(s > 0.0 && s <= 1.0) {
        return invalid(format!("starting price s = {s} must lie in (0, 1]"));
    }
    if !(v_max > 0.0 && v_max <= 1.0) {
        return invalid(format!("v_max = {v_max} must lie in (0, 1]"));
    }
    integrate(cfg, s, v_max, true)
}

/// `b(v, s)` of the ODE solution without the cap at `s`, integrated on
/// `[0, v]`; used for sensitivity checks in `s`.
pub fn uncapped_bid(cfg: &MarketConfig, s: f64, v: f64) -> Result<f64> {
    check_unit("v", v)?;
    if v == 0.0 {
        return Ok(0.0);
    }
    let curve = integrate(cfg, s, v, false)?;
    curve.bid(v)
}

/// `∂b/∂v` at `(v, b)` from the ODE right-hand side.
pub fn bid_slope_v(cfg: &MarketConfig, s: f64, v: f64, b: f64) -> Result<f64> {
    DutchOde { cfg, s }.rhs(v, b)
}

/// Uncapped bid curve on `[0, v_max]`, for finite differences in `s`.
pub(crate) fn uncapped_curve(cfg: &MarketConfig, s: f64, v_max: f64) -> Result<DutchBidCurve> {
    integrate(cfg, s, v_max, false)
}

/// Bid at `v` inside a crossing bracket, by a single step from its left node.
fn bid_in_bracket(ode: &DutchOde<'_>, c: &Crossing, v: f64) -> Result<f64> {
    ode.step(c.lo, c.bid_lo, v - c.lo)
}

/// Residual of the exit condition `c(m - s) v - m`.
#[inline]
fn exit_residual(cost: &TimeCostSpec, v: f64, s: f64, m: f64) -> f64 {
    cost.c(m - s) * v - m
}

/// Root-finder route for `m(v, s)`: bisection on `[0, 1 + s]` then Newton.
pub fn exit_price_by_root(cost: &TimeCostSpec, v: f64, s: f64, tol: f64) -> Result<f64> {
    bisect_newton(
        |m| exit_residual(cost, v, s, m),
        |m| cost.dc(m - s) * v - 1.0,
        0.0,
        1.0 + s,
        tol,
    )
}

/// `m(v, s)` without input checks. Closed forms for no cost and linear cost.
#[inline]
pub(crate) fn exit_price(cost: &TimeCostSpec, v: f64, s: f64, tol: f64) -> Result<f64> {
    match cost.kind {
        TimeCostKind::None => Ok(v),
        TimeCostKind::Linear => Ok((1.0 + cost.mu * s) * v / (1.0 + cost.mu * v)),
        _ => exit_price_by_root(cost, v, s, tol),
    }
}

/// Ascending-phase exit price `m(v, s)`, the root of `c(m - s) v = m`.
pub fn english_exit(cfg: &MarketConfig, v: f64, s: f64) -> Result<f64> {
    cfg.validate()?;
    check_unit("v", v)?;
    check_unit("s", s)?;
    let m = exit_price(&cfg.cost, v, s, cfg.num.exit_tol)?;
    debug_assert!({
        let root = exit_price_by_root(&cfg.cost, v, s, cfg.num.exit_tol)?;
        (root - m).abs() <= 1e-10
    });
    Ok(m)
}

/// `∂m/∂s = -c'(m - s) v / (1 - c'(m - s) v)`, from differentiating the
/// exit condition.
pub fn exit_price_slope_s(cfg: &MarketConfig, v: f64, s: f64) -> Result<f64> {
    cfg.validate()?;
    check_unit("v", v)?;
    check_unit("s", s)?;
    exit_slope(&cfg.cost, v, s, cfg.num.exit_tol)
}

#[inline]
pub(crate) fn exit_slope(cost: &TimeCostSpec, v: f64, s: f64, tol: f64) -> Result<f64> {
    let m = exit_price(cost, v, s, tol)?;
    let dc = cost.dc(m - s) * v;
    Ok(-dc / (1.0 - dc))
}

fn cutoff_from_curve(cfg: &MarketConfig, s: f64, curve: &DutchBidCurve) -> Result<f64> {
    let Some(c) = curve.crossing else {
        return Ok(1.0);
    };
    let ode = DutchOde { cfg, s };
    let mut err = None;
    let p = bisect(
        |v| match bid_in_bracket(&ode, &c, v) {
            Ok(b) => b - s,
            Err(e) => {
                err = Some(e);
                0.0
            }
        },
        c.lo,
        c.hi,
        cfg.num.cutoff_tol,
    )?;
    match err {
        Some(e) => Err(e),
        None => Ok(p),
    }
}

/// Bid/wait cutoff `p(s)`.
pub fn cutoff(cfg: &MarketConfig, s: f64) -> Result<f64> {
    cfg.validate()?;
    check_unit("s", s)?;
    if s == 0.0 {
        return Ok(0.0);
    }
    let curve = integrate(cfg, s, 1.0, true)?;
    cutoff_from_curve(cfg, s, &curve)
}

/// Threshold starting price above which every bidder waits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Threshold {
    pub value: f64,
    /// Set when there is no time cost and the value 1 is a convention.
    pub degenerate: bool,
}

/// `s̃`, the root of `b(1, s) = s`, by bisection on whether the bid curve
/// reaches `s` before `v = 1`.
pub fn threshold_s_tilde(cfg: &MarketConfig) -> Result<Threshold> {
    cfg.validate()?;
    if cfg.cost.is_costless() {
        return Ok(Threshold {
            value: 1.0,
            degenerate: true,
        });
    }
    let value = bisect_predicate(
        |s| Ok(integrate(cfg, s, 1.0, true)?.crossing.is_some()),
        0.0,
        1.0,
        cfg.num.cutoff_tol,
    )?;
    Ok(Threshold {
        value,
        degenerate: false,
    })
}

/// Equilibrium objects for one starting price.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumProfile {
    cfg: MarketConfig,
    s: f64,
    cutoff_p: f64,
    s_tilde: Threshold,
    dutch: Option<DutchBidCurve>,
}

impl EquilibriumProfile {
    pub fn config(&self) -> &MarketConfig {
        &self.cfg
    }

    pub fn starting_price(&self) -> f64 {
        self.s
    }

    /// `p(s)`.
    pub fn cutoff(&self) -> f64 {
        self.cutoff_p
    }

    pub fn s_tilde(&self) -> Threshold {
        self.s_tilde
    }

    /// Descending-phase curve on `[0, p(s)]`; absent for `s = 0`.
    pub fn dutch_curve(&self) -> Option<&DutchBidCurve> {
        self.dutch.as_ref()
    }

    /// `b(v, s)` for `v` in `[0, p(s)]`.
    pub fn bid(&self, v: f64) -> Result<f64> {
        match &self.dutch {
            Some(c) => c.bid(v),
            None if v == 0.0 => Ok(0.0),
            None => Err(AuctionError::OutOfDomain {
                what: "bid curve argument",
                value: v,
                lo: 0.0,
                hi: 0.0,
            }),
        }
    }

    #[inline]
    pub(crate) fn bid_clamped(&self, v: f64) -> f64 {
        self.dutch.as_ref().map_or(0.0, |c| c.bid_clamped(v))
    }

    /// `m(v, s)`.
    #[inline]
    pub fn exit_price(&self, v: f64) -> Result<f64> {
        exit_price(&self.cfg.cost, v, self.s, self.cfg.num.exit_tol)
    }

    /// Residual of the exit condition at `v`; zero up to the exit tolerance.
    pub fn exit_residual(&self, v: f64) -> Result<f64> {
        let m = self.exit_price(v)?;
        Ok(exit_residual(&self.cfg.cost, v, self.s, m))
    }

    /// JSON document `{s, p, s_tilde, grid, bids}` with 17 significant digits.
    pub fn to_document(&self) -> ProfileDocument {
        let (grid, bids) = match &self.dutch {
            Some(c) => (c.grid().to_vec(), c.bids().to_vec()),
            None => (vec![0.0], vec![0.0]),
        };
        ProfileDocument {
            header: None,
            s: sig17(self.s),
            p: sig17(self.cutoff_p),
            s_tilde: sig17(self.s_tilde.value),
            grid: grid.into_iter().map(sig17).collect(),
            bids: bids.into_iter().map(sig17).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_document()).expect("profile serializes")
    }
}

/// Serialized profile. Numbers are written with 17 significant digits.
#[derive(Debug, Serialize)]
pub struct ProfileDocument {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub header: Option<serde_json::Value>,
    pub s: Box<RawValue>,
    pub p: Box<RawValue>,
    pub s_tilde: Box<RawValue>,
    pub grid: Vec<Box<RawValue>>,
    pub bids: Vec<Box<RawValue>>,
}

fn sig17(x: f64) -> Box<RawValue> {
    RawValue::from_string(format!("{x:.16e}")).expect("scientific notation is valid JSON")
}

/// Solves profiles for one market, computing `s̃` once.
#[derive(Debug, Clone)]
pub struct EquilibriumSolver {
    cfg: MarketConfig,
    s_tilde: Threshold,
}

impl EquilibriumSolver {
    pub fn new(cfg: &MarketConfig) -> Result<Self> {
        Ok(Self {
            cfg: *cfg,
            s_tilde: threshold_s_tilde(cfg)?,
        })
    }

    pub fn config(&self) -> &MarketConfig {
        &self.cfg
    }

    pub fn s_tilde(&self) -> Threshold {
        self.s_tilde
    }

    pub fn profile(&self, s: f64) -> Result<EquilibriumProfile> {
        check_unit("s", s)?;
        let cfg = &self.cfg;
        let (cutoff_p, dutch) = if s == 0.0 {
            (0.0, None)
        } else if s == 1.0 {
            (1.0, Some(integrate(cfg, 1.0, 1.0, true)?))
        } else {
            let curve = integrate(cfg, s, 1.0, true)?;
            match curve.crossing {
                None => (1.0, Some(curve)),
                Some(_) => {
                    let p = cutoff_from_curve(cfg, s, &curve)?;
                    (p, Some(close_curve(cfg, s, curve, p)?))
                }
            }
        };
        Ok(EquilibriumProfile {
            cfg: *cfg,
            s,
            cutoff_p,
            s_tilde: self.s_tilde,
            dutch,
        })
    }
}

/// Appends the exact cutoff node `(p, s)` to a curve truncated at its
/// crossing bracket.
fn close_curve(cfg: &MarketConfig, s: f64, curve: DutchBidCurve, p: f64) -> Result<DutchBidCurve> {
    let ode = DutchOde { cfg, s };
    let mut grid = curve.grid().to_vec();
    let mut bids = curve.bids().to_vec();
    let mut slopes: Vec<f64> = grid
        .iter()
        .zip(&bids)
        .map(|(&v, &b)| ode.rhs(v, b))
        .collect::<Result<_>>()?;
    let last = *grid.last().expect("non-empty grid");
    if p - last > 1e-12 {
        grid.push(p);
        bids.push(s);
        slopes.push(ode.rhs(p, s)?);
    } else {
        *bids.last_mut().expect("non-empty bids") = s;
    }
    Ok(DutchBidCurve {
        s,
        interp: MonotoneCubic::new(grid, bids, slopes),
        crossing: None,
    })
}

/// Bundles `p(s)`, `s̃`, the bid curve and the exit evaluator for one `s`.
pub fn solve_profile(cfg: &MarketConfig, s: f64) -> Result<EquilibriumProfile> {
    cfg.validate()?;
    EquilibriumSolver::new(cfg)?.profile(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> MarketConfig {
        MarketConfig::uniform(2, TimeCostSpec::linear(0.5)).unwrap()
    }

    #[test]
    fn costless_curve_is_classical_first_price_bid() {
        let cfg = MarketConfig::uniform(2, TimeCostSpec::NONE).unwrap();
        let curve = solve_dutch_curve(&cfg, 1.0, 1.0).unwrap();
        assert!((curve.bid(0.8).unwrap() - 0.4).abs() < 1e-12);
        assert_eq!(curve.bid(0.0).unwrap(), 0.0);
        let ode = DutchOde { cfg: &cfg, s: 1.0 };
        assert!((ode.start_slope() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn start_slope_matches_series_coefficient() {
        // substituting b = a v in the ODE gives a = (n-1)(c(s) - a)
        for n in [2usize, 5, 10] {
            let cfg = MarketConfig::uniform(n, TimeCostSpec::linear(0.5)).unwrap();
            let ode = DutchOde { cfg: &cfg, s: 0.4 };
            let a = ode.start_slope();
            let c = cfg.cost.c(0.4);
            assert!((a - (n as f64 - 1.0) * (c - a)).abs() < 1e-14);
        }
    }

    #[test]
    fn many_bidders_high_impatience_stays_monotone() {
        for n in [10, 16, 20] {
            let cfg = MarketConfig::uniform(n, TimeCostSpec::linear(0.8)).unwrap();
            let curve = uncapped_curve(&cfg, 0.9, 1.0).unwrap();
            assert!(curve.bids().windows(2).all(|w| w[1] > w[0]));
            let a = (n as f64 - 1.0) * cfg.cost.c(0.9) / n as f64;
            assert!((curve.bid(0.01).unwrap() / 0.01 - a).abs() < 1e-2);
        }
    }

    #[test]
    fn example_curve_reaches_cap_near_0_847() {
        let curve = solve_dutch_curve(&example(), 0.462, 1.0).unwrap();
        let c = curve.crossing().expect("curve crosses s");
        assert!(c.lo < 0.849 && c.hi > 0.845, "{c:?}");
        assert!(curve.bids().iter().all(|&b| b <= 0.462));
    }

    #[test]
    fn bids_are_rational_and_increasing() {
        let cfg = MarketConfig::uniform(4, TimeCostSpec::exponential(0.6)).unwrap();
        let curve = solve_dutch_curve(&cfg, 0.3, 1.0).unwrap();
        let (grid, bids) = (curve.grid(), curve.bids());
        assert_eq!(bids[0], 0.0);
        for i in 1..grid.len() {
            assert!(bids[i] > bids[i - 1]);
            let surplus = cfg.cost.c(0.3 - bids[i]) * grid[i] - bids[i];
            assert!(surplus >= -1e-9);
        }
    }

    #[test]
    fn dutch_curve_rejects_bad_inputs() {
        assert!(solve_dutch_curve(&example(), 0.0, 1.0).is_err());
        assert!(solve_dutch_curve(&example(), 0.5, 1.5).is_err());
        let curve = solve_dutch_curve(&example(), 0.3, 1.0).unwrap();
        assert!(curve.bid(0.99).is_err());
    }

    #[test]
    fn exit_examples() {
        let cfg = example();
        for &(v, s) in &[(0.3, 0.1), (0.847, 0.462), (1.0, 0.0), (0.6, 0.6)] {
            let m = english_exit(&cfg, v, s).unwrap();
            assert!((m - (1.0 + 0.5 * s) * v / (1.0 + 0.5 * v)).abs() < 1e-14);
        }
        let m = english_exit(&cfg, 0.847, 0.462).unwrap();
        assert!((m - 0.73246).abs() < 1e-5, "{m}");
        assert_eq!(english_exit(&cfg, 0.0, 0.0).unwrap(), 0.0);
        let none = MarketConfig::uniform(2, TimeCostSpec::NONE).unwrap();
        assert_eq!(english_exit(&none, 0.6, 0.2).unwrap(), 0.6);
    }

    #[test]
    fn exit_root_meets_residual_tolerance() {
        for cost in [TimeCostSpec::exponential(0.8), TimeCostSpec::hyperbolic(0.9)] {
            for i in 0..=20 {
                let v = i as f64 / 20.0;
                let m = exit_price_by_root(&cost, v, 0.35, 1e-12).unwrap();
                assert!((cost.c(m - 0.35) * v - m).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn cutoff_examples() {
        let cfg = example();
        assert!((cutoff(&cfg, 0.462).unwrap() - 0.847).abs() < 0.002);
        assert_eq!(cutoff(&cfg, 0.0).unwrap(), 0.0);
        assert_eq!(cutoff(&cfg, 0.9).unwrap(), 1.0);
        assert!(cutoff(&cfg, 1.5).is_err());
    }

    #[test]
    fn costless_cutoff_has_closed_form() {
        // b = (n-1)v/n so b(p) = s gives p = n s / (n-1)
        let cfg = MarketConfig::uniform(3, TimeCostSpec::NONE).unwrap();
        assert!((cutoff(&cfg, 0.3).unwrap() - 0.45).abs() < 1e-9);
    }

    #[test]
    fn threshold_examples() {
        let t = threshold_s_tilde(&example()).unwrap();
        assert!(!t.degenerate);
        assert!((t.value - 0.557).abs() < 0.002, "{t:?}");
        let none = threshold_s_tilde(&MarketConfig::uniform(2, TimeCostSpec::NONE).unwrap()).unwrap();
        assert_eq!(none, Threshold { value: 1.0, degenerate: true });
        let cfg = MarketConfig::uniform(10, TimeCostSpec::linear(0.1)).unwrap();
        let t = threshold_s_tilde(&cfg).unwrap();
        assert!(t.value > 0.0 && t.value < 1.0);
        // sign change of b(1, s) - s across the root
        assert!(uncapped_bid(&cfg, 1e-3, 1.0).unwrap() > 1e-3);
        assert!(uncapped_bid(&cfg, 1.0 - 1e-3, 1.0).unwrap() < 1.0 - 1e-3);
    }

    #[test]
    fn profile_boundaries() {
        let cfg = example();
        let solver = EquilibriumSolver::new(&cfg).unwrap();
        let dutch = solver.profile(1.0).unwrap();
        assert_eq!(dutch.cutoff(), 1.0);
        assert_eq!(dutch.dutch_curve().unwrap().v_max(), 1.0);
        let english = solver.profile(0.0).unwrap();
        assert_eq!(english.cutoff(), 0.0);
        assert!(english.dutch_curve().is_none());
        let mid = solver.profile(0.462).unwrap();
        assert!((mid.cutoff() - 0.847).abs() < 0.002);
        assert!((mid.s_tilde().value - 0.557).abs() < 0.002);
        assert!((mid.bid(mid.cutoff()).unwrap() - 0.462).abs() < 1e-12);
        assert_eq!(solver.profile(0.462).unwrap(), mid);
    }

    #[test]
    fn profile_json_shape() {
        let p = solve_profile(&example(), 0.462).unwrap();
        let raw = p.to_json();
        let pos: Vec<usize> = ["\"s\":", "\"p\":", "\"s_tilde\":", "\"grid\":", "\"bids\":"]
            .iter()
            .map(|k| raw.find(k).unwrap())
            .collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        assert!(raw.starts_with("{\"s\":4.6200000000000002e-1,"));
        let v: serde_json::Value = serde_json::from_str(&raw).unwrap();
        assert_eq!(v.as_object().unwrap().len(), 5);
        assert_eq!(v["s"].as_f64().unwrap(), 0.462);
        let grid = v["grid"].as_array().unwrap();
        let bids = v["bids"].as_array().unwrap();
        assert_eq!(grid.len(), bids.len());
        // exact round trip of every node
        let curve = p.dutch_curve().unwrap();
        for (j, b) in bids.iter().zip(curve.bids()) {
            assert_eq!(j.as_f64().unwrap(), *b);
        }
        assert!(curve.to_csv().starts_with("v,b\n"));
    }
}
