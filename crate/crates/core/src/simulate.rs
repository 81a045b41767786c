//! Monte Carlo play of the clock auction on a discretized price clock, with
//! every bidder following a solved equilibrium profile, plus a quadrature
//! check that no unilateral deviation pays.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::equilibrium::EquilibriumProfile;
use crate::error::{invalid, Result};
use crate::numeric::simpson;

/// Draws per parallel block. Blocks are merged in index order so sums do not
/// depend on the thread schedule.
const BLOCK: u64 = 8192;

/// Widest value table written to record CSVs.
pub const MAX_RECORD_BIDDERS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Phase {
    Dutch,
    EnglishSolo,
    EnglishContested,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Dutch => "dutch",
            Phase::EnglishSolo => "english_solo",
            Phase::EnglishContested => "english_contested",
        })
    }
}

/// Outcome of one simulated auction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationRecord {
    pub values: Vec<f64>,
    /// Bidders who bid at the opening price.
    pub initial_bidders: Vec<usize>,
    pub phase: Phase,
    /// `None` only if the descending clock reaches 0 unclaimed.
    pub winner: Option<usize>,
    pub price: f64,
    pub duration: f64,
}

impl SimulationRecord {
    /// Winner's discounted value `c(duration) v`, or 0 without a sale.
    pub fn winner_value(&self, profile: &EquilibriumProfile) -> f64 {
        self.winner.map_or(0.0, |w| {
            profile.config().cost.c(self.duration) * self.values[w]
        })
    }

    /// Winner's realized utility, or 0 without a sale.
    pub fn winner_surplus(&self, profile: &EquilibriumProfile) -> f64 {
        match self.winner {
            Some(_) => self.winner_value(profile) - self.price,
            None => 0.0,
        }
    }

    /// Whether the item went to a bidder without the highest value.
    pub fn is_inefficient(&self) -> bool {
        match self.winner {
            Some(w) => self.values.iter().any(|&v| v > self.values[w]),
            None => false,
        }
    }

    /// `draw_id,phase,winner,price,duration,v1..v20` with unused value
    /// columns left empty.
    pub fn csv_record(&self, draw_id: u64) -> Vec<String> {
        let mut rec = vec![
            draw_id.to_string(),
            self.phase.to_string(),
            self.winner.map_or(String::new(), |w| w.to_string()),
            self.price.to_string(),
            self.duration.to_string(),
        ];
        for i in 0..MAX_RECORD_BIDDERS {
            rec.push(self.values.get(i).map_or(String::new(), |v| v.to_string()));
        }
        rec
    }

    pub fn csv_header() -> Vec<String> {
        let mut h: Vec<String> = ["draw_id", "phase", "winner", "price", "duration"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        h.extend((1..=MAX_RECORD_BIDDERS).map(|i| format!("v{i}")));
        h
    }
}

fn check_tick(tick: f64) -> Result<()> {
    if !(tick > 0.0 && tick.is_finite()) {
        return invalid(format!("tick = {tick} must be positive"));
    }
    Ok(())
}

/// Uniformly random member of `candidates` (which must be non-empty).
fn pick<R: Rng>(candidates: &[usize], rng: &mut R) -> usize {
    if candidates.len() == 1 {
        candidates[0]
    } else {
        candidates[rng.gen_range(0..candidates.len())]
    }
}

/// Plays one auction for the given values. The opening move is instant;
/// afterwards the clock moves by `tick` per step and `rng` breaks ties.
pub fn run_auction<R: Rng>(
    profile: &EquilibriumProfile,
    values: &[f64],
    tick: f64,
    rng: &mut R,
) -> Result<SimulationRecord> {
    check_tick(tick)?;
    let n = profile.config().n;
    if values.len() != n {
        return invalid(format!("expected {n} values, got {}", values.len()));
    }
    if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return invalid(format!("value {v} must lie in [0, 1]"));
    }
    let s = profile.starting_price();
    let p = profile.cutoff();
    let initial: Vec<usize> = (0..n).filter(|&i| values[i] >= p).collect();
    let record = |phase, winner, price: f64, duration: f64| SimulationRecord {
        values: values.to_vec(),
        initial_bidders: initial.clone(),
        phase,
        winner,
        price,
        duration,
    };
    match initial.len() {
        0 => {
            // claim at the first level whose price is at most the bid
            let floor_level = (s / tick).ceil() as u64;
            let mut best = u64::MAX;
            let mut claimants = Vec::new();
            for (i, &v) in values.iter().enumerate() {
                let b = profile.bid_clamped(v);
                if b < 0.0 {
                    continue;
                }
                let level = (((s - b) / tick).ceil().max(0.0) as u64).min(floor_level);
                if level < best {
                    best = level;
                    claimants.clear();
                }
                if level == best {
                    claimants.push(i);
                }
            }
            if claimants.is_empty() {
                return Ok(record(Phase::Dutch, None, 0.0, s));
            }
            let price = (s - best as f64 * tick).max(0.0);
            let winner = pick(&claimants, rng);
            Ok(record(Phase::Dutch, Some(winner), price, s - price))
        }
        1 => Ok(record(Phase::EnglishSolo, Some(initial[0]), s, 0.0)),
        _ => {
            // bidder i leaves at the first level whose price exceeds m(v_i, s)
            let mut levels = Vec::with_capacity(initial.len());
            for &i in &initial {
                let m = profile.exit_price(values[i])?;
                levels.push((((m - s) / tick).floor().max(0.0) as u64 + 1, i));
            }
            levels.sort_unstable();
            let top = levels[levels.len() - 1].0;
            let second = levels[levels.len() - 2].0;
            let tied: Vec<usize> = levels.iter().filter(|l| l.0 == top).map(|l| l.1).collect();
            let winner = pick(&tied, rng);
            let price = s + second as f64 * tick;
            Ok(record(Phase::EnglishContested, Some(winner), price, price - s))
        }
    }
}

/// Generator for draw `draw_id`: one stream per draw of the seeded family.
fn draw_rng(seed: u64, draw_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(draw_id);
    rng
}

/// Draws values by inversion and plays draw `draw_id`.
pub fn simulate_draw(
    profile: &EquilibriumProfile,
    seed: u64,
    draw_id: u64,
    tick: f64,
) -> Result<SimulationRecord> {
    let cfg = profile.config();
    let mut rng = draw_rng(seed, draw_id);
    let values: Vec<f64> = (0..cfg.n)
        .map(|_| cfg.dist.quantile(rng.gen::<f64>()))
        .collect();
    run_auction(profile, &values, tick, &mut rng)
}

/// Records for draws `0..draws`, identical to those behind [`monte_carlo`].
pub fn simulate_records(
    profile: &EquilibriumProfile,
    draws: u64,
    seed: u64,
    tick: f64,
) -> Result<Vec<SimulationRecord>> {
    check_tick(tick)?;
    (0..draws)
        .into_par_iter()
        .map(|d| simulate_draw(profile, seed, d, tick))
        .collect()
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    /// Distance from `target` in standard errors.
    pub fn z_score(&self, target: f64) -> f64 {
        if self.se == 0.0 {
            if self.mean == target {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.mean - target).abs() / self.se
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn merge(&mut self, o: &Moments) {
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
    }

    fn estimate(&self, count: u64) -> Estimate {
        let n = count as f64;
        let mean = self.sum / n;
        let var = if count > 1 {
            ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        Estimate {
            mean,
            se: (var / n).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    count: u64,
    // auctioneer, bidder, social, duration
    moments: [Moments; 4],
    inefficient: u64,
    no_winner: u64,
    phases: [u64; 3],
}

impl Tally {
    fn push(&mut self, rec: &SimulationRecord, profile: &EquilibriumProfile) {
        let n = profile.config().n as f64;
        self.count += 1;
        self.moments[0].push(if rec.winner.is_some() { rec.price } else { 0.0 });
        self.moments[1].push(rec.winner_surplus(profile) / n);
        self.moments[2].push(rec.winner_value(profile));
        self.moments[3].push(rec.duration);
        self.inefficient += rec.is_inefficient() as u64;
        self.no_winner += rec.winner.is_none() as u64;
        self.phases[match rec.phase {
            Phase::Dutch => 0,
            Phase::EnglishSolo => 1,
            Phase::EnglishContested => 2,
        }] += 1;
    }

    fn merge(&mut self, o: &Tally) {
        self.count += o.count;
        for k in 0..4 {
            self.moments[k].merge(&o.moments[k]);
        }
        self.inefficient += o.inefficient;
        self.no_winner += o.no_winner;
        for k in 0..3 {
            self.phases[k] += o.phases[k];
        }
    }
}

/// Draw counts per phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PhaseCounts {
    pub dutch: u64,
    pub english_solo: u64,
    pub english_contested: u64,
}

/// Empirical counterparts of the quadrature metrics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloSummary {
    pub s: f64,
    pub draws: u64,
    pub seed: u64,
    pub tick: f64,
    pub eu_a: Estimate,
    /// Winner surplus divided by `n`.
    pub eu_b: Estimate,
    /// `c(duration) v_winner`.
    pub eu_s: Estimate,
    pub ed: Estimate,
    /// Share of auctions not won by a highest-value bidder.
    pub inefficiency: f64,
    pub no_winner: u64,
    pub phases: PhaseCounts,
}

/// Simulates `draws` auctions. Draw `d` uses stream `d` of the generator
/// seeded with `seed`, so results do not depend on the thread count.
pub fn monte_carlo(
    profile: &EquilibriumProfile,
    draws: u64,
    seed: u64,
    tick: f64,
) -> Result<MonteCarloSummary> {
    check_tick(tick)?;
    if draws == 0 {
        return invalid("draws must be at least 1");
    }
    let blocks = draws.div_ceil(BLOCK);
    let tallies: Vec<Tally> = (0..blocks)
        .into_par_iter()
        .map(|blk| {
            let mut t = Tally::default();
            for d in blk * BLOCK..((blk + 1) * BLOCK).min(draws) {
                t.push(&simulate_draw(profile, seed, d, tick)?, profile);
            }
            Ok(t)
        })
        .collect::<Result<_>>()?;
    let mut total = Tally::default();
    for t in &tallies {
        total.merge(t);
    }
    let est = |k: usize| total.moments[k].estimate(total.count);
    Ok(MonteCarloSummary {
        s: profile.starting_price(),
        draws,
        seed,
        tick,
        eu_a: est(0),
        eu_b: est(1),
        eu_s: est(2),
        ed: est(3),
        inefficiency: total.inefficient as f64 / draws as f64,
        no_winner: total.no_winner,
        phases: PhaseCounts {
            dutch: total.phases[0],
            english_solo: total.phases[1],
            english_contested: total.phases[2],
        },
    })
}

/// Expected utility of a bidder with value `v` who waits and claims the
/// descending clock at price `z ∈ [0, s]`, against equilibrium rivals.
pub fn wait_utility(profile: &EquilibriumProfile, v: f64, z: f64) -> Result<f64> {
    let cfg = profile.config();
    let s = profile.starting_price();
    if !(0.0..=s).contains(&z) {
        return invalid(format!("claim price {z} must lie in [0, {s}]"));
    }
    let p = profile.cutoff();
    // rivals claim before z iff their value is below b⁻¹(z); bidders never claim
    let reach = match profile.dutch_curve() {
        Some(curve) => curve.inverse(z).min(p),
        None => 0.0,
    };
    Ok(cfg.rival_cdf(reach) * (cfg.cost.c(s - z) * v - z))
}

/// Expected utility of a bidder with value `v` who bids at the opening price
/// and leaves the ascending clock at `e >= s`, against equilibrium rivals.
pub fn bid_utility(profile: &EquilibriumProfile, v: f64, e: f64) -> Result<f64> {
    let cfg = profile.config();
    let s = profile.starting_price();
    if e < s {
        return invalid(format!("exit price {e} must be at least s = {s}"));
    }
    let p = profile.cutoff();
    let solo = (v - s) * cfg.rival_cdf(p);
    // she outlasts a rival with value x iff m(x) < e, i.e. x < e / c(e - s)
    let c_e = cfg.cost.c(e - s);
    let reach = if c_e > 0.0 { (e / c_e).min(1.0) } else { 1.0 };
    if reach <= p {
        return Ok(solo);
    }
    let mut err = None;
    let contested = simpson(
        |x| match profile.exit_price(x) {
            Ok(m) => (cfg.cost.c(m - s) * v - m) * cfg.rival_pdf(x),
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        },
        p,
        reach,
        cfg.num.inner_nodes,
    );
    match err {
        Some(e) => Err(e),
        None => Ok(solo + contested),
    }
}

/// A single-bidder strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Action {
    /// Wait, then claim the descending clock at this price.
    Wait { claim: f64 },
    /// Bid at the opening price, then leave the ascending clock here.
    Bid { exit: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BestResponse {
    pub v: f64,
    pub equilibrium_action: Action,
    pub equilibrium_utility: f64,
    pub best_deviation: Action,
    pub deviation_utility: f64,
    /// `deviation_utility - equilibrium_utility`; positive means a profitable
    /// deviation was found.
    pub gap: f64,
}

/// Compares the equilibrium action of a value-`v` bidder with `grid + 1`
/// claim prices on `[0, s]` and `grid + 1` exit prices on `[s, m(1, s)]`.
pub fn best_response_gap(profile: &EquilibriumProfile, v: f64, grid: usize) -> Result<BestResponse> {
    if !(0.0..=1.0).contains(&v) {
        return invalid(format!("value {v} must lie in [0, 1]"));
    }
    if grid == 0 {
        return invalid("deviation grid must have at least one step");
    }
    let s = profile.starting_price();
    let (equilibrium_action, equilibrium_utility) = if v >= profile.cutoff() {
        let e = profile.exit_price(v)?;
        (Action::Bid { exit: e }, bid_utility(profile, v, e)?)
    } else {
        let z = profile.bid(v)?;
        (Action::Wait { claim: z }, wait_utility(profile, v, z)?)
    };
    let top_exit = profile.exit_price(1.0)?;
    let mut best = (Action::Wait { claim: 0.0 }, f64::NEG_INFINITY);
    for k in 0..=grid {
        let t = k as f64 / grid as f64;
        let z = s * t;
        let u = wait_utility(profile, v, z)?;
        if u > best.1 {
            best = (Action::Wait { claim: z }, u);
        }
        let e = s + (top_exit - s) * t;
        let u = bid_utility(profile, v, e)?;
        if u > best.1 {
            best = (Action::Bid { exit: e }, u);
        }
    }
    Ok(BestResponse {
        v,
        equilibrium_action,
        equilibrium_utility,
        best_deviation: best.0,
        deviation_utility: best.1,
        gap: best.1 - equilibrium_utility,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::solve_profile;
    use crate::model::{MarketConfig, TimeCostSpec};

    fn example_profile() -> EquilibriumProfile {
        let cfg = MarketConfig::uniform(2, TimeCostSpec::linear(0.5)).unwrap();
        solve_profile(&cfg, 0.462).unwrap()
    }

    #[test]
    fn solo_bidder_buys_at_start() {
        let prof = example_profile();
        let r = run_auction(&prof, &[0.9, 0.3], 1e-4, &mut draw_rng(1, 0)).unwrap();
        assert_eq!(r.phase, Phase::EnglishSolo);
        assert_eq!((r.winner, r.price, r.duration), (Some(0), 0.462, 0.0));
        assert_eq!(r.initial_bidders, vec![0]);
    }

    #[test]
    fn descending_phase_sells_at_the_bid() {
        let prof = example_profile();
        let r = run_auction(&prof, &[0.5, 0.2], 1e-4, &mut draw_rng(1, 0)).unwrap();
        assert_eq!(r.phase, Phase::Dutch);
        assert_eq!(r.winner, Some(0));
        let b = prof.bid(0.5).unwrap();
        assert!(r.price <= b && b - r.price < 1e-4);
        assert!((r.duration - (0.462 - r.price)).abs() < 1e-15);
    }

    #[test]
    fn contested_phase_ends_at_second_exit() {
        let prof = example_profile();
        let r = run_auction(&prof, &[0.9, 0.88], 1e-4, &mut draw_rng(1, 0)).unwrap();
        assert_eq!(r.phase, Phase::EnglishContested);
        assert_eq!(r.winner, Some(0));
        let m = prof.exit_price(0.88).unwrap();
        assert!(r.price > m && r.price - m <= 1e-4 + 1e-12);
        assert!((r.duration - (r.price - 0.462)).abs() < 1e-15);
    }

    #[test]
    fn zero_values_clear_at_zero() {
        let prof = example_profile();
        let r = run_auction(&prof, &[0.0, 0.0], 1e-4, &mut draw_rng(1, 0)).unwrap();
        assert_eq!(r.phase, Phase::Dutch);
        assert!(r.winner.is_some());
        assert_eq!(r.price, 0.0);
        assert_eq!(r.duration, 0.462);
    }

    #[test]
    fn bad_inputs_rejected() {
        let prof = example_profile();
        let mut rng = draw_rng(0, 0);
        assert!(run_auction(&prof, &[0.5, 0.2], 0.0, &mut rng).unwrap_err().is_validation());
        assert!(run_auction(&prof, &[1.5, 0.2], 1e-4, &mut rng).unwrap_err().is_validation());
        assert!(run_auction(&prof, &[0.5], 1e-4, &mut rng).unwrap_err().is_validation());
        assert!(monte_carlo(&prof, 0, 1, 1e-4).is_err());
    }

    #[test]
    fn single_draw_is_reproducible() {
        let prof = example_profile();
        let a = simulate_draw(&prof, 42, 0, 1e-4).unwrap();
        let b = simulate_draw(&prof, 42, 0, 1e-4).unwrap();
        assert_eq!(a, b);
        let recs = simulate_records(&prof, 3, 42, 1e-4).unwrap();
        assert_eq!(recs[0], a);
        assert_ne!(recs[1].values, a.values);
    }

    #[test]
    fn ties_split_evenly() {
        let prof = example_profile();
        let mut rng = draw_rng(9, 0);
        let wins = (0..4000)
            .filter(|_| run_auction(&prof, &[0.3, 0.3], 1e-4, &mut rng).unwrap().winner == Some(0))
            .count();
        assert!((1700..2300).contains(&wins), "{wins}");
    }

    #[test]
    fn monte_carlo_near_quadrature() {
        let prof = example_profile();
        let mc = monte_carlo(&prof, 100_000, 3, 1e-4).unwrap();
        assert!(mc.eu_a.z_score(0.338) < 4.0, "{mc:?}");
        assert_eq!(mc.no_winner, 0);
        assert_eq!(
            mc.phases.dutch + mc.phases.english_solo + mc.phases.english_contested,
            100_000
        );
    }

    #[test]
    fn cutoff_bidder_is_indifferent() {
        let prof = example_profile();
        let p = prof.cutoff();
        let wait = wait_utility(&prof, p, 0.462).unwrap();
        let bid = bid_utility(&prof, p, prof.exit_price(p).unwrap()).unwrap();
        assert!((wait - bid).abs() < 1e-4);
    }

    #[test]
    fn truthful_claim_loses_to_shaded_claim() {
        let cfg = MarketConfig::uniform(2, TimeCostSpec::NONE).unwrap();
        let prof = solve_profile(&cfg, 1.0).unwrap();
        let truthful = wait_utility(&prof, 0.8, 0.8).unwrap();
        let shaded = wait_utility(&prof, 0.8, 0.4).unwrap();
        assert!(truthful - shaded < 0.0);
        assert!((shaded - 0.32).abs() < 1e-9);
    }

    #[test]
    fn example_equilibrium_has_no_profitable_deviation() {
        let prof = example_profile();
        for v in [0.1, 0.5, 0.8, 0.95] {
            let br = best_response_gap(&prof, v, 400).unwrap();
            assert!(br.gap <= 5e-4, "{br:?}");
        }
    }
}
