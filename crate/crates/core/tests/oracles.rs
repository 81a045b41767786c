//! Independent checks of the solver and the metrics: closed forms where they
//! exist, and the welfare integrals evaluated in their original nested order.

use flower_auction::equilibrium::{
    english_exit, exit_price_by_root, solve_dutch_curve, solve_profile, EquilibriumProfile,
};
use flower_auction::metrics::{auction_metrics, english_benchmark, myerson_baseline};
use flower_auction::{MarketConfig, TimeCostSpec};

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let k = intervals + intervals % 2;
    let h = (b - a) / k as f64;
    let mut sum = f(a) + f(b);
    for i in 1..k {
        sum += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}

/// The four welfare integrals with the ascending-phase term integrated over
/// the runner-up value `x` inside the winner value `v`.
fn nested_metrics(prof: &EquilibriumProfile) -> [f64; 4] {
    let cfg = prof.config();
    let s = prof.starting_price();
    let p = prof.cutoff();
    let c = |t: f64| cfg.cost.c(t);
    let b = |v: f64| prof.bid(v.min(p)).unwrap();
    let m = |x: f64| prof.exit_price(x).unwrap();
    let g = |x: f64| cfg.rival_pdf(x);
    let big_g = |x: f64| cfg.rival_cdf(x);
    let f = |v: f64| cfg.dist.pdf(v);
    let dfn = |v: f64| cfg.max_value_pdf(v);
    let h = |v: f64, x: f64| cfg.top_two_density(v, x);
    let outer = 800;
    let inner = 400;

    let eu_a = simpson(|v| b(v) * dfn(v), 0.0, p, outer)
        + simpson(
            |v| {
                simpson(|x| s * h(v, x), 0.0, p, inner)
                    + simpson(|x| m(x) * h(v, x), p, v, inner)
            },
            p,
            1.0,
            outer,
        );
    let eu_b = simpson(|v| (c(s - b(v)) * v - b(v)) * big_g(v) * f(v), 0.0, p, outer)
        + simpson(
            |v| {
                ((v - s) * big_g(p)
                    + simpson(|x| (c(m(x) - s) * v - m(x)) * g(x), p, v, inner))
                    * f(v)
            },
            p,
            1.0,
            outer,
        );
    let eu_s = simpson(|v| c(s - b(v)) * v * dfn(v), 0.0, p, outer)
        + simpson(
            |v| {
                simpson(|x| v * h(v, x), 0.0, p, inner)
                    + simpson(|x| c(m(x) - s) * v * h(v, x), p, v, inner)
            },
            p,
            1.0,
            outer,
        );
    let ed = simpson(|v| (s - b(v)) * dfn(v), 0.0, p, outer)
        + simpson(|v| simpson(|x| (m(x) - s) * h(v, x), p, v, inner), p, 1.0, outer);
    [eu_a, eu_b, eu_s, ed]
}

#[test]
fn metrics_match_nested_quadrature() {
    let cases = [
        (2, TimeCostSpec::linear(0.5), 0.462),
        (2, TimeCostSpec::linear(0.5), 0.3),
        (3, TimeCostSpec::exponential(0.4), 0.5),
        (5, TimeCostSpec::hyperbolic(0.6), 0.7),
        (4, TimeCostSpec::linear(0.2), 0.0),
        (4, TimeCostSpec::linear(0.2), 1.0),
    ];
    for (n, cost, s) in cases {
        let cfg = MarketConfig::uniform(n, cost).unwrap();
        let prof = solve_profile(&cfg, s).unwrap();
        let got = auction_metrics(&prof).unwrap();
        let want = nested_metrics(&prof);
        let have = [got.eu_auctioneer, got.eu_bidder, got.eu_social, got.expected_duration];
        for k in 0..4 {
            assert!(
                (have[k] - want[k]).abs() < 2e-5,
                "n={n} {cost} s={s} metric {k}: {} vs nested {}",
                have[k],
                want[k]
            );
        }
    }
}

#[test]
fn costless_dutch_curve_is_the_first_price_bid() {
    for n in [2, 3, 10] {
        let cfg = MarketConfig::uniform(n, TimeCostSpec::NONE).unwrap();
        let curve = solve_dutch_curve(&cfg, 1.0, 1.0).unwrap();
        let slope = (n as f64 - 1.0) / n as f64;
        for i in 0..=1000 {
            let v = i as f64 / 1000.0;
            let b = curve.bid(v).unwrap();
            assert!((b - slope * v).abs() < 1e-6, "n={n} v={v} b={b}");
        }
    }
}

#[test]
fn linear_exit_closed_form() {
    for mu in [0.05, 0.3, 0.5, 0.9] {
        let cfg = MarketConfig::uniform(2, TimeCostSpec::linear(mu)).unwrap();
        for i in 0..=50 {
            for j in 0..=10 {
                let v = i as f64 / 50.0;
                let s = j as f64 / 10.0;
                let closed = (1.0 + mu * s) * v / (1.0 + mu * v);
                let m = english_exit(&cfg, v, s).unwrap();
                assert!((m - closed).abs() < 1e-10, "mu={mu} v={v} s={s}");
                let root = exit_price_by_root(&cfg.cost, v, s, 1e-14).unwrap();
                assert!((root - closed).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn exit_spec_example() {
    let cfg = MarketConfig::uniform(2, TimeCostSpec::linear(0.5)).unwrap();
    let m = english_exit(&cfg, 0.9, 0.462).unwrap();
    // (1 + 0.231) 0.9 / 1.45
    assert!((m - 1.231 * 0.9 / 1.45).abs() < 1e-12);
}

#[test]
fn english_benchmark_without_cost_is_second_highest_value() {
    for n in [2usize, 5] {
        let cfg = MarketConfig::uniform(n, TimeCostSpec::NONE).unwrap();
        let e = english_benchmark(&cfg).unwrap();
        let second = (n as f64 - 1.0) / (n as f64 + 1.0);
        assert!((e.expected_duration - second).abs() < 1e-6);
        assert!((e.eu_auctioneer - e.expected_duration).abs() < 1e-12);
    }
}

#[test]
fn myerson_closed_form() {
    for n in [2usize, 3, 10] {
        let cfg = MarketConfig::uniform(n, TimeCostSpec::NONE).unwrap();
        let want = (n as f64 - 1.0) / (n as f64 + 1.0);
        assert!((myerson_baseline(&cfg).unwrap() - want).abs() < 1e-9);
    }
}
