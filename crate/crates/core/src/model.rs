//! Market primitives: the time-cost (discount) function, the value
//! distribution, numerical settings, and the order-statistic helpers
//! `G`, `g` and `h` used by every other module.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, AuctionError, Result};

/// Functional family of the discount factor `c(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeCostKind {
    None,
    Linear,
    Exponential,
    Hyperbolic,
}

impl TimeCostKind {
    pub const ALL: [TimeCostKind; 4] = [
        TimeCostKind::None,
        TimeCostKind::Linear,
        TimeCostKind::Exponential,
        TimeCostKind::Hyperbolic,
    ];

    fn name(self) -> &'static str {
        match self {
            TimeCostKind::None => "none",
            TimeCostKind::Linear => "linear",
            TimeCostKind::Exponential => "exponential",
            TimeCostKind::Hyperbolic => "hyperbolic",
        }
    }
}

/// Multiplicative discount `c(t)` applied to the winner's value after an
/// auction of duration `t`. Serialized as `<kind>:<mu>` (or `none`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TimeCostSpec {
    pub kind: TimeCostKind,
    pub mu: f64,
}

impl TimeCostSpec {
    pub const NONE: TimeCostSpec = TimeCostSpec {
        kind: TimeCostKind::None,
        mu: 0.0,
    };

    pub fn new(kind: TimeCostKind, mu: f64) -> Self {
        let mu = if kind == TimeCostKind::None { 0.0 } else { mu };
        Self { kind, mu }
    }

    pub fn linear(mu: f64) -> Self {
        Self::new(TimeCostKind::Linear, mu)
    }

    pub fn exponential(mu: f64) -> Self {
        Self::new(TimeCostKind::Exponential, mu)
    }

    pub fn hyperbolic(mu: f64) -> Self {
        Self::new(TimeCostKind::Hyperbolic, mu)
    }

    /// True when `c(t) = 1` identically.
    pub fn is_costless(&self) -> bool {
        self.kind == TimeCostKind::None || self.mu == 0.0
    }

    fn check_mu(&self) -> Result<()> {
        if !(self.mu.is_finite() && (0.0..1.0).contains(&self.mu)) {
            return invalid(format!(
                "time-cost parameter mu = {} must lie in [0, 1)",
                self.mu
            ));
        }
        Ok(())
    }

    fn check_t(t: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&t) {
            return invalid(format!("duration t = {t} must lie in [0, 1]"));
        }
        Ok(())
    }

    /// `c(t)` for `t` in `[0, 1]`.
    pub fn cost_eval(&self, t: f64) -> Result<f64> {
        self.check_mu()?;
        Self::check_t(t)?;
        Ok(self.c(t))
    }

    /// `c'(t)` for `t` in `[0, 1]`.
    pub fn cost_slope(&self, t: f64) -> Result<f64> {
        self.check_mu()?;
        Self::check_t(t)?;
        Ok(self.dc(t))
    }

    /// `c''(t)` for `t` in `[0, 1]`.
    pub fn cost_curvature(&self, t: f64) -> Result<f64> {
        self.check_mu()?;
        Self::check_t(t)?;
        Ok(self.d2c(t))
    }

    // The unchecked forms extend each family analytically past [0, 1]; root
    // brackets in the equilibrium solver probe slightly negative durations.

    #[inline]
    pub fn c(&self, t: f64) -> f64 {
        let mu = self.mu;
        match self.kind {
            TimeCostKind::None => 1.0,
            TimeCostKind::Linear => 1.0 - mu * t,
            TimeCostKind::Exponential => (-mu * t).exp(),
            TimeCostKind::Hyperbolic => 1.0 / (1.0 + mu * t),
        }
    }

    #[inline]
    pub fn dc(&self, t: f64) -> f64 {
        let mu = self.mu;
        match self.kind {
            TimeCostKind::None => 0.0,
            TimeCostKind::Linear => -mu,
            TimeCostKind::Exponential => -mu * (-mu * t).exp(),
            TimeCostKind::Hyperbolic => {
                let d = 1.0 + mu * t;
                -mu / (d * d)
            }
        }
    }

    #[inline]
    pub fn d2c(&self, t: f64) -> f64 {
        let mu = self.mu;
        match self.kind {
            TimeCostKind::None | TimeCostKind::Linear => 0.0,
            TimeCostKind::Exponential => mu * mu * (-mu * t).exp(),
            TimeCostKind::Hyperbolic => {
                let d = 1.0 + mu * t;
                2.0 * mu * mu / (d * d * d)
            }
        }
    }

    /// Samples `c`, `c'`, `c''` on a 1001-point grid and reports every
    /// violated requirement instead of failing fast.
    pub fn validate(&self) -> CostValidation {
        let mut violations = Vec::new();
        if !(self.mu.is_finite() && (0.0..1.0).contains(&self.mu)) {
            violations.push(CostViolation::MuOutOfRange { mu: self.mu });
        }
        if self.c(0.0) != 1.0 {
            violations.push(CostViolation::NotNormalized { c0: self.c(0.0) });
        }
        let strict = !self.is_costless();
        let mut prev = self.c(0.0);
        let mut seen = [false; 4];
        for i in 0..=1000 {
            let t = i as f64 / 1000.0;
            let (c, dc, d2c) = (self.c(t), self.dc(t), self.d2c(t));
            if i > 0 {
                let bad = if strict { c >= prev } else { c != prev };
                if bad && !seen[0] {
                    seen[0] = true;
                    violations.push(CostViolation::NotMonotone { t });
                }
            }
            if !(dc > -1.0 && dc <= 0.0) && !seen[1] {
                seen[1] = true;
                violations.push(CostViolation::SlopeOutOfRange { t, slope: dc });
            }
            if d2c < 0.0 && !seen[2] {
                seen[2] = true;
                violations.push(CostViolation::NotConvex { t, curvature: d2c });
            }
            if c <= 0.0 && !seen[3] {
                seen[3] = true;
                violations.push(CostViolation::NonPositive { t, value: c });
            }
            prev = c;
        }
        CostValidation { violations }
    }
}

impl Default for TimeCostSpec {
    fn default() -> Self {
        Self::linear(0.5)
    }
}

impl fmt::Display for TimeCostSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            TimeCostKind::None => f.write_str("none"),
            kind => write!(f, "{}:{}", kind.name(), self.mu),
        }
    }
}

impl FromStr for TimeCostSpec {
    type Err = AuctionError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, mu) = match s.split_once(':') {
            Some((k, m)) => (k.trim(), Some(m.trim())),
            None => (s, None),
        };
        let kind = match kind.to_ascii_lowercase().as_str() {
            "none" => TimeCostKind::None,
            "linear" => TimeCostKind::Linear,
            "exponential" | "exp" => TimeCostKind::Exponential,
            "hyperbolic" | "hyp" => TimeCostKind::Hyperbolic,
            other => {
                return invalid(format!(
                    "unknown time-cost kind `{other}` (expected none, linear, exponential or hyperbolic)"
                ))
            }
        };
        let mu = match (kind, mu) {
            (TimeCostKind::None, None) => 0.0,
            (TimeCostKind::None, Some(m)) => {
                let mu: f64 = m
                    .parse()
                    .map_err(|_| AuctionError::Validation(format!("bad mu `{m}`")))?;
                if mu != 0.0 {
                    return invalid("time-cost kind `none` takes no mu (or mu = 0)");
                }
                0.0
            }
            (_, None) => return invalid(format!("time cost `{s}` needs a mu, e.g. `linear:0.5`")),
            (_, Some(m)) => m
                .parse()
                .map_err(|_| AuctionError::Validation(format!("bad mu `{m}`")))?,
        };
        Ok(TimeCostSpec::new(kind, mu))
    }
}

impl TryFrom<String> for TimeCostSpec {
    type Error = AuctionError;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<TimeCostSpec> for String {
    fn from(c: TimeCostSpec) -> String {
        c.to_string()
    }
}

/// A single failed requirement on the discount function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CostViolation {
    MuOutOfRange { mu: f64 },
    NotNormalized { c0: f64 },
    NotMonotone { t: f64 },
    SlopeOutOfRange { t: f64, slope: f64 },
    NotConvex { t: f64, curvature: f64 },
    NonPositive { t: f64, value: f64 },
}

impl fmt::Display for CostViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostViolation::MuOutOfRange { mu } => write!(f, "mu = {mu} must lie in [0, 1)"),
            CostViolation::NotNormalized { c0 } => write!(f, "c(0) = {c0}, expected 1"),
            CostViolation::NotMonotone { t } => write!(f, "c is not decreasing at t = {t}"),
            CostViolation::SlopeOutOfRange { t, slope } => {
                write!(f, "c'({t}) = {slope} is outside (-1, 0]")
            }
            CostViolation::NotConvex { t, curvature } => write!(f, "c''({t}) = {curvature} < 0"),
            CostViolation::NonPositive { t, value } => write!(f, "c({t}) = {value} <= 0"),
        }
    }
}

/// Outcome of [`TimeCostSpec::validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostValidation {
    pub violations: Vec<CostViolation>,
}

impl CostValidation {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.passed() {
            return Ok(());
        }
        let msg: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        invalid(format!("time cost rejected: {}", msg.join("; ")))
    }
}

/// Private-value distribution on `[0, 1]`. Only `Uniform` ships; new
/// variants must keep `f(0) > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueDistribution {
    #[default]
    Uniform,
}

impl ValueDistribution {
    #[inline]
    pub fn cdf(&self, v: f64) -> f64 {
        match self {
            ValueDistribution::Uniform => v.clamp(0.0, 1.0),
        }
    }

    #[inline]
    pub fn pdf(&self, v: f64) -> f64 {
        match self {
            ValueDistribution::Uniform => {
                if (0.0..=1.0).contains(&v) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `F^{-1}(u)`, used for sampling by inversion.
    #[inline]
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            ValueDistribution::Uniform => u.clamp(0.0, 1.0),
        }
    }

    /// `∫_x^1 v f(v) dv`.
    #[inline]
    pub fn upper_partial_mean(&self, x: f64) -> f64 {
        match self {
            ValueDistribution::Uniform => {
                let x = x.clamp(0.0, 1.0);
                0.5 * (1.0 - x * x)
            }
        }
    }
}

impl fmt::Display for ValueDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueDistribution::Uniform => f.write_str("uniform"),
        }
    }
}

impl FromStr for ValueDistribution {
    type Err = AuctionError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" => Ok(ValueDistribution::Uniform),
            other => invalid(format!("unknown value distribution `{other}` (expected uniform)")),
        }
    }
}

/// Grid sizes and tolerances for the solver, quadrature and optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericalSettings {
    /// RK4 steps on `[0, v_max]` for the Dutch bid curve.
    pub ode_steps: usize,
    /// Simpson nodes on each outer integral.
    pub quad_nodes: usize,
    /// Simpson nodes on inner integrals (best-response utilities).
    pub inner_nodes: usize,
    /// Bracket width for the cutoff `p(s)` and the threshold `s̃`.
    pub cutoff_tol: f64,
    /// Residual tolerance for the English exit price.
    pub exit_tol: f64,
    /// Final bracket width of the starting-price search.
    pub opt_tol: f64,
    /// Points in the coarse starting-price scan over `[0, 1]`.
    pub scan_points: usize,
}

impl Default for NumericalSettings {
    fn default() -> Self {
        Self {
            ode_steps: 2000,
            quad_nodes: 2001,
            inner_nodes: 201,
            cutoff_tol: 1e-10,
            exit_tol: 1e-12,
            opt_tol: 1e-4,
            scan_points: 201,
        }
    }
}

impl NumericalSettings {
    pub fn validate(&self) -> Result<()> {
        if self.ode_steps < 2 || self.quad_nodes < 3 || self.inner_nodes < 3 || self.scan_points < 3
        {
            return invalid("grid sizes must be at least 3 (ode_steps at least 2)");
        }
        for (name, tol) in [
            ("cutoff_tol", self.cutoff_tol),
            ("exit_tol", self.exit_tol),
            ("opt_tol", self.opt_tol),
        ] {
            if !(tol.is_finite() && tol > 0.0) {
                return invalid(format!("{name} = {tol} must be strictly positive"));
            }
        }
        Ok(())
    }
}

/// Everything that defines one market: bidder count, value distribution,
/// discount function and numerical settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketConfig {
    pub n: usize,
    pub dist: ValueDistribution,
    pub cost: TimeCostSpec,
    pub num: NumericalSettings,
}

impl MarketConfig {
    /// Validated constructor with default numerical settings.
    pub fn new(n: usize, dist: ValueDistribution, cost: TimeCostSpec) -> Result<Self> {
        Self::with_numerics(n, dist, cost, NumericalSettings::default())
    }

    pub fn with_numerics(
        n: usize,
        dist: ValueDistribution,
        cost: TimeCostSpec,
        num: NumericalSettings,
    ) -> Result<Self> {
        let cfg = Self { n, dist, cost, num };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Uniform values with the given bidder count and cost.
    pub fn uniform(n: usize, cost: TimeCostSpec) -> Result<Self> {
        Self::new(n, ValueDistribution::Uniform, cost)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return invalid(format!("bidder count n = {} must be at least 2", self.n));
        }
        if self.dist.pdf(0.0) <= 0.0 {
            return invalid("value density must be positive at v = 0");
        }
        self.cost.validate().into_result()?;
        self.num.validate()
    }

    /// `G(v) = F(v)^{n-1}`: CDF of the highest of `n - 1` rival values.
    #[inline]
    pub fn rival_cdf(&self, v: f64) -> f64 {
        self.dist.cdf(v).powi(self.n as i32 - 1)
    }

    /// `g(v) = (n-1) f(v) F(v)^{n-2}`.
    #[inline]
    pub fn rival_pdf(&self, v: f64) -> f64 {
        (self.n - 1) as f64 * self.dist.pdf(v) * self.dist.cdf(v).powi(self.n as i32 - 2)
    }

    /// `h(v, x) = n(n-1) f(v) f(x) F(x)^{n-2}` for `x <= v`, zero above.
    #[inline]
    pub fn top_two_density(&self, v: f64, x: f64) -> f64 {
        if x > v {
            return 0.0;
        }
        self.n as f64 * self.rival_pdf(x) * self.dist.pdf(v)
    }

    /// `d F^n / dv = n f(v) F(v)^{n-1}`: density of the highest value.
    #[inline]
    pub fn max_value_pdf(&self, v: f64) -> f64 {
        self.n as f64 * self.dist.pdf(v) * self.rival_cdf(v)
    }

    /// `g(v) / G(v)` for `v > 0`.
    #[inline]
    pub fn rival_hazard(&self, v: f64) -> f64 {
        (self.n - 1) as f64 * self.dist.pdf(v) / self.dist.cdf(v)
    }

    fn check_unit(name: &str, v: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&v) {
            return invalid(format!("{name} = {v} must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Checked `G(v)`.
    pub fn order_stat_g(&self, v: f64) -> Result<f64> {
        Self::check_unit("v", v)?;
        Ok(self.rival_cdf(v))
    }

    /// Checked `g(v)`.
    pub fn order_stat_density(&self, v: f64) -> Result<f64> {
        Self::check_unit("v", v)?;
        Ok(self.rival_pdf(v))
    }

    /// Checked `h(v, x)`; rejects `x > v`.
    pub fn order_stat_joint(&self, v: f64, x: f64) -> Result<f64> {
        Self::check_unit("v", v)?;
        Self::check_unit("x", x)?;
        if x > v {
            return invalid(format!("h(v, x) needs x <= v, got x = {x} > v = {v}"));
        }
        Ok(self.top_two_density(v, x))
    }
}
