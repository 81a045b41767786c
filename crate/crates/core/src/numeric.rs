//! Small numerical kernels shared by the solver, the metrics and the
//! optimizer: composite Simpson quadrature, bracketed root finding,
//! golden-section search and monotone cubic Hermite interpolation.

use crate::error::{AuctionError, Result};

/// Composite Simpson rule on `[a, b]` with `nodes` points (rounded up to odd).
pub fn simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, nodes: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let nodes = nodes.max(3) | 1;
    let intervals = nodes - 1;
    let h = (b - a) / intervals as f64;
    let mut sum = f(a) + f(b);
    for i in 1..intervals {
        let x = a + h * i as f64;
        sum += if i % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    sum * h / 3.0
}

/// Composite Simpson rule for several integrands sharing one node set.
pub fn simpson_many<const K: usize, F>(mut f: F, a: f64, b: f64, nodes: usize) -> Result<[f64; K]>
where
    F: FnMut(f64) -> Result<[f64; K]>,
{
    let mut acc = [0.0; K];
    if b <= a {
        return Ok(acc);
    }
    let nodes = nodes.max(3) | 1;
    let intervals = nodes - 1;
    let h = (b - a) / intervals as f64;
    for i in 0..=intervals {
        let x = if i == intervals { b } else { a + h * i as f64 };
        let w = if i == 0 || i == intervals {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let y = f(x)?;
        for k in 0..K {
            acc[k] += w * y[k];
        }
    }
    for v in &mut acc {
        *v *= h / 3.0;
    }
    Ok(acc)
}

/// Bisection for a sign change of `f` on `[lo, hi]`, stopping once the
/// bracket is narrower than `tol`. Returns the bracket midpoint.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(AuctionError::RootNotBracketed(format!(
            "f({lo}) = {f_lo:e} and f({hi}) = {f_hi:e} share a sign"
        )));
    }
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Bisection on a boolean predicate that is `true` on a prefix of `[lo, hi]`
/// and `false` afterwards. Returns the switching point.
pub fn bisect_predicate<P: FnMut(f64) -> Result<bool>>(
    mut pred: P,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<f64> {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Bracket with bisection down to a coarse width, then polish with Newton
/// steps kept inside the bracket until `|f| <= tol`.
pub fn bisect_newton<F, D>(f: F, df: D, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo.abs() <= tol {
        return Ok(lo);
    }
    if f_hi.abs() <= tol {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(AuctionError::RootNotBracketed(format!(
            "f({lo}) = {f_lo:e} and f({hi}) = {f_hi:e} share a sign"
        )));
    }
    let lo_sign = f_lo.signum();
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if f(mid).signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..50 {
        let fx = f(x);
        if fx.abs() <= tol {
            return Ok(x);
        }
        if fx.signum() == lo_sign {
            lo = x;
        } else {
            hi = x;
        }
        let d = df(x);
        let step = if d != 0.0 { x - fx / d } else { f64::NAN };
        x = if step.is_finite() && step > lo && step < hi {
            step
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * x.abs().max(1.0) {
            return Ok(x);
        }
    }
    Ok(x)
}

/// Result of a one-dimensional search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub x: f64,
    pub value: f64,
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`,
/// narrowed until the bracket is at most `tol` wide.
pub fn golden_section_max<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> Result<Extremum> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a) > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc >= fd {
        Extremum { x: c, value: fc }
    } else {
        Extremum { x: d, value: fd }
    })
}

/// Piecewise cubic Hermite interpolant through `(x, y)` with node slopes
/// `dydx`, after Fritsch–Carlson limiting so the interpolant is monotone
/// whenever the data are.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    slope: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(x: Vec<f64>, y: Vec<f64>, mut slope: Vec<f64>) -> Self {
        assert!(x.len() == y.len() && y.len() == slope.len() && x.len() >= 2);
        for k in 0..x.len() - 1 {
            let secant = (y[k + 1] - y[k]) / (x[k + 1] - x[k]);
            if secant == 0.0 {
                slope[k] = 0.0;
                slope[k + 1] = 0.0;
                continue;
            }
            let alpha = slope[k] / secant;
            let beta = slope[k + 1] / secant;
            if alpha < 0.0 {
                slope[k] = 0.0;
            }
            if beta < 0.0 {
                slope[k + 1] = 0.0;
            }
            let r2 = alpha * alpha + beta * beta;
            if r2 > 9.0 {
                let tau = 3.0 / r2.sqrt();
                slope[k] = tau * alpha * secant;
                slope[k + 1] = tau * beta * secant;
            }
        }
        Self { x, y, slope }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    /// Evaluates the interpolant; `t` is clamped into the node range.
    pub fn eval(&self, t: f64) -> f64 {
        let last = self.x.len() - 1;
        if t <= self.x[0] {
            return self.y[0];
        }
        if t >= self.x[last] {
            return self.y[last];
        }
        let k = self.x.partition_point(|&xi| xi <= t) - 1;
        let h = self.x[k + 1] - self.x[k];
        let u = (t - self.x[k]) / h;
        let u2 = u * u;
        let u3 = u2 * u;
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        h00 * self.y[k] + h10 * h * self.slope[k] + h01 * self.y[k + 1] + h11 * h * self.slope[k + 1]
    }

    /// Smallest `t` in the node range with `eval(t) >= target`, by bisection.
    /// Targets above the last value map to the right end of the domain.
    pub fn inverse(&self, target: f64, tol: f64) -> f64 {
        let (lo, hi) = self.domain();
        if target <= self.y[0] {
            return lo;
        }
        if target >= self.y[self.y.len() - 1] {
            return hi;
        }
        let k = self.y.partition_point(|&yi| yi < target);
        let (mut a, mut b) = (self.x[k - 1], self.x[k]);
        while b - a > tol {
            let mid = 0.5 * (a + b);
            if self.eval(mid) < target {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    }
}
