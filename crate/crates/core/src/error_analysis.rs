//! Frequentist behaviour of the rule "choose `M_j` over `M_0` when
//! `Pr(M_j | y) >= 1/2` under equal prior odds", i.e. when `ln B_j0 >= 0`.
//!
//! Every Bayes factor here is strictly decreasing in `b_j0`, so the rule
//! rejects `M_0` exactly on an interval `b_j0 <= b*`. Under `M_0`,
//! `b_j0 ~ Beta((n-j-1)/2, j/2)`; under `M_j` with pseudo-distance `delta`
//! the second shape parameter is Poisson-mixed with noncentrality
//! `lambda = 2 n delta`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayes_factor::{log_bayes_factor, BfMethod};
use crate::error::{Error, Result};
use crate::quadrature::QuadratureSpec;
use crate::special::{incomplete_beta_cdf, noncentral_beta_cdf};

/// Lower end of the bracket searched for the threshold.
pub const B_MIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalRegion {
    pub method: BfMethod,
    pub n: usize,
    pub j: usize,
    /// The rule rejects `M_0` iff `b_j0 <= b_star`.
    pub b_star: f64,
}

/// Solves `ln B_j0(n, j, b) = 0` for `b` by bisection on `[1e-12, 1]`.
///
/// Returns `b_star = 1` when the rule always rejects and
/// [`Error::NoRoot`] when it never does.
pub fn critical_threshold(method: BfMethod, n: usize, j: usize, quad: &QuadratureSpec) -> Result<CriticalRegion> {
    if n <= j + 2 {
        return Err(Error::domain(format!("need n > j + 2, got n = {n}, j = {j}")));
    }
    let region = |b_star| CriticalRegion { method, n, j, b_star };
    let lbf = |b: f64| log_bayes_factor(method, n, j, b, quad).map(|v| v.log_value);
    if j == 0 || lbf(1.0)? >= 0.0 {
        return Ok(region(1.0));
    }
    if lbf(B_MIN)? < 0.0 {
        return Err(Error::NoRoot { n, j });
    }
    // Invariant: lbf(lo) >= 0 > lbf(hi). Bisect down to adjacent doubles.
    let (mut lo, mut hi) = (B_MIN, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if lbf(mid)? >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(region(lo))
}

/// Closed-form threshold of the `g = n` rule.
pub fn gn_threshold_closed_form(n: usize, j: usize) -> f64 {
    let nf = n as f64;
    ((nf.ln_1p() * (nf - j as f64 - 1.0) / (nf - 1.0)).exp() - 1.0) / nf
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorCurvePoint {
    pub n: usize,
    pub j: usize,
    pub method: BfMethod,
    pub b_star: f64,
    pub type1: f64,
    pub power: f64,
    pub delta: f64,
}

/// How the model dimension follows the sample size along a curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum JRule {
    /// `j = ceil(n / ratio)`
    Ratio(f64),
    Fixed(usize),
}

impl JRule {
    pub fn j_for(&self, n: usize) -> usize {
        match *self {
            JRule::Ratio(r) => (n as f64 / r).ceil() as usize,
            JRule::Fixed(j) => j,
        }
    }
}

impl fmt::Display for JRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JRule::Ratio(r) => write!(f, "ceil(n/{r})"),
            JRule::Fixed(j) => write!(f, "{j}"),
        }
    }
}

impl FromStr for JRule {
    type Err = Error;

    /// `ratio:3` or `fixed:5`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::domain(format!("cannot parse `{s}` as a dimension rule (ratio:<r> or fixed:<j>)"));
        match s.trim().split_once(':') {
            Some(("ratio", r)) => {
                let r: f64 = r.trim().parse().map_err(|_| bad())?;
                if r > 0.0 && r.is_finite() {
                    Ok(JRule::Ratio(r))
                } else {
                    Err(bad())
                }
            }
            Some(("fixed", j)) => Ok(JRule::Fixed(j.trim().parse().map_err(|_| bad())?)),
            _ => Err(bad()),
        }
    }
}

/// Type I error and power of one rule at pseudo-distance `delta`.
///
/// A rule that never rejects (no root) has an empty region: `b_star = 0`
/// and both probabilities zero.
pub fn error_point(method: BfMethod, n: usize, j: usize, delta: f64, quad: &QuadratureSpec) -> Result<ErrorCurvePoint> {
    if j == 0 {
        return Err(Error::domain("error curves need a model dimension j >= 1"));
    }
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::domain(format!("delta must be non-negative, got {delta}")));
    }
    let b_star = match critical_threshold(method, n, j, quad) {
        Ok(r) => r.b_star,
        Err(Error::NoRoot { .. }) => 0.0,
        Err(e) => return Err(e),
    };
    let a = 0.5 * (n as f64 - j as f64 - 1.0);
    let b = 0.5 * j as f64;
    let type1 = incomplete_beta_cdf(b_star, a, b)?;
    let power = noncentral_beta_cdf(b_star, a, b, 2.0 * n as f64 * delta)?;
    Ok(ErrorCurvePoint { n, j, method, b_star, type1, power, delta })
}

/// [`error_point`] along a grid of sample sizes, assembled in grid order.
pub fn error_curves(
    method: BfMethod,
    n_grid: &[usize],
    rule: JRule,
    delta: f64,
    quad: &QuadratureSpec,
) -> Result<Vec<ErrorCurvePoint>> {
    for &n in n_grid {
        let j = rule.j_for(n);
        if j == 0 || n <= j + 2 {
            return Err(Error::domain(format!("dimension rule {rule} gives j = {j} at n = {n}; need 1 <= j < n - 2")));
        }
    }
    n_grid.par_iter().map(|&n| error_point(method, n, rule.j_for(n), delta, quad)).collect()
}
