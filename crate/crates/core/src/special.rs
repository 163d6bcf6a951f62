//! Central and noncentral beta distribution functions.
//!
//! Under `M_0` the statistic `b_j0` follows `Beta((n-j-1)/2, j/2)`. Under
//! `M_j` the residual sum of squares stays central while the explained part
//! picks up noncentrality `lambda`, so `b_j0` has a beta law whose *second*
//! shape parameter is Poisson-mixed:
//!
//! ```text
//! P(b_j0 <= x) = sum_m Pois(m; lambda/2) I_x(a, b + m)
//! ```

use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::error::{Error, Result};

const CF_MAX_ITER: usize = 100_000;
const CF_EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;

/// Poisson mass outside the summed window is below this bound.
pub const POISSON_TAIL: f64 = 1e-12;
/// Longest Poisson window the noncentral series will attempt.
pub const MAX_SERIES_TERMS: usize = 100_000;

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

fn check_shape(x: f64, a: f64, b: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("x = {x} outside [0, 1]")));
    }
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::domain(format!("shape parameters must be positive, got a = {a}, b = {b}")));
    }
    Ok(())
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn incomplete_beta_cdf(x: f64, a: f64, b: f64) -> Result<f64> {
    check_shape(x, a, b)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let ln_front = a * x.ln() + b * (-x).ln_1p() - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok((ln_front.exp() * beta_cf(x, a, b)? / a).clamp(0.0, 1.0))
    } else {
        Ok((1.0 - ln_front.exp() * beta_cf(1.0 - x, b, a)? / b).clamp(0.0, 1.0))
    }
}

/// Continued fraction for `I_x(a, b)` (modified Lentz).
fn beta_cf(x: f64, a: f64, b: f64) -> Result<f64> {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < CF_EPS {
            return Ok(h);
        }
    }
    Err(Error::SeriesNonConvergence(CF_MAX_ITER))
}

/// CDF of the beta law with Poisson(`lambda / 2`)-mixed second shape
/// parameter; `lambda = 0` reduces to [`incomplete_beta_cdf`].
pub fn noncentral_beta_cdf(x: f64, a: f64, b: f64, lambda: f64) -> Result<f64> {
    check_shape(x, a, b)?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::domain(format!("noncentrality must be non-negative, got {lambda}")));
    }
    if lambda == 0.0 {
        return incomplete_beta_cdf(x, a, b);
    }
    if x == 0.0 || x == 1.0 {
        return Ok(x);
    }
    let mu = 0.5 * lambda;
    let (lo, hi) = poisson_window(mu);
    if hi - lo + 1 > MAX_SERIES_TERMS {
        return Err(Error::SeriesNonConvergence(MAX_SERIES_TERMS));
    }

    // I_x(a, c + 1) = I_x(a, c) + x^a (1-x)^c / (c B(a, c)), summed upwards in m.
    let (lx, l1x) = (x.ln(), (-x).ln_1p());
    let mut cdf = incomplete_beta_cdf(x, a, b + lo as f64)?;
    // Poisson mass outside the window, weighted by the nearest in-window
    // term; I_x(a, b + m) is monotone in m, so the error stays within the
    // tail mass.
    let below = if lo == 0 { 0.0 } else { gamma_ur(lo as f64, mu) };
    let above = gamma_lr(hi as f64 + 1.0, mu);
    let mut total = below * cdf;
    let mut mass = below + above;
    for m in lo..=hi {
        let mf = m as f64;
        if m > lo {
            let c = b + mf - 1.0;
            cdf += (a * lx + c * l1x - ln_beta(a, c) - c.ln()).exp();
        }
        let ln_w = -mu + mf * mu.ln() - ln_gamma(mf + 1.0);
        let w = ln_w.exp();
        total += w * cdf.min(1.0);
        mass += w;
    }
    total += above * cdf.min(1.0);
    // Dividing by the summed weights removes their rounding drift from 1.
    Ok((total / mass).clamp(0.0, 1.0))
}

/// Index window `[lo, hi]` holding all but `POISSON_TAIL` of the Poisson(`mu`) mass.
fn poisson_window(mu: f64) -> (usize, usize) {
    let ln_pmf = |m: f64| -mu + m * mu.ln() - ln_gamma(m + 1.0);
    let mode = mu.floor();
    let cut = POISSON_TAIL.ln() - 5.0;
    // Tails of the Poisson law decay at least geometrically beyond the point
    // where the pmf drops below `cut`, so stopping there bounds the mass.
    let mut hi = mode;
    while ln_pmf(hi) > cut {
        hi += (1.0 + 0.05 * mu.sqrt()).floor();
    }
    let mut lo = mode;
    while lo > 0.0 && ln_pmf(lo) > cut {
        lo = (lo - (1.0 + 0.05 * mu.sqrt()).floor()).max(0.0);
    }
    (lo as usize, hi as usize)
}
