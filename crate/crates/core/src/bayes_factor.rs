//! Bayes factors of `M_j` against the intercept-only model `M_0`, in the
//! natural-log domain.
//!
//! * g-prior with `g = n` (closed form),
//! * mixture of g-priors with `g ~ InvGamma(1/2, n/2)` (one-dimensional integral),
//! * intrinsic priors (integral over an angle in `(0, pi/2)`),
//! * the Schwarz (BIC) form they all share for bounded dimension,
//!
//! plus the large-`n` approximations for the two growth regimes of the
//! number of candidate regressors.

use std::f64::consts::{FRAC_2_PI, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::quadrature::{log_integrate_real_line, QuadratureSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BfMethod {
    /// Zellner g-prior with `g = n`.
    Gn,
    /// Mixture of g-priors.
    Mix,
    /// Intrinsic priors.
    Ip,
    Schwarz,
}

impl BfMethod {
    pub const EXACT: [BfMethod; 3] = [BfMethod::Gn, BfMethod::Mix, BfMethod::Ip];

    pub fn as_str(self) -> &'static str {
        match self {
            BfMethod::Gn => "gn",
            BfMethod::Mix => "mix",
            BfMethod::Ip => "ip",
            BfMethod::Schwarz => "schwarz",
        }
    }
}

impl fmt::Display for BfMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BfMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gn" | "g=n" | "gprior" => Ok(BfMethod::Gn),
            "mix" | "mixture" => Ok(BfMethod::Mix),
            "ip" | "intrinsic" => Ok(BfMethod::Ip),
            "schwarz" | "bic" => Ok(BfMethod::Schwarz),
            other => Err(Error::domain(format!("unknown Bayes factor method `{other}`"))),
        }
    }
}

/// Growth regime of the number of candidate regressors, `k = O(n^b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// `b < 1`
    BLt1,
    /// `b = 1`
    BEq1,
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "blt1" | "b<1" | "lt1" => Ok(Regime::BLt1),
            "beq1" | "b=1" | "eq1" => Ok(Regime::BEq1),
            other => Err(Error::domain(format!("unknown regime `{other}` (expected blt1 or beq1)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BfMode {
    Exact,
    ApproxBLt1,
    ApproxBEq1,
}

impl From<Regime> for BfMode {
    fn from(r: Regime) -> Self {
        match r {
            Regime::BLt1 => BfMode::ApproxBLt1,
            Regime::BEq1 => BfMode::ApproxBEq1,
        }
    }
}

impl fmt::Display for BfMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BfMode::Exact => "EXACT",
            BfMode::ApproxBLt1 => "APPROX_B_LT_1",
            BfMode::ApproxBEq1 => "APPROX_B_EQ_1",
        })
    }
}

/// `ln B_j0` together with the inputs that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogBayesFactor {
    pub log_value: f64,
    pub method: BfMethod,
    pub mode: BfMode,
    pub n: usize,
    pub j: usize,
    pub b_j0: f64,
}

fn check_b(b: f64) -> Result<()> {
    if b > 0.0 && b <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("b_j0 must lie in (0, 1], got {b}")))
    }
}

/// Requires `n > j + extra`.
fn check_n(n: usize, j: usize, extra: usize) -> Result<()> {
    if n > j + extra {
        Ok(())
    } else {
        Err(Error::domain(format!("need n > j + {extra}, got n = {n}, j = {j}")))
    }
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

fn tagged(log_value: f64, method: BfMethod, mode: BfMode, n: usize, j: usize, b_j0: f64) -> LogBayesFactor {
    LogBayesFactor { log_value, method, mode, n, j, b_j0 }
}

/// `((n-j-1)/2) ln(1+n) - ((n-1)/2) ln(1+n b)`.
pub fn log_bf_gn(n: usize, j: usize, b_j0: f64) -> Result<LogBayesFactor> {
    check_n(n, j, 1)?;
    check_b(b_j0)?;
    let nf = n as f64;
    let v = 0.5 * (nf - j as f64 - 1.0) * nf.ln_1p() - 0.5 * (nf - 1.0) * (nf * b_j0).ln_1p();
    Ok(tagged(v, BfMethod::Gn, BfMode::Exact, n, j, b_j0))
}

/// Mixture of g-priors. The integral over `g` is taken in `u = ln g`.
pub fn log_bf_mix(n: usize, j: usize, b_j0: f64, quad: &QuadratureSpec) -> Result<LogBayesFactor> {
    check_n(n, j, 2)?;
    check_b(b_j0)?;
    let (nf, jf) = (n as f64, j as f64);
    let (p, q, ln_b) = (0.5 * (nf - jf - 1.0), 0.5 * (nf - 1.0), b_j0.ln());
    let f = |u: f64| p * softplus(u) - q * softplus(u + ln_b) - 0.5 * u - 0.5 * nf * (-u).exp();
    let log_int = log_integrate_real_line(f, nf.ln(), quad)?;
    let v = 0.5 * (0.5 * nf).ln() - 0.5 * PI.ln() + log_int;
    Ok(tagged(v, BfMethod::Mix, BfMode::Exact, n, j, b_j0))
}

/// Intrinsic priors. The angular integral is taken in `v = ln tan(phi)`.
pub fn log_bf_ip(n: usize, j: usize, b_j0: f64, quad: &QuadratureSpec) -> Result<LogBayesFactor> {
    check_n(n, j, 1)?;
    check_b(b_j0)?;
    let (nf, jf) = (n as f64, j as f64);
    let c = jf + 2.0;
    let (p, q) = (0.5 * (nf - jf - 1.0), 0.5 * (nf - 1.0));
    let (ln_b, ln_cn) = (b_j0.ln(), (c / nf).ln());
    // n + c sin^2 = n (1 + (c/n) sin^2) and n b + c sin^2 = n (b + (c/n) sin^2);
    // the n-powers combine into the constant -(j/2) ln n outside the integral.
    let f = |v: f64| {
        let sp = softplus(2.0 * v);
        let ln_s2 = 2.0 * v - sp;
        let ln_jac = v - sp;
        0.5 * jf * ln_s2 + p * (ln_cn + ln_s2).exp().ln_1p() - q * log_add_exp(ln_b, ln_cn + ln_s2) + ln_jac
    };
    let log_int = log_integrate_real_line(f, 0.0, quad)?;
    let v = FRAC_2_PI.ln() + 0.5 * jf * c.ln() - 0.5 * jf * nf.ln() + log_int;
    Ok(tagged(v, BfMethod::Ip, BfMode::Exact, n, j, b_j0))
}

/// `-(j/2) ln n - (n/2) ln b`.
pub fn log_bf_schwarz(n: usize, j: usize, b_j0: f64) -> Result<LogBayesFactor> {
    if n <= 1 {
        return Err(Error::domain(format!("need n > 1, got n = {n}")));
    }
    check_b(b_j0)?;
    let nf = n as f64;
    let v = -0.5 * j as f64 * nf.ln() - 0.5 * nf * b_j0.ln();
    Ok(tagged(v, BfMethod::Schwarz, BfMode::Exact, n, j, b_j0))
}

/// Exact evaluation for any method.
pub fn log_bayes_factor(method: BfMethod, n: usize, j: usize, b_j0: f64, quad: &QuadratureSpec) -> Result<LogBayesFactor> {
    match method {
        BfMethod::Gn => log_bf_gn(n, j, b_j0),
        BfMethod::Mix => log_bf_mix(n, j, b_j0, quad),
        BfMethod::Ip => log_bf_ip(n, j, b_j0, quad),
        BfMethod::Schwarz => log_bf_schwarz(n, j, b_j0),
    }
}

/// Large-`n` approximations of the exact factors, for either growth regime.
pub fn log_bf_approx(method: BfMethod, regime: Regime, n: usize, j: usize, b_j0: f64) -> Result<LogBayesFactor> {
    check_n(n, j, 2)?;
    check_b(b_j0)?;
    let (nf, jf, lb) = (n as f64, j as f64, b_j0.ln());
    let v = match (method, regime) {
        (BfMethod::Gn, Regime::BLt1) => -0.5 * jf * nf.ln() - 0.5 * nf * lb + 0.5 * (1.0 - 1.0 / b_j0),
        (BfMethod::Gn, Regime::BEq1) => {
            -0.5 * jf * nf.ln() - 0.5 * nf * lb + 0.5 * (1.0 - 1.0 / b_j0 - jf / nf)
        }
        (BfMethod::Mix, _) => {
            let base = -0.5 * jf * (0.5 * nf).ln() - 0.5 * (nf - jf - 2.0) * lb + ln_gamma(0.5 * (jf + 1.0))
                - ln_gamma(0.5);
            match regime {
                Regime::BLt1 => base,
                Regime::BEq1 => base - 0.5 * (jf + 1.0) * (jf / nf * b_j0).ln_1p(),
            }
        }
        (BfMethod::Ip, Regime::BLt1) => {
            let c = jf + 2.0;
            -0.5 * jf * (nf / c).ln() - 0.5 * (nf - 1.0) * lb + 0.5 * c * (1.0 - 1.0 / b_j0)
        }
        (BfMethod::Ip, Regime::BEq1) => {
            let c = jf + 2.0;
            0.5 * (nf - jf - 1.0) * (nf / c).ln_1p() - 0.5 * (nf - 1.0) * (nf * b_j0 / c).ln_1p()
        }
        (BfMethod::Schwarz, _) => {
            return Err(Error::domain("the Schwarz form has no separate large-n approximation"))
        }
    };
    Ok(tagged(v, method, regime.into(), n, j, b_j0))
}
