//! Large-sample behaviour of the Bayes factors when the data come from a
//! fixed true model `M_t` and the number of candidates grows as `k = n^b`.
//!
//! The approximations here replace `b_j0` by its probability limit
//! `(1 + delta*_tj) / (1 + delta*_t0)`, where `delta*` is the population
//! pseudo-distance between the true model and a candidate. Partial sums of
//! the posterior odds against the true model then diagnose posterior
//! consistency along a grid of sample sizes.

use std::f64::consts::{E, LN_2};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayes_factor::{BfMethod, Regime};
use crate::error::{Error, Result};
use crate::prior::{ln_binomial, ModelPrior};
use crate::regression::{ModelSubset, TrueModel};

/// Log-sums above this are reported as `+inf`.
pub const OVERFLOW_LOG: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticScenario {
    pub n: usize,
    /// Dimension of the true model.
    pub t: usize,
    /// Dimension of the candidate.
    pub j: usize,
    /// `delta*(M_t, M_j)`; zero when the true model is nested in the candidate.
    pub delta_tj: f64,
    /// `delta*(M_t, M_0)`.
    pub delta_t0: f64,
    pub regime: Regime,
}

/// Large-`n` approximation of `ln B_j0` under sampling from `M_t`.
pub fn asymptotic_log_bf(method: BfMethod, s: &AsymptoticScenario) -> Result<f64> {
    if s.n <= s.j + 2 {
        return Err(Error::domain(format!("need n > j + 2, got n = {}, j = {}", s.n, s.j)));
    }
    for d in [s.delta_tj, s.delta_t0] {
        if !(d >= 0.0 && d.is_finite()) {
            return Err(Error::domain(format!("pseudo-distances must be finite and non-negative, got {d}")));
        }
    }
    let (n, j) = (s.n as f64, s.j as f64);
    let shift = match s.regime {
        Regime::BLt1 => 0.0,
        Regime::BEq1 => j / n,
    };
    let num = 1.0 + s.delta_tj - shift;
    let ln_ratio = num.ln() - s.delta_t0.ln_1p();
    Ok(match (method, s.regime) {
        (BfMethod::Gn, _) => {
            -0.5 * j * n.ln() - 0.5 * n * ln_ratio + (s.delta_tj - s.delta_t0 - shift) / (2.0 * num)
        }
        (BfMethod::Mix, _) => {
            let dim = if s.j == 0 { 0.0 } else { -0.5 * j * (n * E / (j + 1.0)).ln() };
            dim - 0.5 * (n - j - 2.0) * ln_ratio
        }
        (BfMethod::Ip, Regime::BLt1) => -0.5 * j * (n / (j + 2.0)).ln() - 0.5 * (n - j) * ln_ratio,
        (BfMethod::Ip, Regime::BEq1) => {
            if s.j == 0 {
                return Err(Error::domain("the b = 1 intrinsic approximation divides by j; j = 0 is undefined"));
            }
            let r = n / j;
            0.5 * (n - j - 1.0) * r.ln_1p()
                - 0.5 * (n - 1.0) * ((r * (1.0 + s.delta_tj) + s.delta_t0).ln() - s.delta_t0.ln_1p())
        }
        (BfMethod::Schwarz, _) => return Err(Error::domain("no large-sample form is defined for the Schwarz method")),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PairClass {
    /// `delta* = 0`: the true model is nested in (or equal to) the candidate.
    Zero,
    Positive,
}

/// Sign of `delta*(M_t, M_j)` for designs whose regressors are linearly
/// independent in the population and whose true coefficients are non-zero.
pub fn classify_pair(truth: &ModelSubset, other: &ModelSubset, k: usize) -> Result<PairClass> {
    truth.check_within(k)?;
    other.check_within(k)?;
    Ok(if truth.is_subset_of(other) { PairClass::Zero } else { PairClass::Positive })
}

/// Population covariance of the `k` candidate regressors.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    k: usize,
    cov: Vec<f64>,
}

impl Population {
    /// `cov` is row-major `k x k`, symmetric.
    pub fn new(k: usize, cov: Vec<f64>) -> Result<Self> {
        if cov.len() != k * k {
            return Err(Error::DimensionMismatch(format!("{} covariance entries for k = {k}", cov.len())));
        }
        for r in 0..k {
            for c in 0..r {
                let (a, b) = (cov[r * k + c], cov[c * k + r]);
                if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                    return Err(Error::domain("covariance matrix is not symmetric"));
                }
            }
        }
        Ok(Self { k, cov })
    }

    /// Unit variances and common correlation `rho`.
    pub fn equicorrelated(k: usize, rho: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::domain(format!("correlation must lie in [0, 1), got {rho}")));
        }
        let cov = (0..k * k).map(|i| if i / k == i % k { 1.0 } else { rho }).collect();
        Ok(Self { k, cov })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.cov[(r - 1) * self.k + (c - 1)]
    }
}

/// `delta* = beta_t' S_{t.j} beta_t / (2 sigma^2)` with the Schur complement
/// `S_{t.j} = S_tt - S_tj S_jj^{-1} S_jt` of the population covariance.
pub fn population_pseudo_distance(pop: &Population, truth: &TrueModel, other: &ModelSubset) -> Result<f64> {
    truth.subset.check_within(pop.k)?;
    other.check_within(pop.k)?;
    let t_idx = truth.subset.indices();
    let j_idx = other.indices();
    let beta = &truth.beta[1..];
    // v = S_tt-quadratic form and w = S_jt beta.
    let mut quad = 0.0;
    for (a, &ia) in t_idx.iter().enumerate() {
        for (b, &ib) in t_idx.iter().enumerate() {
            quad += beta[a] * pop.at(ia, ib) * beta[b];
        }
    }
    if !j_idx.is_empty() {
        let w: Vec<f64> =
            j_idx.iter().map(|&r| t_idx.iter().zip(beta).map(|(&c, bc)| pop.at(r, c) * bc).sum()).collect();
        let m = j_idx.len();
        let mut l = vec![0.0; m * m];
        for r in 0..m {
            for c in 0..=r {
                let mut s = pop.at(j_idx[r], j_idx[c]);
                for p in 0..c {
                    s -= l[r * m + p] * l[c * m + p];
                }
                if r == c {
                    if s <= 1e-12 * pop.at(j_idx[r], j_idx[r]).abs().max(f64::MIN_POSITIVE) {
                        return Err(Error::RankDeficient(other.to_string()));
                    }
                    l[r * m + r] = s.sqrt();
                } else {
                    l[r * m + c] = s / l[c * m + c];
                }
            }
        }
        // ||L^{-1} w||^2 = w' S_jj^{-1} w
        let mut z = vec![0.0; m];
        for r in 0..m {
            let s: f64 = (0..r).map(|p| l[r * m + p] * z[p]).sum();
            z[r] = (w[r] - s) / l[r * m + r];
        }
        quad -= z.iter().map(|v| v * v).sum::<f64>();
    }
    Ok(quad.max(0.0) / (2.0 * truth.sigma * truth.sigma))
}

/// Which models enter the condition-(A) partial sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SumMode {
    /// Only models that nest the true one (the terms that survive as `n` grows).
    #[default]
    Nested,
    /// Every model other than the true one; non-nested classes use the
    /// caller's `delta*`.
    Strict,
}

/// `k = floor(n^b)`, robust to `n^b` landing a hair below an integer.
pub fn growth_k(n: usize, b: f64) -> usize {
    let x = (n as f64).powf(b);
    (x * (1.0 + 1e-12)).floor() as usize
}

/// `b < 1` uses the fixed-fraction approximations, `b = 1` the proportional ones.
pub fn regime_for(b: f64) -> Regime {
    if b < 1.0 {
        Regime::BLt1
    } else {
        Regime::BEq1
    }
}

/// Finite-`n` partial sum of `(B_j0 / B_t0)(pi(M_j) / pi(M_t))` over models
/// `M_j != M_t`, with `k = floor(n^b)` candidates.
///
/// `delta` maps a dimension `j` to `delta*_tj` for models of that dimension
/// that do *not* nest the true model; `delta(0)` is `delta*_t0`. Models that
/// nest `M_t` have `delta* = 0`. Returns `+inf` once the log-sum passes
/// [`OVERFLOW_LOG`].
pub fn condition_a_sum(
    method: BfMethod,
    prior: ModelPrior,
    b: f64,
    n: usize,
    t: usize,
    delta: &dyn Fn(usize) -> f64,
    mode: SumMode,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&b) {
        return Err(Error::domain(format!("growth exponent b must lie in [0, 1], got {b}")));
    }
    let k = growth_k(n, b);
    if k < t {
        return Err(Error::domain(format!("k = floor({n}^{b}) = {k} is smaller than t = {t}")));
    }
    if n <= t + 2 {
        return Err(Error::domain(format!("need n > t + 2, got n = {n}, t = {t}")));
    }
    let regime = regime_for(b);
    let delta_t0 = if t == 0 { 0.0 } else { delta(0) };
    let lbf = |j: usize, delta_tj: f64| -> Result<f64> {
        if j == 0 {
            return Ok(0.0);
        }
        asymptotic_log_bf(method, &AsymptoticScenario { n, t, j, delta_tj, delta_t0, regime })
    };
    let base = lbf(t, 0.0)? + prior.log_prior(t, k)?;
    let j_max = k.min(n - 3);

    let mut terms = Vec::new();
    let mut push = |log_count: f64, j: usize, d: f64| -> Result<()> {
        if log_count.is_finite() {
            terms.push(log_count + lbf(j, d)? + prior.log_prior(j, k)? - base);
        }
        Ok(())
    };
    for j in t + 1..=j_max {
        push(ln_binomial(k - t, j - t), j, 0.0)?;
    }
    if mode == SumMode::Strict {
        for j in 0..=j_max.min(t) {
            let total = ln_binomial(k, j);
            let nested = if j == t { 0.0 } else { f64::NEG_INFINITY };
            push(ln_sub(total, nested), j, delta(j))?;
        }
        for j in t + 1..=j_max {
            push(ln_sub(ln_binomial(k, j), ln_binomial(k - t, j - t)), j, delta(j))?;
        }
    }
    if terms.is_empty() {
        return Ok(0.0);
    }
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_sum = max + terms.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
    Ok(if log_sum > OVERFLOW_LOG { f64::INFINITY } else { log_sum.exp() })
}

/// `ln(e^a - e^b)` for `a >= b`; `-inf` when the difference vanishes.
fn ln_sub(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    let d = b - a;
    if d >= -1e-14 {
        f64::NEG_INFINITY
    } else {
        a + (-d.exp()).ln_1p()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Trend {
    DecreasingToZero,
    NotDecreasing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub b: f64,
    pub n_grid: Vec<usize>,
    pub partial_sums: Vec<f64>,
    pub verdict_trend: Trend,
}

/// Strict decrease over the last quarter of the grid (at least two points)
/// and a final value below `1e-3` of the first.
pub fn trend_verdict(partial_sums: &[f64]) -> Trend {
    let len = partial_sums.len();
    if len < 2 {
        return Trend::NotDecreasing;
    }
    let tail = len.div_ceil(4).max(2);
    let decreasing = partial_sums[len - tail..].windows(2).all(|w| w[1] < w[0]);
    let small = partial_sums[len - 1] < 1e-3 * partial_sums[0];
    if decreasing && small {
        Trend::DecreasingToZero
    } else {
        Trend::NotDecreasing
    }
}

/// [`condition_a_sum`] over a grid of sample sizes, with a trend verdict.
pub fn consistency_report(
    method: BfMethod,
    prior: ModelPrior,
    b: f64,
    n_grid: &[usize],
    t: usize,
    delta: &(dyn Fn(usize) -> f64 + Sync),
    mode: SumMode,
) -> Result<ConsistencyReport> {
    let partial_sums = n_grid
        .par_iter()
        .map(|&n| condition_a_sum(method, prior, b, n, t, delta, mode))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConsistencyReport {
        b,
        n_grid: n_grid.to_vec(),
        verdict_trend: trend_verdict(&partial_sums),
        partial_sums,
    })
}

/// Mixture threshold `(1 - 1/r)(e r)^{1/(r-1)} - 1` for `r > 1`.
pub fn threshold_delta_mix(r: f64) -> Result<f64> {
    if !(r > 1.0) || !r.is_finite() {
        return Err(Error::domain(format!("the mixture threshold needs r > 1, got {r}")));
    }
    Ok((1.0 - 1.0 / r) * ((E * r).ln() / (r - 1.0)).exp() - 1.0)
}

/// Intrinsic threshold `(r - 1)/(r + 1)^{(r-1)/r} - 1` for `r > 1`, and
/// `1/ln 2 - 1` at `r = 1`.
pub fn threshold_delta_ip(r: f64) -> Result<f64> {
    if !(r >= 1.0) || !r.is_finite() {
        return Err(Error::domain(format!("the intrinsic threshold needs r >= 1, got {r}")));
    }
    if r == 1.0 {
        return Ok(1.0 / LN_2 - 1.0);
    }
    Ok((r - 1.0) * (-(r - 1.0) / r * (r + 1.0).ln()).exp() - 1.0)
}
