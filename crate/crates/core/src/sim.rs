//! Seeded Monte Carlo experiments.
//!
//! Covariates are standard normal with common correlation `rho`, built from
//! one shared factor: `x_ic = sqrt(rho) z_i + sqrt(1 - rho) e_ic`. The true
//! regressors sit at the indices the caller names; the remaining columns are
//! noise. Every replicate draws from its own ChaCha8 stream whose seed is
//! derived from `(master seed, n, replicate)`, so results do not depend on
//! how work is scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::growth_k;
use crate::bayes_factor::BfMethod;
use crate::error::{Error, Result};
use crate::error_analysis::critical_threshold;
use crate::posterior::{enumerate_posterior_with_cap, DEFAULT_ENUMERATION_CAP};
use crate::prior::ModelPrior;
use crate::quadrature::QuadratureSpec;
use crate::regression::{centered, pseudo_distance, Dataset, ModelSubset, TrueModel};

/// splitmix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the stream used for replicate `replicate` at sample size `n`.
pub fn derive_seed(master: u64, n: u64, replicate: u64) -> u64 {
    mix(mix(mix(master) ^ n) ^ replicate.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Draws a dataset with `k` candidate regressors from the factor model.
/// `beta` is intercept first, one slope per index of `subset`; `sigma = 0`
/// gives noiseless responses.
pub fn generate_synthetic(
    n: usize,
    k: usize,
    subset: &ModelSubset,
    beta: &[f64],
    sigma: f64,
    covariate_corr: f64,
    seed: u64,
) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_with(&mut rng, n, k, subset, beta, sigma, covariate_corr)
}

fn generate_with(
    rng: &mut ChaCha8Rng,
    n: usize,
    k: usize,
    subset: &ModelSubset,
    beta: &[f64],
    sigma: f64,
    rho: f64,
) -> Result<Dataset> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::domain(format!("covariate correlation must lie in [0, 1), got {rho}")));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::domain(format!("sigma must be non-negative, got {sigma}")));
    }
    if beta.len() != subset.dim() + 1 {
        return Err(Error::DimensionMismatch(format!(
            "{} coefficients for a model of dimension {} (intercept first)",
            beta.len(),
            subset.dim()
        )));
    }
    subset.check_within(k)?;
    let (shared, own) = (rho.sqrt(), (1.0 - rho).sqrt());
    let mut columns = vec![Vec::with_capacity(n); k];
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let z: f64 = rng.sample(StandardNormal);
        for col in columns.iter_mut() {
            let e: f64 = rng.sample(StandardNormal);
            col.push(shared * z + own * e);
        }
        let eps: f64 = rng.sample(StandardNormal);
        y.push(beta[0] + sigma * eps);
    }
    for (&idx, &coef) in subset.indices().iter().zip(&beta[1..]) {
        for (v, x) in y.iter_mut().zip(&columns[idx - 1]) {
            *v += coef * x;
        }
    }
    Dataset::from_columns(y, columns)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Growth exponent: `k = floor(k_scale * n^b)`.
    pub b: f64,
    pub n_grid: Vec<usize>,
    pub true_indices: Vec<usize>,
    /// Intercept first, then one coefficient per true index.
    pub beta: Vec<f64>,
    pub sigma: f64,
    pub covariate_corr: f64,
    pub replications: usize,
    pub seed: u64,
    pub method: BfMethod,
    pub prior: ModelPrior,
    pub enumeration_cap: usize,
    /// Multiplier on `n^b`; 1 reproduces the plain growth law.
    pub k_scale: f64,
    pub quad: QuadratureSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            b: 0.0,
            n_grid: vec![50, 100, 200, 400],
            true_indices: vec![1, 2],
            beta: vec![0.0, 1.0, 1.0],
            sigma: 1.0,
            covariate_corr: 0.0,
            replications: 50,
            seed: 0,
            method: BfMethod::Ip,
            prior: ModelPrior::HierarchicalUniform,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            k_scale: 1.0,
            quad: QuadratureSpec::default(),
        }
    }
}

impl ExperimentConfig {
    /// Number of candidate regressors at sample size `n`.
    pub fn k_at(&self, n: usize) -> usize {
        if self.k_scale == 1.0 {
            growth_k(n, self.b)
        } else {
            ((self.k_scale * (n as f64).powf(self.b)) * (1.0 + 1e-12)).floor() as usize
        }
    }

    pub fn true_model(&self) -> Result<TrueModel> {
        TrueModel::new(ModelSubset::from_unsorted(self.true_indices.clone())?, self.beta.clone(), self.sigma)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.b) {
            return Err(Error::domain(format!("growth exponent b must lie in [0, 1], got {}", self.b)));
        }
        if !(self.k_scale > 0.0 && self.k_scale.is_finite()) {
            return Err(Error::domain(format!("k_scale must be positive, got {}", self.k_scale)));
        }
        if self.n_grid.is_empty() {
            return Err(Error::domain("the sample-size grid is empty"));
        }
        if self.replications == 0 {
            return Err(Error::domain("need at least one replication"));
        }
        if !(0.0..1.0).contains(&self.covariate_corr) {
            return Err(Error::domain(format!("covariate correlation must lie in [0, 1), got {}", self.covariate_corr)));
        }
        self.quad.validate()?;
        let truth = self.true_model()?;
        let t_max = truth.subset.indices().last().copied().unwrap_or(0);
        for &n in &self.n_grid {
            let k = self.k_at(n);
            if k < t_max {
                return Err(Error::domain(format!("k = {k} at n = {n} cannot hold true regressor {t_max}")));
            }
            if k > self.enumeration_cap {
                return Err(Error::EnumerationCapExceeded { k, cap: self.enumeration_cap });
            }
            if n <= k + 1 {
                return Err(Error::InsufficientDegreesOfFreedom { n, j: k });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub n: usize,
    pub k: usize,
    pub replicate: usize,
    pub true_posterior: f64,
    /// 1-based rank of the true model.
    pub true_rank: usize,
    pub modal: ModelSubset,
    pub modal_is_true: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub n: usize,
    pub k: usize,
    pub mean_true_posterior: f64,
    pub median_true_posterior: f64,
    pub hit_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    /// Ordered by grid position, then replicate.
    pub records: Vec<ReplicateRecord>,
    /// One entry per grid point, in grid order.
    pub summaries: Vec<GridSummary>,
}

impl ExperimentResult {
    pub fn mean_true_posterior(&self) -> Vec<f64> {
        self.summaries.iter().map(|s| s.mean_true_posterior).collect()
    }
}

/// Posterior of the true model along the sample-size grid.
pub fn run_consistency_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let truth = config.true_model()?;
    let jobs: Vec<(usize, usize)> = config
        .n_grid
        .iter()
        .flat_map(|&n| (0..config.replications).map(move |r| (n, r)))
        .collect();
    let records = jobs
        .par_iter()
        .map(|&(n, replicate)| {
            let k = config.k_at(n);
            let seed = derive_seed(config.seed, n as u64, replicate as u64);
            let data = generate_synthetic(n, k, &truth.subset, &truth.beta, truth.sigma, config.covariate_corr, seed)?;
            let table =
                enumerate_posterior_with_cap(&data, config.method, config.prior, &config.quad, config.enumeration_cap)?;
            let (modal, _) = table.modal();
            Ok(ReplicateRecord {
                n,
                k,
                replicate,
                true_posterior: table.posterior_of(&truth.subset)?,
                true_rank: table.rank_of(&truth.subset)?,
                modal_is_true: modal == truth.subset,
                modal,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let summaries = records
        .chunks(config.replications)
        .map(|chunk| {
            let mut post: Vec<f64> = chunk.iter().map(|r| r.true_posterior).collect();
            let m = post.len();
            let mean = post.iter().sum::<f64>() / m as f64;
            post.sort_by(f64::total_cmp);
            let median = if m % 2 == 1 { post[m / 2] } else { 0.5 * (post[m / 2 - 1] + post[m / 2]) };
            GridSummary {
                n: chunk[0].n,
                k: chunk[0].k,
                mean_true_posterior: mean,
                median_true_posterior: median,
                hit_rate: chunk.iter().filter(|r| r.modal_is_true).count() as f64 / m as f64,
            }
        })
        .collect();
    Ok(ExperimentResult { records, summaries })
}

/// Exact sampler of `b_j0` for a fixed design and a fixed mean vector.
///
/// With `Q` an orthonormal basis of the centered columns of `X_subset`,
/// `b_j0 = ||r||^2 / ||y_c||^2` where `r = y_c - Q Q' y_c`, and only the
/// noise is redrawn per sample.
#[derive(Debug, Clone)]
pub struct BjSampler {
    mean: Vec<f64>,
    sigma: f64,
    basis: Vec<Vec<f64>>,
}

impl BjSampler {
    pub fn new(design: &Dataset, subset: &ModelSubset, mean: Vec<f64>, sigma: f64) -> Result<Self> {
        subset.check_within(design.k())?;
        if mean.len() != design.n() {
            return Err(Error::DimensionMismatch(format!("mean of length {} for n = {}", mean.len(), design.n())));
        }
        if !(sigma > 0.0) {
            return Err(Error::domain(format!("sigma must be positive, got {sigma}")));
        }
        // Two passes of modified Gram-Schmidt give an orthonormal basis to rounding.
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(subset.dim());
        for &i in subset.indices() {
            let mut v = centered(design.column(i));
            let norm0 = dot(&v, &v).sqrt();
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(q, &v);
                    v.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
                }
            }
            let norm = dot(&v, &v).sqrt();
            if norm <= 1e-10 * norm0 {
                return Err(Error::RankDeficient(subset.to_string()));
            }
            v.iter_mut().for_each(|a| *a /= norm);
            basis.push(v);
        }
        Ok(Self { mean, sigma, basis })
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        let mut y: Vec<f64> =
            self.mean.iter().map(|m| m + self.sigma * rng.sample::<f64, _>(StandardNormal)).collect();
        let avg = y.iter().sum::<f64>() / y.len() as f64;
        y.iter_mut().for_each(|v| *v -= avg);
        let sse0 = dot(&y, &y);
        for q in &self.basis {
            let c = dot(q, &y);
            y.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
        }
        (dot(&y, &y) / sse0).clamp(0.0, 1.0)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Generator of the response in [`run_error_mc`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Signal {
    /// Coefficients used as given (intercept first, one per subset index).
    Fixed(Vec<f64>),
    /// Slopes rescaled so that the pseudo-distance to `M_0` on the drawn
    /// design equals `delta`; `direction` gives the slopes' shape.
    CalibratedDelta { direction: Vec<f64>, delta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    /// Empirical rejection frequency of `M_0`.
    pub estimate: f64,
    /// Binomial standard error.
    pub mc_se: f64,
    pub b_star: f64,
    /// Pseudo-distance of the generating mean from `M_0` on the drawn design.
    pub delta_n: f64,
}

/// Samples per independent stream in Monte Carlo loops.
const CHUNK: usize = 10_000;

/// Rejection frequency of the `b <= b*` rule of `method` for `M_subset`
/// versus `M_0`, with the design drawn once from `seed` (independent standard
/// normal columns) and only the noise redrawn per replicate.
#[allow(clippy::too_many_arguments)]
pub fn run_error_mc(
    method: BfMethod,
    n: usize,
    subset: &ModelSubset,
    signal: &Signal,
    sigma: f64,
    reps: usize,
    seed: u64,
    quad: &QuadratureSpec,
) -> Result<McEstimate> {
    if reps < 1000 {
        return Err(Error::domain(format!("need at least 1000 replicates, got {reps}")));
    }
    let j = subset.dim();
    let k = subset.indices().last().copied().unwrap_or(0);
    let b_star = match critical_threshold(method, n, j, quad) {
        Ok(r) => r.b_star,
        Err(Error::NoRoot { .. }) => 0.0,
        Err(e) => return Err(e),
    };
    let mut design_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, n as u64, u64::MAX));
    let design = generate_with(&mut design_rng, n, k, subset, &vec![0.0; j + 1], sigma, 0.0)?;

    let beta = match signal {
        Signal::Fixed(beta) => beta.clone(),
        Signal::CalibratedDelta { direction, delta } => {
            if direction.len() != j {
                return Err(Error::DimensionMismatch(format!("{} slopes for a model of dimension {j}", direction.len())));
            }
            let mut beta = vec![0.0];
            beta.extend_from_slice(direction);
            let unit = TrueModel::new(subset.clone(), beta.clone(), sigma)?;
            let d0 = pseudo_distance(&design, &unit, &ModelSubset::null())?;
            if d0 <= 0.0 && *delta > 0.0 {
                return Err(Error::domain("calibration direction has no signal"));
            }
            let scale = if *delta == 0.0 { 0.0 } else { (delta / d0).sqrt() };
            beta[1..].iter_mut().for_each(|b| *b *= scale);
            beta
        }
    };
    let truth = TrueModel::new(subset.clone(), beta, sigma)?;
    let delta_n = pseudo_distance(&design, &truth, &ModelSubset::null())?;
    let sampler = BjSampler::new(&design, subset, truth.mean(&design)?, sigma)?;

    let chunks = reps.div_ceil(CHUNK);
    let hits: usize = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, n as u64, c as u64));
            let m = CHUNK.min(reps - c * CHUNK);
            (0..m).filter(|_| sampler.sample(&mut rng) <= b_star).count()
        })
        .sum();
    let p = hits as f64 / reps as f64;
    Ok(McEstimate { estimate: p, mc_se: (p * (1.0 - p) / reps as f64).sqrt(), b_star, delta_n })
}

/// Empirical CDF of `b_j0` at `points`, from `reps` exact draws.
pub fn sample_bj0_cdf(sampler: &BjSampler, points: &[f64], reps: usize, seed: u64) -> Vec<f64> {
    let chunks = reps.div_ceil(CHUNK);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0, c as u64));
            let m = CHUNK.min(reps - c * CHUNK);
            let mut counts = vec![0usize; points.len()];
            for _ in 0..m {
                let b = sampler.sample(&mut rng);
                for (cnt, &x) in counts.iter_mut().zip(points) {
                    if b <= x {
                        *cnt += 1;
                    }
                }
            }
            counts
        })
        .reduce(|| vec![0; points.len()], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect());
    counts.into_iter().map(|c| c as f64 / reps as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regression::compute_bj0;

    #[test]
    fn noiseless_null_is_constant_zero() {
        let d = generate_synthetic(10, 2, &ModelSubset::null(), &[0.0], 0.0, 0.0, 1).unwrap();
        assert!(d.y().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn generation_is_deterministic() {
        let s: ModelSubset = "1".parse().unwrap();
        let a = generate_synthetic(20, 3, &s, &[0.5, 1.0], 1.0, 0.2, 99).unwrap();
        let b = generate_synthetic(20, 3, &s, &[0.5, 1.0], 1.0, 0.2, 99).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic(20, 3, &s, &[0.5, 1.0], 1.0, 0.2, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn derived_seeds_differ() {
        let mut seen = std::collections::HashSet::new();
        for n in [50u64, 100] {
            for r in 0..100 {
                assert!(seen.insert(derive_seed(7, n, r)));
            }
        }
    }

    #[test]
    fn config_validation() {
        let cfg = ExperimentConfig { b: 0.8, n_grid: vec![50, 100], ..Default::default() };
        assert_eq!(cfg.validate().unwrap_err(), Error::EnumerationCapExceeded { k: 39, cap: 25 });
        let cfg = ExperimentConfig { b: 0.0, true_indices: vec![1, 2], ..Default::default() };
        assert!(matches!(cfg.validate(), Err(Error::Domain(_))));
        let cfg = ExperimentConfig { b: 0.0, k_scale: 4.0, ..Default::default() };
        assert!(cfg.validate().is_ok());
        assert_eq!(cfg.k_at(1000), 4);
    }

    #[test]
    fn sampler_statistic_matches_direct_fit() {
        let truth = TrueModel::new("1,2".parse().unwrap(), vec![0.3, 1.0, -0.5], 1.0).unwrap();
        let d = generate_synthetic(25, 3, &truth.subset, &truth.beta, 1.0, 0.1, 5).unwrap();
        let sampler = BjSampler::new(&d, &truth.subset, vec![0.0; 25], 1.0).unwrap();
        // Same noise stream as a direct fit on y = noise.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let b = sampler.sample(&mut rng);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let y: Vec<f64> = (0..25).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let fit = compute_bj0(&d.with_response(y).unwrap(), &truth.subset).unwrap();
        assert!((b - fit.b_j0).abs() < 1e-12);
    }

    #[test]
    fn small_experiment_runs_and_is_deterministic() {
        let cfg = ExperimentConfig {
            b: 0.0,
            k_scale: 3.0,
            n_grid: vec![30, 60],
            replications: 4,
            method: BfMethod::Gn,
            ..Default::default()
        };
        let a = run_consistency_experiment(&cfg).unwrap();
        let b = run_consistency_experiment(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.records.len(), 8);
        assert_eq!(a.summaries.len(), 2);
        assert!(a.records.iter().all(|r| (0.0..=1.0).contains(&r.true_posterior) && r.k == 3));
    }
}
