//! Posterior probabilities over every model in the space, computed from Bayes
//! factors against the common null model `M_0`:
//!
//! ```text
//! Pr(M_j | y) = B_j0 pi(M_j) / sum_i B_i0 pi(M_i),   B_00 = 1.
//! ```

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::bayes_factor::{log_bayes_factor, BfMethod};
use crate::error::{Error, Result};
use crate::prior::ModelPrior;
use crate::quadrature::QuadratureSpec;
use crate::regression::{Dataset, ModelSubset, SubsetFitter};

/// Largest number of candidate regressors enumerated by default (2^25 models).
pub const DEFAULT_ENUMERATION_CAP: usize = 25;

/// Log masses are compared on a grid of this width when ranking, so models
/// whose posteriors agree to about one part in 10^9 count as tied. The grid
/// is in log space, which keeps the ordering of negligible models intact.
const LOG_TIE_RESOLUTION: f64 = 1e-9;

fn rank_key(e: &PosteriorEntry) -> f64 {
    (e.log_unnormalized / LOG_TIE_RESOLUTION).round()
}

/// One model of the table. Bit `i` of `mask` selects regressor `i + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorEntry {
    pub mask: u64,
    pub log_unnormalized: f64,
    pub posterior: f64,
}

impl PosteriorEntry {
    pub fn subset(&self) -> ModelSubset {
        ModelSubset::from_mask(self.mask)
    }

    pub fn dim(&self) -> usize {
        self.mask.count_ones() as usize
    }
}

/// Normalised posterior over all `2^k` models, stored in ascending mask
/// order so that `entries()[mask]` is the model with that mask.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorTable {
    method: BfMethod,
    prior: ModelPrior,
    n: usize,
    k: usize,
    entries: Vec<PosteriorEntry>,
}

impl PosteriorTable {
    /// Normalises log-unnormalised masses given in ascending mask order.
    pub fn from_log_masses(method: BfMethod, prior: ModelPrior, n: usize, k: usize, log_masses: &[f64]) -> Result<Self> {
        if k >= 64 || log_masses.len() != 1usize << k {
            return Err(Error::DimensionMismatch(format!(
                "{} log masses for k = {k} regressors",
                log_masses.len()
            )));
        }
        let max = log_masses.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::domain("model masses are not finite"));
        }
        let lse = max + log_masses.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
        let entries = log_masses
            .iter()
            .enumerate()
            .map(|(mask, &l)| PosteriorEntry { mask: mask as u64, log_unnormalized: l, posterior: (l - lse).exp() })
            .collect();
        Ok(Self { method, prior, n, k, entries })
    }

    pub fn method(&self) -> BfMethod {
        self.method
    }

    pub fn prior(&self) -> ModelPrior {
        self.prior
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn entries(&self) -> &[PosteriorEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn posterior_of(&self, subset: &ModelSubset) -> Result<f64> {
        subset.check_within(self.k)?;
        Ok(self.entries[subset.mask() as usize].posterior)
    }

    /// Sum of all posterior probabilities (1 up to rounding).
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.posterior).sum()
    }

    /// The `m` most probable models: descending posterior, ties broken by
    /// fewer regressors and then lexicographic index order.
    pub fn top_models(&self, m: usize) -> Vec<(ModelSubset, f64)> {
        let mut order: Vec<usize> = (0..self.entries.len()).collect();
        let key = rank_key;
        let cmp = |a: &usize, b: &usize| {
            let (ea, eb) = (&self.entries[*a], &self.entries[*b]);
            key(eb)
                .partial_cmp(&key(ea))
                .unwrap_or(Ordering::Equal)
                .then(ea.dim().cmp(&eb.dim()))
                .then_with(|| ea.subset().cmp(&eb.subset()))
        };
        let m = m.min(order.len());
        if m == 0 {
            return Vec::new();
        }
        if m < order.len() {
            order.select_nth_unstable_by(m - 1, cmp);
            order.truncate(m);
        }
        order.sort_by(cmp);
        order.into_iter().map(|i| (self.entries[i].subset(), self.entries[i].posterior)).collect()
    }

    /// Highest-posterior model under the same ordering as [`top_models`](Self::top_models).
    pub fn modal(&self) -> (ModelSubset, f64) {
        self.top_models(1).pop().expect("a table always holds the null model")
    }

    /// Position (1-based) of `subset` in the ranking of [`top_models`](Self::top_models).
    pub fn rank_of(&self, subset: &ModelSubset) -> Result<usize> {
        let target = self.entries[{
            subset.check_within(self.k)?;
            subset.mask() as usize
        }];
        let key = rank_key;
        let better = self
            .entries
            .iter()
            .filter(|e| {
                let (ke, kt) = (key(e), key(&target));
                ke > kt || (ke == kt && (e.dim(), e.subset()) < (target.dim(), target.subset()))
            })
            .count();
        Ok(better + 1)
    }

    /// Marginal inclusion probability of every regressor.
    pub fn inclusion_probabilities(&self) -> Vec<f64> {
        let mut incl = vec![0.0; self.k];
        for e in &self.entries {
            for (i, p) in incl.iter_mut().enumerate() {
                if e.mask >> i & 1 == 1 {
                    *p += e.posterior;
                }
            }
        }
        incl.into_iter().map(|p: f64| p.min(1.0)).collect()
    }

    /// Serialises as `{method, prior, n, k, models: [...], inclusion}` with
    /// every model, in mask order.
    pub fn to_json(&self) -> String {
        self.json_with((0..self.entries.len()).collect())
    }

    /// Like [`to_json`](Self::to_json) but lists only the `m` best models,
    /// best first.
    pub fn to_json_top(&self, m: usize) -> String {
        self.json_with(self.top_models(m).iter().map(|(s, _)| s.mask() as usize).collect())
    }

    fn json_with(&self, order: Vec<usize>) -> String {
        #[derive(Serialize)]
        struct Model {
            indices: Vec<usize>,
            log_unnormalized: f64,
            posterior: f64,
        }
        #[derive(Serialize)]
        struct Doc {
            method: String,
            prior: String,
            n: usize,
            k: usize,
            models: Vec<Model>,
            inclusion: Vec<f64>,
        }
        let doc = Doc {
            method: self.method.to_string(),
            prior: self.prior.to_string(),
            n: self.n,
            k: self.k,
            models: order
                .into_iter()
                .map(|i| &self.entries[i])
                .map(|e| Model {
                    indices: e.subset().indices().to_vec(),
                    log_unnormalized: e.log_unnormalized,
                    posterior: e.posterior,
                })
                .collect(),
            inclusion: self.inclusion_probabilities(),
        };
        serde_json::to_string_pretty(&doc).expect("plain data always serialises")
    }
}

/// Exhaustive posterior with the default enumeration cap.
pub fn enumerate_posterior(
    dataset: &Dataset,
    method: BfMethod,
    prior: ModelPrior,
    quad: &QuadratureSpec,
) -> Result<PosteriorTable> {
    enumerate_posterior_with_cap(dataset, method, prior, quad, DEFAULT_ENUMERATION_CAP)
}

/// Exhaustive posterior over all `2^k` subsets; fails when `k > cap`.
///
/// Subsets are evaluated in parallel but collected in ascending mask order,
/// so the result does not depend on scheduling.
pub fn enumerate_posterior_with_cap(
    dataset: &Dataset,
    method: BfMethod,
    prior: ModelPrior,
    quad: &QuadratureSpec,
    cap: usize,
) -> Result<PosteriorTable> {
    let (n, k) = (dataset.n(), dataset.k());
    if k > cap.min(63) {
        return Err(Error::EnumerationCapExceeded { k, cap });
    }
    quad.validate()?;
    let fitter = SubsetFitter::new(dataset)?;
    let log_priors = (0..=k).map(|j| prior.log_prior(j, k)).collect::<Result<Vec<_>>>()?;
    let log_masses = (0..1u64 << k)
        .into_par_iter()
        .map(|mask| {
            let j = mask.count_ones() as usize;
            let log_bf = if mask == 0 {
                0.0
            } else {
                let fit = fitter.bj0(&ModelSubset::from_mask(mask))?;
                log_bayes_factor(method, n, j, fit.b_j0, quad)?.log_value
            };
            Ok(log_bf + log_priors[j])
        })
        .collect::<Result<Vec<f64>>>()?;
    PosteriorTable::from_log_masses(method, prior, n, k, &log_masses)
}
