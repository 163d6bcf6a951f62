//! Prior mass over the model space. All three priors are exchangeable: the
//! mass of a model depends only on its dimension `j` out of `k` candidates.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelPrior {
    /// Each regressor enters independently with probability `theta`.
    Bernoulli { theta: f64 },
    /// Uniform over dimensions, then uniform within each dimension
    /// (the Bernoulli prior integrated over `theta ~ U(0, 1)`).
    HierarchicalUniform,
    Uniform,
}

impl ModelPrior {
    pub fn bernoulli(theta: f64) -> Result<Self> {
        if theta > 0.0 && theta < 1.0 {
            Ok(ModelPrior::Bernoulli { theta })
        } else {
            Err(Error::domain(format!("Bernoulli inclusion probability must lie in (0, 1), got {theta}")))
        }
    }

    /// Log prior mass of one particular model of dimension `j`.
    pub fn log_prior(&self, j: usize, k: usize) -> Result<f64> {
        if j > k {
            return Err(Error::domain(format!("model dimension {j} exceeds k = {k}")));
        }
        let (jf, kf) = (j as f64, k as f64);
        Ok(match *self {
            ModelPrior::Bernoulli { theta } => {
                if !(theta > 0.0 && theta < 1.0) {
                    return Err(Error::domain(format!("Bernoulli inclusion probability {theta} outside (0, 1)")));
                }
                // Avoid 0 * ln(...) surprises at the boundary classes.
                let a = if j > 0 { jf * theta.ln() } else { 0.0 };
                let b = if j < k { (kf - jf) * (-theta).ln_1p() } else { 0.0 };
                a + b
            }
            ModelPrior::HierarchicalUniform => -ln_binomial(k, j) - (kf + 1.0).ln(),
            ModelPrior::Uniform => -kf * std::f64::consts::LN_2,
        })
    }

    /// `ln pi(M_j) - ln pi(M_t)` for models of dimensions `j` and `t`.
    pub fn log_prior_ratio(&self, j: usize, t: usize, k: usize) -> Result<f64> {
        Ok(self.log_prior(j, k)? - self.log_prior(t, k)?)
    }
}

/// `ln C(k, j)` through log-gamma; exact zero at the edges.
pub fn ln_binomial(k: usize, j: usize) -> f64 {
    if j == 0 || j == k {
        return 0.0;
    }
    ln_gamma(k as f64 + 1.0) - ln_gamma(j as f64 + 1.0) - ln_gamma((k - j) as f64 + 1.0)
}

impl fmt::Display for ModelPrior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelPrior::Bernoulli { theta } => write!(f, "bernoulli:{theta}"),
            ModelPrior::HierarchicalUniform => f.write_str("hu"),
            ModelPrior::Uniform => f.write_str("uniform"),
        }
    }
}

/// Accepts `bernoulli:<theta>`, `hu` and `uniform`.
impl FromStr for ModelPrior {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.split_once(':') {
            Some(("bernoulli", theta)) => {
                let theta: f64 = theta
                    .trim()
                    .parse()
                    .map_err(|_| Error::domain(format!("cannot parse `{theta}` as a probability")))?;
                ModelPrior::bernoulli(theta)
            }
            None if s == "hu" || s == "hierarchical" => Ok(ModelPrior::HierarchicalUniform),
            None if s == "uniform" => Ok(ModelPrior::Uniform),
            _ => Err(Error::domain(format!(
                "unknown prior `{s}` (expected bernoulli:<theta>, hu or uniform)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn total_log_mass(p: ModelPrior, k: usize) -> f64 {
        // Σ_j C(k, j) π(M_j), in log space.
        let terms: Vec<f64> = (0..=k).map(|j| ln_binomial(k, j) + p.log_prior(j, k).unwrap()).collect();
        let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
    }

    #[test]
    fn half_bernoulli_is_uniform() {
        let b = ModelPrior::bernoulli(0.5).unwrap();
        for k in [0, 1, 7, 30] {
            for j in 0..=k {
                let d = b.log_prior(j, k).unwrap() - ModelPrior::Uniform.log_prior(j, k).unwrap();
                assert!(d.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hierarchical_reference_values() {
        let hu = ModelPrior::HierarchicalUniform;
        assert!((hu.log_prior(0, 4).unwrap() - (0.2f64).ln()).abs() < 1e-14);
        let r = hu.log_prior_ratio(5, 2, 10).unwrap();
        assert!((r - (14400.0f64 / 80640.0).ln()).abs() < 1e-12);
        assert!((r + 1.7228).abs() < 1e-4);
    }

    #[test]
    fn ratios() {
        let p = ModelPrior::bernoulli(0.3).unwrap();
        assert_eq!(p.log_prior_ratio(4, 4, 9).unwrap(), 0.0);
        let r = p.log_prior_ratio(5, 4, 9).unwrap();
        assert!((r - (0.3f64 / 0.7).ln()).abs() < 1e-14);
    }

    #[test]
    fn normalisation() {
        for k in 0..=12 {
            for p in [ModelPrior::bernoulli(0.2).unwrap(), ModelPrior::HierarchicalUniform, ModelPrior::Uniform] {
                assert!(total_log_mass(p, k).abs() < 1e-12, "{p} k = {k}");
            }
        }
        // Large k is handled through log-gamma.
        assert!(total_log_mass(ModelPrior::HierarchicalUniform, 800).abs() < 1e-10);
    }

    #[test]
    fn parsing_and_validation() {
        assert_eq!("hu".parse::<ModelPrior>().unwrap(), ModelPrior::HierarchicalUniform);
        assert_eq!("Uniform".parse::<ModelPrior>().unwrap(), ModelPrior::Uniform);
        assert_eq!(
            "bernoulli:0.25".parse::<ModelPrior>().unwrap(),
            ModelPrior::Bernoulli { theta: 0.25 }
        );
        assert!("bernoulli:1".parse::<ModelPrior>().is_err());
        assert!("bernoulli:0".parse::<ModelPrior>().is_err());
        assert!("beta".parse::<ModelPrior>().is_err());
        assert!(ModelPrior::Uniform.log_prior(3, 2).is_err());
        let p: ModelPrior = ModelPrior::bernoulli(0.25).unwrap().to_string().parse().unwrap();
        assert_eq!(p, ModelPrior::Bernoulli { theta: 0.25 });
    }
}
