//! First-order ensemble model: a tractable surrogate for randomized voting.
//!
//! Each test point `x` carries a mean-vote vector `theta(x)` in the simplex:
//! the expected one-hot vote of a single randomized classifier at `x`. A
//! surrogate classifier is a single `Uniform[0,1]` draw `U_i` pushed through
//! the interval partition of `[0,1]` induced by `theta(x)`, which reproduces
//! the marginal label distribution of a real classifier at every point. An
//! ensemble is then just `t` i.i.d. uniforms, and its error rate is a
//! functional of their empirical CDF — cheap enough to evaluate exactly (for
//! two classes) across thousands of simulated re-runs, which is what makes
//! ground-truth sigma curves and distributional checks feasible.
//!
//! Submodules: [`ops`] (interval partition, labeling, lifting operator),
//! [`bernstein`] (polynomial smoothing), [`errt`] (exact and Monte Carlo
//! error rates, ground-truth sigma), [`diagnostics`] (Beta moment fits, QQ
//! pairs, normality statistics).

pub mod bernstein;
pub mod diagnostics;
pub mod errt;
pub mod ops;

pub use bernstein::{bernstein, bernstein_derivative};
pub use diagnostics::{beta_moment_fit, normality_diagnostics, qq_pairs, NormalityDiagnostics};
pub use errt::{
    clt_variance_binary, err_infinity, err_infinity_mc, exact_err_prefix_curve_binary,
    exact_err_t_binary, ground_truth_errors, ground_truth_sigma, ground_truth_sigma_curve,
    mc_err_t, Ecdf,
};
pub use ops::{first_order_label, interval_partition, lift, Interval};

use rand::distr::weighted::WeightedIndex;
use rand::prelude::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ensemble::Label;
use crate::error::{CoreError, Result};

/// Tolerance for simplex-membership checks.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// A point of the full-dimensional simplex: `theta = (theta_1, ...,
/// theta_{k-1})` with nonnegative coordinates summing to at most 1. The
/// zeroth coordinate `theta_0 = 1 - sum` is implied.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexPoint {
    theta: Vec<f64>,
}

impl SimplexPoint {
    /// Builds a simplex point from `(theta_1, ..., theta_{k-1})`; membership
    /// is enforced within [`SIMPLEX_TOL`].
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.is_empty() {
            return Err(CoreError::Dimension(
                "simplex point needs at least one coordinate (k >= 2)".into(),
            ));
        }
        if let Some(&bad) = theta.iter().find(|&&v| !(v >= -SIMPLEX_TOL) || !v.is_finite()) {
            return Err(CoreError::Domain(format!(
                "simplex coordinate must be >= 0, got {bad}"
            )));
        }
        let sum: f64 = theta.iter().sum();
        if sum > 1.0 + SIMPLEX_TOL {
            return Err(CoreError::Domain(format!(
                "simplex coordinates sum to {sum} > 1"
            )));
        }
        Ok(Self { theta })
    }

    /// Class count `k` (one more than the stored coordinate count).
    pub fn k(&self) -> u32 {
        self.theta.len() as u32 + 1
    }

    /// Coordinates `theta_1..theta_{k-1}`.
    pub fn coords(&self) -> &[f64] {
        &self.theta
    }

    /// The implied zeroth coordinate `1 - sum`.
    pub fn theta0(&self) -> f64 {
        (1.0 - self.theta.iter().sum::<f64>()).max(0.0)
    }

    /// Partial sums `c_l = theta_1 + ... + theta_l` for `l = 1..k-1`,
    /// clamped into `[0,1]`.
    pub fn partial_sums(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.theta
            .iter()
            .map(|&v| {
                acc += v;
                acc.clamp(0.0, 1.0)
            })
            .collect()
    }
}

/// Per-class distribution of the mean-vote vector on the simplex.
///
/// Two classes use a Beta law for the scalar coordinate `theta_1`; more
/// classes use a Dirichlet law over all `k` barycentric coordinates
/// `(theta_0, ..., theta_{k-1})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "lowercase")]
pub enum ClassDistribution {
    Beta(f64, f64),
    Dirichlet(Vec<f64>),
}

impl ClassDistribution {
    fn validate(&self, k: u32) -> Result<()> {
        match self {
            ClassDistribution::Beta(a, b) => {
                if k != 2 {
                    return Err(CoreError::Config(format!(
                        "beta class distribution requires k=2, got k={k}"
                    )));
                }
                if !(*a > 0.0 && *b > 0.0) {
                    return Err(CoreError::Config(format!(
                        "beta parameters must be positive, got ({a}, {b})"
                    )));
                }
            }
            ClassDistribution::Dirichlet(alpha) => {
                if k == 2 {
                    return Err(CoreError::Config(
                        "k=2 class distributions must use the beta family".into(),
                    ));
                }
                if alpha.len() != k as usize {
                    return Err(CoreError::Config(format!(
                        "dirichlet needs {k} parameters, got {}",
                        alpha.len()
                    )));
                }
                if let Some(&bad) = alpha.iter().find(|&&v| !(v > 0.0)) {
                    return Err(CoreError::Config(format!(
                        "dirichlet parameters must be positive, got {bad}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// True when every shape parameter exceeds 1, so the density has bounded
    /// gradient on the open simplex. Smaller parameters are legal but the
    /// smoothness assumptions behind the limit theory no longer hold.
    pub fn has_bounded_density_gradient(&self) -> bool {
        match self {
            ClassDistribution::Beta(a, b) => *a > 1.0 && *b > 1.0,
            ClassDistribution::Dirichlet(alpha) => alpha.iter().all(|&v| v > 1.0),
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> SimplexPoint {
        match self {
            ClassDistribution::Beta(a, b) => {
                let beta = rand_distr::Beta::new(*a, *b).expect("validated parameters");
                SimplexPoint::new(vec![beta.sample(rng)]).expect("beta draw lies in [0,1]")
            }
            ClassDistribution::Dirichlet(alpha) => {
                // normalized independent Gamma(alpha_l, 1) draws; the
                // rand_distr Dirichlet needs the dimension at compile time
                let gammas: Vec<f64> = alpha
                    .iter()
                    .map(|&a| {
                        rand_distr::Gamma::new(a, 1.0)
                            .expect("validated parameters")
                            .sample(rng)
                    })
                    .collect();
                let total: f64 = gammas.iter().sum();
                // drop the implied zeroth barycentric coordinate
                let coords = gammas[1..].iter().map(|&g| g / total).collect();
                SimplexPoint::new(coords).expect("dirichlet draw lies in the simplex")
            }
        }
    }
}

/// A first-order model: class proportions `pi` and per-class laws `mu_l` of
/// the mean-vote vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FirstOrderModel {
    pub k: u32,
    pub pi: Vec<f64>,
    pub mu: Vec<ClassDistribution>,
}

impl FirstOrderModel {
    pub fn new(k: u32, pi: Vec<f64>, mu: Vec<ClassDistribution>) -> Result<Self> {
        let model = Self { k, pi, mu };
        model.validate()?;
        Ok(model)
    }

    /// Checks every model invariant; call after deserializing.
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(CoreError::Config(format!(
                "class count must be >= 2, got {}",
                self.k
            )));
        }
        if self.pi.len() != self.k as usize {
            return Err(CoreError::Config(format!(
                "pi must have {} entries, got {}",
                self.k,
                self.pi.len()
            )));
        }
        if let Some(&bad) = self.pi.iter().find(|&&v| !(0.0..=1.0).contains(&v)) {
            return Err(CoreError::Config(format!(
                "class proportion must lie in [0,1], got {bad}"
            )));
        }
        let total: f64 = self.pi.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(CoreError::Config(format!(
                "class proportions must sum to 1, got {total}"
            )));
        }
        if self.mu.len() != self.k as usize {
            return Err(CoreError::Config(format!(
                "mu must have {} entries, got {}",
                self.k,
                self.mu.len()
            )));
        }
        for dist in &self.mu {
            dist.validate(self.k)?;
        }
        Ok(())
    }

    /// Draws a class label from `pi`.
    pub fn sample_class(&self, rng: &mut impl Rng) -> Label {
        let idx = WeightedIndex::new(&self.pi)
            .expect("validated proportions")
            .sample(rng);
        Label(idx as u32)
    }

    /// Draws a mean-vote vector from `mu_l` for class `l`.
    pub fn sample_theta(&self, class: Label, rng: &mut impl Rng) -> SimplexPoint {
        self.mu[class.index()].sample(rng)
    }
}

/// The randomizing parameters of a simulated ensemble: `t` i.i.d.
/// `Uniform[0,1]` draws, one per surrogate classifier.
#[derive(Clone, Debug, PartialEq)]
pub struct FirstOrderEnsemble {
    u: Vec<f64>,
}

impl FirstOrderEnsemble {
    pub fn new(u: Vec<f64>) -> Result<Self> {
        if u.is_empty() {
            return Err(CoreError::Dimension("ensemble must have t >= 1 draws".into()));
        }
        if let Some(&bad) = u.iter().find(|&&v| !(0.0..=1.0).contains(&v)) {
            return Err(CoreError::Domain(format!(
                "randomizing parameter must lie in [0,1], got {bad}"
            )));
        }
        Ok(Self { u })
    }

    /// Samples a fresh ensemble of size `t`.
    pub fn sample(t: usize, rng: &mut impl Rng) -> Result<Self> {
        if t == 0 {
            return Err(CoreError::Dimension("ensemble must have t >= 1 draws".into()));
        }
        Ok(Self {
            u: (0..t).map(|_| rng.random::<f64>()).collect(),
        })
    }

    pub fn t(&self) -> usize {
        self.u.len()
    }

    pub fn draws(&self) -> &[f64] {
        &self.u
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_point_validation() {
        assert!(SimplexPoint::new(vec![0.2, 0.3]).is_ok());
        assert!(SimplexPoint::new(vec![0.0]).is_ok());
        assert!(SimplexPoint::new(vec![1.0]).is_ok());
        assert!(SimplexPoint::new(vec![-0.1]).is_err());
        assert!(SimplexPoint::new(vec![0.6, 0.5]).is_err());
        assert!(SimplexPoint::new(vec![]).is_err());
    }

    #[test]
    fn simplex_partial_sums_and_theta0() {
        let p = SimplexPoint::new(vec![0.2, 0.3]).unwrap();
        assert_eq!(p.k(), 3);
        assert_eq!(p.partial_sums(), vec![0.2, 0.5]);
        assert!((p.theta0() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn model_validation() {
        let ok = FirstOrderModel::new(
            2,
            vec![0.5, 0.5],
            vec![ClassDistribution::Beta(2.0, 5.0), ClassDistribution::Beta(5.0, 2.0)],
        );
        assert!(ok.is_ok());
        // pi not summing to one
        assert!(FirstOrderModel::new(
            2,
            vec![0.5, 0.4],
            vec![ClassDistribution::Beta(1.0, 1.0), ClassDistribution::Beta(1.0, 1.0)],
        )
        .is_err());
        // wrong family for k
        assert!(FirstOrderModel::new(
            2,
            vec![0.5, 0.5],
            vec![
                ClassDistribution::Dirichlet(vec![1.0, 1.0]),
                ClassDistribution::Beta(1.0, 1.0)
            ],
        )
        .is_err());
        assert!(FirstOrderModel::new(
            3,
            vec![0.4, 0.3, 0.3],
            vec![
                ClassDistribution::Dirichlet(vec![2.0, 1.0, 1.0]),
                ClassDistribution::Dirichlet(vec![1.0, 2.0, 1.0]),
                ClassDistribution::Dirichlet(vec![1.0, 1.0, 2.0]),
            ],
        )
        .is_ok());
    }

    #[test]
    fn bounded_gradient_flag() {
        assert!(ClassDistribution::Beta(2.0, 5.0).has_bounded_density_gradient());
        assert!(!ClassDistribution::Beta(1.0, 1.0).has_bounded_density_gradient());
        assert!(!ClassDistribution::Dirichlet(vec![2.0, 0.5, 2.0]).has_bounded_density_gradient());
    }

    #[test]
    fn model_spec_json_round_trip() {
        let model = FirstOrderModel::new(
            2,
            vec![0.5, 0.5],
            vec![ClassDistribution::Beta(2.0, 5.0), ClassDistribution::Beta(5.0, 2.0)],
        )
        .unwrap();
        let json = serde_json::to_string(&model).unwrap();
        assert!(json.contains("\"family\":\"beta\""));
        assert!(json.contains("\"params\":[2.0,5.0]"));
        let back: FirstOrderModel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, model);
    }

    #[test]
    fn ensemble_validation_and_sampling() {
        assert!(FirstOrderEnsemble::new(vec![0.0, 1.0, 0.5]).is_ok());
        assert!(FirstOrderEnsemble::new(vec![1.5]).is_err());
        assert!(FirstOrderEnsemble::new(vec![]).is_err());
        let mut rng = crate::rng::substream(3, 0);
        let e = FirstOrderEnsemble::sample(10, &mut rng).unwrap();
        assert_eq!(e.t(), 10);
        assert!(e.draws().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn class_sampling_respects_degenerate_pi() {
        let model = FirstOrderModel::new(
            2,
            vec![1.0, 0.0],
            vec![ClassDistribution::Beta(2.0, 2.0), ClassDistribution::Beta(2.0, 2.0)],
        )
        .unwrap();
        let mut rng = crate::rng::substream(5, 0);
        for _ in 0..100 {
            assert_eq!(model.sample_class(&mut rng), Label(0));
        }
    }
}
