//! Synthetic two-class generators for end-to-end pipeline runs.

use nalgebra::DMatrix;
use rand::distr::weighted::WeightedIndex;
use rand::prelude::Distribution;
use rand::Rng;
use rand_distr::StandardNormal;

use super::Dataset;
use crate::ensemble::Label;
use crate::error::{CoreError, Result};
use crate::rng;

/// Number of nonzero mean coordinates in the continuous generator.
const SPARSE_COORDS: usize = 10;
/// Nonzero mean value in the continuous generator.
const MEAN_SHIFT: f64 = 0.05;
/// Cells and balls per draw in the discrete generator.
const CELLS: usize = 100;
const BALLS: usize = 100;

/// Covariance factor `A = U diag(1/1, 1/2, ..., 1/p)` with `U` Haar-random
/// orthogonal (QR of a Gaussian matrix, sign-corrected), so that
/// `A A^T = U diag(1/j^2) U^T`.
pub(crate) fn covariance_factor(p: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(p, p, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    // make the Haar measure exact: fix the sign ambiguity of the QR factors
    for j in 0..p {
        if r[(j, j)] < 0.0 {
            for i in 0..p {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    for j in 0..p {
        let scale = 1.0 / (j + 1) as f64;
        for i in 0..p {
            q[(i, j)] *= scale;
        }
    }
    q
}

/// Class-1 mean: `SPARSE_COORDS` positions sampled without replacement set
/// to `MEAN_SHIFT`, all others zero.
pub(crate) fn sparse_mean(p: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut mu = vec![0.0; p];
    for i in rand::seq::index::sample(rng, p, SPARSE_COORDS) {
        mu[i] = MEAN_SHIFT;
    }
    mu
}

/// Two Gaussian classes sharing a rotated power-law covariance:
/// class 0 is `N(0, Sigma)`, class 1 is `N(mu_1, Sigma)` with a sparse mean
/// shift, and `Sigma = U diag(1/j^2) U^T` for a Haar-random rotation `U`.
/// Rows are blocked by class, `n_per_class` each.
pub fn gen_synthetic_continuous(n_per_class: usize, p: usize, seed: u64) -> Result<Dataset> {
    if n_per_class == 0 {
        return Err(CoreError::Config("n_per_class must be >= 1".into()));
    }
    if p < SPARSE_COORDS {
        return Err(CoreError::Config(format!(
            "continuous generator needs p >= {SPARSE_COORDS}, got {p}"
        )));
    }
    let mut rng = rng::substream(seed, 0);
    let a = covariance_factor(p, &mut rng);
    let mu1 = sparse_mean(p, &mut rng);

    let mut features = Vec::with_capacity(2 * n_per_class);
    let mut labels = Vec::with_capacity(2 * n_per_class);
    for class in 0..2u32 {
        for _ in 0..n_per_class {
            let z = DMatrix::from_fn(p, 1, |_, _| rng.sample::<f64, _>(StandardNormal));
            let x = &a * z;
            let row: Vec<f64> = (0..p)
                .map(|i| x[(i, 0)] + if class == 1 { mu1[i] } else { 0.0 })
                .collect();
            features.push(row);
            labels.push(Label(class));
        }
    }
    Dataset::new(features, labels, 2)
}

/// Cell probabilities of the class-1 multinomial: a normalized perturbation
/// `|p_0 + z/300|` of the uniform probabilities.
pub(crate) fn perturbed_cell_probs(rng: &mut impl Rng) -> Vec<f64> {
    let mut p1: Vec<f64> = (0..CELLS)
        .map(|_| (1.0 / CELLS as f64 + rng.sample::<f64, _>(StandardNormal) / 300.0).abs())
        .collect();
    let total: f64 = p1.iter().sum();
    for v in &mut p1 {
        *v /= total;
    }
    p1
}

/// Two multinomial classes: 100 balls into 100 cells, class 0 with uniform
/// cell probabilities, class 1 with a perturbed copy. Each feature row holds
/// the cell counts. Rows are blocked by class, `n_per_class` each.
pub fn gen_synthetic_discrete(n_per_class: usize, seed: u64) -> Result<Dataset> {
    if n_per_class == 0 {
        return Err(CoreError::Config("n_per_class must be >= 1".into()));
    }
    let mut rng = rng::substream(seed, 0);
    let p0 = vec![1.0 / CELLS as f64; CELLS];
    let p1 = perturbed_cell_probs(&mut rng);

    let mut features = Vec::with_capacity(2 * n_per_class);
    let mut labels = Vec::with_capacity(2 * n_per_class);
    for (class, probs) in [(0u32, &p0), (1u32, &p1)] {
        let cell = WeightedIndex::new(probs)
            .map_err(|e| CoreError::Config(format!("invalid cell probabilities: {e}")))?;
        for _ in 0..n_per_class {
            let mut counts = vec![0.0f64; CELLS];
            for _ in 0..BALLS {
                counts[cell.sample(&mut rng)] += 1.0;
            }
            features.push(counts);
            labels.push(Label(class));
        }
    }
    Dataset::new(features, labels, 2)
}
