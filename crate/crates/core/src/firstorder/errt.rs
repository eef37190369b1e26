//! Ensemble error rates under the first-order model.
//!
//! For two classes the ensemble error is an explicit functional of the
//! empirical CDF of the randomizing draws: the error region of each class is
//! an interval whose endpoint is an order statistic of the draws, so the
//! error rate is exact — two Beta CDF evaluations, no Monte Carlo. This is
//! what makes ground-truth sigma computation over thousands of simulated
//! re-runs cheap. General `k` falls back to Monte Carlo over test points.

use rayon::prelude::*;
use statrs::distribution::{Beta, Continuous, ContinuousCDF};

use super::{ClassDistribution, FirstOrderEnsemble, FirstOrderModel};
use crate::error::{CoreError, Result};
use crate::rng;

/// Empirical CDF of the randomizing draws: `F_t(u) = (1/t) #{i : U_i <= u}`,
/// right-continuous.
#[derive(Clone, Debug)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    pub fn new(ensemble: &FirstOrderEnsemble) -> Self {
        let mut sorted = ensemble.draws().to_vec();
        sorted.sort_by(f64::total_cmp);
        Self { sorted }
    }

    pub fn eval(&self, u: f64) -> f64 {
        let count = self.sorted.partition_point(|&v| v <= u);
        count as f64 / self.sorted.len() as f64
    }

    /// Number of draws in `(lo, hi]`, or in `[0, hi]` when `lo` is negative.
    fn count_in(&self, lo: f64, hi: f64) -> usize {
        self.sorted.partition_point(|&v| v <= hi) - self.sorted.partition_point(|&v| v <= lo)
    }
}

fn binary_cdfs(model: &FirstOrderModel) -> Result<[Beta; 2]> {
    if model.k != 2 {
        return Err(CoreError::Config(format!(
            "exact error computation supports k=2 only, got k={}",
            model.k
        )));
    }
    let beta = |dist: &ClassDistribution| match dist {
        ClassDistribution::Beta(a, b) => Beta::new(*a, *b)
            .map_err(|e| CoreError::Config(format!("invalid beta parameters: {e}"))),
        ClassDistribution::Dirichlet(_) => {
            Err(CoreError::Config("k=2 model must use beta distributions".into()))
        }
    };
    Ok([beta(&model.mu[0])?, beta(&model.mu[1])?])
}

/// Exact error rate from the order statistics of the sorted draws.
///
/// A class-0 point with coordinate `v` is misclassified (ties included) when
/// `F_t(v) >= 1/2`, i.e. `v >= U_(ceil(t/2))`; a class-1 point when
/// `F_t(v) <= 1/2`, i.e. `v < U_(floor(t/2)+1)`. Both sets are intervals, and
/// their `mu_l`-measures are Beta CDF evaluations at one order statistic.
/// Boundary points have measure zero under the continuous-density
/// assumption, so the tie convention does not move the value.
fn exact_err_sorted(pi: &[f64], cdfs: &[Beta; 2], sorted: &[f64]) -> f64 {
    let t = sorted.len();
    let c = t.div_ceil(2);
    let m = t / 2;
    pi[0] * (1.0 - cdfs[0].cdf(sorted[c - 1])) + pi[1] * cdfs[1].cdf(sorted[m])
}

/// Exact ensemble error rate for a two-class model, no Monte Carlo.
pub fn exact_err_t_binary(model: &FirstOrderModel, ensemble: &FirstOrderEnsemble) -> Result<f64> {
    let cdfs = binary_cdfs(model)?;
    let ecdf = Ecdf::new(ensemble);
    Ok(exact_err_sorted(&model.pi, &cdfs, &ecdf.sorted))
}

/// Fenwick tree used to track order statistics of a growing prefix.
struct Fenwick {
    tree: Vec<u32>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Self { tree: vec![0; n + 1] }
    }

    fn add(&mut self, mut i: usize) {
        i += 1;
        while i < self.tree.len() {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Zero-based position of the `k`-th smallest inserted element (1-based
    /// `k`), by binary lifting over the implicit prefix sums.
    fn kth(&self, mut k: u32) -> usize {
        let mut pos = 0;
        let mut step = self.tree.len().next_power_of_two() >> 1;
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && self.tree[next] < k {
                k -= self.tree[next];
                pos = next;
            }
            step >>= 1;
        }
        pos // pos is 1 past the last prefix with sum < k, i.e. zero-based rank
    }
}

/// Exact error rate of every prefix of the ensemble: entry `s - 1` is the
/// error of the sub-ensemble `U_1..U_s`, so one simulated run yields the
/// whole error path. Runs in `O(t log t)` by tracking the two needed order
/// statistics with a Fenwick tree over the ranks of the draws.
pub fn exact_err_prefix_curve_binary(
    model: &FirstOrderModel,
    ensemble: &FirstOrderEnsemble,
) -> Result<Vec<f64>> {
    let cdfs = binary_cdfs(model)?;
    let u = ensemble.draws();
    let t = u.len();
    let mut order: Vec<usize> = (0..t).collect();
    order.sort_by(|&a, &b| u[a].total_cmp(&u[b]));
    let mut rank_of = vec![0usize; t];
    for (r, &i) in order.iter().enumerate() {
        rank_of[i] = r;
    }
    let sorted: Vec<f64> = order.iter().map(|&i| u[i]).collect();

    let mut fen = Fenwick::new(t);
    let mut curve = Vec::with_capacity(t);
    for s in 1..=t {
        fen.add(rank_of[s - 1]);
        let c = s.div_ceil(2) as u32;
        let m = (s / 2) as u32;
        let v_c = sorted[fen.kth(c)];
        let v_m1 = sorted[fen.kth(m + 1)];
        curve.push(model.pi[0] * (1.0 - cdfs[0].cdf(v_c)) + model.pi[1] * cdfs[1].cdf(v_m1));
    }
    Ok(curve)
}

/// Monte Carlo error rate for any class count: draws `n_test` labeled test
/// points, votes every surrogate classifier on each, and returns the error
/// fraction (ties count as errors).
pub fn mc_err_t(
    model: &FirstOrderModel,
    ensemble: &FirstOrderEnsemble,
    n_test: usize,
    rng: &mut impl rand::Rng,
) -> Result<f64> {
    if n_test == 0 {
        return Err(CoreError::Config("n_test must be >= 1".into()));
    }
    model.validate()?;
    let ecdf = Ecdf::new(ensemble);
    let t = ensemble.t() as u32;
    let mut errors = 0usize;
    let mut counts = vec![0u32; model.k as usize];
    for _ in 0..n_test {
        let y = model.sample_class(rng);
        let theta = model.sample_theta(y, rng);
        // count draws per interval of the partition: class l >= 1 owns
        // (c_{l-1}, c_l] (with [0, c_1] for l = 1), class 0 owns the rest
        let mut prev = -1.0;
        let mut in_classes = 0;
        for (l, &c) in theta.partial_sums().iter().enumerate() {
            counts[l + 1] = ecdf.count_in(prev, c) as u32;
            in_classes += counts[l + 1];
            prev = c;
        }
        counts[0] = t - in_classes;
        if crate::ensemble::vote_from_counts(&counts).is_error(y) {
            errors += 1;
        }
    }
    Ok(errors as f64 / n_test as f64)
}

/// Limiting error rate of the infinite ensemble, exact for two classes:
/// the empirical CDF converges to the identity, so a point errs when its
/// coordinate falls on the wrong side of 1/2.
pub fn err_infinity(model: &FirstOrderModel) -> Result<f64> {
    let cdfs = binary_cdfs(model)?;
    Ok(model.pi[0] * (1.0 - cdfs[0].cdf(0.5)) + model.pi[1] * cdfs[1].cdf(0.5))
}

/// Monte Carlo limiting error rate for any class count: at the identity CDF
/// the vote-fraction vector equals the mean-vote vector itself, so a test
/// point errs when its own class coordinate is not the strict maximum.
pub fn err_infinity_mc(model: &FirstOrderModel, n_test: usize, seed: u64) -> Result<f64> {
    if n_test == 0 {
        return Err(CoreError::Config("n_test must be >= 1".into()));
    }
    model.validate()?;
    let mut rng = rng::substream(seed, 0);
    let mut errors = 0usize;
    for _ in 0..n_test {
        let y = model.sample_class(&mut rng);
        let theta = model.sample_theta(y, &mut rng);
        let mut weights = vec![theta.theta0()];
        weights.extend_from_slice(theta.coords());
        let own = weights[y.index()];
        let beaten = weights
            .iter()
            .enumerate()
            .any(|(l, &w)| l != y.index() && w >= own);
        if beaten {
            errors += 1;
        }
    }
    Ok(errors as f64 / n_test as f64)
}

/// Exact ensemble errors of `n_runs` independently re-drawn ensembles of
/// size `t` (two-class models). Run `r` owns the substream derived from
/// `(seed, r)`, so the result is independent of thread count and execution
/// order.
pub fn ground_truth_errors(
    model: &FirstOrderModel,
    t: usize,
    n_runs: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if n_runs < 2 {
        return Err(CoreError::Config("n_runs must be >= 2".into()));
    }
    let cdfs = binary_cdfs(model)?;
    if t == 0 {
        return Err(CoreError::Config("t must be >= 1".into()));
    }
    Ok((0..n_runs)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::substream(seed, r as u64);
            let ensemble = FirstOrderEnsemble::sample(t, &mut rng).expect("t >= 1");
            let ecdf = Ecdf::new(&ensemble);
            exact_err_sorted(&model.pi, &cdfs, &ecdf.sorted)
        })
        .collect())
}

/// Ground-truth sigma at size `t`: the sample standard deviation of the
/// exact errors across `n_runs` independent re-runs.
pub fn ground_truth_sigma(
    model: &FirstOrderModel,
    t: usize,
    n_runs: usize,
    seed: u64,
) -> Result<f64> {
    crate::bootstrap::sigma_hat(&ground_truth_errors(model, t, n_runs, seed)?)
}

/// Ground-truth sigma at every size `1..=t` from the same `n_runs` re-runs,
/// via per-run exact prefix error curves.
pub fn ground_truth_sigma_curve(
    model: &FirstOrderModel,
    t: usize,
    n_runs: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if n_runs < 2 {
        return Err(CoreError::Config("n_runs must be >= 2".into()));
    }
    if t == 0 {
        return Err(CoreError::Config("t must be >= 1".into()));
    }
    binary_cdfs(model)?;
    let curves: Vec<Vec<f64>> = (0..n_runs)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::substream(seed, r as u64);
            let ensemble = FirstOrderEnsemble::sample(t, &mut rng).expect("t >= 1");
            exact_err_prefix_curve_binary(model, &ensemble).expect("validated binary model")
        })
        .collect();
    // accumulate sequentially in run order so the result is reduction-order
    // independent
    let n = n_runs as f64;
    let mut out = Vec::with_capacity(t);
    for s in 0..t {
        let mean = curves.iter().map(|c| c[s]).sum::<f64>() / n;
        let ss = curves.iter().map(|c| (c[s] - mean).powi(2)).sum::<f64>();
        out.push((ss / (n - 1.0)).sqrt());
    }
    Ok(out)
}

/// Asymptotic variance of `sqrt(t) * (Err_t - err_inf)` for a two-class
/// model: the fluctuation is driven by the sample median of the draws, whose
/// limit is `N(1/2, 1/(4t))`, and the error responds with sensitivity
/// `pi_1 f_1(1/2) - pi_0 f_0(1/2)`, giving
/// `sigma^2 = (1/4) (pi_1 f_1(1/2) - pi_0 f_0(1/2))^2`.
pub fn clt_variance_binary(model: &FirstOrderModel) -> Result<f64> {
    let cdfs = binary_cdfs(model)?;
    let slope = model.pi[1] * cdfs[1].pdf(0.5) - model.pi[0] * cdfs[0].pdf(0.5);
    Ok(0.25 * slope * slope)
}
