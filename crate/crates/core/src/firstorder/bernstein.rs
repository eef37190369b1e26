//! Bernstein polynomial smoothing.
//!
//! `B_s(h)(u) = sum_{j=0}^{s} h(j/s) * C(s,j) * u^j * (1-u)^{s-j}`. The
//! operator fixes linear functions, preserves monotonicity, and converges
//! uniformly to any continuous `h` as the degree grows, which is why it can
//! stand in for nonsmooth distribution functions in the limit analysis.

use crate::error::{CoreError, Result};

/// Bernstein basis weights `b_j(u; s) = C(s,j) u^j (1-u)^{s-j}` for
/// `j = 0..=s`, built by the incremental ratio recursion
/// `b_{j+1} = b_j * (s-j)/(j+1) * u/(1-u)` so no binomial coefficient is
/// ever formed explicitly (they overflow near `s ~ 10^3`).
fn basis_weights(s: usize, u: f64) -> Vec<f64> {
    let mut w = vec![0.0; s + 1];
    if u == 0.0 {
        w[0] = 1.0;
        return w;
    }
    if u == 1.0 {
        w[s] = 1.0;
        return w;
    }
    // start the recursion from the largest term to keep intermediate values
    // in range: j* = floor((s+1) u) maximizes b_j
    let peak = (((s + 1) as f64) * u).floor().min(s as f64) as usize;
    w[peak] = 1.0;
    let ratio = u / (1.0 - u);
    for j in peak..s {
        w[j + 1] = w[j] * ratio * (s - j) as f64 / (j + 1) as f64;
    }
    for j in (0..peak).rev() {
        w[j] = w[j + 1] / ratio * (j + 1) as f64 / (s - j) as f64;
    }
    let total: f64 = w.iter().sum();
    for v in &mut w {
        *v /= total;
    }
    w
}

/// Evaluates the degree-`s` Bernstein smoothing of `h` at `u`.
pub fn bernstein(h: impl Fn(f64) -> f64, s: usize, u: f64) -> Result<f64> {
    if s < 1 {
        return Err(CoreError::Config("bernstein degree must be >= 1".into()));
    }
    if !(0.0..=1.0).contains(&u) {
        return Err(CoreError::Domain(format!(
            "bernstein argument must lie in [0,1], got {u}"
        )));
    }
    let w = basis_weights(s, u);
    Ok((0..=s).map(|j| h(j as f64 / s as f64) * w[j]).sum())
}

/// Derivative of the degree-`s` Bernstein smoothing:
/// `s * sum_{j=0}^{s-1} (h((j+1)/s) - h(j/s)) * b_j(u; s-1)`.
///
/// For nondecreasing nonconstant `h`, every difference is nonnegative and at
/// least one is positive, so the derivative is strictly positive on `(0,1)`.
pub fn bernstein_derivative(h: impl Fn(f64) -> f64, s: usize, u: f64) -> Result<f64> {
    if s < 1 {
        return Err(CoreError::Config("bernstein degree must be >= 1".into()));
    }
    if !(0.0..=1.0).contains(&u) {
        return Err(CoreError::Domain(format!(
            "bernstein argument must lie in [0,1], got {u}"
        )));
    }
    let w = basis_weights(s - 1, u);
    let sum: f64 = (0..s)
        .map(|j| (h((j + 1) as f64 / s as f64) - h(j as f64 / s as f64)) * w[j])
        .sum();
    Ok(s as f64 * sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn fixes_linear_functions() {
        for &s in &[1usize, 3, 10, 257] {
            for &u in &[0.0, 0.1, 0.5, 0.73, 1.0] {
                let v = bernstein(|x| 2.0 * x - 0.3, s, u).unwrap();
                assert_relative_eq!(v, 2.0 * u - 0.3, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn degree_one_is_endpoint_interpolation() {
        let h = |x: f64| x * x + 1.0;
        for &u in &[0.0, 0.25, 0.8, 1.0] {
            let v = bernstein(h, 1, u).unwrap();
            assert_relative_eq!(v, h(0.0) * (1.0 - u) + h(1.0) * u, epsilon = 1e-14);
        }
    }

    #[test]
    fn square_at_half_degree_two() {
        // 0*0.25 + 0.25*0.5 + 1*0.25 = 0.375
        assert_relative_eq!(bernstein(|x| x * x, 2, 0.5).unwrap(), 0.375, epsilon = 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(bernstein(|x| x, 0, 0.5).is_err());
        assert!(bernstein(|x| x, 3, 1.5).is_err());
        assert!(bernstein_derivative(|x| x, 0, 0.5).is_err());
    }

    #[test]
    fn sup_error_shrinks_with_degree() {
        for h in [|u: f64| u * u, |u: f64| (u - 0.5).abs()] {
            let mut last = f64::INFINITY;
            for &s in &[4usize, 16, 64, 256] {
                let mut worst = 0.0f64;
                for g in 0..=1000 {
                    let u = g as f64 / 1000.0;
                    worst = worst.max((bernstein(h, s, u).unwrap() - h(u)).abs());
                }
                assert!(worst <= last, "sup error grew at degree {s}");
                last = worst;
            }
            // the kink of |u - 1/2| limits the rate to O(1/sqrt(s))
            assert!(last < 0.03);
        }
    }

    #[test]
    fn derivative_of_linear_is_slope() {
        for &s in &[1usize, 5, 40] {
            for &u in &[0.0, 0.3, 1.0] {
                assert_relative_eq!(
                    bernstein_derivative(|x| 3.0 * x, s, u).unwrap(),
                    3.0,
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn derivative_positive_for_nondecreasing_step_mixture() {
        let h = |u: f64| {
            let step = if u >= 0.3 { 0.5 } else { 0.0 };
            0.5 * u + 0.5 * step
        };
        for g in 1..1000 {
            let u = g as f64 / 1000.0;
            assert!(bernstein_derivative(h, 32, u).unwrap() > 0.0, "u={u}");
        }
    }

    #[test]
    fn large_degree_is_stable() {
        // basis recursion must not overflow or lose normalization at s ~ 10^3
        let v = bernstein(|x| x * x, 1000, 0.37).unwrap();
        assert_relative_eq!(v, 0.37f64.powi(2), epsilon = 1e-3);
        let w = basis_weights(1000, 0.37);
        assert_relative_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }
}
