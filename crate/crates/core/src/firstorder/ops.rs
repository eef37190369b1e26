//! Interval partition, surrogate labeling, and the lifting operator.

use super::SimplexPoint;
use crate::ensemble::Label;
use crate::error::{CoreError, Result};

/// A sub-interval of `[0,1]`. `closed_left` distinguishes the single
/// left-closed interval `I_1 = [0, theta_1]` from the half-open `(lo, hi]`
/// pieces.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub closed_left: bool,
}

impl Interval {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, u: f64) -> bool {
        if self.closed_left {
            self.lo <= u && u <= self.hi
        } else {
            self.lo < u && u <= self.hi
        }
    }
}

/// The partition of `[0,1]` induced by a simplex point: entry `l` is the
/// interval `I_l` owned by class `l`, with `I_1 = [0, c_1]`,
/// `I_l = (c_{l-1}, c_l]` for `2 <= l <= k-1`, and `I_0 = (c_{k-1}, 1]`,
/// where `c_l` are the partial sums of `theta`. Widths equal the class
/// coordinates.
pub fn interval_partition(theta: &SimplexPoint) -> Vec<Interval> {
    let sums = theta.partial_sums();
    let k = theta.k() as usize;
    let mut intervals = Vec::with_capacity(k);
    intervals.push(Interval {
        lo: sums[k - 2],
        hi: 1.0,
        closed_left: false,
    });
    let mut prev = 0.0;
    for (l, &c) in sums.iter().enumerate() {
        intervals.push(Interval {
            lo: prev,
            hi: c,
            closed_left: l == 0,
        });
        prev = c;
    }
    intervals
}

/// The class whose interval contains `u`: the surrogate classifier's label
/// at a point with mean-vote vector `theta`, randomized by `u`.
pub fn first_order_label(theta: &SimplexPoint, u: f64) -> Result<Label> {
    if !(0.0..=1.0).contains(&u) {
        return Err(CoreError::Domain(format!(
            "randomizing parameter must lie in [0,1], got {u}"
        )));
    }
    for (l, &c) in theta.partial_sums().iter().enumerate() {
        if u <= c {
            return Ok(Label(l as u32 + 1));
        }
    }
    Ok(Label(0))
}

/// The lifting operator: turns a univariate function `h` on `[0,1]` into a
/// simplex map by telescoped partial-sum evaluation. Coordinate `l` of
/// `L(h)(theta)` is `h(c_l) - h(c_{l-1})`, with the `l = 1` subtrahend
/// replaced by zero.
///
/// For `h` the empirical CDF of the randomizing draws, `L(h)(theta)` is
/// exactly the ensemble's vote-fraction vector at a point with mean-vote
/// vector `theta`, which is what makes the ensemble error a functional of
/// the empirical CDF.
pub fn lift(h: impl Fn(f64) -> f64, theta: &SimplexPoint) -> Vec<f64> {
    let mut prev = 0.0;
    theta
        .partial_sums()
        .iter()
        .map(|&c| {
            let v = h(c) - prev;
            prev = h(c);
            v
        })
        .collect()
}
