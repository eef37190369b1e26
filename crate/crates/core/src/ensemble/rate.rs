//! Hold-out, out-of-bag, and class-wise error rates.

use super::vote::vote_from_counts;
use super::{check_shapes, Label, OobMask, PredictionArray, TruthLabels, VoteOutcome};
use crate::error::{CoreError, Result};

/// Which vote set defines the per-column vote.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorMode {
    /// All classifier rows vote on every column.
    Holdout,
    /// Only the rows for which the column is out-of-bag vote.
    Oob,
}

fn column_vote(
    array: &PredictionArray,
    mask: Option<&OobMask>,
    rows: &[usize],
    j: usize,
    counts: &mut [u32],
) -> VoteOutcome {
    counts.fill(0);
    for &i in rows {
        if mask.is_none_or(|m| m.bit(i, j)) {
            counts[array.cell(i, j).index()] += 1;
        }
    }
    vote_from_counts(counts)
}

/// Error rate over a chosen row multiset and column set. This is the single
/// kernel behind the hold-out, OOB, class-wise, and bootstrap-resampled
/// error rates: `rows` may repeat (bootstrap draws) and `columns` may be a
/// subset (class-wise restriction).
pub(crate) fn error_rate_rows_columns(
    array: &PredictionArray,
    truth: &TruthLabels,
    mask: Option<&OobMask>,
    rows: &[usize],
    columns: impl Iterator<Item = usize>,
) -> f64 {
    let mut counts = vec![0u32; array.k() as usize];
    let mut errors = 0usize;
    let mut total = 0usize;
    for j in columns {
        let vote = column_vote(array, mask, rows, j, &mut counts);
        if vote.is_error(truth.0[j]) {
            errors += 1;
        }
        total += 1;
    }
    debug_assert!(total > 0);
    errors as f64 / total as f64
}

fn all_rows(t: usize) -> Vec<usize> {
    (0..t).collect()
}

/// Proportion of columns whose plurality vote misses the truth label.
pub fn error_rate_holdout(array: &PredictionArray, truth: &TruthLabels) -> Result<f64> {
    check_shapes(array, truth, None)?;
    Ok(error_rate_rows_columns(
        array,
        truth,
        None,
        &all_rows(array.t()),
        0..array.m(),
    ))
}

/// Proportion of columns whose out-of-bag vote misses the truth label.
/// Columns with no out-of-bag votes count as errors (empty vote = tie).
pub fn error_rate_oob(array: &PredictionArray, truth: &TruthLabels, mask: &OobMask) -> Result<f64> {
    check_shapes(array, truth, Some(mask))?;
    Ok(error_rate_rows_columns(
        array,
        truth,
        Some(mask),
        &all_rows(array.t()),
        0..array.m(),
    ))
}

/// Error rate over only the columns whose truth label is `target_class`.
pub fn classwise_error_rate(
    array: &PredictionArray,
    truth: &TruthLabels,
    target_class: Label,
    mode: ErrorMode,
    mask: Option<&OobMask>,
) -> Result<f64> {
    check_shapes(array, truth, mask)?;
    let mask = match mode {
        ErrorMode::Holdout => None,
        ErrorMode::Oob => Some(mask.ok_or_else(|| {
            CoreError::Config("OOB mode requires an out-of-bag mask".into())
        })?),
    };
    let columns: Vec<usize> = (0..array.m())
        .filter(|&j| truth.0[j] == target_class)
        .collect();
    if columns.is_empty() {
        return Err(CoreError::EmptyClass(target_class.0));
    }
    Ok(error_rate_rows_columns(
        array,
        truth,
        mask,
        &all_rows(array.t()),
        columns.into_iter(),
    ))
}

/// Error rate of each prefix of the ensemble: entry `s - 1` is the error rate
/// of the sub-array made of the first `s` rows.
///
/// Per-column vote counters are updated incrementally, so the total cost is
/// `O(t * m * k)` rather than `O(t^2 * m)`.
pub fn prefix_error_curve(
    array: &PredictionArray,
    truth: &TruthLabels,
    mode: ErrorMode,
    mask: Option<&OobMask>,
) -> Result<Vec<f64>> {
    check_shapes(array, truth, mask)?;
    let mask = match mode {
        ErrorMode::Holdout => None,
        ErrorMode::Oob => Some(mask.ok_or_else(|| {
            CoreError::Config("OOB mode requires an out-of-bag mask".into())
        })?),
    };
    let (t, m, k) = (array.t(), array.m(), array.k() as usize);
    let mut counts = vec![0u32; m * k];
    let mut curve = Vec::with_capacity(t);
    for s in 0..t {
        let mut errors = 0usize;
        for j in 0..m {
            let col_counts = &mut counts[j * k..(j + 1) * k];
            if mask.is_none_or(|mk| mk.bit(s, j)) {
                col_counts[array.cell(s, j).index()] += 1;
            }
            if vote_from_counts(col_counts).is_error(truth.0[j]) {
                errors += 1;
            }
        }
        curve.push(errors as f64 / m as f64);
    }
    Ok(curve)
}
