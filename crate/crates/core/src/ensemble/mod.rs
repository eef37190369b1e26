//! Prediction arrays, plurality voting, and error rates.
//!
//! A trained ensemble of `t` classifiers evaluated on `m` points is reduced to
//! a `t x m` array of predicted labels; one row per classifier, one column per
//! evaluation point. Everything downstream (error rates, bootstrap resampling)
//! operates on this array alone, so the cost of estimation is independent of
//! the feature space.
//!
//! Ties in the plurality vote are a distinct outcome, never a fallback label,
//! and always count as classification errors. An empty vote set (empty column,
//! or no out-of-bag votes for a point) is treated the same way.

pub(crate) mod rate;
mod vote;

pub use rate::{
    classwise_error_rate, error_rate_holdout, error_rate_oob, prefix_error_curve, ErrorMode,
};
pub use vote::{oob_vote, plurality_vote, vote_from_counts};

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// A class label, a dense integer in `0..k` for the enclosing array's class
/// count `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(pub u32);

impl Label {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Outcome of a plurality vote: a winning label, or a tie.
///
/// `Tie` compares unequal to every label, so a tie against any truth label is
/// always an error.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VoteOutcome {
    Winner(Label),
    Tie,
}

impl VoteOutcome {
    /// True when the vote misclassifies `truth` (ties always do).
    pub fn is_error(self, truth: Label) -> bool {
        match self {
            VoteOutcome::Winner(l) => l != truth,
            VoteOutcome::Tie => true,
        }
    }
}

/// A `t x m` array of predicted labels with class count `k`, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredictionArray {
    t: usize,
    m: usize,
    k: u32,
    cells: Vec<Label>,
}

impl PredictionArray {
    /// Builds an array from row-major cells; requires `t >= 1`, `m >= 1`,
    /// `k >= 2` and every cell below `k`.
    pub fn new(t: usize, m: usize, k: u32, cells: Vec<Label>) -> Result<Self> {
        if t == 0 || m == 0 {
            return Err(CoreError::Dimension(format!(
                "prediction array must be non-empty, got t={t}, m={m}"
            )));
        }
        if k < 2 {
            return Err(CoreError::Config(format!("class count must be >= 2, got {k}")));
        }
        if cells.len() != t * m {
            return Err(CoreError::Dimension(format!(
                "expected {t}x{m}={} cells, got {}",
                t * m,
                cells.len()
            )));
        }
        if let Some(bad) = cells.iter().find(|l| l.0 >= k) {
            return Err(CoreError::Domain(format!(
                "label {} out of range for k={k}",
                bad.0
            )));
        }
        Ok(Self { t, m, k, cells })
    }

    /// Convenience constructor from rows of raw label values.
    pub fn from_rows(k: u32, rows: &[Vec<u32>]) -> Result<Self> {
        let t = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(CoreError::Dimension("ragged rows".into()));
        }
        let cells = rows.iter().flatten().map(|&v| Label(v)).collect();
        Self::new(t, m, k, cells)
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Row `i` as a slice of length `m`.
    pub fn row(&self, i: usize) -> &[Label] {
        &self.cells[i * self.m..(i + 1) * self.m]
    }

    /// Column `j`, one label per classifier.
    pub fn column(&self, j: usize) -> impl Iterator<Item = Label> + '_ {
        (0..self.t).map(move |i| self.cells[i * self.m + j])
    }

    pub fn cell(&self, i: usize, j: usize) -> Label {
        self.cells[i * self.m + j]
    }
}

/// True labels for the `m` evaluation points, aligned to array columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruthLabels(pub Vec<Label>);

impl TruthLabels {
    pub fn from_values(values: &[u32]) -> Self {
        Self(values.iter().map(|&v| Label(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A `t x m` boolean mask; `true` at `(i, j)` means evaluation point `j` is
/// out-of-bag for classifier `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OobMask {
    t: usize,
    m: usize,
    bits: Vec<bool>,
}

impl OobMask {
    pub fn new(t: usize, m: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != t * m {
            return Err(CoreError::Dimension(format!(
                "expected {t}x{m}={} mask bits, got {}",
                t * m,
                bits.len()
            )));
        }
        Ok(Self { t, m, bits })
    }

    pub fn from_rows(rows: &[Vec<bool>]) -> Result<Self> {
        let t = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(CoreError::Dimension("ragged mask rows".into()));
        }
        Self::new(t, m, rows.iter().flatten().copied().collect())
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn bit(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.m + j]
    }

    pub fn row(&self, i: usize) -> &[bool] {
        &self.bits[i * self.m..(i + 1) * self.m]
    }
}

pub(crate) fn check_shapes(
    array: &PredictionArray,
    truth: &TruthLabels,
    mask: Option<&OobMask>,
) -> Result<()> {
    if truth.len() != array.m() {
        return Err(CoreError::Dimension(format!(
            "truth length {} does not match array width {}",
            truth.len(),
            array.m()
        )));
    }
    if let Some(bad) = truth.0.iter().find(|l| l.0 >= array.k()) {
        return Err(CoreError::Domain(format!(
            "truth label {} out of range for k={}",
            bad.0,
            array.k()
        )));
    }
    if let Some(mask) = mask {
        if mask.t() != array.t() || mask.m() != array.m() {
            return Err(CoreError::Dimension(format!(
                "mask shape {}x{} does not match array shape {}x{}",
                mask.t(),
                mask.m(),
                array.t(),
                array.m()
            )));
        }
    }
    Ok(())
}
