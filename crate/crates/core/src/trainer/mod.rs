//! Minimal bagged CART trainer with out-of-bag bookkeeping.
//!
//! The estimator never depends on tree quality — only on having a realistic
//! prediction array — so the trainer is deliberately small: axis-aligned
//! splits on Gini impurity, a random feature subset per split, majority-vote
//! leaves. Every source of randomness is an indexed substream of the master
//! seed, so ensembles are bit-identical across runs and thread counts.

mod synth;
mod tree;

pub use synth::{gen_synthetic_continuous, gen_synthetic_discrete};
pub use tree::{train_tree, Tree};

use rand::Rng;
use rayon::prelude::*;

use crate::ensemble::{Label, OobMask, PredictionArray, TruthLabels};
use crate::error::{CoreError, Result};
use crate::rng;

/// A labeled training set: `n` rows of `p` numeric features.
///
/// Categorical features are accepted as integer codes and split by `<=` on
/// the codes, a documented approximation that keeps the trainer small.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    features: Vec<Vec<f64>>,
    labels: Vec<Label>,
    k: u32,
}

impl Dataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<Label>, k: u32) -> Result<Self> {
        if features.is_empty() {
            return Err(CoreError::Dimension("dataset must have n >= 1 rows".into()));
        }
        let p = features[0].len();
        if p == 0 {
            return Err(CoreError::Dimension("dataset must have p >= 1 features".into()));
        }
        if features.iter().any(|r| r.len() != p) {
            return Err(CoreError::Dimension("ragged feature rows".into()));
        }
        if labels.len() != features.len() {
            return Err(CoreError::Dimension(format!(
                "{} labels for {} rows",
                labels.len(),
                features.len()
            )));
        }
        if k < 2 {
            return Err(CoreError::Config(format!("class count must be >= 2, got {k}")));
        }
        if let Some(bad) = labels.iter().find(|l| l.0 >= k) {
            return Err(CoreError::Domain(format!(
                "label {} out of range for k={k}",
                bad.0
            )));
        }
        Ok(Self { features, labels, k })
    }

    pub fn n(&self) -> usize {
        self.features.len()
    }

    pub fn p(&self) -> usize {
        self.features[0].len()
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn feature(&self, row: usize, col: usize) -> f64 {
        self.features[row][col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.features[row]
    }

    pub fn label(&self, row: usize) -> Label {
        self.labels[row]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn truth(&self) -> TruthLabels {
        TruthLabels(self.labels.clone())
    }

    /// Splits off the last `ceil(frac * n)` rows as a hold-out set.
    pub fn split_holdout(&self, frac: f64) -> Result<(Dataset, Dataset)> {
        if !(0.0..1.0).contains(&frac) || frac == 0.0 {
            return Err(CoreError::Config(format!(
                "holdout fraction must lie in (0,1), got {frac}"
            )));
        }
        let hold = ((frac * self.n() as f64).ceil() as usize).max(1);
        let cut = self.n() - hold;
        if cut == 0 {
            return Err(CoreError::Config("holdout fraction leaves no training rows".into()));
        }
        let train = Dataset::new(
            self.features[..cut].to_vec(),
            self.labels[..cut].to_vec(),
            self.k,
        )?;
        let holdout = Dataset::new(
            self.features[cut..].to_vec(),
            self.labels[cut..].to_vec(),
            self.k,
        )?;
        Ok((train, holdout))
    }
}

/// Tree-growing parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Features considered per split; `None` means `ceil(sqrt(p))`.
    pub mtry: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: 16,
            min_leaf: 1,
            mtry: None,
        }
    }
}

impl TreeParams {
    pub fn validate(&self, p: usize) -> Result<()> {
        if self.max_depth < 1 {
            return Err(CoreError::Config("max_depth must be >= 1".into()));
        }
        if self.min_leaf < 1 {
            return Err(CoreError::Config("min_leaf must be >= 1".into()));
        }
        if let Some(mtry) = self.mtry {
            if mtry < 1 || mtry > p {
                return Err(CoreError::Config(format!(
                    "mtry must lie in 1..={p}, got {mtry}"
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn resolved_mtry(&self, p: usize) -> usize {
        self.mtry.unwrap_or_else(|| (p as f64).sqrt().ceil() as usize)
    }
}

/// A trained bagged ensemble: the trees plus each tree's bootstrap bag.
#[derive(Clone, Debug)]
pub struct TrainedEnsemble {
    pub trees: Vec<Tree>,
    pub bags: Vec<Vec<usize>>,
    pub k: u32,
    pub p: usize,
}

impl TrainedEnsemble {
    pub fn t(&self) -> usize {
        self.trees.len()
    }
}

/// One bootstrap bag: `n` uniform draws with replacement, plus the
/// out-of-bag flag of every row (`true` iff never drawn). On average a
/// fraction `(1 - 1/n)^n` (about 37%) of the rows is out of bag.
pub fn bootstrap_sample(n: usize, rng: &mut impl Rng) -> (Vec<usize>, Vec<bool>) {
    assert!(n >= 1, "bag size must be >= 1");
    let mut oob = vec![true; n];
    let indices: Vec<usize> = (0..n)
        .map(|_| {
            let i = rng.random_range(0..n);
            oob[i] = false;
            i
        })
        .collect();
    (indices, oob)
}

/// Trains `t` trees on independent bootstrap bags. Row `i` of the returned
/// mask flags the training rows that are out of bag for tree `i`. Tree `i`
/// draws its bag and its split randomness from the substream of `(seed, i)`,
/// so the result is reproducible independent of parallelism.
pub fn train_ensemble(
    data: &Dataset,
    t: usize,
    params: &TreeParams,
    seed: u64,
) -> Result<(TrainedEnsemble, OobMask)> {
    if t == 0 {
        return Err(CoreError::Config("ensemble size must be >= 1".into()));
    }
    params.validate(data.p())?;
    let per_tree: Vec<(Tree, Vec<usize>, Vec<bool>)> = (0..t)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::substream(seed, i as u64);
            let (bag, oob) = bootstrap_sample(data.n(), &mut rng);
            let tree = train_tree(data, &bag, params, &mut rng);
            (tree, bag, oob)
        })
        .collect();
    let mut trees = Vec::with_capacity(t);
    let mut bags = Vec::with_capacity(t);
    let mut bits = Vec::with_capacity(t * data.n());
    for (tree, bag, oob) in per_tree {
        trees.push(tree);
        bags.push(bag);
        bits.extend(oob);
    }
    let mask = OobMask::new(t, data.n(), bits)?;
    Ok((
        TrainedEnsemble {
            trees,
            bags,
            k: data.k(),
            p: data.p(),
        },
        mask,
    ))
}

/// Evaluates every tree on every point: row `i` of the result is tree `i`'s
/// labels on all points.
pub fn predict_array(ensemble: &TrainedEnsemble, points: &[Vec<f64>]) -> Result<PredictionArray> {
    if points.is_empty() {
        return Err(CoreError::Dimension("need at least one evaluation point".into()));
    }
    if let Some(bad) = points.iter().find(|r| r.len() != ensemble.p) {
        return Err(CoreError::Dimension(format!(
            "evaluation point has {} features, ensemble expects {}",
            bad.len(),
            ensemble.p
        )));
    }
    let cells: Vec<Label> = ensemble
        .trees
        .iter()
        .flat_map(|tree| points.iter().map(|x| tree.predict(x)))
        .collect();
    PredictionArray::new(ensemble.t(), points.len(), ensemble.k, cells)
}
