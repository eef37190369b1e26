//! CART-lite decision trees: Gini impurity, midpoint thresholds, random
//! feature subsets, majority-vote leaves.

use rand::Rng;

use super::{Dataset, TreeParams};
use crate::ensemble::Label;

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Leaf(Label),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// An axis-aligned binary decision tree. Points with `x[feature] <=
/// threshold` descend left.
#[derive(Clone, Debug, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> Label {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf(label) => return label,
                Node::Split { feature, threshold, left, right } => {
                    at = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        self.depth_from(0)
    }

    fn depth_from(&self, at: usize) -> usize {
        match self.nodes[at] {
            Node::Leaf(_) => 0,
            Node::Split { left, right, .. } => 1 + self.depth_from(left).max(self.depth_from(right)),
        }
    }
}

/// Majority label of the rows, ties broken toward the lowest label.
fn majority(data: &Dataset, rows: &[usize]) -> Label {
    let mut counts = vec![0usize; data.k() as usize];
    for &r in rows {
        counts[data.label(r).index()] += 1;
    }
    let best = counts.iter().copied().max().unwrap();
    Label(counts.iter().position(|&c| c == best).unwrap() as u32)
}

fn gini(counts: &[usize], total: usize) -> f64 {
    let t = total as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>()
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

/// Scans one feature for the lowest-impurity midpoint threshold, sweeping
/// the rows in value order and updating class counts incrementally.
fn scan_feature(
    data: &Dataset,
    rows: &[usize],
    feature: usize,
    min_leaf: usize,
    best: &mut Option<BestSplit>,
) {
    let mut order: Vec<usize> = rows.to_vec();
    order.sort_by(|&a, &b| data.feature(a, feature).total_cmp(&data.feature(b, feature)));
    let n = order.len();
    let k = data.k() as usize;
    let mut left = vec![0usize; k];
    let mut right = vec![0usize; k];
    for &r in &order {
        right[data.label(r).index()] += 1;
    }
    for (i, &r) in order.iter().enumerate().take(n - 1) {
        let label = data.label(r).index();
        left[label] += 1;
        right[label] -= 1;
        let n_left = i + 1;
        let n_right = n - n_left;
        if n_left < min_leaf || n_right < min_leaf {
            continue;
        }
        let v = data.feature(r, feature);
        let next = data.feature(order[i + 1], feature);
        if v == next {
            continue; // not a boundary between distinct values
        }
        let impurity = (n_left as f64 * gini(&left, n_left)
            + n_right as f64 * gini(&right, n_right))
            / n as f64;
        let threshold = v + 0.5 * (next - v);
        // strict improvement keeps the earliest candidate, so ties resolve
        // to the lowest feature index, then the lowest threshold
        if best.as_ref().is_none_or(|b| impurity < b.impurity) {
            *best = Some(BestSplit { feature, threshold, impurity });
        }
    }
}

fn grow(
    data: &Dataset,
    rows: &[usize],
    params: &TreeParams,
    depth: usize,
    rng: &mut impl Rng,
    nodes: &mut Vec<Node>,
) -> usize {
    let here = nodes.len();
    let first_label = data.label(rows[0]);
    let pure = rows.iter().all(|&r| data.label(r) == first_label);
    if pure || depth == params.max_depth || rows.len() < 2 * params.min_leaf {
        nodes.push(Node::Leaf(majority(data, rows)));
        return here;
    }

    let mtry = params.resolved_mtry(data.p());
    let mut candidates = rand::seq::index::sample(rng, data.p(), mtry).into_vec();
    candidates.sort_unstable();
    let mut best = None;
    for feature in candidates {
        scan_feature(data, rows, feature, params.min_leaf, &mut best);
    }
    let Some(split) = best else {
        nodes.push(Node::Leaf(majority(data, rows)));
        return here;
    };

    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
        .iter()
        .partition(|&&r| data.feature(r, split.feature) <= split.threshold);
    nodes.push(Node::Leaf(Label(0))); // placeholder, patched below
    let left = grow(data, &left_rows, params, depth + 1, rng, nodes);
    let right = grow(data, &right_rows, params, depth + 1, rng, nodes);
    nodes[here] = Node::Split {
        feature: split.feature,
        threshold: split.threshold,
        left,
        right,
    };
    here
}

/// Grows one tree on the given bag of row indices (duplicates allowed).
pub fn train_tree(data: &Dataset, bag: &[usize], params: &TreeParams, rng: &mut impl Rng) -> Tree {
    assert!(!bag.is_empty(), "bag must be non-empty");
    let mut nodes = Vec::new();
    grow(data, bag, params, 0, rng, &mut nodes);
    Tree { nodes }
}
