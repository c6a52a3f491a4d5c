//! Greedy weighted-Gini decision trees over boolean predicate features.

use serde_json::{json, Value};

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::predicate::{PredicatePool, PredicateSignature};
use crate::rule::{Literal, Rule};
use crate::table::FormatId;

const MIN_GAIN: f64 = 1e-12;

/// Weight multiplier for example rows on the retry after a tree misses one.
const RETRY_BOOST: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Node {
    Split { predicate: usize, on_true: usize, on_false: usize },
    Leaf { positive: bool },
}

/// Binary tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root_predicate(&self) -> Option<usize> {
        match self.nodes[0] {
            Node::Split { predicate, .. } => Some(predicate),
            Node::Leaf { .. } => None,
        }
    }

    /// Class of a cell with the given signature; empty cells are negative.
    pub fn classify(&self, sig: &PredicateSignature, cell_is_empty: bool) -> bool {
        if cell_is_empty {
            return false;
        }
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { positive } => return positive,
                Node::Split { predicate, on_true, on_false } => {
                    at = if sig.contains(predicate) { on_true } else { on_false };
                }
            }
        }
    }

    /// Root-to-positive-leaf paths as (predicate, branch taken) pairs.
    pub fn positive_paths(&self) -> Vec<Vec<(usize, bool)>> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.collect_paths(0, &mut path, &mut out);
        out
    }

    fn collect_paths(&self, at: usize, path: &mut Vec<(usize, bool)>, out: &mut Vec<Vec<(usize, bool)>>) {
        match self.nodes[at] {
            Node::Leaf { positive } => {
                if positive {
                    out.push(path.clone());
                }
            }
            Node::Split { predicate, on_true, on_false } => {
                path.push((predicate, true));
                self.collect_paths(on_true, path, out);
                path.pop();
                path.push((predicate, false));
                self.collect_paths(on_false, path, out);
                path.pop();
            }
        }
    }

    /// Nested JSON for debugging.
    pub fn to_json(&self, pool: &PredicatePool) -> Value {
        self.node_json(0, pool)
    }

    fn node_json(&self, at: usize, pool: &PredicatePool) -> Value {
        match self.nodes[at] {
            Node::Leaf { positive } => json!({ "leaf": positive }),
            Node::Split { predicate, on_true, on_false } => json!({
                "test": pool.predicate(predicate).to_string(),
                "true": self.node_json(on_true, pool),
                "false": self.node_json(on_false, pool),
            }),
        }
    }
}

/// One conjunction per root-to-positive-leaf path; a literal is negated
/// when its path takes the false branch.
pub fn tree_to_rule(tree: &DecisionTree, pool: &PredicatePool, format: FormatId) -> Result<Rule> {
    let paths = tree.positive_paths();
    if paths.is_empty() || paths.iter().any(Vec::is_empty) {
        // An empty path means the root itself is a positive leaf: there is
        // no literal to hang the rule on.
        return Err(Error::NoPositiveLeaf);
    }
    let disjuncts = paths
        .into_iter()
        .map(|p| {
            p.into_iter()
                .map(|(id, taken)| Literal {
                    predicate: pool.predicate(id).clone(),
                    negated: !taken,
                })
                .collect()
        })
        .collect();
    Rule::new(disjuncts, format)
}

/// Training view of one target: per-predicate row masks plus labels over the
/// non-empty rows.
#[derive(Debug, Clone)]
pub struct TrainingSet<'a> {
    pub masks: &'a [BitSet],
    /// Rows taking part in training (non-empty cells).
    pub rows: BitSet,
    pub labels: BitSet,
    /// Rows the tree must classify correctly.
    pub pinned: BitSet,
    pub weights: Vec<f64>,
}

impl TrainingSet<'_> {
    /// Weighted fraction of training rows the tree gets right.
    pub fn accuracy(&self, tree: &DecisionTree, sigs: &[PredicateSignature]) -> f64 {
        let (mut right, mut total) = (0.0, 0.0);
        for row in self.rows.iter() {
            let w = self.weights[row];
            total += w;
            if tree.classify(&sigs[row], false) == self.labels.contains(row) {
                right += w;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            right / total
        }
    }

    fn fits_pinned(&self, tree: &DecisionTree, sigs: &[PredicateSignature]) -> bool {
        self.pinned
            .iter()
            .all(|row| !self.rows.contains(row) || tree.classify(&sigs[row], false) == self.labels.contains(row))
            && self.pinned.iter().all(|row| self.rows.contains(row) || !self.labels.contains(row))
    }
}

/// Grows a tree of at most `max_nodes` nodes, then checks it on the pinned
/// rows; on a miss, retries once with pinned weights boosted tenfold.
pub fn learn_tree(
    data: &TrainingSet<'_>,
    sigs: &[PredicateSignature],
    available: &[usize],
    max_nodes: usize,
) -> Result<DecisionTree> {
    let positives = data.rows.and_count(&data.labels);
    if positives == 0 || positives == data.rows.count() {
        return Err(Error::Degenerate);
    }
    let tree = grow_tree(data, &data.weights, available, max_nodes);
    if data.fits_pinned(&tree, sigs) {
        return Ok(tree);
    }
    let boosted: Vec<f64> = data
        .weights
        .iter()
        .enumerate()
        .map(|(i, &w)| if data.pinned.contains(i) { w * RETRY_BOOST } else { w })
        .collect();
    let tree = grow_tree(data, &boosted, available, max_nodes);
    if data.fits_pinned(&tree, sigs) {
        Ok(tree)
    } else {
        Err(Error::TreeFailed)
    }
}

/// Rows grouped by weight, split by label, so weighted class totals reduce
/// to popcounts.
struct WeightClasses {
    classes: Vec<(f64, BitSet, BitSet)>,
}

impl WeightClasses {
    fn new(data: &TrainingSet<'_>, weights: &[f64]) -> Self {
        let mut classes: Vec<(f64, BitSet, BitSet)> = Vec::new();
        let n = data.rows.len();
        for row in data.rows.iter() {
            let w = weights[row];
            let idx = match classes.iter().position(|c| c.0 == w) {
                Some(i) => i,
                None => {
                    classes.push((w, BitSet::new(n), BitSet::new(n)));
                    classes.len() - 1
                }
            };
            if data.labels.contains(row) {
                classes[idx].1.insert(row);
            } else {
                classes[idx].2.insert(row);
            }
        }
        WeightClasses { classes }
    }

    fn totals(&self, rows: &BitSet) -> (f64, f64) {
        self.classes.iter().fold((0.0, 0.0), |(p, n), (w, pos, neg)| {
            (p + w * rows.and_count(pos) as f64, n + w * rows.and_count(neg) as f64)
        })
    }

    fn totals_within(&self, rows: &BitSet, mask: &BitSet) -> (f64, f64) {
        self.classes.iter().fold((0.0, 0.0), |(p, n), (w, pos, neg)| {
            (
                p + w * rows.and3_count(mask, pos) as f64,
                n + w * rows.and3_count(mask, neg) as f64,
            )
        })
    }
}

/// Weighted Gini impurity times node weight: `2·p·n / (p + n)`.
fn impurity(p: f64, n: f64) -> f64 {
    let w = p + n;
    if w == 0.0 {
        0.0
    } else {
        2.0 * p * n / w
    }
}

struct Frontier {
    node: usize,
    rows: BitSet,
    used: Vec<usize>,
    best: Option<(usize, f64)>,
}

fn best_split(
    classes: &WeightClasses,
    masks: &[BitSet],
    available: &[usize],
    rows: &BitSet,
    used: &[usize],
) -> Option<(usize, f64)> {
    let (p, n) = classes.totals(rows);
    if p == 0.0 || n == 0.0 {
        return None;
    }
    let parent = impurity(p, n);
    let row_count = rows.count();
    let mut best: Option<(usize, f64)> = None;
    for &id in available {
        if used.contains(&id) {
            continue;
        }
        let on_true = rows.and_count(&masks[id]);
        if on_true == 0 || on_true == row_count {
            continue;
        }
        let (tp, tn) = classes.totals_within(rows, &masks[id]);
        let gain = parent - impurity(tp, tn) - impurity(p - tp, n - tn);
        if gain > MIN_GAIN && best.is_none_or(|(_, g)| gain > g) {
            best = Some((id, gain));
        }
    }
    best
}

/// Best-first growth: always split the leaf with the largest impurity
/// decrease, while two more nodes fit in the budget.
fn grow_tree(data: &TrainingSet<'_>, weights: &[f64], available: &[usize], max_nodes: usize) -> DecisionTree {
    let classes = WeightClasses::new(data, weights);
    let mut sorted_available = available.to_vec();
    sorted_available.sort_unstable();
    let leaf = |rows: &BitSet| {
        let (p, n) = classes.totals(rows);
        Node::Leaf { positive: p > n }
    };

    let mut nodes = vec![leaf(&data.rows)];
    let best = best_split(&classes, data.masks, &sorted_available, &data.rows, &[]);
    let mut frontier = vec![Frontier {
        node: 0,
        rows: data.rows.clone(),
        used: Vec::new(),
        best,
    }];

    while nodes.len() + 2 <= max_nodes {
        let pick = frontier
            .iter()
            .enumerate()
            .filter_map(|(i, f)| f.best.map(|(_, g)| (i, g, f.node)))
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.2.cmp(&a.2)));
        let Some((fi, _, _)) = pick else { break };
        let f = frontier.swap_remove(fi);
        let (predicate, _) = f.best.expect("picked");
        let mask = &data.masks[predicate];
        let rows_true = f.rows.and(mask);
        let rows_false = f.rows.and_not(mask);
        let on_true = nodes.len();
        let on_false = on_true + 1;
        nodes.push(leaf(&rows_true));
        nodes.push(leaf(&rows_false));
        nodes[f.node] = Node::Split { predicate, on_true, on_false };
        let mut used = f.used;
        used.push(predicate);
        for (node, rows) in [(on_true, rows_true), (on_false, rows_false)] {
            let best = best_split(&classes, data.masks, &sorted_available, &rows, &used);
            frontier.push(Frontier {
                node,
                rows,
                used: used.clone(),
                best,
            });
        }
    }
    DecisionTree { nodes }
}
