//! Candidate rule enumeration by iterated decision-tree learning.
//!
//! Each round learns a tree against the clustering's hypothesized labels,
//! records it as a DNF rule, then removes the tree's root predicate from the
//! candidate splits so the next round must find a different rule.

mod tree;

use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::cluster::Clustering;
use crate::error::{Error, Result};
use crate::predicate::{PredicatePool, PredicateSignature};
use crate::rule::Rule;
use crate::table::{FormatId, Label, PositionalLabeling, TypedColumn};

pub use tree::{learn_tree, tree_to_rule, DecisionTree, Node, TrainingSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthesisConfig {
    /// Maximum tree size, counting internal and leaf nodes.
    pub lambda_n: usize,
    /// Enumeration stops once a tree's weighted accuracy falls below this.
    pub lambda_t: f64,
    /// Weight of pinned rows relative to hypothesized ones.
    pub labeled_weight: f64,
    pub max_candidates: usize,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            lambda_n: 10,
            lambda_t: 0.8,
            labeled_weight: 2.0,
            max_candidates: 16,
        }
    }
}

impl SynthesisConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lambda_n < 3 {
            return Err(Error::Config("lambda_n must be at least 3".into()));
        }
        if !(self.lambda_t > 0.0 && self.lambda_t <= 1.0) {
            return Err(Error::Config("lambda_t must lie in (0, 1]".into()));
        }
        if !self.labeled_weight.is_finite() || self.labeled_weight < 1.0 {
            return Err(Error::Config("labeled_weight must be a finite number ≥ 1".into()));
        }
        if self.max_candidates == 0 {
            return Err(Error::Config("max_candidates must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Candidate {
    pub rule: Rule,
    pub train_accuracy: f64,
    pub tree: DecisionTree,
}

#[derive(Debug, Clone)]
pub struct CandidateSet {
    pub target: FormatId,
    pub candidates: Vec<Candidate>,
}

/// Everything enumeration needs about one column.
#[derive(Debug, Clone, Copy)]
pub struct SynthesisInput<'a> {
    pub column: &'a TypedColumn,
    pub labeling: &'a PositionalLabeling,
    pub pool: &'a PredicatePool,
    pub sigs: &'a [PredicateSignature],
    pub clustering: &'a Clustering,
}

/// Binary training view for one format: positives are the rows clustered
/// with `target`.
pub fn training_set<'a>(input: &SynthesisInput<'a>, target: &FormatId, config: &SynthesisConfig) -> Result<TrainingSet<'a>> {
    let cluster = input
        .clustering
        .cluster_of(target)
        .ok_or_else(|| Error::InvalidAnnotation(format!("format {target} has no examples")))?;
    let n = input.column.len();
    let mut rows = BitSet::new(n);
    let mut labels = BitSet::new(n);
    let mut pinned = BitSet::new(n);
    for i in 0..n {
        if !input.column.cells[i].is_empty() {
            rows.insert(i);
        }
        if input.clustering.assignment[i] == cluster {
            labels.insert(i);
        }
        if !matches!(input.labeling.labels[i], Label::Unassigned) {
            pinned.insert(i);
        }
    }
    let weights = (0..n)
        .map(|i| if pinned.contains(i) { config.labeled_weight } else { 1.0 })
        .collect();
    Ok(TrainingSet {
        masks: &input.pool.masks,
        rows,
        labels,
        pinned,
        weights,
    })
}

pub fn enumerate_candidates(input: &SynthesisInput<'_>, target: &FormatId, config: &SynthesisConfig) -> Result<CandidateSet> {
    config.validate()?;
    let data = training_set(input, target, config)?;
    let mut available: Vec<usize> = (0..input.pool.len()).collect();
    let mut candidates: Vec<Candidate> = Vec::new();

    while candidates.len() < config.max_candidates && !available.is_empty() {
        let tree = match learn_tree(&data, input.sigs, &available, config.lambda_n) {
            Ok(t) => t,
            Err(Error::Degenerate) | Err(Error::TreeFailed) => break,
            Err(e) => return Err(e),
        };
        let Some(root) = tree.root_predicate() else { break };
        let accuracy = data.accuracy(&tree, input.sigs);
        if accuracy < config.lambda_t {
            break;
        }
        let rule = match tree_to_rule(&tree, input.pool, target.clone()) {
            Ok(r) => r,
            Err(Error::NoPositiveLeaf) => break,
            Err(e) => return Err(e),
        };
        if !candidates.iter().any(|c| c.rule == rule) {
            candidates.push(Candidate {
                rule,
                train_accuracy: accuracy,
                tree,
            });
        }
        available.retain(|&id| id != root);
    }

    if candidates.is_empty() {
        return Err(Error::NoCandidates);
    }
    Ok(CandidateSet {
        target: target.clone(),
        candidates,
    })
}
