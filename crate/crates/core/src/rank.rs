//! Linear scoring of candidate rules over handpicked features.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::bitset::BitSet;
use crate::cluster::Clustering;
use crate::error::{Error, Result};
use crate::predicate::{PredicatePool, Provenance};
use crate::rule::{emit_formula, execute_bits, FormulaOptions, Rule};
use crate::synth::CandidateSet;
use crate::table::{Label, PositionalLabeling, TypedColumn};

/// The weights file shipped with the crate.
pub const DEFAULT_WEIGHTS_JSON: &str = include_str!("../weights/default.json");

macro_rules! features {
    ($($name:ident),* $(,)?) => {
        #[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
        pub struct FeatureVector {
            $(pub $name: f64,)*
        }

        impl FeatureVector {
            pub const NAMES: &'static [&'static str] = &[$(stringify!($name)),*];

            pub fn values(&self) -> Vec<f64> {
                vec![$(self.$name),*]
            }

            /// Applies `f` to every component.
            pub fn map(self, f: impl Fn(f64) -> f64) -> Self {
                FeatureVector { $($name: f(self.$name),)* }
            }

            fn from_map(map: &BTreeMap<String, f64>) -> std::result::Result<Self, Vec<&'static str>> {
                let missing: Vec<&'static str> = Self::NAMES
                    .iter()
                    .copied()
                    .filter(|n| !map.contains_key(*n))
                    .collect();
                if !missing.is_empty() {
                    return Err(missing);
                }
                Ok(FeatureVector { $($name: map[stringify!($name)],)* })
            }
        }
    };
}

features!(
    num_disjuncts,
    num_literals,
    num_negations,
    frac_column_matched,
    frac_unassigned_matched,
    agreement_with_clustering,
    train_weighted_accuracy,
    constant_provenance_score,
    predicate_type_diversity,
);

impl FeatureVector {
    pub fn dot(&self, other: &FeatureVector) -> f64 {
        self.values().iter().zip(other.values()).map(|(a, b)| a * b).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankerWeights {
    pub weights: FeatureVector,
    pub bias: f64,
}

impl Default for RankerWeights {
    fn default() -> Self {
        RankerWeights::from_json(DEFAULT_WEIGHTS_JSON).expect("shipped weights are valid")
    }
}

impl RankerWeights {
    pub fn zero() -> Self {
        RankerWeights {
            weights: FeatureVector::default(),
            bias: 0.0,
        }
    }

    /// A JSON map from feature name to weight, plus `"bias"`. Every feature
    /// must be present; unknown names are rejected.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut map: BTreeMap<String, f64> = crate::json::from_str(text)?;
        let bias = map
            .remove("bias")
            .ok_or_else(|| Error::Config("weights file lacks \"bias\"".into()))?;
        let unknown: Vec<&String> = map
            .keys()
            .filter(|k| !FeatureVector::NAMES.contains(&k.as_str()))
            .collect();
        if !unknown.is_empty() {
            return Err(Error::Config(format!("unknown feature weights: {unknown:?}")));
        }
        let weights = FeatureVector::from_map(&map)
            .map_err(|missing| Error::Config(format!("missing feature weights: {}", missing.join(", "))))?;
        if !bias.is_finite() || weights.values().iter().any(|w| !w.is_finite()) {
            return Err(Error::Config("weights must be finite".into()));
        }
        Ok(RankerWeights { weights, bias })
    }

    pub fn score(&self, f: &FeatureVector) -> f64 {
        self.weights.dot(f) + self.bias
    }
}

/// Column-level context the features are computed against.
#[derive(Debug, Clone, Copy)]
pub struct RankContext<'a> {
    pub column: &'a TypedColumn,
    pub labeling: &'a PositionalLabeling,
    pub clustering: &'a Clustering,
    pub pool: &'a PredicatePool,
    pub formula: FormulaOptions,
}

pub fn provenance_score(p: Provenance) -> f64 {
    match p {
        Provenance::CellValue => 1.0,
        Provenance::DelimiterToken | Provenance::PrefixTrieToken => 0.9,
        Provenance::PopularConstant => 0.8,
        Provenance::ColumnStat => 0.6,
    }
}

fn fraction(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn featurize(rule: &Rule, mask: &BitSet, train_accuracy: f64, ctx: &RankContext<'_>) -> FeatureVector {
    let n = ctx.column.len();
    let target = ctx.clustering.cluster_of(rule.format());
    let unassigned: Vec<usize> = (0..n)
        .filter(|&i| matches!(ctx.labeling.labels[i], Label::Unassigned) && !ctx.column.cells[i].is_empty())
        .collect();
    let agree = (0..n)
        .filter(|&i| mask.contains(i) == (Some(ctx.clustering.assignment[i]) == target))
        .count();
    let num_literals = rule.num_literals();
    let provenance: f64 = rule
        .literals()
        .map(|l| provenance_score(ctx.pool.provenance_of(&l.predicate).unwrap_or(Provenance::CellValue)))
        .sum();
    let kinds: BTreeSet<_> = rule.literals().map(|l| l.predicate.kind()).collect();
    FeatureVector {
        num_disjuncts: rule.disjuncts().len() as f64,
        num_literals: num_literals as f64,
        num_negations: rule.num_negations() as f64,
        frac_column_matched: fraction(mask.count(), n),
        frac_unassigned_matched: fraction(unassigned.iter().filter(|&&i| mask.contains(i)).count(), unassigned.len()),
        agreement_with_clustering: fraction(agree, n),
        train_weighted_accuracy: train_accuracy,
        constant_provenance_score: provenance / num_literals as f64,
        predicate_type_diversity: kinds.len() as f64 / num_literals as f64,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedSuggestion {
    pub rule: Rule,
    pub formula: String,
    pub mask: Vec<bool>,
    pub score: f64,
    pub features: FeatureVector,
}

/// Descending score, then fewer literals, then canonical rule JSON.
pub fn compare_ranked(a: (f64, usize, &str), b: (f64, usize, &str)) -> Ordering {
    b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(b.2))
}

pub fn rank(candidates: &CandidateSet, ctx: &RankContext<'_>, weights: &RankerWeights) -> Result<Vec<RankedSuggestion>> {
    let cell = ctx.column.source_ref.cell();
    let mut scored = Vec::with_capacity(candidates.candidates.len());
    for c in &candidates.candidates {
        let mask = execute_bits(&c.rule, ctx.column)?;
        let features = featurize(&c.rule, &mask, c.train_accuracy, ctx);
        let key = c.rule.to_json();
        scored.push((
            key,
            RankedSuggestion {
                rule: c.rule.clone(),
                formula: emit_formula(&c.rule, &cell, ctx.formula),
                mask: mask.to_bools(),
                score: weights.score(&features),
                features,
            },
        ));
    }
    scored.sort_by(|(ka, a), (kb, b)| {
        compare_ranked(
            (a.score, a.rule.num_literals(), ka),
            (b.score, b.rule.num_literals(), kb),
        )
    });
    Ok(scored.into_iter().map(|(_, s)| s).collect())
}
