//! Property checks shared by the proptest suites and the acceptance run.
//!
//! Each check returns `Ok` on inputs outside its domain (for example a
//! column too uniform to yield any predicate).

use std::collections::HashMap;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use crate::cluster::{cluster, ClusterOptions, Clustering, DEFAULT_MAX_ITERATIONS};
use crate::engine::{Engine, SuggestRequest};
use crate::predicate::{generate_predicates, GenerateOptions, Predicate, PredicatePool, PredicateSignature};
use crate::rank::{rank, RankContext, RankerWeights};
use crate::rule::{canonicalize, execute, FormulaOptions, Rule};
use crate::synth::{enumerate_candidates, learn_tree, training_set, SynthesisConfig, SynthesisInput};
use crate::table::{positional_labels, Annotation, CellValue, ColumnType, Label, PositionalLabeling, TypedColumn};
use crate::testkit::strategies;

/// Owned intermediate state of one suggestion run.
pub struct Pipeline {
    pub column: TypedColumn,
    pub annotation: Annotation,
    pub labeling: PositionalLabeling,
    pub pool: PredicatePool,
    pub sigs: Vec<PredicateSignature>,
    pub clustering: Clustering,
}

impl Pipeline {
    /// `None` when the column yields no predicates.
    pub fn new(column: TypedColumn, annotation: Annotation) -> Option<Self> {
        let labeling = positional_labels(column.len(), &annotation).expect("annotation in range");
        let pool = generate_predicates(&column, &GenerateOptions::default()).ok()?;
        let sigs = pool.signatures();
        let clustering = cluster(&column, &labeling, &sigs, ClusterOptions::default()).expect("has examples");
        Some(Pipeline { column, annotation, labeling, pool, sigs, clustering })
    }

    pub fn input(&self) -> SynthesisInput<'_> {
        SynthesisInput {
            column: &self.column,
            labeling: &self.labeling,
            pool: &self.pool,
            sigs: &self.sigs,
            clustering: &self.clustering,
        }
    }

    pub fn rank_context(&self) -> RankContext<'_> {
        RankContext {
            column: &self.column,
            labeling: &self.labeling,
            clustering: &self.clustering,
            pool: &self.pool,
            formula: FormulaOptions::default(),
        }
    }
}

fn cell_type(cell: &CellValue) -> Option<ColumnType> {
    match cell {
        CellValue::Number(_) => Some(ColumnType::Numeric),
        CellValue::DateTime(_) => Some(ColumnType::DateTime),
        CellValue::Text(_) => Some(ColumnType::Text),
        CellValue::Empty => None,
    }
}

pub fn predicate_strict_subset(column: &TypedColumn) -> Result<(), TestCaseError> {
    let Ok(pool) = generate_predicates(column, &GenerateOptions::default()) else {
        return Ok(());
    };
    let active = column.cells.iter().filter(|c| !c.is_empty()).count();
    for e in &pool.entries {
        let hits = column.cells.iter().filter(|c| e.predicate.evaluate(c)).count();
        prop_assert!(hits > 0 && hits < active, "{} holds on {hits} of {active} cells", e.predicate);
        prop_assert_eq!(e.predicate.column_type(), column.column_type);
    }
    Ok(())
}

pub fn evaluate_total(p: &Predicate, cell: &CellValue) -> Result<(), TestCaseError> {
    let holds = p.evaluate(cell);
    if cell_type(cell) != Some(p.column_type()) {
        prop_assert!(!holds, "{p} holds on {cell:?}");
    }
    Ok(())
}

pub fn tree_matches_rule(column: TypedColumn, annotation: Annotation, drop: &[usize]) -> Result<(), TestCaseError> {
    let Some(pl) = Pipeline::new(column, annotation) else {
        return Ok(());
    };
    let config = SynthesisConfig::default();
    let available: Vec<usize> = (0..pl.pool.len()).filter(|i| !drop.contains(&(i % 7))).collect();
    for format in pl.annotation.formats() {
        let data = training_set(&pl.input(), &format, &config).expect("format has a cluster");
        let Ok(tree) = learn_tree(&data, &pl.sigs, &available, config.lambda_n) else {
            continue;
        };
        prop_assert!(tree.node_count() <= config.lambda_n);
        let Ok(rule) = crate::synth::tree_to_rule(&tree, &pl.pool, format.clone()) else {
            continue;
        };
        prop_assert!(rule.disjuncts().len() <= config.lambda_n.div_ceil(2));
        let mask = execute(&rule, &pl.column).expect("same type");
        for (i, c) in pl.column.cells.iter().enumerate() {
            prop_assert_eq!(tree.classify(&pl.sigs[i], c.is_empty()), mask[i], "row {} of {}", i, rule);
        }
    }
    Ok(())
}

pub fn canonicalize_preserves(column: &TypedColumn, raw: &Rule) -> Result<(), TestCaseError> {
    let before = execute(raw, column).expect("same type");
    match canonicalize(raw) {
        Ok(c) => {
            prop_assert!(c.is_canonical());
            prop_assert_eq!(execute(&c, column).expect("same type"), before);
            prop_assert_eq!(canonicalize(&c).unwrap(), c);
        }
        Err(crate::Error::Unsatisfiable) => prop_assert!(before.iter().all(|&b| !b)),
        Err(e) => return Err(TestCaseError::fail(e.to_string())),
    }
    Ok(())
}

pub fn clustering_pins_and_terminates(column: TypedColumn, annotation: Annotation) -> Result<(), TestCaseError> {
    let Some(pl) = Pipeline::new(column, annotation) else {
        return Ok(());
    };
    let c = &pl.clustering;
    prop_assert!(c.rounds <= DEFAULT_MAX_ITERATIONS);
    prop_assert_eq!(c.history.len(), c.rounds + 1);
    prop_assert_eq!(c.k, pl.annotation.formats().len() + 1);
    for round in &c.history {
        for (i, label) in pl.labeling.labels.iter().enumerate() {
            match label {
                Label::Format(f) => prop_assert_eq!(Some(round[i]), c.cluster_of(f)),
                Label::IntentionallyUnformatted => prop_assert_eq!(round[i], 0),
                Label::Unassigned => prop_assert!(round[i] < c.k),
            }
        }
    }
    Ok(())
}

fn response_bytes(engine: &Engine, req: &SuggestRequest) -> String {
    match engine.suggest(req) {
        Ok(mut r) => {
            r.diagnostics.elapsed_ms = 0.0;
            serde_json::to_string(&r).expect("serializable")
        }
        Err(e) => format!("error {e:?}"),
    }
}

pub fn suggest_deterministic(column: TypedColumn, annotation: Annotation) -> Result<(), TestCaseError> {
    let req = SuggestRequest::new(column, annotation);
    let engine = Engine::default();
    prop_assert_eq!(response_bytes(&engine, &req), response_bytes(&Engine::default(), &req));
    Ok(())
}

/// Ranking order is unchanged when every score becomes `a * s + c`, `a > 0`.
pub fn rank_affine_invariant(
    column: TypedColumn,
    annotation: Annotation,
    weights: RankerWeights,
    log2_a: i32,
    c: f64,
) -> Result<(), TestCaseError> {
    let Some(pl) = Pipeline::new(column, annotation) else {
        return Ok(());
    };
    let a = 2f64.powi(log2_a);
    let mut scaled = weights;
    scaled.weights = weights.weights.map(|w| w * a);
    scaled.bias = weights.bias * a + c;
    for format in pl.annotation.formats() {
        let Ok(set) = enumerate_candidates(&pl.input(), &format, &SynthesisConfig::default()) else {
            continue;
        };
        let original: HashMap<String, f64> = rank(&set, &pl.rank_context(), &weights)
            .unwrap()
            .into_iter()
            .map(|s| (s.rule.to_json(), s.score))
            .collect();
        // Re-ranked under the scaled weights, original scores must stay
        // non-increasing. Scores within rounding distance may swap.
        let reranked: Vec<f64> = rank(&set, &pl.rank_context(), &scaled)
            .unwrap()
            .iter()
            .map(|s| original[&s.rule.to_json()])
            .collect();
        for w in reranked.windows(2) {
            let tol = 1e-9 * (1.0 + w[0].abs().max(w[1].abs()));
            prop_assert!(w[0] >= w[1] - tol, "{} ranked above {}", w[0], w[1]);
        }
    }
    Ok(())
}

/// Adds one row the current top rule formats as a further example and
/// reports whether a mask-equal rule is still among the candidates.
/// `None` when the case is out of domain: no candidates, no such row, or
/// the old rule disagrees with the refined pinned rows.
pub fn refinement_keeps_top(column: &TypedColumn, annotation: &Annotation, pick: usize) -> Option<bool> {
    let formats = annotation.formats();
    let [format] = formats.as_slice() else {
        return None;
    };
    let before = Pipeline::new(column.clone(), annotation.clone())?;
    let set = enumerate_candidates(&before.input(), format, &SynthesisConfig::default()).ok()?;
    let ranked = rank(&set, &before.rank_context(), &RankerWeights::default()).ok()?;
    let top = &ranked.first()?.mask;
    let taken: Vec<usize> = annotation.examples.iter().map(|e| e.row).collect();
    let extra: Vec<usize> = (0..column.len()).filter(|&r| top[r] && !taken.contains(&r)).collect();
    if extra.is_empty() {
        return None;
    }
    let row = extra[pick % extra.len()];
    let refined = Annotation::new(
        annotation
            .examples
            .iter()
            .map(|e| (e.row, e.format.clone()))
            .chain([(row, format.clone())]),
    );
    let after = Pipeline::new(column.clone(), refined)?;
    let fits = after.labeling.labels.iter().zip(top).all(|(l, &m)| match l {
        Label::Format(_) => m,
        Label::IntentionallyUnformatted => !m,
        Label::Unassigned => true,
    });
    if !fits {
        return None;
    }
    let Ok(set) = enumerate_candidates(&after.input(), format, &SynthesisConfig::default()) else {
        return Some(false);
    };
    Some(set.candidates.iter().any(|c| execute(&c.rule, column).as_ref() == Ok(top)))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RefinementTally {
    pub in_domain: usize,
    pub kept: usize,
}

impl RefinementTally {
    pub fn rate(&self) -> f64 {
        if self.in_domain == 0 {
            1.0
        } else {
            self.kept as f64 / self.in_domain as f64
        }
    }
}

/// Runs [`refinement_keeps_top`] over `cases` deterministic samples.
pub fn refinement_tally(cases: u32) -> RefinementTally {
    use proptest::strategy::ValueTree;
    let mut runner = runner(cases);
    let strategy = (strategies::column_and_annotation(), any::<usize>());
    let mut tally = RefinementTally::default();
    for _ in 0..cases {
        let ((column, annotation), pick) = strategy.new_tree(&mut runner).expect("strategy has no filters").current();
        if let Some(kept) = refinement_keeps_top(&column, &annotation, pick) {
            tally.in_domain += 1;
            tally.kept += kept as usize;
        }
    }
    tally
}

/// A named property and a runner for a given number of cases.
pub struct Suite {
    pub name: &'static str,
    pub run: fn(u32) -> Result<(), String>,
}

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn report<T: std::fmt::Debug>(r: Result<(), proptest::test_runner::TestError<T>>) -> Result<(), String> {
    r.map_err(|e| e.to_string())
}

/// Every property suite, in a fixed order.
pub fn suites() -> Vec<Suite> {
    vec![
        Suite {
            name: "predicate strict subset",
            run: |n| report(runner(n).run(&strategies::column(), |c| predicate_strict_subset(&c))),
        },
        Suite {
            name: "evaluate totality and type mismatch",
            run: |n| report(runner(n).run(&(strategies::predicate(), strategies::cell()), |(p, c)| evaluate_total(&p, &c))),
        },
        Suite {
            name: "tree and DNF agree",
            run: |n| {
                let s = (strategies::column_and_annotation(), prop::collection::vec(0usize..7, 0..3));
                report(runner(n).run(&s, |((c, a), drop)| tree_matches_rule(c, a, &drop)))
            },
        },
        Suite {
            name: "canonicalize preserves execution",
            run: |n| {
                let s = (strategies::column(), strategies::rule_shape()).prop_filter_map("no pool", |(c, shape)| {
                    let pool = generate_predicates(&c, &GenerateOptions::default()).ok()?;
                    let raw = strategies::raw_rule_from_shape(&pool, &shape);
                    Some((c, raw))
                });
                report(runner(n).run(&s, |(c, r)| canonicalize_preserves(&c, &r)))
            },
        },
        Suite {
            name: "clustering pins and terminates",
            run: |n| report(runner(n).run(&strategies::column_and_annotation(), |(c, a)| clustering_pins_and_terminates(c, a))),
        },
        Suite {
            name: "suggest is deterministic",
            run: |n| report(runner(n).run(&strategies::column_and_annotation(), |(c, a)| suggest_deterministic(c, a))),
        },
        Suite {
            name: "rank order survives affine rescoring",
            run: |n| {
                let s = (
                    strategies::column_and_annotation(),
                    strategies::ranker_weights(),
                    -4i32..=4,
                    (-64i32..=64).prop_map(|k| k as f64 / 4.0),
                );
                report(runner(n).run(&s, |((c, a), w, la, k)| rank_affine_invariant(c, a, w, la, k)))
            },
        },
    ]
}
