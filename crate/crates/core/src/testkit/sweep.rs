//! Random columns with hidden ground-truth rules, annotated top-down the
//! way a user would format the first few matching cells.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::engine::{oracle_search, Engine, OracleBounds, SuggestRequest};
use crate::error::{Error, Result};
use crate::predicate::{generate_predicates, GenerateOptions};
use crate::rule::{execute, Literal, Rule};
use crate::table::{Annotation, FormatId, SourceRef, TypedColumn};

pub const MAX_ROWS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Ids,
    Categories,
    Numbers,
}

#[derive(Debug, Clone)]
pub struct SweepInstance {
    pub kind: ColumnKind,
    pub column: TypedColumn,
    pub rule: Rule,
    pub truth: Vec<bool>,
    pub annotation: Annotation,
}

pub fn format_id() -> FormatId {
    FormatId::new("highlight").expect("non-empty")
}

pub fn random_column(rng: &mut impl Rng, kind: ColumnKind) -> Vec<String> {
    let rows = rng.gen_range(8..=MAX_ROWS);
    let mut raw: Vec<String> = match kind {
        ColumnKind::Ids => {
            let mut prefixes = ["GW", "AN", "XK", "PL", "TR", "MB"];
            prefixes.shuffle(rng);
            let prefixes = &prefixes[..rng.gen_range(2..=4)];
            let suffixes = ["", "", "-F", "-T", "-X"];
            (0..rows)
                .map(|_| {
                    format!(
                        "{}{}{}",
                        prefixes.choose(rng).unwrap(),
                        rng.gen_range(1..100_000),
                        suffixes.choose(rng).unwrap()
                    )
                })
                .collect()
        }
        ColumnKind::Categories => {
            let sets: [&[&str]; 3] = [
                &["North", "South", "East", "West", "Central"],
                &["Open", "Closed", "Pending", "On hold", "Review"],
                &["Plumbing", "Electrical", "HVAC", "Roofing", "Painting", "Carpentry"],
            ];
            let mut words = sets.choose(rng).unwrap().to_vec();
            words.shuffle(rng);
            let words = &words[..rng.gen_range(3..=words.len())];
            (0..rows).map(|_| words.choose(rng).unwrap().to_string()).collect()
        }
        ColumnKind::Numbers => {
            let hi = *[10, 100, 1000].choose(rng).unwrap();
            let decimals = rng.gen_bool(0.3);
            (0..rows)
                .map(|_| {
                    if decimals {
                        format!("{:.1}", rng.gen_range(0.0..hi as f64))
                    } else {
                        rng.gen_range(0..hi).to_string()
                    }
                })
                .collect()
        }
    };
    for cell in raw.iter_mut() {
        if rng.gen_bool(0.05) {
            cell.clear();
        }
    }
    raw
}

/// A rule of at most `max_disjuncts` x `max_literals` over the column's own
/// predicate pool, or `None` when no draw gives a non-trivial mask.
pub fn random_rule(
    rng: &mut impl Rng,
    column: &TypedColumn,
    max_disjuncts: usize,
    max_literals: usize,
) -> Option<(Rule, Vec<bool>)> {
    let pool = generate_predicates(column, &GenerateOptions::default()).ok()?;
    let active = column.non_empty_count();
    for _ in 0..50 {
        let disjuncts = (0..rng.gen_range(1..=max_disjuncts))
            .map(|_| {
                (0..rng.gen_range(1..=max_literals))
                    .map(|_| Literal {
                        predicate: pool.predicate(rng.gen_range(0..pool.len())).clone(),
                        negated: rng.gen_bool(0.3),
                    })
                    .collect()
            })
            .collect();
        let Ok(rule) = Rule::new(disjuncts, format_id()) else {
            continue;
        };
        let truth = execute(&rule, column).expect("same type");
        let hits = truth.iter().filter(|&&b| b).count();
        if hits > 0 && hits < active {
            return Some((rule, truth));
        }
    }
    None
}

/// First 1 to 3 matching rows, top-down.
pub fn top_down_annotation(rng: &mut impl Rng, truth: &[bool]) -> Annotation {
    let k = rng.gen_range(1..=3);
    let rows: Vec<usize> = truth.iter().enumerate().filter(|(_, &t)| t).map(|(i, _)| i).take(k).collect();
    Annotation::new(rows.into_iter().map(|r| (r, format_id())))
}

pub fn random_instance(rng: &mut impl Rng) -> SweepInstance {
    loop {
        let kind = *[ColumnKind::Ids, ColumnKind::Categories, ColumnKind::Numbers].choose(rng).unwrap();
        let raw = random_column(rng, kind);
        let column = TypedColumn::from_raw("c", &raw, SourceRef::default());
        if let Some((rule, truth)) = random_rule(rng, &column, 2, 3) {
            let annotation = top_down_annotation(rng, &truth);
            return SweepInstance { kind, column, rule, truth, annotation };
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// No rule within the oracle's bounds reproduces the truth on this pool.
    NoConsistentRule,
    /// Some top-k suggestion executes exactly like the ground truth.
    Hit { rank: usize },
    Miss,
}

/// Runs the engine on an instance and compares its top-k with the truth.
pub fn evaluate_instance(engine: &Engine, inst: &SweepInstance, top_k: usize) -> Result<Outcome> {
    let pool = generate_predicates(&inst.column, &GenerateOptions::default())?;
    if oracle_search(&inst.column, &inst.truth, &pool, format_id(), OracleBounds::default())?.is_none() {
        return Ok(Outcome::NoConsistentRule);
    }
    let mut req = SuggestRequest::new(inst.column.clone(), inst.annotation.clone());
    req.top_k = top_k;
    let response = match engine.suggest(&req) {
        Ok(r) => r,
        Err(e) if e.needs_more_examples() => return Ok(Outcome::Miss),
        Err(e) => return Err(e),
    };
    let suggestions = response.formats.get(&format_id()).ok_or(Error::NoCandidates)?;
    for (rank, s) in suggestions.iter().enumerate() {
        if s.mask == inst.truth {
            return Ok(Outcome::Hit { rank });
        }
    }
    Ok(Outcome::Miss)
}
