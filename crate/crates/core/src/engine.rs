//! End-to-end suggestion pipeline, rule application, and an exhaustive
//! search over small DNF rules used to cross-check results.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

use crate::bitset::BitSet;
use crate::cluster::{cluster, ClusterOptions};
use crate::error::{Error, Result};
use crate::predicate::{generate_predicates, GenerateOptions, PredicatePool, DEFAULT_POOL_CAP};
use crate::rank::{rank, RankContext, RankedSuggestion, RankerWeights};
use crate::rule::{emit_formula, execute, FormulaOptions, Literal, Rule};
use crate::synth::{enumerate_candidates, SynthesisConfig, SynthesisInput};
use crate::table::{positional_labels, Annotation, ColumnType, FormatId, TypedColumn};

pub const DEFAULT_TOP_K: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuggestOptions {
    pub case_insensitive: bool,
    pub fold_negations: bool,
    pub max_pool: usize,
    pub cluster: ClusterOptions,
}

impl Default for SuggestOptions {
    fn default() -> Self {
        SuggestOptions {
            case_insensitive: false,
            fold_negations: false,
            max_pool: DEFAULT_POOL_CAP,
            cluster: ClusterOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuggestRequest {
    pub column: TypedColumn,
    pub annotation: Annotation,
    pub config: SynthesisConfig,
    pub top_k: usize,
    pub options: SuggestOptions,
}

impl SuggestRequest {
    pub fn new(column: TypedColumn, annotation: Annotation) -> Self {
        SuggestRequest {
            column,
            annotation,
            config: SynthesisConfig::default(),
            top_k: DEFAULT_TOP_K,
            options: SuggestOptions::default(),
        }
    }
}

/// Structured, non-fatal condition attached to a response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Warning {
    pub code: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<FormatId>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub column_type: ColumnType,
    pub predicate_pool_size: usize,
    pub cluster_rounds: usize,
    pub candidates_generated: BTreeMap<FormatId, usize>,
    pub warnings: Vec<Warning>,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuggestResponse {
    /// Ranked suggestions per format, best first.
    pub formats: BTreeMap<FormatId, Vec<RankedSuggestion>>,
    pub diagnostics: Diagnostics,
}

/// Intermediate state of a run, for debugging output.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Trace {
    pub cluster_rounds: Vec<Vec<usize>>,
    pub trees: BTreeMap<FormatId, Vec<Value>>,
}

#[derive(Debug, Clone, Default)]
pub struct Engine {
    weights: RankerWeights,
}

impl Engine {
    pub fn new(weights: RankerWeights) -> Self {
        Engine { weights }
    }

    pub fn weights(&self) -> &RankerWeights {
        &self.weights
    }

    pub fn suggest(&self, req: &SuggestRequest) -> Result<SuggestResponse> {
        self.suggest_traced(req).map(|(r, _)| r)
    }

    pub fn suggest_traced(&self, req: &SuggestRequest) -> Result<(SuggestResponse, Trace)> {
        let started = Instant::now();
        if req.top_k == 0 {
            return Err(Error::Config("top_k must be at least 1".into()));
        }
        req.config.validate()?;
        let column = &req.column;
        let labeling = positional_labels(column.len(), &req.annotation)?;
        let formats = req.annotation.formats();
        if formats.is_empty() {
            return Err(Error::NoExamples);
        }
        let pool = generate_predicates(
            column,
            &GenerateOptions {
                case_insensitive: req.options.case_insensitive,
                max_pool: req.options.max_pool,
            },
        )?;
        let sigs = pool.signatures();
        let clustering = cluster(column, &labeling, &sigs, req.options.cluster)?;
        let input = SynthesisInput {
            column,
            labeling: &labeling,
            pool: &pool,
            sigs: &sigs,
            clustering: &clustering,
        };
        let ctx = RankContext {
            column,
            labeling: &labeling,
            clustering: &clustering,
            pool: &pool,
            formula: FormulaOptions {
                fold_negations: req.options.fold_negations,
            },
        };

        let mut out = BTreeMap::new();
        let mut generated = BTreeMap::new();
        let mut warnings = Vec::new();
        let mut trace = Trace {
            cluster_rounds: clustering.history.clone(),
            ..Default::default()
        };
        let mut last_err = None;
        for format in &formats {
            match enumerate_candidates(&input, format, &req.config) {
                Ok(set) => {
                    generated.insert(format.clone(), set.candidates.len());
                    trace.trees.insert(
                        format.clone(),
                        set.candidates.iter().map(|c| c.tree.to_json(&pool)).collect(),
                    );
                    let mut ranked = rank(&set, &ctx, &self.weights)?;
                    // Rules that format the same cells are one suggestion.
                    let mut masks = HashSet::new();
                    ranked.retain(|s| masks.insert(s.mask.clone()));
                    ranked.truncate(req.top_k);
                    out.insert(format.clone(), ranked);
                }
                Err(e) if e.needs_more_examples() => {
                    generated.insert(format.clone(), 0);
                    warnings.push(Warning {
                        code: e.code(),
                        format: Some(format.clone()),
                    });
                    out.insert(format.clone(), Vec::new());
                    last_err = Some(e);
                }
                Err(e) => return Err(e),
            }
        }
        if out.values().all(Vec::is_empty) {
            return Err(last_err.unwrap_or(Error::NoCandidates));
        }
        let response = SuggestResponse {
            formats: out,
            diagnostics: Diagnostics {
                column_type: column.column_type,
                predicate_pool_size: pool.len(),
                cluster_rounds: clustering.rounds,
                candidates_generated: generated,
                warnings,
                elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
            },
        };
        Ok((response, trace))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApplyResult {
    pub mask: Vec<bool>,
    pub formula: String,
    pub warnings: Vec<Warning>,
}

/// Executes a rule on a column and renders its formula.
pub fn apply(rule: &Rule, column: &TypedColumn, formula: FormulaOptions) -> Result<ApplyResult> {
    let mask = execute(rule, column)?;
    let mut warnings = Vec::new();
    if !mask.iter().any(|&b| b) {
        warnings.push(Warning {
            code: "MatchesNothing",
            format: Some(rule.format().clone()),
        });
    }
    Ok(ApplyResult {
        mask,
        formula: emit_formula(rule, &column.source_ref.cell(), formula),
        warnings,
    })
}

/// Largest number of distinct literal masks [`oracle_search`] accepts.
pub const ORACLE_MAX_LITERALS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBounds {
    pub max_disjuncts: usize,
    pub max_literals: usize,
}

impl Default for OracleBounds {
    fn default() -> Self {
        OracleBounds {
            max_disjuncts: 2,
            max_literals: 3,
        }
    }
}

/// A smallest DNF rule over `pool` whose execution on `column` equals
/// `truth` exactly, found by exhaustive enumeration.
///
/// Literals with identical masks on the non-empty rows are interchangeable,
/// so the search keeps the first of each in canonical order. Size is literal
/// count, then conjunction count. `Ok(None)` means no rule within `bounds`
/// reproduces `truth`.
pub fn oracle_search(
    column: &TypedColumn,
    truth: &[bool],
    pool: &PredicatePool,
    format: FormatId,
    bounds: OracleBounds,
) -> Result<Option<Rule>> {
    assert_eq!(truth.len(), column.len());
    let active = BitSet::from_bools(&column.cells.iter().map(|c| !c.is_empty()).collect::<Vec<_>>());
    let truth = BitSet::from_bools(truth);
    if truth.count() == 0 || !truth.is_subset(&active) || bounds.max_disjuncts == 0 {
        return Ok(None);
    }

    let mut literals: Vec<(Literal, BitSet)> = Vec::new();
    let mut seen: HashMap<BitSet, ()> = HashMap::new();
    for e in &pool.entries {
        let m = e.predicate.mask(column);
        for (negated, mask) in [(false, m.clone()), (true, active.and_not(&m))] {
            // Empty literals kill a conjunction, full ones never change it.
            if mask.count() == 0 || mask == active || seen.insert(mask.clone(), ()).is_some() {
                continue;
            }
            literals.push((Literal { predicate: e.predicate.clone(), negated }, mask));
        }
    }
    if literals.len() > ORACLE_MAX_LITERALS {
        return Err(Error::PoolTooLarge(literals.len()));
    }

    // Smallest conjunction (by length, then index order) per mask inside truth.
    let mut conjs: HashMap<BitSet, Vec<usize>> = HashMap::new();
    let mut buffers = vec![BitSet::new(truth.len()); bounds.max_literals + 1];
    buffers[0] = active.clone();
    let mut stack = Vec::new();
    extend_conj(&literals, &truth, &mut buffers, 0, &mut stack, &mut conjs);

    let mut parts: Vec<(BitSet, Vec<usize>)> = conjs.into_iter().collect();
    parts.sort_by(|a, b| (a.1.len(), &a.1).cmp(&(b.1.len(), &b.1)));

    let mut best: Option<(usize, usize, Vec<usize>)> = None;
    let mut chosen = Vec::new();
    search_cover(&parts, &truth, bounds.max_disjuncts, 0, 0, &mut chosen, &BitSet::new(truth.len()), &mut best);

    let Some((_, _, picked)) = best else {
        return Ok(None);
    };
    let disjuncts = picked
        .iter()
        .map(|&i| parts[i].1.iter().map(|&l| literals[l].0.clone()).collect())
        .collect();
    Ok(Some(Rule::new(disjuncts, format)?))
}

fn extend_conj(
    literals: &[(Literal, BitSet)],
    truth: &BitSet,
    buffers: &mut [BitSet],
    from: usize,
    stack: &mut Vec<usize>,
    out: &mut HashMap<BitSet, Vec<usize>>,
) {
    let depth = stack.len();
    if depth + 1 == buffers.len() {
        return;
    }
    for l in from..literals.len() {
        let (prev, rest) = buffers.split_at_mut(depth + 1);
        let current = &prev[depth];
        let next = &mut rest[0];
        next.assign_and(current, &literals[l].1);
        // A literal that leaves the mask unchanged is redundant; one that
        // leaves no truth row can never help.
        if *next == *current || !next.intersects(truth) {
            continue;
        }
        stack.push(l);
        if next.is_subset(truth) {
            let better = match out.get(&*next) {
                None => true,
                Some(have) => (stack.len(), &*stack) < (have.len(), have),
            };
            if better {
                out.insert(next.clone(), stack.clone());
            }
        }
        extend_conj(literals, truth, buffers, l + 1, stack, out);
        stack.pop();
    }
}

#[allow(clippy::too_many_arguments)]
fn search_cover(
    parts: &[(BitSet, Vec<usize>)],
    truth: &BitSet,
    max_parts: usize,
    from: usize,
    size: usize,
    chosen: &mut Vec<usize>,
    covered: &BitSet,
    best: &mut Option<(usize, usize, Vec<usize>)>,
) {
    for i in from..parts.len() {
        let (mask, lits) = &parts[i];
        let size = size + lits.len();
        // `parts` is sorted by length, so nothing later is smaller.
        if best.as_ref().is_some_and(|(s, n, _)| (size, chosen.len() + 1) > (*s, *n)) {
            if best.as_ref().is_some_and(|(s, _, _)| size > *s) {
                return;
            }
            continue;
        }
        if mask.is_subset(covered) {
            continue;
        }
        let union = covered.or(mask);
        chosen.push(i);
        if union == *truth {
            *best = Some((size, chosen.len(), chosen.clone()));
        } else if chosen.len() < max_parts {
            search_cover(parts, truth, max_parts, i + 1, size, chosen, &union, best);
        }
        chosen.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predicate::{GeneratedPredicate, Predicate, PredicateKind::*, Provenance};
    use crate::table::SourceRef;

    fn col(raw: &[&str]) -> TypedColumn {
        TypedColumn::from_raw("c", raw, SourceRef::default())
    }

    fn f() -> FormatId {
        FormatId::new("f").unwrap()
    }

    fn pool_of(column: &TypedColumn, preds: Vec<Predicate>) -> PredicatePool {
        PredicatePool::from_predicates(
            column,
            preds
                .into_iter()
                .map(|predicate| GeneratedPredicate { predicate, provenance: Provenance::CellValue })
                .collect(),
        )
    }

    #[test]
    fn oracle_finds_single_predicate() {
        let c = col(&["3", "7", "2", "5", "9"]);
        let pool = pool_of(&c, vec![
            Predicate::number(Greater, 5.0).unwrap(),
            Predicate::number(Less, 5.0).unwrap(),
            Predicate::number(Less, 8.0).unwrap(),
        ]);
        let truth = [true, false, true, false, false];
        let r = oracle_search(&c, &truth, &pool, f(), OracleBounds::default()).unwrap().unwrap();
        assert_eq!(r.num_literals(), 1);
        assert_eq!(execute(&r, &c).unwrap(), truth);
    }

    #[test]
    fn oracle_needs_two_disjuncts() {
        let c = col(&["1", "5", "9"]);
        let pool = pool_of(&c, vec![
            Predicate::number(Less, 2.0).unwrap(),
            Predicate::number(Greater, 8.0).unwrap(),
        ]);
        let truth = [true, false, true];
        let r = oracle_search(&c, &truth, &pool, f(), OracleBounds::default()).unwrap().unwrap();
        assert_eq!(r.disjuncts().len(), 2);
        assert_eq!(execute(&r, &c).unwrap(), truth);
    }

    #[test]
    fn oracle_reports_inconsistent_truth() {
        let c = col(&["a", "a", "b"]);
        let pool = pool_of(&c, vec![Predicate::text(Equals, "a").unwrap()]);
        assert_eq!(oracle_search(&c, &[true, false, false], &pool, f(), OracleBounds::default()).unwrap(), None);
        assert_eq!(oracle_search(&c, &[false, false, false], &pool, f(), OracleBounds::default()).unwrap(), None);
    }

    #[test]
    fn oracle_rejects_large_pools() {
        let raw: Vec<String> = (0..400).map(|i| i.to_string()).collect();
        let raw: Vec<&str> = raw.iter().map(String::as_str).collect();
        let c = col(&raw);
        let pool = generate_predicates(&c, &GenerateOptions::default()).unwrap();
        let truth: Vec<bool> = (0..400).map(|i| i < 5).collect();
        assert!(matches!(
            oracle_search(&c, &truth, &pool, f(), OracleBounds::default()),
            Err(Error::PoolTooLarge(_))
        ));
    }

    #[test]
    fn suggest_constant_column_needs_more_examples() {
        let req = SuggestRequest::new(col(&["4", "4", "4"]), Annotation::single(&[1], "f").unwrap());
        let err = Engine::default().suggest(&req).unwrap_err();
        assert_eq!(err, Error::NoPredicates);
        assert!(err.needs_more_examples());
    }

    #[test]
    fn suggest_rejects_bad_requests() {
        let mut req = SuggestRequest::new(col(&["1", "2"]), Annotation::single(&[5], "f").unwrap());
        assert!(matches!(Engine::default().suggest(&req), Err(Error::InvalidAnnotation(_))));
        req.annotation = Annotation::default();
        assert_eq!(Engine::default().suggest(&req).unwrap_err(), Error::NoExamples);
        req.annotation = Annotation::single(&[0], "f").unwrap();
        req.top_k = 0;
        assert!(matches!(Engine::default().suggest(&req), Err(Error::Config(_))));
    }

    #[test]
    fn apply_reports_mask_formula_and_warnings() {
        let c = col(&["3", "7"]);
        let less = Rule::new(vec![vec![Literal::pos(Predicate::number(Less, 5.0).unwrap())]], f()).unwrap();
        let out = apply(&less, &c, FormulaOptions::default()).unwrap();
        assert_eq!(out.mask, vec![true, false]);
        assert_eq!(out.formula, "A2<5");
        assert!(out.warnings.is_empty());

        let none = Rule::new(vec![vec![Literal::pos(Predicate::number(Less, 0.0).unwrap())]], f()).unwrap();
        let out = apply(&none, &c, FormulaOptions::default()).unwrap();
        assert_eq!(out.mask, vec![false, false]);
        assert_eq!(out.warnings[0].code, "MatchesNothing");

        let text = col(&["a", "b"]);
        assert!(matches!(apply(&less, &text, FormulaOptions::default()), Err(Error::TypeMismatch { .. })));
    }
}
