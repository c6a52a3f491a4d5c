//! Rules in disjunctive normal form over typed predicates.

mod formula;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::predicate::Predicate;
use crate::table::{ColumnType, FormatId, TypedColumn};

pub use formula::{emit_formula, FormulaOptions};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Literal {
    pub predicate: Predicate,
    pub negated: bool,
}

impl Literal {
    pub fn pos(predicate: Predicate) -> Self {
        Literal {
            predicate,
            negated: false,
        }
    }

    pub fn neg(predicate: Predicate) -> Self {
        Literal {
            predicate,
            negated: true,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("¬")?;
        }
        write!(f, "{}", self.predicate)
    }
}

/// A DNF formula tied to one format.
///
/// Rules built through [`Rule::new`] or [`parse_rule`] are canonical: no
/// conjunction holds both `p` and `¬p`, literals and conjunctions are sorted
/// and unique, and no conjunction is a superset of another.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Rule {
    format: FormatId,
    disjuncts: Vec<Vec<Literal>>,
}

impl Rule {
    /// Builds and canonicalizes.
    pub fn new(disjuncts: Vec<Vec<Literal>>, format: FormatId) -> Result<Self> {
        canonicalize(&Rule::from_parts(disjuncts, format)?)
    }

    /// Structural checks only: at least one conjunction, no empty
    /// conjunction, a single predicate type.
    pub fn from_parts(disjuncts: Vec<Vec<Literal>>, format: FormatId) -> Result<Self> {
        check_structure(&disjuncts)?;
        Ok(Rule { format, disjuncts })
    }

    pub fn disjuncts(&self) -> &[Vec<Literal>] {
        &self.disjuncts
    }

    pub fn format(&self) -> &FormatId {
        &self.format
    }

    pub fn column_type(&self) -> ColumnType {
        self.disjuncts[0][0].predicate.column_type()
    }

    pub fn literals(&self) -> impl Iterator<Item = &Literal> {
        self.disjuncts.iter().flatten()
    }

    pub fn num_literals(&self) -> usize {
        self.disjuncts.iter().map(Vec::len).sum()
    }

    pub fn num_negations(&self) -> usize {
        self.literals().filter(|l| l.negated).count()
    }

    pub fn is_canonical(&self) -> bool {
        canonicalize(self).is_ok_and(|c| &c == self)
    }

    /// Compact JSON; the wire format shared by the CLI and the service.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("rule serializes")
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let conj: Vec<String> = self
            .disjuncts
            .iter()
            .map(|c| {
                let lits: Vec<String> = c.iter().map(Literal::to_string).collect();
                format!("({})", lits.join(" ∧ "))
            })
            .collect();
        f.write_str(&conj.join(" ∨ "))
    }
}

fn check_structure(disjuncts: &[Vec<Literal>]) -> Result<()> {
    if disjuncts.is_empty() {
        return Err(Error::schema("/disjuncts", "a rule needs at least one conjunction"));
    }
    let ty = disjuncts
        .iter()
        .flatten()
        .next()
        .map(|l| l.predicate.column_type());
    for (i, conj) in disjuncts.iter().enumerate() {
        if conj.is_empty() {
            return Err(Error::schema(format!("/disjuncts/{i}"), "empty conjunction"));
        }
        for (j, lit) in conj.iter().enumerate() {
            if Some(lit.predicate.column_type()) != ty {
                return Err(Error::schema(
                    format!("/disjuncts/{i}/{j}/predicate"),
                    "all predicates of a rule must share one type",
                ));
            }
        }
    }
    Ok(())
}

/// Equal-semantics canonical form: sorted unique literals, contradictory
/// conjunctions dropped, subsumed conjunctions removed, conjunctions sorted.
pub fn canonicalize(rule: &Rule) -> Result<Rule> {
    let mut conjs: Vec<Vec<Literal>> = Vec::new();
    for conj in &rule.disjuncts {
        let set: BTreeSet<&Literal> = conj.iter().collect();
        let contradictory = set
            .iter()
            .any(|l| !l.negated && set.contains(&Literal::neg(l.predicate.clone())));
        if !contradictory {
            conjs.push(set.into_iter().cloned().collect());
        }
    }
    if conjs.is_empty() {
        return Err(Error::Unsatisfiable);
    }
    conjs.sort();
    conjs.dedup();
    // A ⊆ B makes B redundant: B ⇒ A.
    let keep: Vec<bool> = conjs
        .iter()
        .enumerate()
        .map(|(i, b)| {
            !conjs
                .iter()
                .enumerate()
                .any(|(j, a)| j != i && a.len() < b.len() && a.iter().all(|l| b.contains(l)))
        })
        .collect();
    let disjuncts = conjs
        .into_iter()
        .zip(keep)
        .filter_map(|(c, k)| k.then_some(c))
        .collect();
    Ok(Rule {
        format: rule.format.clone(),
        disjuncts,
    })
}

/// Per-row truth of the rule; empty cells are never formatted.
pub fn execute(rule: &Rule, column: &TypedColumn) -> Result<Vec<bool>> {
    execute_bits(rule, column).map(|b| b.to_bools())
}

pub fn execute_bits(rule: &Rule, column: &TypedColumn) -> Result<BitSet> {
    if rule.column_type() != column.column_type {
        return Err(Error::TypeMismatch {
            rule: rule.column_type().to_string(),
            column: column.column_type.to_string(),
        });
    }
    let mut out = BitSet::new(column.len());
    for (i, cell) in column.cells.iter().enumerate() {
        if cell.is_empty() {
            continue;
        }
        let hit = rule
            .disjuncts
            .iter()
            .any(|conj| conj.iter().all(|l| l.predicate.evaluate(cell) != l.negated));
        if hit {
            out.insert(i);
        }
    }
    Ok(out)
}

/// Wire form of a rule, before validation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleJson {
    pub format: FormatId,
    pub disjuncts: Vec<Vec<Literal>>,
}

impl RuleJson {
    /// Validates and canonicalizes. Error paths are relative to the rule.
    pub fn into_rule(self) -> Result<Rule> {
        Rule::new(self.disjuncts, self.format)
    }
}

impl<'de> Deserialize<'de> for Rule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        RuleJson::deserialize(d)?
            .into_rule()
            .map_err(serde::de::Error::custom)
    }
}

/// Parses the rule JSON schema; the result is canonical.
pub fn parse_rule(json: &str) -> Result<Rule> {
    crate::json::from_str::<RuleJson>(json)?.into_rule()
}
