//! Typed boolean predicates over a single cell.
//!
//! Every predicate carries its own type and is false on cells of any other
//! type, so a rule can never compare a text cell against a numeric literal.

mod generate;
mod trie;

use std::fmt;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::table::{format_datetime, parse_datetime, parse_number, CellValue, ColumnType, Number, TypedColumn};

pub use generate::{generate_predicates, GenerateOptions, DEFAULT_POOL_CAP};
pub use trie::PrefixTrie;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum PredicateKind {
    Greater,
    GreaterEquals,
    Less,
    LessEquals,
    Between,
    Equals,
    Contains,
    StartsWith,
    EndsWith,
}

impl PredicateKind {
    pub fn name(self) -> &'static str {
        match self {
            PredicateKind::Greater => "greater",
            PredicateKind::GreaterEquals => "greaterEquals",
            PredicateKind::Less => "less",
            PredicateKind::LessEquals => "lessEquals",
            PredicateKind::Between => "between",
            PredicateKind::Equals => "equals",
            PredicateKind::Contains => "contains",
            PredicateKind::StartsWith => "startsWith",
            PredicateKind::EndsWith => "endsWith",
        }
    }

    pub fn is_text(self) -> bool {
        matches!(
            self,
            PredicateKind::Equals | PredicateKind::Contains | PredicateKind::StartsWith | PredicateKind::EndsWith
        )
    }

    pub const COMPARISONS: [PredicateKind; 4] = [
        PredicateKind::Greater,
        PredicateKind::GreaterEquals,
        PredicateKind::Less,
        PredicateKind::LessEquals,
    ];

    pub const TEXT_TOKEN: [PredicateKind; 3] = [
        PredicateKind::Contains,
        PredicateKind::StartsWith,
        PredicateKind::EndsWith,
    ];
}

/// Bound constant argument(s). The variant fixes the predicate's type.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Operand {
    Number(Number),
    NumberRange(Number, Number),
    Time(NaiveDateTime),
    TimeRange(NaiveDateTime, NaiveDateTime),
    Text(String),
}

impl Operand {
    pub fn column_type(&self) -> ColumnType {
        match self {
            Operand::Number(_) | Operand::NumberRange(..) => ColumnType::Numeric,
            Operand::Time(_) | Operand::TimeRange(..) => ColumnType::DateTime,
            Operand::Text(_) => ColumnType::Text,
        }
    }

    fn args(&self) -> Vec<String> {
        match self {
            Operand::Number(n) => vec![n.to_string()],
            Operand::NumberRange(a, b) => vec![a.to_string(), b.to_string()],
            Operand::Time(t) => vec![format_datetime(t)],
            Operand::TimeRange(a, b) => vec![format_datetime(a), format_datetime(b)],
            Operand::Text(s) => vec![s.clone()],
        }
    }
}

/// A typed predicate with its constants bound.
///
/// Ordering is the canonical pool order: kind, then type, then arguments.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "PredicateJson", into = "PredicateJson")]
pub struct Predicate {
    kind: PredicateKind,
    operand: Operand,
    case_insensitive: bool,
}

impl Predicate {
    pub fn new(kind: PredicateKind, operand: Operand) -> Result<Self> {
        let ok = match (&operand, kind) {
            (Operand::Number(_) | Operand::Time(_), k) => PredicateKind::COMPARISONS.contains(&k),
            (Operand::NumberRange(a, b), PredicateKind::Between) => a < b,
            (Operand::TimeRange(a, b), PredicateKind::Between) => a < b,
            (Operand::Text(s), k) => k.is_text() && !s.is_empty(),
            _ => false,
        };
        if !ok {
            return Err(Error::schema(
                "/",
                format!("{} does not accept {:?}", kind.name(), operand),
            ));
        }
        Ok(Predicate {
            kind,
            operand,
            case_insensitive: false,
        })
    }

    pub fn number(kind: PredicateKind, n: f64) -> Result<Self> {
        let n = Number::new(n).ok_or_else(|| Error::schema("/", "non-finite number"))?;
        Predicate::new(kind, Operand::Number(n))
    }

    pub fn between(lo: f64, hi: f64) -> Result<Self> {
        let (Some(lo), Some(hi)) = (Number::new(lo), Number::new(hi)) else {
            return Err(Error::schema("/", "non-finite number"));
        };
        Predicate::new(PredicateKind::Between, Operand::NumberRange(lo, hi))
    }

    pub fn text(kind: PredicateKind, s: impl Into<String>) -> Result<Self> {
        Predicate::new(kind, Operand::Text(s.into()))
    }

    /// Case-insensitive text matching; a no-op on other types. The argument
    /// is lowercased.
    pub fn with_case_insensitive(mut self, on: bool) -> Self {
        if let Operand::Text(s) = &mut self.operand {
            self.case_insensitive = on;
            if on {
                *s = s.to_lowercase();
            }
        }
        self
    }

    pub fn kind(&self) -> PredicateKind {
        self.kind
    }

    pub fn operand(&self) -> &Operand {
        &self.operand
    }

    pub fn is_case_insensitive(&self) -> bool {
        self.case_insensitive
    }

    pub fn column_type(&self) -> ColumnType {
        self.operand.column_type()
    }

    /// Total: false on empty cells and on cells of another type.
    pub fn evaluate(&self, cell: &CellValue) -> bool {
        match (cell, &self.operand) {
            (CellValue::Number(c), Operand::Number(n)) => compare(self.kind, c, n),
            (CellValue::Number(c), Operand::NumberRange(lo, hi)) => lo <= c && c <= hi,
            (CellValue::DateTime(c), Operand::Time(t)) => compare(self.kind, c, t),
            (CellValue::DateTime(c), Operand::TimeRange(lo, hi)) => lo <= c && c <= hi,
            (CellValue::Text(c), Operand::Text(s)) => {
                if self.case_insensitive {
                    self.match_text(&c.to_lowercase(), s)
                } else {
                    self.match_text(c, s)
                }
            }
            _ => false,
        }
    }

    /// Evaluates on a text value that has already been lowercased when the
    /// predicate is case-insensitive.
    fn match_text(&self, c: &str, s: &str) -> bool {
        match self.kind {
            PredicateKind::Equals => c == s,
            PredicateKind::Contains => c.contains(s),
            PredicateKind::StartsWith => c.starts_with(s),
            PredicateKind::EndsWith => c.ends_with(s),
            _ => false,
        }
    }

    /// Rows of `column` on which the predicate holds.
    pub fn mask(&self, column: &TypedColumn) -> BitSet {
        let mut out = BitSet::new(column.len());
        for (i, c) in column.cells.iter().enumerate() {
            if self.evaluate(c) {
                out.insert(i);
            }
        }
        out
    }
}

fn compare<T: PartialOrd>(kind: PredicateKind, c: &T, n: &T) -> bool {
    match kind {
        PredicateKind::Greater => c > n,
        PredicateKind::GreaterEquals => c >= n,
        PredicateKind::Less => c < n,
        PredicateKind::LessEquals => c <= n,
        _ => false,
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args: Vec<String> = match &self.operand {
            Operand::Text(s) => vec![format!("{s:?}")],
            other => other.args(),
        };
        write!(f, "{}({})", self.kind.name(), args.join(", "))?;
        if self.case_insensitive {
            f.write_str("/i")?;
        }
        Ok(())
    }
}

/// Wire form: `{"kind":"startsWith","type":"text","args":["GW"]}`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PredicateJson {
    kind: PredicateKind,
    #[serde(rename = "type")]
    column_type: ColumnType,
    args: Vec<String>,
    #[serde(rename = "caseInsensitive", default, skip_serializing_if = "std::ops::Not::not")]
    case_insensitive: bool,
}

impl From<Predicate> for PredicateJson {
    fn from(p: Predicate) -> Self {
        PredicateJson {
            kind: p.kind,
            column_type: p.column_type(),
            args: p.operand.args(),
            case_insensitive: p.case_insensitive,
        }
    }
}

impl TryFrom<PredicateJson> for Predicate {
    type Error = String;

    fn try_from(j: PredicateJson) -> std::result::Result<Self, String> {
        let want = if j.kind == PredicateKind::Between { 2 } else { 1 };
        if j.args.len() != want {
            return Err(format!("{} takes {want} argument(s), got {}", j.kind.name(), j.args.len()));
        }
        let num = |s: &String| parse_number(s).ok_or_else(|| format!("invalid number {s:?}"));
        let time = |s: &String| parse_datetime(s).ok_or_else(|| format!("invalid timestamp {s:?}"));
        let operand = match (j.column_type, want) {
            (ColumnType::Numeric, 1) => Operand::Number(num(&j.args[0])?),
            (ColumnType::Numeric, _) => Operand::NumberRange(num(&j.args[0])?, num(&j.args[1])?),
            (ColumnType::DateTime, 1) => Operand::Time(time(&j.args[0])?),
            (ColumnType::DateTime, _) => Operand::TimeRange(time(&j.args[0])?, time(&j.args[1])?),
            (ColumnType::Text, _) => Operand::Text(j.args[0].clone()),
        };
        if j.case_insensitive && j.column_type != ColumnType::Text {
            return Err("caseInsensitive applies to text predicates only".into());
        }
        let p = Predicate::new(j.kind, operand).map_err(|e| match e {
            Error::Schema { message, .. } => message,
            other => other.to_string(),
        })?;
        if j.case_insensitive && p.operand != p.clone().with_case_insensitive(true).operand {
            return Err("caseInsensitive predicate arguments must be lowercase".into());
        }
        Ok(p.with_case_insensitive(j.case_insensitive))
    }
}

/// Where a predicate's constant came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Provenance {
    PopularConstant,
    ColumnStat,
    PrefixTrieToken,
    DelimiterToken,
    CellValue,
}

impl Provenance {
    /// Priority when the pool must be truncated or duplicates merged; higher
    /// survives. Matches the derived ordering.
    pub fn priority(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedPredicate {
    pub predicate: Predicate,
    pub provenance: Provenance,
}

/// Generated predicates of one column, in canonical order, with the rows
/// each one holds on. Predicate ids are indices into `entries`.
#[derive(Debug, Clone)]
pub struct PredicatePool {
    pub entries: Vec<GeneratedPredicate>,
    pub masks: Vec<BitSet>,
    rows: usize,
}

impl PredicatePool {
    /// Sorts `entries` canonically and drops duplicate predicates, keeping
    /// the highest-priority provenance.
    pub fn from_predicates(column: &TypedColumn, mut entries: Vec<GeneratedPredicate>) -> Self {
        entries.sort_by(|a, b| {
            a.predicate
                .cmp(&b.predicate)
                .then(b.provenance.cmp(&a.provenance))
        });
        entries.dedup_by(|later, first| later.predicate == first.predicate);
        let masks = entries.iter().map(|e| e.predicate.mask(column)).collect();
        PredicatePool {
            entries,
            masks,
            rows: column.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn predicate(&self, id: usize) -> &Predicate {
        &self.entries[id].predicate
    }

    pub fn id_of(&self, p: &Predicate) -> Option<usize> {
        self.entries.binary_search_by(|e| e.predicate.cmp(p)).ok()
    }

    pub fn provenance_of(&self, p: &Predicate) -> Option<Provenance> {
        self.id_of(p).map(|i| self.entries[i].provenance)
    }

    /// Per-row sets of satisfied predicate ids.
    pub fn signatures(&self) -> Vec<PredicateSignature> {
        let mut sigs = vec![BitSet::new(self.len()); self.rows];
        for (pid, mask) in self.masks.iter().enumerate() {
            for row in mask.iter() {
                sigs[row].insert(pid);
            }
        }
        sigs.into_iter().map(PredicateSignature).collect()
    }
}

/// The set of pool predicates a cell satisfies.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PredicateSignature(pub BitSet);

impl PredicateSignature {
    pub fn from_ids(pool_len: usize, ids: &[usize]) -> Self {
        let mut b = BitSet::new(pool_len);
        for &i in ids {
            b.insert(i);
        }
        PredicateSignature(b)
    }

    pub fn contains(&self, id: usize) -> bool {
        self.0.contains(id)
    }

    pub fn ids(&self) -> Vec<usize> {
        self.0.iter().collect()
    }

    pub fn len(&self) -> usize {
        self.0.count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `signature[i] = { p ∈ pool : p holds on cells[i] }`.
pub fn signatures(pool: &PredicatePool) -> Vec<PredicateSignature> {
    pool.signatures()
}
