//! proptest strategies for columns, rules and annotations.

use proptest::prelude::*;

use crate::predicate::{generate_predicates, GenerateOptions, PredicatePool};
use crate::rule::{Literal, Rule};
use crate::table::{Annotation, FormatId, SourceRef, TypedColumn};

fn blank_or(s: impl Strategy<Value = String>) -> impl Strategy<Value = String> {
    prop_oneof![1 => Just(String::new()), 9 => s]
}

fn raw_numbers() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(blank_or((-50i32..50).prop_map(|n| n.to_string())), 1..30)
}

fn raw_decimals() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(blank_or((-500i32..500).prop_map(|n| format!("{:.1}", n as f64 / 10.0))), 1..30)
}

fn raw_text() -> impl Strategy<Value = Vec<String>> {
    let word = prop_oneof![
        "(GW|AN|XK|gw)[0-9]{1,4}(-F|-T|-X)?",
        "(North|South|East|West|north)",
        "[a-c]{1,3}( [a-c]{1,2})?",
    ];
    prop::collection::vec(blank_or(word), 1..30)
}

fn raw_dates() -> impl Strategy<Value = Vec<String>> {
    let d = (2020i32..2023, 1u32..13, 1u32..29, prop::option::of((0u32..24, 0u32..60)));
    prop::collection::vec(
        blank_or(d.prop_map(|(y, m, day, t)| match t {
            Some((h, min)) => format!("{y}-{m:02}-{day:02} {h:02}:{min:02}"),
            None => format!("{y}-{m:02}-{day:02}"),
        })),
        1..30,
    )
}

/// Raw cells of one of several shapes, including a few blanks.
pub fn raw_column() -> impl Strategy<Value = Vec<String>> {
    prop_oneof![raw_numbers(), raw_decimals(), raw_text(), raw_dates()]
}

pub fn column() -> impl Strategy<Value = TypedColumn> {
    raw_column().prop_map(|raw| TypedColumn::from_raw("c", &raw, SourceRef::default()))
}

/// Annotation with 1 to 3 distinct example rows in `0..len`, one or two formats.
pub fn annotation(len: usize) -> impl Strategy<Value = Annotation> {
    (prop::collection::btree_set(0..len, 1..=3.min(len)), prop::bool::ANY).prop_map(|(rows, two)| {
        Annotation::new(rows.into_iter().enumerate().map(|(i, r)| {
            let f = if two && i % 2 == 1 { "g" } else { "f" };
            (r, FormatId::new(f).unwrap())
        }))
    })
}

pub fn column_and_annotation() -> impl Strategy<Value = (TypedColumn, Annotation)> {
    column().prop_flat_map(|c| {
        let len = c.len();
        (Just(c), annotation(len))
    })
}

/// Literal choices as (pool index seed, negated); resolved against a pool.
pub fn rule_shape() -> impl Strategy<Value = Vec<Vec<(usize, bool)>>> {
    prop::collection::vec(prop::collection::vec((any::<usize>(), prop::bool::weighted(0.3)), 1..=3), 1..=3)
}

/// Builds a rule from `shape` over `pool`; `None` if every conjunction is
/// contradictory.
pub fn rule_from_shape(pool: &PredicatePool, shape: &[Vec<(usize, bool)>]) -> Option<Rule> {
    let disjuncts = shape
        .iter()
        .map(|conj| {
            conj.iter()
                .map(|&(seed, negated)| Literal {
                    predicate: pool.predicate(seed % pool.len()).clone(),
                    negated,
                })
                .collect()
        })
        .collect();
    Rule::new(disjuncts, FormatId::new("f").unwrap()).ok()
}

/// A column with a non-empty predicate pool and a rule over it.
pub fn column_and_rule() -> impl Strategy<Value = (TypedColumn, PredicatePool, Rule)> {
    (column(), rule_shape()).prop_filter_map("no usable rule", |(c, shape)| {
        let pool = generate_predicates(&c, &GenerateOptions::default()).ok()?;
        let rule = rule_from_shape(&pool, &shape)?;
        Some((c, pool, rule))
    })
}

fn text_operand() -> impl Strategy<Value = String> {
    prop_oneof!["(GW|AN|gw)[0-9]{0,3}", "-[FT]", "[a-c]{1,3}", "(North|north|East)"]
}

/// Any valid predicate, independent of a column.
pub fn predicate() -> impl Strategy<Value = crate::predicate::Predicate> {
    use crate::predicate::{Operand, Predicate, PredicateKind::*};
    let number = (-60i32..60).prop_map(|n| n as f64 / 2.0);
    let time = (2019i32..2024, 1u32..13, 1u32..29, 0u32..24).prop_map(|(y, m, d, h)| {
        chrono::NaiveDate::from_ymd_opt(y, m, d).unwrap().and_hms_opt(h, 0, 0).unwrap()
    });
    let comparison = prop::sample::select(vec![Greater, GreaterEquals, Less, LessEquals]);
    let text_kind = prop::sample::select(vec![Equals, Contains, StartsWith, EndsWith]);
    prop_oneof![
        (comparison.clone(), number.clone()).prop_map(|(k, n)| Predicate::number(k, n).ok()),
        (number.clone(), number).prop_map(|(a, b)| Predicate::between(a.min(b), a.max(b)).ok()),
        (comparison, time.clone()).prop_map(|(k, t)| Predicate::new(k, Operand::Time(t)).ok()),
        (time.clone(), time).prop_map(|(a, b)| Predicate::new(Between, Operand::TimeRange(a.min(b), a.max(b))).ok()),
        (text_kind, text_operand(), prop::bool::ANY)
            .prop_map(|(k, s, ci)| Predicate::text(k, s).ok().map(|p| p.with_case_insensitive(ci))),
    ]
    .prop_filter_map("invalid predicate", |p| p)
}

/// A typed cell of any kind, including empty.
pub fn cell() -> impl Strategy<Value = crate::table::CellValue> {
    use crate::table::{parse_datetime, parse_number, CellValue};
    prop_oneof![
        Just(CellValue::Empty),
        (-60i32..60).prop_map(|n| CellValue::Number(parse_number(&(n as f64 / 2.0).to_string()).unwrap())),
        (2019i32..2024, 1u32..13, 1u32..29)
            .prop_map(|(y, m, d)| CellValue::DateTime(parse_datetime(&format!("{y}-{m:02}-{d:02}")).unwrap())),
        text_operand().prop_map(CellValue::Text),
        "[0-9]{1,2}".prop_map(CellValue::Text),
    ]
}

/// Ranking weights on a coarse grid, so scores stay comparable.
pub fn ranker_weights() -> impl Strategy<Value = crate::rank::RankerWeights> {
    use crate::rank::{FeatureVector, RankerWeights};
    let w = || (-64i32..=64).prop_map(|n| n as f64 / 16.0);
    (prop::collection::vec(w(), FeatureVector::NAMES.len()), w()).prop_map(|(ws, bias)| {
        let text = FeatureVector::NAMES
            .iter()
            .zip(&ws)
            .map(|(n, w)| format!("\"{n}\": {w}"))
            .chain(std::iter::once(format!("\"bias\": {bias}")))
            .collect::<Vec<_>>()
            .join(", ");
        RankerWeights::from_json(&format!("{{{text}}}")).expect("grid weights are valid")
    })
}

/// Like [`rule_from_shape`] but without canonicalization, so duplicates,
/// contradictions and subsumed conjunctions survive.
pub fn raw_rule_from_shape(pool: &PredicatePool, shape: &[Vec<(usize, bool)>]) -> Rule {
    let disjuncts = shape
        .iter()
        .map(|conj| {
            conj.iter()
                .map(|&(seed, negated)| Literal {
                    predicate: pool.predicate(seed % pool.len()).clone(),
                    negated,
                })
                .collect()
        })
        .collect();
    Rule::from_parts(disjuncts, FormatId::new("f").unwrap()).expect("single-typed, non-empty")
}
