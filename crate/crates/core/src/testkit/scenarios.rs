//! Small reconstructed worksheets used by scenario and acceptance tests.

use crate::predicate::{Predicate, PredicateKind};
use crate::rule::{Literal, Rule};
use crate::table::{Annotation, FormatId, SourceRef, TypedColumn};

/// Work-order ids: GW and AN prefixes plus one other, some with -F or -T
/// suffixes.
pub const WORK_ORDERS: [&str; 8] = [
    "GW83475-T",
    "AN47603-F",
    "XK59718-F",
    "GW10293",
    "GW25961",
    "GW33880-F",
    "AN67637-F",
    "AN91394-T",
];

/// The user formats the fourth cell.
pub const WORK_ORDER_EXAMPLE: usize = 3;
/// Row of "AN47603-F", formatted later to widen the rule.
pub const WORK_ORDER_REFINEMENT: usize = 1;

pub fn work_orders() -> TypedColumn {
    TypedColumn::from_raw("WO", &WORK_ORDERS, SourceRef::default())
}

pub fn highlight() -> FormatId {
    FormatId::new("highlight").expect("non-empty")
}

pub fn work_order_annotation() -> Annotation {
    Annotation::new([(WORK_ORDER_EXAMPLE, highlight())])
}

pub fn refined_annotation() -> Annotation {
    Annotation::new([(WORK_ORDER_REFINEMENT, highlight()), (WORK_ORDER_EXAMPLE, highlight())])
}

fn text(kind: PredicateKind, s: &str) -> Predicate {
    Predicate::text(kind, s).expect("valid")
}

/// StartsWith("GW") and not EndsWith("-F") and not EndsWith("-T").
pub fn gw_rule() -> Rule {
    use PredicateKind::*;
    Rule::new(
        vec![vec![
            Literal::pos(text(StartsWith, "GW")),
            Literal::neg(text(EndsWith, "-F")),
            Literal::neg(text(EndsWith, "-T")),
        ]],
        highlight(),
    )
    .expect("satisfiable")
}

/// (StartsWith("GW") or StartsWith("AN")) and not EndsWith("T").
pub fn gw_or_an_rule() -> Rule {
    use PredicateKind::*;
    Rule::new(
        vec![
            vec![Literal::pos(text(StartsWith, "GW")), Literal::neg(text(EndsWith, "T"))],
            vec![Literal::pos(text(StartsWith, "AN")), Literal::neg(text(EndsWith, "T"))],
        ],
        highlight(),
    )
    .expect("satisfiable")
}

/// A numeric column in spreadsheet column B; the cells below 5 are meant.
pub const SCORES: [&str; 10] = ["7", "3", "5", "2", "8", "9", "1", "6", "4", "10"];
pub const SCORE_EXAMPLES: [usize; 2] = [1, 3];

/// Header row plus two columns; the scores are the second column.
pub fn scores_csv() -> String {
    let mut out = String::from("Item,Score\n");
    for (i, s) in SCORES.iter().enumerate() {
        out.push_str(&format!("item{},{s}\n", i + 1));
    }
    out
}

pub fn scores() -> TypedColumn {
    TypedColumn::from_raw("Score", &SCORES, SourceRef::for_index(1, true))
}

pub fn score_annotation() -> Annotation {
    Annotation::new(SCORE_EXAMPLES.iter().map(|&r| (r, highlight())))
}

pub fn less_than_five() -> Rule {
    Rule::new(
        vec![vec![Literal::pos(Predicate::number(PredicateKind::Less, 5.0).expect("finite"))]],
        highlight(),
    )
    .expect("satisfiable")
}
