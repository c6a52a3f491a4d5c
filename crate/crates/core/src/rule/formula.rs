//! Excel-style formula emission.

use chrono::{Datelike, NaiveDateTime, NaiveTime, Timelike};

use super::{Literal, Rule};
use crate::predicate::{Operand, PredicateKind};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FormulaOptions {
    /// Emit `¬a ∧ ¬b` as `NOT(OR(a, b))`.
    pub fold_negations: bool,
}

/// Renders a canonical rule as a formula over `cell_ref` (e.g. `A2`).
///
/// Literals shared by every conjunction are factored out, so
/// `(p ∧ r) ∨ (q ∧ r)` becomes `AND(OR(p, q), r)`.
pub fn emit_formula(rule: &Rule, cell_ref: &str, options: FormulaOptions) -> String {
    let disjuncts = rule.disjuncts();
    let common: Vec<&Literal> = if disjuncts.len() > 1 {
        disjuncts[0]
            .iter()
            .filter(|l| disjuncts[1..].iter().all(|c| c.contains(l)))
            .collect()
    } else {
        Vec::new()
    };
    let conj = |lits: Vec<&Literal>| conjunction(&lits, cell_ref, options);
    if common.is_empty() {
        let parts: Vec<String> = disjuncts.iter().map(|c| conj(c.iter().collect())).collect();
        return call("OR", parts);
    }
    let residual: Vec<String> = disjuncts
        .iter()
        .map(|c| conj(c.iter().filter(|l| !common.contains(l)).collect()))
        .collect();
    let mut parts = vec![call("OR", residual)];
    parts.extend(literal_parts(&common, cell_ref, options));
    call("AND", parts)
}

fn conjunction(lits: &[&Literal], cell_ref: &str, options: FormulaOptions) -> String {
    call("AND", literal_parts(lits, cell_ref, options))
}

fn literal_parts(lits: &[&Literal], cell_ref: &str, options: FormulaOptions) -> Vec<String> {
    let negated = lits.iter().filter(|l| l.negated).count();
    if options.fold_negations && negated > 1 {
        let mut parts: Vec<String> = lits
            .iter()
            .filter(|l| !l.negated)
            .map(|l| literal(l, cell_ref))
            .collect();
        let inner = lits
            .iter()
            .filter(|l| l.negated)
            .map(|l| atom(l, cell_ref))
            .collect();
        parts.push(format!("NOT({})", call("OR", inner)));
        parts
    } else {
        lits.iter().map(|l| literal(l, cell_ref)).collect()
    }
}

/// `AND`/`OR` with a single argument collapse to the argument.
fn call(name: &str, mut args: Vec<String>) -> String {
    if args.len() == 1 {
        return args.pop().expect("one");
    }
    format!("{name}({})", args.join(", "))
}

fn literal(l: &Literal, cell_ref: &str) -> String {
    let a = atom(l, cell_ref);
    if l.negated {
        format!("NOT({a})")
    } else {
        a
    }
}

fn atom(l: &Literal, r: &str) -> String {
    let p = &l.predicate;
    match (p.kind(), p.operand()) {
        (PredicateKind::Between, Operand::NumberRange(lo, hi)) => format!("AND({r}>={lo}, {r}<={hi})"),
        (PredicateKind::Between, Operand::TimeRange(lo, hi)) => {
            format!("AND({r}>={}, {r}<={})", date(lo), date(hi))
        }
        (kind, Operand::Number(n)) => format!("{r}{}{n}", comparison(kind)),
        (kind, Operand::Time(t)) => format!("{r}{}{}", comparison(kind), date(t)),
        (PredicateKind::Equals, Operand::Text(s)) => format!("{r}={}", quote(s)),
        (PredicateKind::StartsWith, Operand::Text(s)) => {
            format!("LEFT({r},{})={}", s.chars().count(), quote(s))
        }
        (PredicateKind::EndsWith, Operand::Text(s)) => {
            format!("RIGHT({r},{})={}", s.chars().count(), quote(s))
        }
        (PredicateKind::Contains, Operand::Text(s)) => format!("ISNUMBER(SEARCH({},{r}))", quote(&search_escape(s))),
        (kind, operand) => unreachable!("{kind:?} with {operand:?} is not constructible"),
    }
}

fn comparison(kind: PredicateKind) -> &'static str {
    match kind {
        PredicateKind::Greater => ">",
        PredicateKind::GreaterEquals => ">=",
        PredicateKind::Less => "<",
        PredicateKind::LessEquals => "<=",
        other => unreachable!("{other:?} is not a comparison"),
    }
}

fn date(t: &NaiveDateTime) -> String {
    let d = format!("DATE({},{},{})", t.year(), t.month(), t.day());
    if t.time() == NaiveTime::MIN {
        d
    } else {
        format!("{d}+TIME({},{},{})", t.hour(), t.minute(), t.second())
    }
}

/// SEARCH treats `*`, `?` and `~` as wildcard syntax.
fn search_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        if matches!(c, '*' | '?' | '~') {
            out.push('~');
        }
        out.push(c);
    }
    out
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predicate::Predicate;
    use crate::rule::Rule;
    use crate::table::{parse_datetime, FormatId};

    use PredicateKind::*;

    fn rule(disjuncts: Vec<Vec<Literal>>) -> Rule {
        Rule::new(disjuncts, FormatId::new("f").unwrap()).unwrap()
    }

    fn t(kind: PredicateKind, s: &str) -> Predicate {
        Predicate::text(kind, s).unwrap()
    }

    const FLAT: FormulaOptions = FormulaOptions { fold_negations: false };
    const FOLD: FormulaOptions = FormulaOptions { fold_negations: true };

    fn example2() -> Rule {
        rule(vec![vec![
            Literal::pos(t(StartsWith, "GW")),
            Literal::neg(t(EndsWith, "-F")),
            Literal::neg(t(EndsWith, "-T")),
        ]])
    }

    #[test]
    fn example_two_flat_and_folded() {
        assert_eq!(
            emit_formula(&example2(), "A2", FLAT),
            r#"AND(LEFT(A2,2)="GW", NOT(RIGHT(A2,2)="-F"), NOT(RIGHT(A2,2)="-T"))"#
        );
        assert_eq!(
            emit_formula(&example2(), "A2", FOLD),
            r#"AND(LEFT(A2,2)="GW", NOT(OR(RIGHT(A2,2)="-F", RIGHT(A2,2)="-T")))"#
        );
    }

    #[test]
    fn shared_literal_is_factored() {
        let not_t = Literal::neg(t(EndsWith, "T"));
        let r = rule(vec![
            vec![Literal::pos(t(StartsWith, "GW")), not_t.clone()],
            vec![Literal::pos(t(StartsWith, "AN")), not_t],
        ]);
        assert_eq!(
            emit_formula(&r, "A2", FOLD),
            r#"AND(OR(LEFT(A2,2)="AN", LEFT(A2,2)="GW"), NOT(RIGHT(A2,1)="T"))"#
        );
    }

    #[test]
    fn numeric_literal_is_unquoted() {
        let r = rule(vec![vec![Literal::pos(Predicate::number(Less, 5.0).unwrap())]]);
        assert_eq!(emit_formula(&r, "B2", FLAT), "B2<5");
        let b = rule(vec![vec![Literal::pos(Predicate::between(1.5, 3.0).unwrap())]]);
        assert_eq!(emit_formula(&b, "C3", FLAT), "AND(C3>=1.5, C3<=3)");
    }

    #[test]
    fn disjunction_contains_equals_and_dates() {
        let r = rule(vec![
            vec![Literal::pos(t(Equals, "North"))],
            vec![Literal::pos(t(Contains, "say \"hi\""))],
        ]);
        assert_eq!(
            emit_formula(&r, "A2", FLAT),
            r#"OR(A2="North", ISNUMBER(SEARCH("say ""hi""",A2)))"#
        );
        let w = rule(vec![vec![Literal::pos(t(Contains, "a*b?~"))]]);
        assert_eq!(emit_formula(&w, "A2", FLAT), r#"ISNUMBER(SEARCH("a~*b~?~~",A2))"#);
        let d = parse_datetime("2021-03-01").unwrap();
        let dt = parse_datetime("2021-03-01T08:30:00").unwrap();
        let r = rule(vec![vec![
            Literal::pos(Predicate::new(GreaterEquals, Operand::Time(d)).unwrap()),
            Literal::neg(Predicate::new(Greater, Operand::Time(dt)).unwrap()),
        ]]);
        assert_eq!(
            emit_formula(&r, "D2", FLAT),
            "AND(NOT(D2>DATE(2021,3,1)+TIME(8,30,0)), D2>=DATE(2021,3,1))"
        );
    }
}
