//! A tiny evaluator for the formula dialect the emitter produces, written
//! independently of rule execution so the two can be compared.
//!
//! Supported: `AND`, `OR`, `NOT`, `LEFT`, `RIGHT`, `ISNUMBER`, `SEARCH`,
//! `DATE`, `TIME`, `+`, unary `-`, comparisons, string and number literals,
//! and a single cell reference. Dates are spreadsheet serial numbers.

use chrono::{NaiveDate, NaiveDateTime, Timelike};

use crate::table::{CellValue, TypedColumn};

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Num(f64),
    Str(String),
    Bool(bool),
    Err,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Str(String),
    Ident(String),
    Op(String),
    LParen,
    RParen,
    Comma,
}

fn tokenize(src: &str) -> Result<Vec<Tok>, String> {
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' => i += 1,
            '(' => {
                out.push(Tok::LParen);
                i += 1
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1
            }
            ',' => {
                out.push(Tok::Comma);
                i += 1
            }
            '"' => {
                let mut s = String::new();
                i += 1;
                loop {
                    match chars.get(i) {
                        None => return Err("unterminated string".into()),
                        Some('"') if chars.get(i + 1) == Some(&'"') => {
                            s.push('"');
                            i += 2;
                        }
                        Some('"') => {
                            i += 1;
                            break;
                        }
                        Some(&ch) => {
                            s.push(ch);
                            i += 1;
                        }
                    }
                }
                out.push(Tok::Str(s));
            }
            '<' | '>' | '=' | '+' | '-' => {
                let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
                if matches!(two.as_str(), "<=" | ">=" | "<>") {
                    out.push(Tok::Op(two));
                    i += 2;
                } else {
                    out.push(Tok::Op(c.to_string()));
                    i += 1;
                }
            }
            d if d.is_ascii_digit() || d == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                out.push(Tok::Num(s.parse().map_err(|_| format!("bad number {s}"))?));
            }
            a if a.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                out.push(Tok::Ident(chars[start..i].iter().collect()));
            }
            other => return Err(format!("unexpected {other:?}")),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    cell_ref: &'a str,
    cell: &'a CellValue,
    case_insensitive: bool,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Result<Tok, String> {
        let t = self.toks.get(self.pos).cloned().ok_or("unexpected end")?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, t: Tok) -> Result<(), String> {
        let got = self.next()?;
        if got == t {
            Ok(())
        } else {
            Err(format!("expected {t:?}, got {got:?}"))
        }
    }

    fn expr(&mut self) -> Result<Value, String> {
        let lhs = self.additive()?;
        let op = match self.peek() {
            Some(Tok::Op(op)) if op != "+" && op != "-" => op.clone(),
            _ => return Ok(lhs),
        };
        self.pos += 1;
        let rhs = self.additive()?;
        Ok(self.compare(&op, lhs, rhs))
    }

    fn compare(&self, op: &str, a: Value, b: Value) -> Value {
        let ord = match (a, b) {
            (Value::Num(x), Value::Num(y)) => x.partial_cmp(&y),
            (Value::Str(x), Value::Str(y)) => {
                if self.case_insensitive {
                    Some(x.to_lowercase().cmp(&y.to_lowercase()))
                } else {
                    Some(x.cmp(&y))
                }
            }
            (Value::Err, _) | (_, Value::Err) => return Value::Err,
            // Spreadsheets order numbers before text; only equality matters here.
            _ => None,
        };
        let Some(ord) = ord else {
            return Value::Bool(op == "<>");
        };
        use std::cmp::Ordering::*;
        Value::Bool(match op {
            "=" => ord == Equal,
            "<>" => ord != Equal,
            "<" => ord == Less,
            "<=" => ord != Greater,
            ">" => ord == Greater,
            ">=" => ord != Less,
            _ => return Value::Err,
        })
    }

    fn additive(&mut self) -> Result<Value, String> {
        let mut acc = self.unary()?;
        while matches!(self.peek(), Some(Tok::Op(op)) if op == "+") {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = match (acc, rhs) {
                (Value::Num(a), Value::Num(b)) => Value::Num(a + b),
                _ => Value::Err,
            };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Value, String> {
        if matches!(self.peek(), Some(Tok::Op(op)) if op == "-") {
            self.pos += 1;
            return Ok(match self.unary()? {
                Value::Num(n) => Value::Num(-n),
                _ => Value::Err,
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Value, String> {
        match self.next()? {
            Tok::Num(n) => Ok(Value::Num(n)),
            Tok::Str(s) => Ok(Value::Str(s)),
            Tok::LParen => {
                let v = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(v)
            }
            Tok::Ident(name) if self.peek() == Some(&Tok::LParen) => {
                self.pos += 1;
                let mut args = Vec::new();
                if self.peek() != Some(&Tok::RParen) {
                    loop {
                        args.push(self.expr()?);
                        if self.peek() == Some(&Tok::Comma) {
                            self.pos += 1;
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::RParen)?;
                self.call(&name, args)
            }
            Tok::Ident(name) if name == self.cell_ref => Ok(cell_value(self.cell)),
            t => Err(format!("unexpected token {t:?}")),
        }
    }

    fn call(&self, name: &str, args: Vec<Value>) -> Result<Value, String> {
        let arity = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(format!("{name} takes {n} arguments"))
            }
        };
        Ok(match name {
            "AND" | "OR" => {
                if args.is_empty() {
                    return Err(format!("{name} needs arguments"));
                }
                let mut bools = Vec::new();
                for a in &args {
                    match a {
                        Value::Bool(b) => bools.push(*b),
                        _ => return Ok(Value::Err),
                    }
                }
                Value::Bool(if name == "AND" {
                    bools.iter().all(|&b| b)
                } else {
                    bools.iter().any(|&b| b)
                })
            }
            "NOT" => {
                arity(1)?;
                match &args[0] {
                    Value::Bool(b) => Value::Bool(!b),
                    _ => Value::Err,
                }
            }
            "LEFT" | "RIGHT" => {
                arity(2)?;
                let (Some(s), Value::Num(n)) = (as_text(&args[0]), &args[1]) else {
                    return Ok(Value::Err);
                };
                let chars: Vec<char> = s.chars().collect();
                let n = (*n as usize).min(chars.len());
                let part = if name == "LEFT" { &chars[..n] } else { &chars[chars.len() - n..] };
                Value::Str(part.iter().collect())
            }
            "SEARCH" => {
                arity(2)?;
                let (Some(needle), Some(hay)) = (as_text(&args[0]), as_text(&args[1])) else {
                    return Ok(Value::Err);
                };
                match search(&needle, &hay, self.case_insensitive) {
                    Some(p) => Value::Num(p as f64),
                    None => Value::Err,
                }
            }
            "ISNUMBER" => {
                arity(1)?;
                Value::Bool(matches!(args[0], Value::Num(_)))
            }
            "DATE" => {
                arity(3)?;
                let [Value::Num(y), Value::Num(m), Value::Num(d)] = &args[..] else {
                    return Ok(Value::Err);
                };
                match NaiveDate::from_ymd_opt(*y as i32, *m as u32, *d as u32) {
                    Some(date) => Value::Num(day_serial(date)),
                    None => Value::Err,
                }
            }
            "TIME" => {
                arity(3)?;
                let [Value::Num(h), Value::Num(m), Value::Num(s)] = &args[..] else {
                    return Ok(Value::Err);
                };
                Value::Num((h * 3600.0 + m * 60.0 + s) / 86400.0)
            }
            other => return Err(format!("unsupported function {other}")),
        })
    }
}

fn as_text(v: &Value) -> Option<String> {
    match v {
        Value::Str(s) => Some(s.clone()),
        Value::Num(n) => Some(n.to_string()),
        _ => None,
    }
}

/// 1-based char position of `needle` in `hay`, honouring `~` escapes and the
/// `*` / `?` wildcards.
fn search(needle: &str, hay: &str, case_insensitive: bool) -> Option<usize> {
    #[derive(Clone, Copy, PartialEq)]
    enum Pat {
        Lit(char),
        Any,
        Star,
    }
    let norm = |s: &str| if case_insensitive { s.to_lowercase() } else { s.to_string() };
    let mut pat = Vec::new();
    let mut it = norm(needle).chars().collect::<Vec<_>>().into_iter();
    while let Some(c) = it.next() {
        pat.push(match c {
            '~' => Pat::Lit(it.next().unwrap_or('~')),
            '?' => Pat::Any,
            '*' => Pat::Star,
            c => Pat::Lit(c),
        });
    }
    fn matches_at(pat: &[Pat], hay: &[char]) -> bool {
        match pat.split_first() {
            None => true,
            Some((Pat::Star, rest)) => (0..=hay.len()).any(|k| matches_at(rest, &hay[k..])),
            Some((p, rest)) => match hay.split_first() {
                Some((h, tail)) => (*p == Pat::Any || *p == Pat::Lit(*h)) && matches_at(rest, tail),
                None => false,
            },
        }
    }
    let hay: Vec<char> = norm(hay).chars().collect();
    (0..=hay.len()).find(|&k| matches_at(&pat, &hay[k..])).map(|k| k + 1)
}

fn day_serial(d: NaiveDate) -> f64 {
    let epoch = NaiveDate::from_ymd_opt(1899, 12, 30).unwrap();
    (d - epoch).num_days() as f64
}

fn datetime_serial(t: &NaiveDateTime) -> f64 {
    let secs = t.time().num_seconds_from_midnight() as f64;
    day_serial(t.date()) + secs / 86400.0
}

fn cell_value(cell: &CellValue) -> Value {
    match cell {
        CellValue::Number(n) => Value::Num(n.get()),
        CellValue::DateTime(t) => Value::Num(datetime_serial(t)),
        CellValue::Text(s) => Value::Str(s.clone()),
        CellValue::Empty => Value::Err,
    }
}

/// Evaluates a boolean formula for one cell. Errors are syntax problems;
/// a formula that evaluates to a spreadsheet error counts as false.
pub fn eval_formula(formula: &str, cell_ref: &str, cell: &CellValue, case_insensitive: bool) -> Result<bool, String> {
    let mut p = Parser {
        toks: tokenize(formula)?,
        pos: 0,
        cell_ref,
        cell,
        case_insensitive,
    };
    let v = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(format!("trailing input at token {}", p.pos));
    }
    match v {
        Value::Bool(b) => Ok(b),
        Value::Err => Ok(false),
        other => Err(format!("formula is not boolean: {other:?}")),
    }
}

/// Mask of a formula over a column; empty cells are never formatted.
pub fn formula_mask(formula: &str, column: &TypedColumn, case_insensitive: bool) -> Result<Vec<bool>, String> {
    let cell_ref = column.source_ref.cell();
    column
        .cells
        .iter()
        .map(|c| if c.is_empty() { Ok(false) } else { eval_formula(formula, &cell_ref, c, case_insensitive) })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::{SourceRef, TypedColumn};

    fn mask(f: &str, raw: &[&str]) -> Vec<bool> {
        formula_mask(f, &TypedColumn::from_raw("c", raw, SourceRef::default()), false).unwrap()
    }

    #[test]
    fn evaluates_work_order_formulas() {
        let ids = ["GW105", "GW99-F", "AN3", "GW2-T"];
        let f = r#"AND(LEFT(A2,2)="GW", NOT(OR(RIGHT(A2,2)="-F", RIGHT(A2,2)="-T")))"#;
        assert_eq!(mask(f, &ids), [true, false, false, false]);
        assert_eq!(mask("A2<5", &["3", "7", "", "5"]), [true, false, false, false]);
        assert_eq!(mask("AND(A2>=-1.5, A2<=3)", &["-2", "-1", "3"]), [false, true, true]);
        assert_eq!(mask(r#"A2="5""#, &["5"]), [false]);
    }

    #[test]
    fn search_and_dates() {
        assert_eq!(mask(r#"ISNUMBER(SEARCH("b~*",A2))"#, &["ab*", "abc"]), [true, false]);
        assert_eq!(mask(r#"ISNUMBER(SEARCH("a?c",A2))"#, &["xabc", "ac"]), [true, false]);
        let dates = ["2021-03-01", "2021-03-01 09:00", "2021-02-28"];
        assert_eq!(mask("A2>=DATE(2021,3,1)+TIME(8,30,0)", &dates), [false, true, false]);
        assert_eq!(mask("A2<DATE(2021,3,1)", &dates), [false, false, true]);
    }

    #[test]
    fn case_modes() {
        let c = TypedColumn::from_raw("c", &["GW1", "gw2"], SourceRef::default());
        assert_eq!(formula_mask(r#"LEFT(A2,2)="GW""#, &c, false).unwrap(), [true, false]);
        assert_eq!(formula_mask(r#"LEFT(A2,2)="GW""#, &c, true).unwrap(), [true, true]);
    }

    #[test]
    fn rejects_malformed() {
        let cell = CellValue::Empty;
        assert!(eval_formula("AND(", "A2", &cell, false).is_err());
        assert!(eval_formula("FOO(1)", "A2", &cell, false).is_err());
        assert!(eval_formula("1 2", "A2", &cell, false).is_err());
    }
}
