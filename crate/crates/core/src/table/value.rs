use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use chrono::{NaiveDate, NaiveDateTime, NaiveTime, Timelike};

/// A finite decimal held at 15 significant digits.
///
/// Comparisons are exact on that representation, so masks computed from
/// numbers are reproducible across platforms and serialization round trips.
#[derive(Debug, Clone, Copy)]
pub struct Number(f64);

impl Number {
    /// Returns `None` for NaN or infinities.
    pub fn new(v: f64) -> Option<Number> {
        if !v.is_finite() {
            return None;
        }
        let rounded: f64 = format!("{v:.14e}").parse().ok()?;
        // -0.0 and 0.0 must be the same constant.
        Some(Number(if rounded == 0.0 { 0.0 } else { rounded }))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl PartialEq for Number {
    fn eq(&self, other: &Self) -> bool {
        self.0.to_bits() == other.0.to_bits()
    }
}

impl Eq for Number {}

impl Hash for Number {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.to_bits().hash(state)
    }
}

impl PartialOrd for Number {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Number {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CellValue {
    Number(Number),
    DateTime(NaiveDateTime),
    Text(String),
    Empty,
}

impl CellValue {
    pub fn is_empty(&self) -> bool {
        matches!(self, CellValue::Empty)
    }

    /// Canonical raw form; re-parsing it yields an equal value.
    pub fn to_raw(&self) -> String {
        match self {
            CellValue::Number(n) => n.to_string(),
            CellValue::DateTime(t) => format_datetime(t),
            CellValue::Text(s) => s.clone(),
            CellValue::Empty => String::new(),
        }
    }
}

/// Cells whose raw text is empty or whitespace only are treated as empty.
pub fn is_blank(raw: &str) -> bool {
    raw.trim().is_empty()
}

/// Spreadsheet-style number coercion: optional sign, digits with optional
/// thousands separators in groups of three, optional fraction, optional
/// trailing percent sign (value divided by 100).
pub fn parse_number(raw: &str) -> Option<Number> {
    let s = raw.trim();
    let (s, percent) = match s.strip_suffix('%') {
        Some(rest) => (rest.trim_end(), true),
        None => (s, false),
    };
    let (sign, body) = match s.as_bytes().first()? {
        b'+' => ("", &s[1..]),
        b'-' => ("-", &s[1..]),
        _ => ("", s),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (body, None),
    };
    if let Some(f) = frac_part {
        if !f.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
    }
    let int_digits = strip_thousands(int_part)?;
    let frac_digits = frac_part.unwrap_or("");
    if int_digits.is_empty() && frac_digits.is_empty() {
        return None;
    }
    let text = format!(
        "{sign}{}.{}",
        if int_digits.is_empty() { "0" } else { &int_digits },
        if frac_digits.is_empty() { "0" } else { frac_digits }
    );
    let mut v: f64 = text.parse().ok()?;
    if percent {
        v /= 100.0;
    }
    Number::new(v)
}

fn strip_thousands(int_part: &str) -> Option<String> {
    if !int_part.contains(',') {
        return int_part
            .bytes()
            .all(|b| b.is_ascii_digit())
            .then(|| int_part.to_string());
    }
    let mut groups = int_part.split(',');
    let first = groups.next()?;
    if first.is_empty() || first.len() > 3 || !first.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let mut out = first.to_string();
    for g in groups {
        if g.len() != 3 || !g.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        out.push_str(g);
    }
    Some(out)
}

const DATETIME_FORMATS: &[&str] = &[
    "%Y-%m-%dT%H:%M:%S",
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%dT%H:%M",
    "%Y-%m-%d %H:%M",
];

/// ISO-8601 dates and date-times (second resolution) plus `M/D/YYYY`.
pub fn parse_datetime(raw: &str) -> Option<NaiveDateTime> {
    let s = raw.trim();
    // Four-digit years only; chrono would otherwise accept "1-2-3".
    let iso = s.len() >= 10 && s.as_bytes()[4] == b'-' && s[..4].bytes().all(|b| b.is_ascii_digit());
    if iso {
        if s.len() == 10 {
            return NaiveDate::parse_from_str(s, "%Y-%m-%d")
                .ok()
                .map(|d| d.and_time(NaiveTime::MIN));
        }
        return DATETIME_FORMATS
            .iter()
            .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
            .map(|t| t.with_nanosecond(0).unwrap_or(t));
    }
    let parts: Vec<&str> = s.split('/').collect();
    if let [m, d, y] = parts[..] {
        let digits = |p: &str, lo: usize, hi: usize| {
            (lo..=hi).contains(&p.len()) && p.bytes().all(|b| b.is_ascii_digit())
        };
        if digits(m, 1, 2) && digits(d, 1, 2) && digits(y, 4, 4) {
            return NaiveDate::from_ymd_opt(y.parse().ok()?, m.parse().ok()?, d.parse().ok()?)
                .map(|d| d.and_time(NaiveTime::MIN));
        }
    }
    None
}

pub fn format_datetime(t: &NaiveDateTime) -> String {
    if t.time() == NaiveTime::MIN {
        t.format("%Y-%m-%d").to_string()
    } else {
        t.format("%Y-%m-%dT%H:%M:%S").to_string()
    }
}
