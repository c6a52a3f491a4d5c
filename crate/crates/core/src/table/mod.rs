//! Typed columns parsed from delimited text, and the user's formatting examples.

mod annotation;
mod value;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use annotation::{
    positional_labels, Annotation, AnnotationFile, ColumnSelector, Example, FormatId, Label,
    PositionalLabeling,
};
pub use value::{format_datetime, is_blank, parse_datetime, parse_number, CellValue, Number};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnType {
    Numeric,
    DateTime,
    Text,
}

impl ColumnType {
    pub fn as_str(self) -> &'static str {
        match self {
            ColumnType::Numeric => "numeric",
            ColumnType::DateTime => "datetime",
            ColumnType::Text => "text",
        }
    }
}

impl fmt::Display for ColumnType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Spreadsheet coordinates of a column's first data cell, e.g. `A2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceRef {
    pub column: String,
    pub first_row: u32,
}

impl Default for SourceRef {
    fn default() -> Self {
        SourceRef {
            column: "A".into(),
            first_row: 2,
        }
    }
}

impl SourceRef {
    pub fn for_index(index: usize, has_header: bool) -> Self {
        SourceRef {
            column: column_letters(index),
            first_row: if has_header { 2 } else { 1 },
        }
    }

    pub fn cell(&self) -> String {
        format!("{}{}", self.column, self.first_row)
    }
}

/// `0 → A`, `25 → Z`, `26 → AA`.
pub fn column_letters(mut index: usize) -> String {
    let mut out = Vec::new();
    loop {
        out.push(b'A' + (index % 26) as u8);
        if index < 26 {
            break;
        }
        index = index / 26 - 1;
    }
    out.reverse();
    String::from_utf8(out).expect("ascii")
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypedColumn {
    pub name: String,
    pub column_type: ColumnType,
    pub cells: Vec<CellValue>,
    pub source_ref: SourceRef,
}

impl TypedColumn {
    /// Types the raw cells with [`infer_type`] and converts each one.
    pub fn from_raw<S: AsRef<str>>(name: impl Into<String>, raw: &[S], source_ref: SourceRef) -> Self {
        let column_type = infer_type(raw);
        let cells = raw
            .iter()
            .map(|r| {
                let r = r.as_ref();
                if is_blank(r) {
                    return CellValue::Empty;
                }
                match column_type {
                    ColumnType::Numeric => CellValue::Number(parse_number(r).expect("typed")),
                    ColumnType::DateTime => CellValue::DateTime(parse_datetime(r).expect("typed")),
                    ColumnType::Text => CellValue::Text(r.to_string()),
                }
            })
            .collect();
        TypedColumn {
            name: name.into(),
            column_type,
            cells,
            source_ref,
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn non_empty_count(&self) -> usize {
        self.cells.iter().filter(|c| !c.is_empty()).count()
    }

    pub fn to_raw(&self) -> Vec<String> {
        self.cells.iter().map(CellValue::to_raw).collect()
    }
}

/// Numeric iff every non-blank cell is a number, DateTime iff every one is a
/// date, otherwise Text. Blank cells do not vote; an all-blank list is Text.
pub fn infer_type<S: AsRef<str>>(raw: &[S]) -> ColumnType {
    let mut filled = raw.iter().map(AsRef::as_ref).filter(|r| !is_blank(r)).peekable();
    if filled.peek().is_none() {
        return ColumnType::Text;
    }
    let (mut numeric, mut datetime) = (true, true);
    for r in filled {
        numeric &= parse_number(r).is_some();
        datetime &= parse_datetime(r).is_some();
        if !numeric && !datetime {
            return ColumnType::Text;
        }
    }
    if numeric {
        ColumnType::Numeric
    } else {
        ColumnType::DateTime
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ParseOptions {
    pub delimiter: u8,
    pub has_header: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            delimiter: b',',
            has_header: true,
        }
    }
}

/// Parses RFC-4180-style delimited text into one typed column per field.
pub fn parse_table(raw: &[u8], options: ParseOptions) -> Result<Vec<TypedColumn>> {
    let text = std::str::from_utf8(raw)
        .map_err(|e| Error::MalformedInput(format!("input is not UTF-8: {e}")))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(false)
        .flexible(false)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<String>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::MalformedInput(e.to_string()))?;
        rows.push(record.iter().map(str::to_string).collect());
    }
    let header = if options.has_header && !rows.is_empty() {
        Some(rows.remove(0))
    } else {
        None
    };
    let width = header.as_ref().or(rows.first()).map_or(0, Vec::len);
    if rows.is_empty() || width == 0 {
        return Err(Error::EmptyTable);
    }
    Ok((0..width)
        .map(|c| {
            let raw: Vec<&str> = rows.iter().map(|r| r[c].as_str()).collect();
            let name = header
                .as_ref()
                .map_or_else(|| column_letters(c), |h| h[c].clone());
            TypedColumn::from_raw(name, &raw, SourceRef::for_index(c, options.has_header))
        })
        .collect())
}

/// Picks one column out of a parsed table by name or 0-based index.
pub fn select_column(columns: Vec<TypedColumn>, selector: &ColumnSelector) -> Result<TypedColumn> {
    let found = match selector {
        ColumnSelector::Index(i) => columns.into_iter().nth(*i),
        ColumnSelector::Name(n) => columns.into_iter().find(|c| &c.name == n),
    };
    found.ok_or_else(|| Error::InvalidAnnotation(format!("no column {selector}")))
}
