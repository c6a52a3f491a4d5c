//! Request bodies shared by the CLI and the HTTP service.
//!
//! Both front ends build a [`SuggestBody`] or [`ApplyBody`] and go through
//! [`SuggestBody::prepare`] / [`ApplyBody::prepare`], so identical inputs
//! reach the engine identically.

use cfsynth_core::engine::{SuggestOptions, DEFAULT_TOP_K};
use cfsynth_core::rule::FormulaOptions;
use cfsynth_core::synth::SynthesisConfig;
use cfsynth_core::table::{parse_table, select_column, ColumnSelector, Example, ParseOptions, SourceRef};
use cfsynth_core::{Annotation, Error, Result, Rule, SuggestRequest, TypedColumn};
use serde::{Deserialize, Serialize};

/// Inline CSV text, or a single column of raw values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TableInput {
    Csv(String),
    Column(ColumnInput),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnInput {
    pub name: String,
    pub values: Vec<String>,
    /// Where the first value sits in the sheet; `A2` when absent.
    #[serde(default)]
    pub source_ref: Option<SourceRef>,
}

/// CSV dialect of a [`TableInput::Csv`] table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TableOptions {
    pub has_header: bool,
    pub delimiter: char,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions {
            has_header: true,
            delimiter: ',',
        }
    }
}

impl TableInput {
    pub fn column(&self, selector: &ColumnSelector, options: TableOptions) -> Result<TypedColumn> {
        match self {
            TableInput::Csv(text) => {
                if !options.delimiter.is_ascii() {
                    return Err(Error::Config("delimiter must be a single ASCII character".into()));
                }
                let parse = ParseOptions {
                    delimiter: options.delimiter as u8,
                    has_header: options.has_header,
                };
                select_column(parse_table(text.as_bytes(), parse)?, selector)
            }
            TableInput::Column(c) => {
                let matches = match selector {
                    ColumnSelector::Index(i) => *i == 0,
                    ColumnSelector::Name(n) => *n == c.name,
                };
                if !matches {
                    return Err(Error::InvalidAnnotation(format!("no column {selector}")));
                }
                if c.values.is_empty() {
                    return Err(Error::EmptyTable);
                }
                let source = c.source_ref.clone().unwrap_or_default();
                Ok(TypedColumn::from_raw(c.name.clone(), &c.values, source))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RequestOptions {
    pub case_insensitive: bool,
    /// Emit `¬a ∧ ¬b` as `NOT(OR(a, b))`.
    pub fold_negations: bool,
    pub table: TableOptions,
    pub config: SynthesisConfig,
}

fn default_top_k() -> usize {
    DEFAULT_TOP_K
}

/// `POST /v1/suggest` body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuggestBody {
    pub table: TableInput,
    pub column: ColumnSelector,
    pub examples: Vec<Example>,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
    #[serde(default)]
    pub options: RequestOptions,
}

impl SuggestBody {
    pub fn prepare(&self) -> Result<SuggestRequest> {
        let column = self.table.column(&self.column, self.options.table)?;
        let annotation = Annotation {
            examples: self.examples.clone(),
        };
        annotation.validate(column.len())?;
        Ok(SuggestRequest {
            column,
            annotation,
            config: self.options.config,
            top_k: self.top_k,
            options: SuggestOptions {
                case_insensitive: self.options.case_insensitive,
                fold_negations: self.options.fold_negations,
                ..SuggestOptions::default()
            },
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApplyOptions {
    pub fold_negations: bool,
    pub table: TableOptions,
}

/// `POST /v1/apply` body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApplyBody {
    pub table: TableInput,
    pub column: ColumnSelector,
    pub rule: Rule,
    #[serde(default)]
    pub options: ApplyOptions,
}

impl ApplyBody {
    pub fn prepare(&self) -> Result<(TypedColumn, FormulaOptions)> {
        let column = self.table.column(&self.column, self.options.table)?;
        Ok((
            column,
            FormulaOptions {
                fold_negations: self.options.fold_negations,
            },
        ))
    }
}

/// Reads a column selector from a command-line argument: digits select by
/// 0-based index, anything else by header name.
pub fn parse_selector(arg: &str) -> ColumnSelector {
    match arg.parse() {
        Ok(i) => ColumnSelector::Index(i),
        Err(_) => ColumnSelector::Name(arg.to_string()),
    }
}
