use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Opaque name of one visual format, e.g. `"yellow-fill"`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct FormatId(String);

impl FormatId {
    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::InvalidAnnotation("format id must be non-empty".into()));
        }
        Ok(FormatId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for FormatId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        FormatId::new(s)
    }
}

impl From<FormatId> for String {
    fn from(f: FormatId) -> String {
        f.0
    }
}

impl fmt::Display for FormatId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    pub row: usize,
    pub format: FormatId,
}

/// Formatted example cells of one column. Users are assumed to annotate
/// top-down.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub examples: Vec<Example>,
}

impl Annotation {
    pub fn new(examples: impl IntoIterator<Item = (usize, FormatId)>) -> Self {
        Annotation {
            examples: examples
                .into_iter()
                .map(|(row, format)| Example { row, format })
                .collect(),
        }
    }

    /// Shorthand for a single-format annotation.
    pub fn single(rows: &[usize], format: &str) -> Result<Self> {
        let f = FormatId::new(format)?;
        Ok(Annotation::new(rows.iter().map(|&r| (r, f.clone()))))
    }

    pub fn validate(&self, column_len: usize) -> Result<()> {
        let mut seen = HashSet::new();
        for e in &self.examples {
            if e.row >= column_len {
                return Err(Error::InvalidAnnotation(format!(
                    "row {} out of range for a column of {column_len} rows",
                    e.row
                )));
            }
            if !seen.insert(e.row) {
                return Err(Error::InvalidAnnotation(format!("row {} annotated twice", e.row)));
            }
        }
        Ok(())
    }

    /// Distinct formats ordered by the topmost row carrying them.
    pub fn formats(&self) -> Vec<FormatId> {
        let mut sorted: Vec<&Example> = self.examples.iter().collect();
        sorted.sort_by_key(|e| e.row);
        let mut out: Vec<FormatId> = Vec::new();
        for e in sorted {
            if !out.contains(&e.format) {
                out.push(e.format.clone());
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnSelector {
    Index(usize),
    Name(String),
}

impl fmt::Display for ColumnSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnSelector::Index(i) => write!(f, "#{i}"),
            ColumnSelector::Name(n) => write!(f, "{n:?}"),
        }
    }
}

/// On-disk annotation: `{"column": <name|index>, "examples": [{"row", "format"}]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationFile {
    pub column: ColumnSelector,
    pub examples: Vec<Example>,
}

impl AnnotationFile {
    pub fn from_json(text: &str) -> Result<Self> {
        crate::json::from_str(text)
    }

    pub fn annotation(&self) -> Annotation {
        Annotation {
            examples: self.examples.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Label {
    Format(FormatId),
    IntentionallyUnformatted,
    Unassigned,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionalLabeling {
    pub labels: Vec<Label>,
}

impl PositionalLabeling {
    pub fn is_pinned(&self, row: usize) -> bool {
        !matches!(self.labels[row], Label::Unassigned)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Rows above or between examples are intentionally unformatted; rows after
/// the last example are unassigned.
pub fn positional_labels(column_len: usize, ann: &Annotation) -> Result<PositionalLabeling> {
    ann.validate(column_len)?;
    let last = ann.examples.iter().map(|e| e.row).max();
    let mut labels: Vec<Label> = (0..column_len)
        .map(|row| match last {
            Some(last) if row < last => Label::IntentionallyUnformatted,
            _ => Label::Unassigned,
        })
        .collect();
    for e in &ann.examples {
        labels[e.row] = Label::Format(e.format.clone());
    }
    Ok(PositionalLabeling { labels })
}

#[cfg(test)]
mod tests {
    use super::*;

    use Label::*;

    fn fmt(s: &str) -> FormatId {
        FormatId::new(s).unwrap()
    }

    #[test]
    fn single_example_mid_column() {
        let l = positional_labels(6, &Annotation::single(&[3], "y").unwrap()).unwrap();
        assert_eq!(
            l.labels,
            vec![
                IntentionallyUnformatted,
                IntentionallyUnformatted,
                IntentionallyUnformatted,
                Format(fmt("y")),
                Unassigned,
                Unassigned
            ]
        );
    }

    #[test]
    fn example_on_first_row() {
        let l = positional_labels(4, &Annotation::single(&[0], "y").unwrap()).unwrap();
        assert_eq!(l.labels, vec![Format(fmt("y")), Unassigned, Unassigned, Unassigned]);
    }

    #[test]
    fn rows_between_examples() {
        let l = positional_labels(7, &Annotation::single(&[4, 1], "y").unwrap()).unwrap();
        assert_eq!(
            l.labels,
            vec![
                IntentionallyUnformatted,
                Format(fmt("y")),
                IntentionallyUnformatted,
                IntentionallyUnformatted,
                Format(fmt("y")),
                Unassigned,
                Unassigned
            ]
        );
    }

    #[test]
    fn invalid_annotations() {
        assert!(matches!(
            positional_labels(3, &Annotation::single(&[3], "y").unwrap()),
            Err(Error::InvalidAnnotation(_))
        ));
        assert!(matches!(
            positional_labels(3, &Annotation::single(&[1, 1], "y").unwrap()),
            Err(Error::InvalidAnnotation(_))
        ));
        assert!(FormatId::new("").is_err());
    }

    #[test]
    fn formats_in_top_down_order() {
        let ann = Annotation::new([(5, fmt("b")), (2, fmt("a")), (7, fmt("b"))]);
        assert_eq!(ann.formats(), vec![fmt("a"), fmt("b")]);
    }

    #[test]
    fn annotation_file_json() {
        let f = AnnotationFile::from_json(r#"{"column":"WO","examples":[{"row":3,"format":"yellow"}]}"#).unwrap();
        assert_eq!(f.column, ColumnSelector::Name("WO".into()));
        let f = AnnotationFile::from_json(r#"{"column":1,"examples":[]}"#).unwrap();
        assert_eq!(f.column, ColumnSelector::Index(1));
        let err = AnnotationFile::from_json(r#"{"column":1,"examples":[{"row":0,"format":""}]}"#).unwrap_err();
        assert!(matches!(err, Error::Schema { ref path, .. } if path.starts_with("/examples/0")), "{err:?}");
    }

    proptest::proptest! {
        #[test]
        fn labeling_partitions_rows(len in 1usize..40, picks in proptest::collection::btree_set(0usize..40, 0..5)) {
            let rows: Vec<usize> = picks.into_iter().filter(|&r| r < len).collect();
            let ann = Annotation::single(&rows, "f").unwrap();
            let l = positional_labels(len, &ann).unwrap();
            let last = rows.iter().max().copied();
            for (i, label) in l.labels.iter().enumerate() {
                let expected = if rows.contains(&i) {
                    Format(fmt("f"))
                } else if last.is_some_and(|m| i < m) {
                    IntentionallyUnformatted
                } else {
                    Unassigned
                };
                proptest::prop_assert_eq!(label, &expected);
            }
        }
    }
}
