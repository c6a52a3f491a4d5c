//! Semi-supervised clustering of a column's cells over predicate signatures.
//!
//! Cluster 0 collects cells that should stay unformatted; cluster `i > 0`
//! collects cells that should receive the `i`-th format (formats numbered
//! top-down). Example cells and the unformatted cells above them are pinned.
//! Every other non-empty cell moves, each round, to the cluster minimizing
//! the sum of its smallest and largest distance to that cluster's members.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::predicate::PredicateSignature;
use crate::table::{FormatId, Label, PositionalLabeling, TypedColumn};

pub const DEFAULT_MAX_ITERATIONS: usize = 20;

/// Cluster id of the no-format cluster.
pub const NO_FORMAT: usize = 0;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Clustering {
    pub k: usize,
    /// `formats[i]` is the format of cluster `i + 1`.
    pub formats: Vec<FormatId>,
    pub assignment: Vec<usize>,
    pub pinned: Vec<bool>,
    /// Reassignment rounds executed.
    pub rounds: usize,
    /// Assignment after initialization and after every round.
    pub history: Vec<Vec<usize>>,
}

impl Clustering {
    pub fn cluster_of(&self, format: &FormatId) -> Option<usize> {
        self.formats.iter().position(|f| f == format).map(|i| i + 1)
    }
}

/// Size of the symmetric difference.
pub fn distance(a: &PredicateSignature, b: &PredicateSignature) -> usize {
    a.0.xor_count(&b.0)
}

/// `min + max` distance from `row` to the members.
pub fn assignment_score(row: &PredicateSignature, members: &[&PredicateSignature]) -> Result<usize> {
    score_rows(row, members.iter().copied()).ok_or(Error::EmptyCluster)
}

fn score_rows<'a>(row: &PredicateSignature, members: impl Iterator<Item = &'a PredicateSignature>) -> Option<usize> {
    let mut bounds: Option<(usize, usize)> = None;
    for m in members {
        let d = distance(row, m);
        bounds = Some(match bounds {
            None => (d, d),
            Some((lo, hi)) => (lo.min(d), hi.max(d)),
        });
    }
    bounds.map(|(lo, hi)| lo + hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClusterOptions {
    pub max_iterations: usize,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        ClusterOptions {
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

pub fn cluster(
    column: &TypedColumn,
    labeling: &PositionalLabeling,
    sigs: &[PredicateSignature],
    options: ClusterOptions,
) -> Result<Clustering> {
    let n = labeling.len();
    assert_eq!(sigs.len(), n, "one signature per row");
    assert_eq!(column.len(), n, "one label per row");

    let mut formats: Vec<FormatId> = Vec::new();
    for label in &labeling.labels {
        if let Label::Format(f) = label {
            if !formats.contains(f) {
                formats.push(f.clone());
            }
        }
    }
    if formats.is_empty() {
        return Err(Error::NoExamples);
    }
    let k = formats.len() + 1;
    let pool_size = sigs.first().map_or(0, |s| s.0.len());

    let active: Vec<bool> = column.cells.iter().map(|c| !c.is_empty()).collect();
    let pinned: Vec<bool> = (0..n).map(|i| labeling.is_pinned(i)).collect();
    let mut assignment: Vec<usize> = labeling
        .labels
        .iter()
        .map(|l| match l {
            Label::Format(f) => formats.iter().position(|g| g == f).expect("collected") + 1,
            _ => NO_FORMAT,
        })
        .collect();
    // Empty cells never match a rule; they stay in the no-format cluster and
    // take no part in distances.
    let free: Vec<usize> = (0..n).filter(|&i| !pinned[i] && active[i]).collect();

    let pinned_members: Vec<Vec<usize>> = (0..k)
        .map(|c| (0..n).filter(|&i| pinned[i] && active[i] && assignment[i] == c).collect())
        .collect();
    for &row in &free {
        assignment[row] = best_cluster(row, sigs, &pinned_members, None);
    }
    let mut history = vec![assignment.clone()];
    let mut rounds = 0;

    // With no pinned negatives the no-format cluster has nothing to grow
    // from; seed it with the row farthest from the examples when that row is
    // far enough, and keep it there.
    let mut anchor = None;
    if pinned_members[NO_FORMAT].is_empty() && options.max_iterations > 0 {
        let farthest = free
            .iter()
            .map(|&row| {
                let own = &pinned_members[assignment[row]];
                (score_rows(&sigs[row], own.iter().map(|&m| &sigs[m])).unwrap_or(0), row)
            })
            .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
        if let Some((score, row)) = farthest {
            if 2 * score > pool_size {
                assignment[row] = NO_FORMAT;
                anchor = Some(row);
            }
        }
        rounds += 1;
        history.push(assignment.clone());
    }

    while rounds < options.max_iterations {
        let members: Vec<Vec<usize>> = (0..k)
            .map(|c| (0..n).filter(|&i| active[i] && assignment[i] == c).collect())
            .collect();
        let mut next = assignment.clone();
        for &row in &free {
            if Some(row) != anchor {
                next[row] = best_cluster(row, sigs, &members, Some(row));
            }
        }
        rounds += 1;
        let fixed = next == assignment;
        assignment = next;
        history.push(assignment.clone());
        if fixed {
            break;
        }
    }

    Ok(Clustering {
        k,
        formats,
        assignment,
        pinned,
        rounds,
        history,
    })
}

/// Lowest-scoring cluster; ties go to the lower id. Clusters without
/// members (after excluding `skip`) score infinity.
fn best_cluster(row: usize, sigs: &[PredicateSignature], members: &[Vec<usize>], skip: Option<usize>) -> usize {
    let mut best = (usize::MAX, NO_FORMAT);
    for (c, ms) in members.iter().enumerate() {
        let others = ms.iter().filter(|&&m| Some(m) != skip).map(|&m| &sigs[m]);
        let score = score_rows(&sigs[row], others).unwrap_or(usize::MAX);
        if score < best.0 {
            best = (score, c);
        }
    }
    best.1
}
