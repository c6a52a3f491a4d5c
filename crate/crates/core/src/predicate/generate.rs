use std::collections::{BTreeMap, BTreeSet, HashSet};

use chrono::{DateTime, NaiveDateTime};

use super::{GeneratedPredicate, Operand, Predicate, PredicateKind, PredicatePool, PrefixTrie, Provenance};
use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::table::{CellValue, ColumnType, Number, TypedColumn};

pub const DEFAULT_POOL_CAP: usize = 512;

const MAX_TOKEN_CHARS: usize = 64;
const MAX_SUFFIX_CHARS: usize = 4;
const MIN_PREFIX_CHARS: usize = 2;
const MIN_PREFIX_SHARERS: usize = 2;
const POPULAR_CONSTANTS: [f64; 3] = [0.0, 1.0, 100.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenerateOptions {
    pub case_insensitive: bool,
    pub max_pool: usize,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        GenerateOptions {
            case_insensitive: false,
            max_pool: DEFAULT_POOL_CAP,
        }
    }
}

/// Instantiates every predicate kind of the column's type with constants
/// drawn from the column, keeping those true on a strict, non-empty subset
/// of the non-empty cells.
pub fn generate_predicates(column: &TypedColumn, options: &GenerateOptions) -> Result<PredicatePool> {
    let candidates = match column.column_type {
        ColumnType::Numeric => {
            let values: Vec<Number> = column
                .cells
                .iter()
                .filter_map(|c| match c {
                    CellValue::Number(n) => Some(*n),
                    _ => None,
                })
                .collect();
            let mut pool = constant_pool(&values, mean_number);
            for c in POPULAR_CONSTANTS {
                add_constant(&mut pool, Number::new(c).expect("finite"), Provenance::PopularConstant);
            }
            ordered_predicates(&pool, Operand::Number, Operand::NumberRange)
        }
        ColumnType::DateTime => {
            let values: Vec<NaiveDateTime> = column
                .cells
                .iter()
                .filter_map(|c| match c {
                    CellValue::DateTime(t) => Some(*t),
                    _ => None,
                })
                .collect();
            let pool = constant_pool(&values, mean_time);
            ordered_predicates(&pool, Operand::Time, Operand::TimeRange)
        }
        ColumnType::Text => text_predicates(column, options.case_insensitive),
    };

    let pool = PredicatePool::from_predicates(column, candidates);
    let non_empty = column.non_empty_count();
    let kept: Vec<(GeneratedPredicate, BitSet)> = pool
        .entries
        .into_iter()
        .zip(pool.masks)
        .filter(|(_, m)| m.count() > 0 && m.count() < non_empty)
        .collect();
    if kept.is_empty() {
        return Err(Error::NoPredicates);
    }
    let entries = cap_pool(kept, options.max_pool);
    Ok(PredicatePool::from_predicates(column, entries))
}

fn add_constant<T: Ord>(pool: &mut BTreeMap<T, Provenance>, value: T, provenance: Provenance) {
    let slot = pool.entry(value).or_insert(provenance);
    if provenance > *slot {
        *slot = provenance;
    }
}

/// Distinct cell values plus mean, min, max and nearest-rank quartiles.
fn constant_pool<T: Ord + Copy>(values: &[T], mean: fn(&[T]) -> Option<T>) -> BTreeMap<T, Provenance> {
    let mut pool = BTreeMap::new();
    if values.is_empty() {
        return pool;
    }
    let mut sorted = values.to_vec();
    sorted.sort();
    let stats = [
        sorted[0],
        sorted[sorted.len() - 1],
        nearest_rank(&sorted, 25),
        nearest_rank(&sorted, 50),
        nearest_rank(&sorted, 75),
    ];
    for s in stats.into_iter().chain(mean(values)) {
        add_constant(&mut pool, s, Provenance::ColumnStat);
    }
    for &v in values {
        add_constant(&mut pool, v, Provenance::CellValue);
    }
    pool
}

/// Nearest-rank percentile of an ascending, non-empty slice.
pub(crate) fn nearest_rank<T: Copy>(sorted: &[T], percent: usize) -> T {
    let rank = (percent * sorted.len()).div_ceil(100).max(1);
    sorted[rank - 1]
}

fn mean_number(values: &[Number]) -> Option<Number> {
    let sum: f64 = values.iter().map(|n| n.get()).sum();
    Number::new(sum / values.len() as f64)
}

fn mean_time(values: &[NaiveDateTime]) -> Option<NaiveDateTime> {
    let sum: i128 = values.iter().map(|t| t.and_utc().timestamp() as i128).sum();
    let mean = (sum as f64 / values.len() as f64).round() as i64;
    DateTime::from_timestamp(mean, 0).map(|d| d.naive_utc())
}

/// Four comparisons per constant, plus `between` over each pair of
/// consecutive constants.
fn ordered_predicates<T: Ord + Copy>(
    pool: &BTreeMap<T, Provenance>,
    single: fn(T) -> Operand,
    range: fn(T, T) -> Operand,
) -> Vec<GeneratedPredicate> {
    let mut out = Vec::with_capacity(pool.len() * 5);
    for (&c, &provenance) in pool {
        for kind in PredicateKind::COMPARISONS {
            let predicate = Predicate::new(kind, single(c)).expect("comparison");
            out.push(GeneratedPredicate { predicate, provenance });
        }
    }
    let consts: Vec<(&T, &Provenance)> = pool.iter().collect();
    for w in consts.windows(2) {
        let predicate = Predicate::new(PredicateKind::Between, range(*w[0].0, *w[1].0)).expect("ascending");
        out.push(GeneratedPredicate {
            predicate,
            provenance: (*w[0].1).min(*w[1].1),
        });
    }
    out
}

fn text_predicates(column: &TypedColumn, case_insensitive: bool) -> Vec<GeneratedPredicate> {
    let values: BTreeSet<String> = column
        .cells
        .iter()
        .filter_map(|c| match c {
            CellValue::Text(s) if case_insensitive => Some(s.to_lowercase()),
            CellValue::Text(s) => Some(s.clone()),
            _ => None,
        })
        .collect();

    let mut out = Vec::new();
    let mut push = |kind: PredicateKind, s: &str, provenance: Provenance| {
        if let Ok(p) = Predicate::text(kind, s) {
            out.push(GeneratedPredicate {
                predicate: p.with_case_insensitive(case_insensitive),
                provenance,
            });
        }
    };

    let mut tokens = BTreeSet::new();
    let mut suffixes = BTreeSet::new();
    let mut trie = PrefixTrie::new();
    for v in &values {
        push(PredicateKind::Equals, v, Provenance::CellValue);
        tokens.extend(delimiter_tokens(v));
        suffixes.extend(delimited_suffixes(v));
        trie.insert(v);
    }
    for t in &tokens {
        for kind in PredicateKind::TEXT_TOKEN {
            push(kind, t, Provenance::DelimiterToken);
        }
    }
    for s in &suffixes {
        push(PredicateKind::EndsWith, s, Provenance::DelimiterToken);
    }
    for prefix in trie.shared_prefixes(MIN_PREFIX_CHARS, MIN_PREFIX_SHARERS) {
        for kind in PredicateKind::TEXT_TOKEN {
            push(kind, &prefix, Provenance::PrefixTrieToken);
        }
    }
    out
}

/// Maximal runs of alphanumeric characters, up to 64 chars long.
pub(crate) fn delimiter_tokens(value: &str) -> impl Iterator<Item = &str> {
    value
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty() && t.chars().count() <= MAX_TOKEN_CHARS)
}

/// Suffixes of at most four chars that begin at a delimiter, e.g. `-F`.
pub(crate) fn delimited_suffixes(value: &str) -> Vec<&str> {
    let starts: Vec<usize> = value.char_indices().map(|(i, _)| i).collect();
    let first = starts.len().saturating_sub(MAX_SUFFIX_CHARS);
    starts[first..]
        .iter()
        .map(|&i| &value[i..])
        .filter(|s| s.chars().next().is_some_and(|c| !c.is_alphanumeric()))
        .collect()
}

/// Keeps at most `cap` predicates. On overflow, predicates true on a single
/// cell go first, then predicates with the same mask as a higher-priority
/// one, then whole provenance tiers from the lowest priority up. The tier
/// that straddles the cap is thinned evenly across its canonical order.
fn cap_pool(mut entries: Vec<(GeneratedPredicate, BitSet)>, cap: usize) -> Vec<GeneratedPredicate> {
    if entries.len() > cap {
        entries.retain(|(_, m)| m.count() > 1);
    }
    if entries.len() > cap {
        // Stable sort: canonical order breaks ties within a tier.
        entries.sort_by_key(|(e, _)| std::cmp::Reverse(e.provenance));
        let mut seen = HashSet::new();
        entries.retain(|(_, m)| seen.insert(m.clone()));
    }
    let entries: Vec<GeneratedPredicate> = entries.into_iter().map(|(e, _)| e).collect();
    if entries.len() <= cap {
        return entries;
    }
    let mut tiers: BTreeMap<std::cmp::Reverse<Provenance>, Vec<GeneratedPredicate>> = BTreeMap::new();
    for e in entries {
        tiers.entry(std::cmp::Reverse(e.provenance)).or_default().push(e);
    }
    let mut out = Vec::with_capacity(cap);
    for (_, tier) in tiers {
        let room = cap - out.len();
        if room == 0 {
            break;
        }
        if tier.len() <= room {
            out.extend(tier);
        } else {
            let len = tier.len();
            out.extend((0..room).map(|i| tier[i * len / room].clone()));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::SourceRef;

    use PredicateKind::*;

    fn col(raw: &[&str]) -> TypedColumn {
        TypedColumn::from_raw("c", raw, SourceRef::default())
    }

    fn has(pool: &PredicatePool, p: Predicate) -> bool {
        pool.id_of(&p).is_some()
    }

    #[test]
    fn numeric_pool_contents() {
        let c = col(&["3", "7", "2", "5", "9"]);
        let pool = generate_predicates(&c, &GenerateOptions::default()).unwrap();
        for p in [
            Predicate::number(Less, 5.0),
            Predicate::number(Less, 7.0),
            Predicate::number(Greater, 5.0),
            Predicate::between(3.0, 5.0),
            Predicate::number(Less, 5.2),
            Predicate::number(Greater, 2.0),
        ] {
            assert!(has(&pool, p.clone().unwrap()), "{}", p.unwrap());
        }
        // Between(5, 5.2) holds only on 5.
        assert!(has(&pool, Predicate::between(5.0, 5.2).unwrap()));
        // Not a strict subset: true everywhere / nowhere.
        assert!(!has(&pool, Predicate::number(Greater, 0.0).unwrap()));
        assert!(!has(&pool, Predicate::number(Greater, 100.0).unwrap()));
        assert!(!has(&pool, Predicate::number(LessEquals, 9.0).unwrap()));
        assert_eq!(
            pool.provenance_of(&Predicate::number(Less, 5.2).unwrap()),
            Some(Provenance::ColumnStat)
        );
        assert_eq!(
            pool.provenance_of(&Predicate::number(Less, 5.0).unwrap()),
            Some(Provenance::CellValue)
        );
    }

    #[test]
    fn text_pool_contents() {
        let c = col(&["GW105-F", "GW112", "AN47603-F"]);
        let pool = generate_predicates(&c, &GenerateOptions::default()).unwrap();
        for p in [
            Predicate::text(StartsWith, "GW"),
            Predicate::text(StartsWith, "AN47603"),
            Predicate::text(EndsWith, "-F"),
            Predicate::text(Contains, "F"),
            Predicate::text(Equals, "GW112"),
        ] {
            assert!(has(&pool, p.clone().unwrap()), "{}", p.unwrap());
        }
        assert_eq!(
            pool.provenance_of(&Predicate::text(StartsWith, "GW").unwrap()),
            Some(Provenance::PrefixTrieToken)
        );
        // "F" is true on two of three cells but "GW" on all three would be dropped.
        assert!(!has(&pool, Predicate::text(Contains, "-").unwrap()));
    }

    #[test]
    fn constant_column_has_no_predicates() {
        assert_eq!(
            generate_predicates(&col(&["4", "4", "4"]), &GenerateOptions::default()).unwrap_err(),
            Error::NoPredicates
        );
        assert_eq!(
            generate_predicates(&col(&["a", "", "a"]), &GenerateOptions::default()).unwrap_err(),
            Error::NoPredicates
        );
    }

    #[test]
    fn datetime_pool() {
        let c = col(&["2021-03-01", "2021-04-15", "2021-06-30"]);
        let pool = generate_predicates(&c, &GenerateOptions::default()).unwrap();
        let t = crate::table::parse_datetime("2021-04-15").unwrap();
        assert!(has(&pool, Predicate::new(Less, Operand::Time(t)).unwrap()));
        assert!(pool.entries.iter().all(|e| e.predicate.column_type() == ColumnType::DateTime));
    }

    #[test]
    fn case_insensitive_tokens() {
        let c = col(&["North", "north", "South"]);
        let opts = GenerateOptions { case_insensitive: true, ..Default::default() };
        let pool = generate_predicates(&c, &opts).unwrap();
        let p = Predicate::text(Equals, "north").unwrap().with_case_insensitive(true);
        let id = pool.id_of(&p).unwrap();
        assert_eq!(pool.masks[id].count(), 2);
    }

    #[test]
    fn token_helpers() {
        assert_eq!(delimiter_tokens("GW99-F").collect::<Vec<_>>(), vec!["GW99", "F"]);
        assert_eq!(delimited_suffixes("GW99-F"), vec!["-F"]);
        assert_eq!(delimited_suffixes("A.B-C"), vec![".B-C", "-C"]);
        assert!(delimited_suffixes("abc").is_empty());
        assert_eq!(nearest_rank(&[1, 2, 3, 4], 25), 1);
        assert_eq!(nearest_rank(&[1, 2, 3, 4], 50), 2);
        assert_eq!(nearest_rank(&[1, 2, 3, 4, 5], 75), 4);
    }

    #[test]
    fn cap_keeps_high_priority_tiers() {
        let raw: Vec<String> = (0..400).map(|i| i.to_string()).collect();
        let raw: Vec<&str> = raw.iter().map(String::as_str).collect();
        let c = col(&raw);
        let pool = generate_predicates(&c, &GenerateOptions::default()).unwrap();
        assert_eq!(pool.len(), DEFAULT_POOL_CAP);
        assert!(pool.entries.iter().all(|e| e.provenance == Provenance::CellValue));
        let small = GenerateOptions { max_pool: 10, ..Default::default() };
        assert_eq!(generate_predicates(&c, &small).unwrap().len(), 10);
    }

    #[test]
    fn cap_on_unique_ids_keeps_shared_prefixes() {
        let raw: Vec<String> = (0..600)
            .map(|i| format!("{}{:05}{}", ["GW", "AN", "XK"][i % 3], i * 37 % 1000, ["", "-F"][i % 2]))
            .collect();
        let raw: Vec<&str> = raw.iter().map(String::as_str).collect();
        let c = col(&raw);
        let pool = generate_predicates(&c, &GenerateOptions::default()).unwrap();
        assert!(pool.len() <= DEFAULT_POOL_CAP);
        assert!(pool.masks.iter().all(|m| m.count() > 1));
        assert!(has(&pool, Predicate::text(StartsWith, "GW").unwrap()) || has(&pool, Predicate::text(Contains, "GW").unwrap()));
        assert!(has(&pool, Predicate::text(EndsWith, "-F").unwrap()));
    }
}
