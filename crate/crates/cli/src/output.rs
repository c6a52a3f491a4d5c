//! Text renderings of engine results for the command line.

use cfsynth_core::{ApplyResult, SuggestResponse};

/// Every suggested rule as one JSON array, formats in id order, each
/// format's suggestions best first.
pub fn rules_json(resp: &SuggestResponse) -> String {
    let rules: Vec<String> = resp.formats.values().flatten().map(|s| s.rule.to_json()).collect();
    format!("[{}]", rules.join(","))
}

/// One formula per line, in the order of [`rules_json`].
pub fn formulas(resp: &SuggestResponse) -> String {
    resp.formats
        .values()
        .flatten()
        .map(|s| format!("{}\n", s.formula))
        .collect()
}

/// One CSV column per suggestion, headed `<format>#<rank>`, one row per cell.
pub fn masks_csv(resp: &SuggestResponse) -> String {
    let mut header = Vec::new();
    let mut masks: Vec<&[bool]> = Vec::new();
    for (format, list) in &resp.formats {
        for (i, s) in list.iter().enumerate() {
            header.push(format!("{}#{}", format.as_str(), i + 1));
            masks.push(&s.mask);
        }
    }
    bool_table(&header, &masks)
}

pub fn apply_mask_csv(result: &ApplyResult) -> String {
    bool_table(&["mask".to_string()], &[&result.mask])
}

fn bool_table(header: &[String], masks: &[&[bool]]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let rows = masks.first().map_or(0, |m| m.len());
    w.write_record(header).expect("in-memory write");
    for r in 0..rows {
        w.write_record(masks.iter().map(|m| if m[r] { "true" } else { "false" }))
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv of UTF-8 input")
}
