//! Pretty and CSV rendering. CSV columns are fixed per command (see README).

use seqshare_core::optimize::MaxBobsResult;
use seqshare_core::robustness::{ThresholdKind, ThresholdResult};

use crate::error::CliError;
use crate::record::{Payload, RunRecord};

/// Column layout shared by `maxbobs`, `robustness` and `tables`.
pub const AGGREGATE_HEADER: [&str; 10] = [
    "table",
    "functional",
    "quantity",
    "policy",
    "value",
    "bracket_lo",
    "bracket_hi",
    "margin",
    "restarts",
    "seed",
];

pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

/// Table number a functional's two-Bob verdict appears in (three or four settings).
fn verdict_table(functional: &str) -> &'static str {
    match functional {
        "chain3" | "gisin3" | "i3322" => "1",
        "chain4" | "gisin4" | "dzc" | "bg" | "aiig1" | "aiig2" => "2",
        _ => "",
    }
}

fn joined(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

fn max_bobs_row(functional: &str, r: &MaxBobsResult, seed: u64) -> Vec<String> {
    let last = r.per_k.last();
    vec![
        verdict_table(functional).into(),
        functional.into(),
        "max_bobs".into(),
        String::new(),
        r.max_bobs.to_string(),
        String::new(),
        String::new(),
        last.map(|s| s.margin.to_string()).unwrap_or_default(),
        last.map(|s| s.restarts.to_string()).unwrap_or_default(),
        seed.to_string(),
    ]
}

fn threshold_row(r: &ThresholdResult, seed: u64) -> Vec<String> {
    let (table, quantity) = match r.kind {
        ThresholdKind::Concurrence => ("3", "c_min"),
        ThresholdKind::WernerW => ("4", "w_min"),
    };
    vec![
        table.into(),
        r.functional.clone(),
        quantity.into(),
        r.policy.name().into(),
        r.threshold.to_string(),
        r.bracket.0.to_string(),
        r.bracket.1.to_string(),
        r.margin_at_hi.to_string(),
        r.restarts.to_string(),
        seed.to_string(),
    ]
}

pub fn table(record: &RunRecord) -> Table {
    let seed = record.seed;
    match &record.payload {
        Payload::Bounds(rows) => Table {
            headers: vec!["functional", "enumerated", "declared", "status"],
            rows: rows
                .iter()
                .map(|r| {
                    let status = if r.ok { "OK" } else { "MISMATCH" };
                    vec![
                        r.functional.clone(),
                        r.enumerated.clone(),
                        r.declared.clone(),
                        status.into(),
                    ]
                })
                .collect(),
        },
        Payload::Replay(r) => Table {
            headers: vec![
                "preset",
                "bob",
                "value",
                "expected",
                "violation",
                "within_tolerance",
            ],
            rows: (0..r.values.values.len())
                .map(|i| {
                    vec![
                        r.preset.clone(),
                        (i + 1).to_string(),
                        r.values.values[i].to_string(),
                        r.expected[i].to_string(),
                        r.values.violations[i].to_string(),
                        r.within_tolerance[i].to_string(),
                    ]
                })
                .collect(),
        },
        Payload::Eval(v) => Table {
            headers: vec!["bob", "value", "violation"],
            rows: (0..v.values.len())
                .map(|i| {
                    vec![
                        (i + 1).to_string(),
                        v.values[i].to_string(),
                        v.violations[i].to_string(),
                    ]
                })
                .collect(),
        },
        Payload::Share(r) => Table {
            headers: vec![
                "functional",
                "state",
                "bobs",
                "margin",
                "feasible",
                "restarts",
                "feasible_restarts",
                "lambdas",
                "values",
            ],
            rows: vec![vec![
                r.best_scenario.functional.name.clone(),
                r.best_scenario.state.to_string(),
                r.k.to_string(),
                r.margin.to_string(),
                r.feasible.to_string(),
                r.restarts.to_string(),
                r.feasible_restarts.to_string(),
                joined(&r.best_scenario.lambdas),
                joined(&r.values.values),
            ]],
        },
        Payload::MaxBobs(r) => {
            let name = r
                .per_k
                .first()
                .map(|s| s.best_scenario.functional.name.clone())
                .unwrap_or_default();
            Table {
                headers: AGGREGATE_HEADER.to_vec(),
                rows: vec![max_bobs_row(&name, r, seed)],
            }
        }
        Payload::Robustness(r) => Table {
            headers: AGGREGATE_HEADER.to_vec(),
            rows: vec![threshold_row(r, seed)],
        },
        Payload::Tables(t) => Table {
            headers: AGGREGATE_HEADER.to_vec(),
            rows: t
                .max_bobs
                .iter()
                .map(|m| max_bobs_row(&m.functional, &m.result, seed))
                .chain(t.thresholds.iter().map(|r| threshold_row(r, seed)))
                .collect(),
        },
    }
}

pub fn csv(t: &Table) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Input(e.to_string());
    w.write_record(&t.headers).map_err(io)?;
    for row in &t.rows {
        w.write_record(row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Input(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Input(e.to_string()))
}

/// Aligned columns; numbers shortened to six decimals.
pub fn pretty(t: &Table) -> String {
    let cell = |s: &String| match s.parse::<f64>() {
        Ok(v) if s.contains('.') || s.contains('e') => format!("{v:.6}"),
        _ => s.clone(),
    };
    let rows: Vec<Vec<String>> = t
        .rows
        .iter()
        .map(|r| r.iter().map(cell).collect())
        .collect();
    let widths: Vec<usize> = (0..t.headers.len())
        .map(|c| {
            rows.iter()
                .map(|r| r[c].len())
                .chain([t.headers[c].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    let line = |cells: Vec<&str>, out: &mut String| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        out.push_str(padded.join("  ").trim_end());
        out.push('\n');
    };
    line(t.headers.clone(), &mut out);
    for r in &rows {
        line(r.iter().map(String::as_str).collect(), &mut out);
    }
    out
}
