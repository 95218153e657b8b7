//! Serialized forms of an expansion: a versioned JSON document, a CSV digit
//! table and an aligned text table.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::algebra::{format_rational, Rational};
use crate::cfexpand::{Discrepancy, ExpansionResult, ExpansionState, Status, StepRecord};
use crate::error::Result;
use crate::families::{digit_headers, write_digit_csv};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDoc {
    /// Lowest-degree coefficient first.
    pub minpoly: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingDoc {
    pub window: [String; 2],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepDoc {
    pub n: usize,
    /// 1-based.
    pub pivot: usize,
    pub digits: Vec<i64>,
    /// State after the step, one coordinate vector per component.
    pub state: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionDoc {
    pub schema: u32,
    pub field: FieldDoc,
    pub embedding: EmbeddingDoc,
    pub strategy: String,
    pub steps: Vec<StepDoc>,
    pub preperiod_len: usize,
    pub period_len: usize,
    pub status: Status,
    pub discrepancies: Vec<Discrepancy>,
}

fn strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(format_rational).collect()
}

fn state_doc(s: &ExpansionState) -> Vec<Vec<String>> {
    s.components().iter().map(|c| strings(c.coeffs())).collect()
}

impl ExpansionDoc {
    pub fn new(result: &ExpansionResult) -> Self {
        let first = &result.states[0];
        let w = first.embedding().window();
        ExpansionDoc {
            schema: SCHEMA_VERSION,
            field: FieldDoc {
                minpoly: strings(first.field().minpoly().coeffs()),
            },
            embedding: EmbeddingDoc {
                window: [format_rational(&w.lo), format_rational(&w.hi)],
            },
            strategy: result.mode.to_string(),
            steps: result
                .records
                .iter()
                .map(|r| StepDoc {
                    n: r.n,
                    pivot: r.pivot + 1,
                    digits: r.digits.clone(),
                    state: state_doc(&result.states[r.n]),
                })
                .collect(),
            preperiod_len: result.preperiod_len,
            period_len: result.period_len,
            status: result.status.clone(),
            discrepancies: result.discrepancies.clone(),
        }
    }

    pub fn preperiod_rows(&self) -> Vec<Vec<i64>> {
        self.steps[..self.preperiod_len]
            .iter()
            .map(|s| s.digits.clone())
            .collect()
    }

    pub fn period_rows(&self) -> Vec<Vec<i64>> {
        self.steps[self.preperiod_len..self.preperiod_len + self.period_len]
            .iter()
            .map(|s| s.digits.clone())
            .collect()
    }
}

pub fn to_json(result: &ExpansionResult) -> String {
    serde_json::to_string_pretty(&ExpansionDoc::new(result)).expect("document serializes")
}

fn digit_rows(records: &[StepRecord]) -> Vec<(Vec<i64>, Option<crate::families::Policy>)> {
    records.iter().map(|r| (r.digits.clone(), None)).collect()
}

fn dimension(result: &ExpansionResult) -> usize {
    result.states[0].dimension()
}

/// `n, a_n, b_n, …` rows and a closing `period,<start>,<length>` row when
/// the expansion is periodic.
pub fn write_csv<W: Write>(result: &ExpansionResult, out: W) -> Result<()> {
    write_digit_csv(
        out,
        dimension(result),
        &digit_rows(&result.records),
        result.preperiod_len,
        result.period_len,
    )
}

/// Same content as the CSV, column-aligned for reading.
pub fn write_table<W: Write>(result: &ExpansionResult, mut out: W) -> Result<()> {
    write_rows(&result.records, dimension(result), &mut out)?;
    match &result.status {
        Status::Periodic => {
            let start = result.preperiod_len + result.period_len + 1;
            writeln!(
                out,
                "period {}: rows n >= {start} repeat row n-{}",
                result.period_len, result.period_len
            )?;
        }
        Status::BudgetExhausted => writeln!(out, "no period within {} steps", result.records.len())?,
        Status::LeftDomain { step, reason } => writeln!(out, "left the domain at step {step}: {reason}")?,
    }
    Ok(())
}

/// Aligned digit rows without any status line.
pub fn write_rows<W: Write>(records: &[StepRecord], dim: usize, mut out: W) -> Result<()> {
    let mut header = vec!["n".to_string()];
    header.extend(digit_headers(dim));
    let mut rows = vec![header];
    for r in records {
        let mut row = vec![r.n.to_string()];
        row.extend(r.digits.iter().map(i64::to_string));
        rows.push(row);
    }
    let cols = rows[0].len();
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    for row in &rows {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(s, w)| format!("{s:>w$}"))
            .collect();
        writeln!(out, "{}", cells.join("  "))?;
    }
    Ok(())
}
