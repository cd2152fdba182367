use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::runner::RunRecord;
use crate::problems::ProblemKind;
use crate::treatments::Variant;

/// One `(problem, alpha, algorithm)` cell of a success-rate table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableCell {
    pub problem: ProblemKind,
    pub alpha: f64,
    pub algorithm: Variant,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// Median evaluations among successful runs; `None` without successes.
    pub median_evals: Option<f64>,
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    })
}

/// Groups records by `(problem, alpha, algorithm)`. Cells are ordered by
/// problem, then increasing alpha, then algorithm; cells without records
/// are absent.
pub fn aggregate(records: &[RunRecord]) -> Vec<TableCell> {
    // Nonnegative floats order like their bit patterns.
    let mut groups: BTreeMap<(ProblemKind, u64, Variant), Vec<&RunRecord>> = BTreeMap::new();
    for rec in records {
        groups
            .entry((rec.problem, rec.alpha.to_bits(), rec.algorithm))
            .or_default()
            .push(rec);
    }
    groups
        .into_iter()
        .map(|((problem, alpha_bits, algorithm), recs)| {
            let successes = recs.iter().filter(|r| r.success).count();
            let mut evals: Vec<f64> = recs.iter().filter(|r| r.success).map(|r| r.evals_used as f64).collect();
            TableCell {
                problem,
                alpha: f64::from_bits(alpha_bits),
                algorithm,
                trials: recs.len(),
                successes,
                success_rate: successes as f64 / recs.len() as f64,
                median_evals: median(&mut evals),
            }
        })
        .collect()
}

/// Looks up one cell.
pub fn find_cell(table: &[TableCell], problem: ProblemKind, alpha: f64, algorithm: Variant) -> Option<&TableCell> {
    table
        .iter()
        .find(|c| c.problem == problem && c.alpha == alpha && c.algorithm == algorithm)
}

/// Plain-text rendering: one row per algorithm, one column per alpha.
pub fn format_table(table: &[TableCell]) -> String {
    let mut alphas: Vec<f64> = table.iter().map(|c| c.alpha).collect();
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();
    let mut problems: Vec<ProblemKind> = table.iter().map(|c| c.problem).collect();
    problems.sort();
    problems.dedup();
    let mut out = String::new();
    for problem in problems {
        out.push_str(&format!("{problem}\n{:<12}", "algorithm"));
        for a in &alphas {
            out.push_str(&format!(" {:>8}", format!("a={a}")));
        }
        out.push('\n');
        for variant in Variant::ALL {
            if !table.iter().any(|c| c.problem == problem && c.algorithm == variant) {
                continue;
            }
            out.push_str(&format!("{:<12}", variant.display_name()));
            for &a in &alphas {
                match find_cell(table, problem, a, variant) {
                    Some(cell) => out.push_str(&format!(" {:>8.2}", cell.success_rate)),
                    None => out.push_str(&format!(" {:>8}", "-")),
                }
            }
            out.push('\n');
        }
    }
    out
}
