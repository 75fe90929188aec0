//! Aggregation of summary rows into per-method means and medians.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::{CliError, Result};

#[derive(Debug, Clone)]
pub struct Summary {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Summary {
    pub fn read(path: &Path) -> Result<Summary> {
        let text =
            std::fs::read_to_string(path).map_err(CliError::io(path.display().to_string()))?;
        let mut lines = text.lines();
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| CliError::Config(format!("{}: empty summary", path.display())))?
            .split(',')
            .map(str::to_string)
            .collect();
        let rows: Vec<Vec<String>> = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.split(',').map(str::to_string).collect())
            .collect();
        if rows.is_empty() {
            return Err(CliError::Config(format!("{}: no summary rows", path.display())));
        }
        Ok(Summary { header, rows })
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Parsed values of a numeric column over a set of rows (empty cells and
    /// failed rows skipped).
    fn numeric(&self, rows: &[&Vec<String>], col: usize) -> Vec<f64> {
        rows.iter().filter_map(|r| r.get(col).and_then(|v| v.parse().ok())).collect()
    }
}

pub fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

/// Builds `report.csv` next to the summary: seed rows sorted by
/// (problem, method, seed) followed by mean and median pseudo-rows per
/// (problem, method) group. Returns the rendered table for display.
pub fn emit_report(dir: &Path) -> Result<(PathBuf, String)> {
    let summary_path = dir.join("summary.csv");
    let summary = Summary::read(&summary_path)?;
    let col_problem = summary
        .column("problem")
        .ok_or_else(|| CliError::Config("summary lacks a problem column".into()))?;
    let col_method = summary
        .column("method")
        .ok_or_else(|| CliError::Config("summary lacks a method column".into()))?;
    let col_seed = summary
        .column("seed")
        .ok_or_else(|| CliError::Config("summary lacks a seed column".into()))?;

    // Numeric columns to aggregate: everything from `error` onward except
    // status-like fields.
    let agg_cols: Vec<usize> = summary
        .header
        .iter()
        .enumerate()
        .filter(|(_, h)| {
            h.as_str() == "error"
                || h.starts_with("error_")
                || h.as_str() == "lambda"
                || h.as_str() == "lambda_rel_err"
        })
        .map(|(i, _)| i)
        .collect();

    let mut rows: Vec<&Vec<String>> = summary.rows.iter().collect();
    rows.sort_by_key(|r| {
        (
            r[col_problem].clone(),
            r[col_method].clone(),
            r[col_seed].parse::<u64>().unwrap_or(u64::MAX),
        )
    });

    let mut groups: BTreeMap<(String, String), Vec<&Vec<String>>> = BTreeMap::new();
    for r in &rows {
        groups
            .entry((r[col_problem].clone(), r[col_method].clone()))
            .or_default()
            .push(r);
    }

    let mut out_rows: Vec<Vec<String>> = Vec::new();
    for ((problem, method), members) in &groups {
        for r in members {
            out_rows.push((*r).clone());
        }
        for (stat_name, stat) in
            [("mean", mean as fn(&[f64]) -> Option<f64>), ("median", median)]
        {
            let mut row = vec![String::new(); summary.header.len()];
            row[col_problem] = problem.clone();
            row[col_method] = method.clone();
            row[col_seed] = stat_name.to_string();
            for &c in &agg_cols {
                if let Some(v) = stat(&summary.numeric(members, c)) {
                    row[c] = format!("{v:.17e}");
                }
            }
            out_rows.push(row);
        }
    }

    let mut csv = summary.header.join(",");
    csv.push('\n');
    for r in &out_rows {
        csv.push_str(&r.join(","));
        csv.push('\n');
    }
    let report_path = dir.join("report.csv");
    std::fs::write(&report_path, &csv)
        .map_err(CliError::io(report_path.display().to_string()))?;

    Ok((report_path, render_table(&summary.header, &out_rows)))
}

/// Plain-text table with shortened numeric cells for terminal display.
fn render_table(header: &[String], rows: &[Vec<String>]) -> String {
    let display = |cell: &str| -> String {
        match cell.parse::<f64>() {
            Ok(v) if cell.contains('e') || cell.contains('.') => format!("{v:.4e}"),
            _ => cell.to_string(),
        }
    };
    let mut cells: Vec<Vec<String>> = vec![header.to_vec()];
    cells.extend(rows.iter().map(|r| r.iter().map(|c| display(c)).collect()));
    let widths: Vec<usize> = (0..header.len())
        .map(|c| cells.iter().map(|r| r.get(c).map_or(0, |s| s.len())).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &cells {
        for (c, cell) in row.iter().enumerate() {
            out.push_str(&format!("{:<width$}  ", cell, width = widths[c]));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_handles_even_and_odd_counts() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }

    #[test]
    fn mean_of_known_values() {
        let vals = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(mean(&vals), Some(3.0));
        assert_eq!(mean(&[7.5]), Some(7.5));
    }

    #[test]
    fn single_row_statistics_equal_the_row() {
        let dir = std::env::temp_dir().join("sdpinn_report_single");
        std::fs::create_dir_all(&dir).unwrap();
        let summary = "problem,b,method,seed,status,error,lambda,lambda_rel_err,iterations\n\
                       kdv,5e0,inverse,3,ok,1.5e-3,9.9e-1,1e-2,200\n";
        std::fs::write(dir.join("summary.csv"), summary).unwrap();
        let (path, _) = emit_report(&dir).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        for stat in ["mean", "median"] {
            let row = text.lines().find(|l| l.contains(stat)).unwrap();
            let err: f64 = row.split(',').nth(5).unwrap().parse().unwrap();
            assert_eq!(err, 1.5e-3, "{stat} row: {row}");
            let lam: f64 = row.split(',').nth(7).unwrap().parse().unwrap();
            assert_eq!(lam, 1e-2);
        }
    }

    #[test]
    fn report_appends_group_statistics() {
        let dir = std::env::temp_dir().join("sdpinn_report_test");
        std::fs::create_dir_all(&dir).unwrap();
        let summary = "problem,b,method,seed,status,error,lambda,lambda_rel_err,iterations\n\
                       kdv,2e1,sdpinn,1,ok,2e-2,,,100\n\
                       kdv,2e1,sdpinn,0,ok,1e-2,,,100\n\
                       kdv,2e1,sdpinn,2,ok,6e-2,,,100\n";
        std::fs::write(dir.join("summary.csv"), summary).unwrap();
        let (path, table) = emit_report(&dir).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        // header + 3 seed rows (sorted) + mean + median
        assert_eq!(lines.len(), 6);
        assert!(lines[1].contains(",0,"));
        let value_in = |line: &str, col: usize| -> f64 {
            line.split(',').nth(col).unwrap().parse().unwrap()
        };
        let mean_row = lines.iter().find(|l| l.contains("mean")).unwrap();
        assert!((value_in(mean_row, 5) - 3e-2).abs() < 1e-15, "{mean_row}");
        let median_row = lines.iter().find(|l| l.contains("median")).unwrap();
        assert!((value_in(median_row, 5) - 2e-2).abs() < 1e-18, "{median_row}");
        assert!(table.contains("median"));
    }
}
