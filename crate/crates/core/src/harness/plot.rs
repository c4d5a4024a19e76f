//! Grouping of reports into curves and CSV output.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use super::{write_atomic, HarnessError};
use crate::diagnostics::{DiagnosticsReport, Verdict};

/// Parameter that varies along the curve for each condition.
pub fn grid_variable(condition: &str) -> &'static str {
    match condition {
        "maxima-limit" | "conditional-exceedance" => "t",
        "d-prime" => "k",
        "watson" => "j",
        "small-jump" => "epsilon",
        "sampler-calibration" => "cut",
        "exin-identity" => "pi",
        _ => "n",
    }
}

/// Parameters that identify a grid point; other parameters are derived
/// statistics and do not split curves.
const AXES: [&str; 8] = ["n", "epsilon", "t", "delta", "k", "j", "pi", "cut"];

/// One curve: reports of a condition sharing every grid parameter except
/// the grid variable.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSeries {
    pub condition: String,
    pub grid_variable: &'static str,
    pub fixed: Vec<(String, f64)>,
    /// `(x, estimate, stderr, reference, verdict)`, sorted by `x`.
    pub rows: Vec<(f64, f64, f64, Option<f64>, Verdict)>,
}

impl PlotSeries {
    pub fn file_name(&self) -> String {
        let mut name = slug(&self.condition);
        for (k, v) in &self.fixed {
            name.push_str(&format!("_{}-{}", slug(k), v));
        }
        name + ".csv"
    }

    pub fn to_csv(&self) -> Result<String, HarnessError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([self.grid_variable, "estimate", "stderr", "reference", "verdict"])?;
        for (x, est, se, reference, verdict) in &self.rows {
            let verdict = serde_json::to_value(verdict)?;
            w.write_record([
                x.to_string(),
                est.to_string(),
                se.to_string(),
                reference.map(|r| r.to_string()).unwrap_or_default(),
                verdict.as_str().unwrap_or_default().to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| HarnessError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// File-name-safe form of a condition or parameter name.
pub fn slug(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '-' })
        .collect::<String>()
        .trim_matches('-')
        .to_string()
}

/// Groups reports into series, ordered by condition and fixed parameters.
pub fn plot_series(reports: &[DiagnosticsReport]) -> Vec<PlotSeries> {
    type Key = (String, Vec<(String, u64)>);
    let mut groups: BTreeMap<Key, PlotSeries> = BTreeMap::new();
    for r in reports {
        let var = grid_variable(&r.condition);
        let fixed: Vec<(String, f64)> = r
            .params
            .iter()
            .filter(|(k, _)| k.as_str() != var && AXES.contains(&k.as_str()))
            .map(|(k, v)| (k.clone(), *v))
            .collect();
        let key = (
            r.condition.clone(),
            fixed.iter().map(|(k, v)| (k.clone(), v.to_bits())).collect(),
        );
        let x = r.param(var).unwrap_or(f64::NAN);
        groups
            .entry(key)
            .or_insert_with(|| PlotSeries {
                condition: r.condition.clone(),
                grid_variable: var,
                fixed,
                rows: Vec::new(),
            })
            .rows
            .push((x, r.estimate, r.stderr, r.reference, r.verdict));
    }
    groups
        .into_values()
        .map(|mut s| {
            s.rows.sort_by(|a, b| a.0.total_cmp(&b.0));
            s
        })
        .collect()
}

/// Writes one CSV per series into `dir` and returns their paths.
pub fn emit_plot_data(reports: &[DiagnosticsReport], dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    std::fs::create_dir_all(dir)?;
    plot_series(reports)
        .iter()
        .map(|s| {
            let path = dir.join(s.file_name());
            write_atomic(&path, s.to_csv()?.as_bytes())?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::Expectation;

    fn report(t: f64, eps: f64) -> DiagnosticsReport {
        DiagnosticsReport::new(
            "conditional-exceedance",
            &[("n", 100.0), ("epsilon", eps), ("t", t)],
            (0.5, 0.01),
            10,
            Some(Expectation::Equals(1.0 - (-t / eps.powf(1.5)).exp())),
            1,
        )
    }

    #[test]
    fn single_report_single_row() {
        let s = plot_series(&[report(1.0, 1.0)]);
        assert_eq!(s.len(), 1);
        let csv = s[0].to_csv().unwrap();
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.starts_with("t,estimate,stderr,reference,verdict\n"));
    }

    #[test]
    fn rows_sorted_and_grouped() {
        let s = plot_series(&[report(2.0, 1.0), report(0.5, 1.0), report(1.0, 0.5)]);
        assert_eq!(s.len(), 2);
        let curve = s.iter().find(|c| c.rows.len() == 2).unwrap();
        assert_eq!(curve.rows[0].0, 0.5);
        assert_eq!(curve.rows[1].0, 2.0);
        assert!((curve.rows[0].3.unwrap() - (1.0 - (-0.5f64).exp())).abs() < 1e-15);
        assert_eq!(curve.file_name(), "conditional-exceedance_epsilon-1_n-100.csv");
    }
}
