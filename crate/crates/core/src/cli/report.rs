//! `results.csv`, `verdicts.json` and plot-data files.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::{RateFit, Verdict};
use crate::spaces::Bracket;

pub const CSV_HEADER: [&str; 11] =
    ["experiment_id", "set_label", "n", "N", "quantity", "lower", "upper", "exact", "method", "runtime_ms", "seed"];

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub experiment_id: String,
    pub set_label: String,
    pub n: Option<u64>,
    pub big_n: Option<u64>,
    pub quantity: String,
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
    pub method: String,
    pub runtime_ms: u64,
    /// Present on rows that depend on random numbers.
    pub seed: Option<u64>,
}

impl ReportRow {
    pub fn value(quantity: &str, v: f64, method: &str) -> Self {
        ReportRow {
            experiment_id: String::new(),
            set_label: String::new(),
            n: None,
            big_n: None,
            quantity: quantity.into(),
            lower: v,
            upper: v,
            exact: true,
            method: method.into(),
            runtime_ms: 0,
            seed: None,
        }
    }

    pub fn from_bracket(quantity: &str, b: &Bracket) -> Self {
        let method = if b.lower_method == b.upper_method {
            b.lower_method.as_str().to_string()
        } else {
            format!("{}/{}", b.lower_method, b.upper_method)
        };
        ReportRow { lower: b.lower, upper: b.upper, exact: b.exact, ..Self::value(quantity, 0.0, &method) }
    }

    pub fn at(mut self, n: Option<usize>, big_n: Option<usize>) -> Self {
        self.n = n.map(|v| v as u64);
        self.big_n = big_n.map(|v| v as u64);
        self
    }

    fn key(&self) -> (&str, &str, &str, Option<u64>, Option<u64>) {
        (&self.experiment_id, &self.set_label, &self.quantity, self.n, self.big_n)
    }
}

/// Seventeen significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(v: Option<u64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::InvalidArgument(format!("cannot write {}: {e}", path.display()))
}

/// Sort rows by (experiment, set, quantity, n, N), keeping the original
/// order among equal keys.
pub fn sort_rows(rows: &mut [ReportRow]) {
    rows.sort_by(|a, b| a.key().cmp(&b.key()));
}

pub fn write_csv(rows: &[ReportRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(CSV_HEADER).map_err(|e| io_err(path, e))?;
    for r in rows {
        w.write_record([
            r.experiment_id.clone(),
            r.set_label.clone(),
            opt(r.n),
            opt(r.big_n),
            r.quantity.clone(),
            fmt_num(r.lower),
            fmt_num(r.upper),
            r.exact.to_string(),
            r.method.clone(),
            r.runtime_ms.to_string(),
            opt(r.seed),
        ])
        .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn write_verdicts(verdicts: &[Verdict], path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(verdicts).map_err(|e| io_err(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_err(path, e))
}

/// A fitted series: data points and the fit.
#[derive(Debug, Clone)]
pub struct PlotSeries {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub fit: RateFit,
}

pub fn write_plot(series: &PlotSeries, path: &Path) -> Result<()> {
    let f = &series.fit;
    let mut out = Vec::new();
    let w = &mut out;
    let _ = writeln!(w, "# {}", series.name);
    let _ = writeln!(
        w,
        "# fit {}: C = {}, alpha = {}, beta = {}, rate = {}, residual = {}, window = [{}, {}]",
        f.model.as_str(),
        fmt_num(f.c),
        fmt_num(f.alpha),
        fmt_num(f.beta),
        fmt_num(f.rate),
        fmt_num(f.residual),
        f.window[0],
        f.window[1]
    );
    for (x, y) in &series.points {
        let _ = writeln!(w, "{} {}", fmt_num(*x), fmt_num(*y));
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

/// Write `results.csv`, `verdicts.json` and one `.dat` file per fitted series.
pub fn emit_report(rows: &[ReportRow], verdicts: &[Verdict], plots: &[PlotSeries], out: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidArgument("no result rows to report".into()));
    }
    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    write_csv(rows, &out.join("results.csv"))?;
    write_verdicts(verdicts, &out.join("verdicts.json"))?;
    for p in plots {
        write_plot(p, &out.join(format!("{}.dat", p.name)))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::Method;

    #[test]
    fn one_row_two_lines() {
        let dir = tempfile::tempdir().unwrap();
        let mut row = ReportRow::from_bracket("d_n", &Bracket::new(0.5, Method::Spectral, 0.75, Method::Heuristic)).at(Some(1), None);
        row.experiment_id = "x".into();
        row.set_label = "s".into();
        emit_report(&[row], &[], &[], dir.path()).unwrap();
        let csv = fs::read_to_string(dir.path().join("results.csv")).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], "experiment_id,set_label,n,N,quantity,lower,upper,exact,method,runtime_ms,seed");
        assert_eq!(lines[1], "x,s,1,,d_n,5.0000000000000000e-1,7.5000000000000000e-1,false,spectral/heuristic,0,");
        let json = fs::read_to_string(dir.path().join("verdicts.json")).unwrap();
        assert_eq!(json.trim(), "[]");
        assert!(emit_report(&[], &[], &[], dir.path()).is_err());
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, std::f64::consts::PI * 1e-200, 0.0] {
            assert_eq!(fmt_num(x).parse::<f64>().unwrap(), x);
        }
    }
}
