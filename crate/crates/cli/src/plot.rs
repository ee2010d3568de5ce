//! Long-format table for external plotting: `method,benchmark,step,mean,lo,hi`.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};

use crate::summary::Summary;

pub const PLOT_COLUMNS: [&str; 6] = ["method", "benchmark", "step", "mean", "lo", "hi"];

#[derive(Debug, Clone, PartialEq)]
pub struct PlotRow {
    pub method: String,
    pub benchmark: String,
    pub step: usize,
    /// `(mean, lo, hi)`; absent when no trace had a value at this step.
    pub band: Option<(f64, f64, f64)>,
}

/// One row per step of every summary, in input order.
pub fn plot_rows(summaries: &[Summary]) -> Result<Vec<PlotRow>> {
    let mut rows = Vec::new();
    for s in summaries {
        let method = s.header_value("method").ok_or_else(|| anyhow!("summary header lacks 'method'"))?;
        let benchmark = s
            .header_value("benchmark")
            .ok_or_else(|| anyhow!("summary header lacks 'benchmark'"))?;
        rows.extend(s.steps.iter().map(|st| PlotRow {
            method: method.to_string(),
            benchmark: benchmark.to_string(),
            step: st.step,
            band: st.band.map(|b| (b.mean, b.lo, b.hi)),
        }));
    }
    Ok(rows)
}

pub fn to_csv(rows: &[PlotRow]) -> String {
    let mut out = PLOT_COLUMNS.join(",");
    out.push('\n');
    for r in rows {
        let band = r.band.map_or(",,".to_string(), |(m, l, h)| format!("{m},{l},{h}"));
        let _ = writeln!(out, "{},{},{},{band}", r.method, r.benchmark, r.step);
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<PlotRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == PLOT_COLUMNS.join(",") => {}
        _ => bail!("missing plot-data column header"),
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(no, l)| {
            let c: Vec<&str> = l.split(',').collect();
            if c.len() != PLOT_COLUMNS.len() {
                bail!("line {}: expected {} cells", no + 1, PLOT_COLUMNS.len());
            }
            let f = |s: &str| s.parse::<f64>().with_context(|| format!("line {}: bad number '{s}'", no + 1));
            Ok(PlotRow {
                method: c[0].to_string(),
                benchmark: c[1].to_string(),
                step: c[2].parse().with_context(|| format!("line {}: bad step", no + 1))?,
                band: if c[3].is_empty() {
                    None
                } else {
                    Some((f(c[3])?, f(c[4])?, f(c[5])?))
                },
            })
        })
        .collect()
}

pub fn load(path: &Path) -> Result<Vec<PlotRow>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_csv(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::summary::aggregate;

    fn summary(method: &str, series: &[Vec<Option<f64>>]) -> Summary {
        Summary {
            header: vec![("benchmark".into(), "bird".into()), ("method".into(), method.into())],
            steps: aggregate(series).unwrap(),
        }
    }

    #[test]
    fn empty_summary_is_header_only() {
        let s = Summary {
            header: vec![("benchmark".into(), "bird".into()), ("method".into(), "rs".into())],
            steps: vec![],
        };
        assert_eq!(to_csv(&plot_rows(&[s]).unwrap()), "method,benchmark,step,mean,lo,hi\n");
    }

    #[test]
    fn rows_per_method_and_step_round_trip() {
        let a = summary("rs", &[vec![Some(1.0), Some(0.5), Some(0.1)], vec![Some(2.0)]]);
        let b = summary("us", &[vec![None, Some(0.3), Some(1.0 / 3.0)]]);
        let rows = plot_rows(&[a, b]).unwrap();
        assert_eq!(rows.len(), 2 * 3);
        assert_eq!(parse_csv(&to_csv(&rows)).unwrap(), rows);
    }
}
