//! Aggregation of per-seed metric curves into mean ± 2·SE bands.
//!
//! A summary file is a block of `# key = value` header lines (the resolved
//! run configuration plus `metric` and `traces`) followed by a CSV table
//! `step,n,padded,mean,se,lo,hi`. Cells of steps without any value are empty.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};

use crate::config::ExperimentConfig;
use crate::trace::TraceFile;

pub const SUMMARY_COLUMNS: [&str; 7] = ["step", "n", "padded", "mean", "se", "lo", "hi"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub mean: f64,
    /// Sample standard deviation over `√n`; 0 for a single value.
    pub se: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepStats {
    pub step: usize,
    /// Traces with a value at this step.
    pub n: usize,
    /// Traces whose value here was carried forward past their last step.
    pub padded: usize,
    pub band: Option<Band>,
}

/// Per-step statistics over traces of possibly different lengths.
///
/// Entry `s` of each series is the metric after step `s + 1`; `None` marks a
/// step without a value. Shorter series are padded with their final entry.
pub fn aggregate(series: &[Vec<Option<f64>>]) -> Result<Vec<StepStats>> {
    if series.is_empty() {
        bail!("aggregation needs at least one trace");
    }
    let len = series.iter().map(Vec::len).max().unwrap_or(0);
    let mut out = Vec::with_capacity(len);
    for s in 0..len {
        let mut values = Vec::with_capacity(series.len());
        let mut padded = 0;
        for trace in series {
            let v = match trace.get(s) {
                Some(v) => *v,
                None => {
                    padded += 1;
                    trace.last().copied().flatten()
                }
            };
            values.extend(v);
        }
        out.push(StepStats {
            step: s + 1,
            n: values.len(),
            padded,
            band: band(&values),
        });
    }
    Ok(out)
}

fn band(values: &[f64]) -> Option<Band> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let se = if n > 1 {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        var.sqrt() / (n as f64).sqrt()
    } else {
        0.0
    };
    Some(Band {
        mean,
        se,
        lo: mean - 2.0 * se,
        hi: mean + 2.0 * se,
    })
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Summary {
    pub header: Vec<(String, String)>,
    pub steps: Vec<StepStats>,
}

impl Summary {
    pub fn header_value(&self, key: &str) -> Option<&str> {
        self.header.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.header {
            let _ = writeln!(out, "# {k} = {v}");
        }
        out.push_str(&SUMMARY_COLUMNS.join(","));
        out.push('\n');
        for s in &self.steps {
            let cells = match s.band {
                Some(b) => format!("{},{},{},{}", b.mean, b.se, b.lo, b.hi),
                None => ",,,".to_string(),
            };
            let _ = writeln!(out, "{},{},{},{cells}", s.step, s.n, s.padded);
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut header = Vec::new();
        let mut steps = Vec::new();
        let mut seen_columns = false;
        for (no, line) in text.lines().enumerate() {
            let ctx = || format!("line {}", no + 1);
            if !seen_columns {
                if let Some(rest) = line.strip_prefix('#') {
                    let (k, v) = rest.split_once('=').ok_or_else(|| anyhow!("malformed header")).with_context(ctx)?;
                    header.push((k.trim().to_string(), v.trim().to_string()));
                    continue;
                }
                if line != SUMMARY_COLUMNS.join(",") {
                    bail!("line {}: unexpected column header '{line}'", no + 1);
                }
                seen_columns = true;
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            steps.push(parse_step(line).with_context(ctx)?);
        }
        if !seen_columns {
            bail!("missing column header");
        }
        Ok(Self { header, steps })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in summary {}", path.display()))
    }
}

fn parse_step(line: &str) -> Result<StepStats> {
    let c: Vec<&str> = line.split(',').collect();
    if c.len() != SUMMARY_COLUMNS.len() {
        bail!("expected {} cells, found {}", SUMMARY_COLUMNS.len(), c.len());
    }
    let f = |s: &str| s.parse::<f64>().map_err(|e| anyhow!("bad number '{s}': {e}"));
    let band = if c[3].is_empty() {
        None
    } else {
        Some(Band {
            mean: f(c[3])?,
            se: f(c[4])?,
            lo: f(c[5])?,
            hi: f(c[6])?,
        })
    };
    Ok(StepStats {
        step: c[0].parse()?,
        n: c[1].parse()?,
        padded: c[2].parse()?,
        band,
    })
}

pub fn trace_path(dir: &Path, seed: u64) -> PathBuf {
    dir.join(format!("trace_seed{seed}.csv"))
}

/// Summary of the traces in a run directory.
///
/// Reads `run.cfg` for the configuration and metric and every
/// `trace_seed<N>.csv`, ordered by seed.
pub fn aggregate_dir(dir: &Path) -> Result<Summary> {
    let cfg = ExperimentConfig::load(&dir.join("run.cfg"))?;
    let mut seeds: Vec<u64> = std::fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let name = e.file_name().into_string().ok()?;
            name.strip_prefix("trace_seed")?.strip_suffix(".csv")?.parse().ok()
        })
        .collect();
    seeds.sort_unstable();
    if seeds.is_empty() {
        bail!("no trace files in {}", dir.display());
    }
    let traces = seeds
        .iter()
        .map(|&s| TraceFile::load(&trace_path(dir, s)))
        .collect::<Result<Vec<_>>>()?;
    summarize(&cfg, &traces)
}

/// Summary of already loaded traces for `cfg`.
pub fn summarize(cfg: &ExperimentConfig, traces: &[TraceFile]) -> Result<Summary> {
    let metric = cfg.metric_name();
    let series: Vec<Vec<Option<f64>>> = traces
        .iter()
        .map(|t| t.rows.iter().map(|r| r.metric(metric)).collect())
        .collect();
    let steps = aggregate(&series)?;
    let mut header: Vec<(String, String)> = cfg.entries().into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    header.push(("metric".into(), metric.into()));
    header.push(("traces".into(), traces.len().to_string()));
    Ok(Summary { header, steps })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_trace_has_zero_width() {
        let s = aggregate(&[vec![Some(1.0), Some(0.5)]]).unwrap();
        assert_eq!(s[1].band, Some(Band { mean: 0.5, se: 0.0, lo: 0.5, hi: 0.5 }));
    }

    #[test]
    fn two_traces_by_hand() {
        let s = aggregate(&[vec![Some(0.0)], vec![Some(2.0)]]).unwrap();
        let b = s[0].band.unwrap();
        assert_eq!(b.mean, 1.0);
        assert!((b.se - 1.0).abs() < 1e-15);
        assert!((b.lo + 1.0).abs() < 1e-15 && (b.hi - 3.0).abs() < 1e-15);
    }

    #[test]
    fn padding_carries_final_value() {
        let s = aggregate(&[vec![Some(3.0)], vec![Some(1.0), Some(0.0), Some(0.0)]]).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!((s[0].padded, s[2].padded), (0, 1));
        assert_eq!(s[2].band.unwrap().mean, 1.5);
        let missing = aggregate(&[vec![None, Some(1.0)]]).unwrap();
        assert_eq!(missing[0].n, 0);
        assert!(missing[0].band.is_none());
    }

    #[test]
    fn permutation_invariant() {
        let a = vec![Some(0.3), Some(0.1)];
        let b = vec![Some(1.3)];
        let c = vec![Some(-2.0), Some(4.0), Some(0.0)];
        let x = aggregate(&[a.clone(), b.clone(), c.clone()]).unwrap();
        let y = aggregate(&[c, a, b]).unwrap();
        for (p, q) in x.iter().zip(&y) {
            let (p, q) = (p.band.unwrap(), q.band.unwrap());
            assert!((p.mean - q.mean).abs() < 1e-12 && (p.se - q.se).abs() < 1e-12);
        }
        assert!(aggregate(&[]).is_err());
    }

    #[test]
    fn summary_round_trip() {
        let steps = aggregate(&[vec![Some(0.25), None], vec![Some(1.0)]]).unwrap();
        let summary = Summary {
            header: vec![("method".into(), "rs".into())],
            steps,
        };
        let text = summary.to_text();
        assert_eq!(Summary::parse(&text).unwrap(), summary);
    }
}
