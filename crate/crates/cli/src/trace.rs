//! Per-seed trace files.
//!
//! A trace is a block of `# key = value` header lines followed by a CSV table
//! with the columns of [`COLUMNS`]. Vector-valued cells (`x`, `w`) hold
//! space-separated numbers and absent values are empty cells. Floats use the
//! shortest representation that parses back to the same bits.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use mvabo_core::scenarios::TraceRecord;

pub const COLUMNS: [&str; 16] = [
    "step",
    "design",
    "env",
    "x",
    "w",
    "y",
    "beta",
    "recommendation",
    "regret",
    "hv_gap",
    "pareto_size",
    "potential_size",
    "uncertain_size",
    "terminated",
    "contained",
    "lifted_contained",
];

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub step: usize,
    pub design: usize,
    pub env: usize,
    pub x: Vec<f64>,
    pub w: Vec<f64>,
    pub y: f64,
    pub beta: f64,
    pub recommendation: Option<usize>,
    pub regret: Option<f64>,
    pub hv_gap: Option<f64>,
    pub set_sizes: Option<(usize, usize, usize)>,
    pub terminated: bool,
    pub contained: bool,
    pub lifted_contained: bool,
}

impl From<&TraceRecord<f64>> for TraceRow {
    fn from(r: &TraceRecord<f64>) -> Self {
        Self {
            step: r.step,
            design: r.design,
            env: r.env,
            x: r.x.clone(),
            w: r.w.clone(),
            y: r.y,
            beta: r.beta,
            recommendation: r.recommendation,
            regret: r.regret,
            hv_gap: r.hv_gap,
            set_sizes: r.set_sizes,
            terminated: r.terminated,
            contained: r.contained,
            lifted_contained: r.lifted_contained,
        }
    }
}

impl TraceRow {
    /// The named per-step metric (`regret` or `hv_gap`).
    pub fn metric(&self, name: &str) -> Option<f64> {
        match name {
            "regret" => self.regret,
            "hv_gap" => self.hv_gap,
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TraceFile {
    /// Header entries in file order.
    pub header: Vec<(String, String)>,
    pub rows: Vec<TraceRow>,
}

impl TraceFile {
    pub fn header_value(&self, key: &str) -> Option<&str> {
        self.header.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.header {
            let _ = writeln!(out, "# {k} = {v}");
        }
        out.push_str(&COLUMNS.join(","));
        out.push('\n');
        for r in &self.rows {
            let opt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
            let (p, m, u) = match r.set_sizes {
                Some((p, m, u)) => (p.to_string(), m.to_string(), u.to_string()),
                None => Default::default(),
            };
            let cells = [
                r.step.to_string(),
                r.design.to_string(),
                r.env.to_string(),
                join(&r.x),
                join(&r.w),
                r.y.to_string(),
                r.beta.to_string(),
                r.recommendation.map_or(String::new(), |v| v.to_string()),
                opt(r.regret),
                opt(r.hv_gap),
                p,
                m,
                u,
                r.terminated.to_string(),
                r.contained.to_string(),
                r.lifted_contained.to_string(),
            ];
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut header = Vec::new();
        let mut lines = text.lines().enumerate().peekable();
        while let Some((_, line)) = lines.peek() {
            let Some(rest) = line.strip_prefix('#') else { break };
            let (k, v) = rest
                .split_once('=')
                .ok_or_else(|| anyhow!("malformed header line '{line}'"))?;
            header.push((k.trim().to_string(), v.trim().to_string()));
            lines.next();
        }
        match lines.next() {
            Some((_, h)) if h == COLUMNS.join(",") => {}
            Some((no, h)) => bail!("line {}: unexpected column header '{h}'", no + 1),
            None => bail!("missing column header"),
        }
        let rows = lines
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(no, l)| parse_row(l).with_context(|| format!("line {}", no + 1)))
            .collect::<Result<_>>()?;
        Ok(Self { header, rows })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in trace {}", path.display()))
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn parse_row(line: &str) -> Result<TraceRow> {
    let c: Vec<&str> = line.split(',').collect();
    if c.len() != COLUMNS.len() {
        bail!("expected {} cells, found {}", COLUMNS.len(), c.len());
    }
    let f = |s: &str| s.parse::<f64>().map_err(|e| anyhow!("bad number '{s}': {e}"));
    let u = |s: &str| s.parse::<usize>().map_err(|e| anyhow!("bad integer '{s}': {e}"));
    let b = |s: &str| s.parse::<bool>().map_err(|e| anyhow!("bad flag '{s}': {e}"));
    let of = |s: &str| if s.is_empty() { Ok(None) } else { f(s).map(Some) };
    let vec = |s: &str| s.split_whitespace().map(f).collect::<Result<Vec<_>>>();
    let set_sizes = if c[10].is_empty() {
        None
    } else {
        Some((u(c[10])?, u(c[11])?, u(c[12])?))
    };
    Ok(TraceRow {
        step: u(c[0])?,
        design: u(c[1])?,
        env: u(c[2])?,
        x: vec(c[3])?,
        w: vec(c[4])?,
        y: f(c[5])?,
        beta: f(c[6])?,
        recommendation: if c[7].is_empty() { None } else { Some(u(c[7])?) },
        regret: of(c[8])?,
        hv_gap: of(c[9])?,
        set_sizes,
        terminated: b(c[13])?,
        contained: b(c[14])?,
        lifted_contained: b(c[15])?,
    })
}

/// Wall-clock sidecar: `step,elapsed_ms`.
pub fn timing_text(elapsed_ms: &[f64]) -> String {
    let mut out = String::from("step,elapsed_ms\n");
    for (i, ms) in elapsed_ms.iter().enumerate() {
        let _ = writeln!(out, "{},{ms:.3}", i + 1);
    }
    out
}
