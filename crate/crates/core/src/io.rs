//! Instance files and per-step CSV traces.
//!
//! An instance is plain text. The first line is `n m`, or `n m weighted`
//! optionally followed by `root=R` and `base=K`. Then come `m` arc lines in
//! insertion order: `tail head [rho]` for unweighted instances and
//! `tail head weight` for weighted ones. For weighted instances the first
//! `K` arcs (default all) form the starting graph and the rest are
//! insertions. Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arrivals::{ArcEntry, ArcSequence};
use crate::engine::{RecourseTrace, StepRecord};
use crate::experiment::TrialResult;
use crate::graph::Vertex;
use crate::mincost::{MinCostError, TriangleInstance, Weight, WeightedDigraph};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn parse_err(line: usize, message: impl Into<String>) -> IoError {
    IoError::Parse { line, message: message.into() }
}

/// Weighted arcs with a root; the first `base` arcs are the starting graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedInstance {
    pub n: usize,
    pub root: Vertex,
    pub base: usize,
    pub arcs: Vec<(Vertex, Vertex, Weight)>,
}

impl WeightedInstance {
    /// Graph of every arc in the file.
    pub fn graph(&self) -> Result<WeightedDigraph, MinCostError> {
        WeightedDigraph::from_arcs(self.n, self.root, &self.arcs)
    }

    /// Starting graph plus the remaining arcs as insertions.
    pub fn incremental(&self) -> Result<TriangleInstance, MinCostError> {
        Ok(TriangleInstance {
            initial: WeightedDigraph::from_arcs(self.n, self.root, &self.arcs[..self.base])?,
            insertions: self.arcs[self.base..].to_vec(),
        })
    }

    pub fn from_incremental(inst: &TriangleInstance) -> Self {
        let g = &inst.initial;
        let mut arcs: Vec<_> = g.arcs().iter().map(|a| (a.tail, a.head, a.weight)).collect();
        let base = arcs.len();
        arcs.extend_from_slice(&inst.insertions);
        Self { n: g.n(), root: g.root(), base, arcs }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Unweighted(ArcSequence),
    Weighted(WeightedInstance),
}

impl Instance {
    pub fn n(&self) -> usize {
        match self {
            Instance::Unweighted(s) => s.n,
            Instance::Weighted(w) => w.n,
        }
    }
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T, IoError> {
    tok.parse().map_err(|_| parse_err(line, format!("invalid {what} '{tok}'")))
}

pub fn parse_instance(text: &str) -> Result<Instance, IoError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() < 2 {
        return Err(parse_err(hline, "header must be 'n m [weighted]'"));
    }
    let n: usize = parse_num(toks[0], hline, "vertex count")?;
    let m: usize = parse_num(toks[1], hline, "arc count")?;
    let mut weighted = false;
    let mut root = 0;
    let mut base = None;
    for tok in &toks[2..] {
        if *tok == "weighted" {
            weighted = true;
        } else if let Some(v) = tok.strip_prefix("root=") {
            root = parse_num(v, hline, "root")?;
        } else if let Some(v) = tok.strip_prefix("base=") {
            base = Some(parse_num(v, hline, "base")?);
        } else {
            return Err(parse_err(hline, format!("unknown header field '{tok}'")));
        }
    }
    if !weighted && (root != 0 || base.is_some()) {
        return Err(parse_err(hline, "root= and base= need 'weighted'"));
    }
    if weighted && root >= n {
        return Err(parse_err(hline, format!("root {root} out of range for n = {n}")));
    }
    let base = base.unwrap_or(m);
    if base > m {
        return Err(parse_err(hline, format!("base {base} exceeds m = {m}")));
    }

    let mut entries = Vec::with_capacity(m);
    let mut warcs = Vec::with_capacity(m);
    let mut last_line = hline;
    for (ln, l) in lines {
        last_line = ln;
        if entries.len() + warcs.len() == m {
            return Err(parse_err(ln, format!("more than {m} arc lines")));
        }
        let t: Vec<&str> = l.split_whitespace().collect();
        let arity_ok = if weighted { t.len() == 3 } else { t.len() == 2 || t.len() == 3 };
        if !arity_ok {
            let want = if weighted { "'tail head weight'" } else { "'tail head [rho]'" };
            return Err(parse_err(ln, format!("expected {want}")));
        }
        let tail: Vertex = parse_num(t[0], ln, "tail")?;
        let head: Vertex = parse_num(t[1], ln, "head")?;
        if tail >= n || head >= n {
            return Err(parse_err(ln, format!("vertex out of range for n = {n}")));
        }
        if tail == head {
            return Err(parse_err(ln, format!("self-loop at {tail}")));
        }
        if weighted {
            warcs.push((tail, head, parse_num(t[2], ln, "weight")?));
        } else {
            let rho = match t.get(2) {
                Some(tok) => {
                    let r: f64 = parse_num(tok, ln, "rho")?;
                    if !(0.0..=1.0).contains(&r) {
                        return Err(parse_err(ln, format!("rho {r} outside [0, 1]")));
                    }
                    Some(r)
                }
                None => None,
            };
            entries.push(ArcEntry { tail, head, rho });
        }
    }
    let got = entries.len() + warcs.len();
    if got != m {
        return Err(parse_err(last_line, format!("header says {m} arcs, found {got}")));
    }
    Ok(if weighted {
        Instance::Weighted(WeightedInstance { n, root, base, arcs: warcs })
    } else {
        Instance::Unweighted(ArcSequence { n, entries, seed: None })
    })
}

pub fn read_instance(path: &std::path::Path) -> Result<Instance, IoError> {
    parse_instance(&std::fs::read_to_string(path)?)
}

pub fn format_instance(instance: &Instance) -> String {
    let mut s = String::new();
    match instance {
        Instance::Unweighted(seq) => {
            let _ = writeln!(s, "{} {}", seq.n, seq.entries.len());
            for e in &seq.entries {
                match e.rho {
                    Some(r) => {
                        let _ = writeln!(s, "{} {} {:.16e}", e.tail, e.head, r);
                    }
                    None => {
                        let _ = writeln!(s, "{} {}", e.tail, e.head);
                    }
                }
            }
        }
        Instance::Weighted(w) => {
            let _ = write!(s, "{} {} weighted", w.n, w.arcs.len());
            if w.root != 0 {
                let _ = write!(s, " root={}", w.root);
            }
            if w.base != w.arcs.len() {
                let _ = write!(s, " base={}", w.base);
            }
            s.push('\n');
            for &(t, h, wt) in &w.arcs {
                let _ = writeln!(s, "{t} {h} {wt}");
            }
        }
    }
    s
}

/// One CSV row per insertion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: usize,
    pub tail: Vertex,
    pub head: Vertex,
    pub rho: Option<f64>,
    pub updated: u8,
    pub path_len: usize,
    pub deletions: usize,
    pub forest_size: usize,
    pub num_roots: usize,
    pub vanishing_arb_size: usize,
}

pub const TRACE_HEADER: &str =
    "step,tail,head,rho,updated,path_len,deletions,forest_size,num_roots,vanishing_arb_size";

impl From<&StepRecord> for TraceRow {
    fn from(r: &StepRecord) -> Self {
        Self {
            step: r.step,
            tail: r.tail,
            head: r.head,
            rho: r.rho,
            updated: u8::from(r.updated),
            path_len: r.path_len,
            deletions: r.deletions,
            forest_size: r.forest_size,
            num_roots: r.num_roots,
            vanishing_arb_size: r.vanishing_arb_size,
        }
    }
}

/// Writes the header even for an empty trace.
pub fn write_trace<W: Write>(out: W, trace: &RecourseTrace) -> Result<(), IoError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(TRACE_HEADER.split(','))?;
    for r in &trace.records {
        w.serialize(TraceRow::from(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace<R: Read>(input: R) -> Result<Vec<TraceRow>, IoError> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != TRACE_HEADER {
        return Err(parse_err(1, format!("unexpected trace header '{}'", header.join(","))));
    }
    let mut rows = Vec::new();
    for (i, row) in rd.deserialize().enumerate() {
        rows.push(row.map_err(|e: csv::Error| parse_err(i + 2, e.to_string()))?);
    }
    Ok(rows)
}

/// One CSV row per experiment trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub total_recourse: u64,
    pub phase1_recourse: u64,
    pub phase2_recourse: u64,
    pub updates: usize,
    pub ratio_total: f64,
    pub ratio_phase1: f64,
    pub gap_qualifying_steps: Option<usize>,
    pub gap_violating_steps: Option<usize>,
    pub strongly_connected: Option<u8>,
    pub arcs_at_threshold: Option<usize>,
    pub connected_at: Option<usize>,
}

impl From<&TrialResult> for TrialRow {
    fn from(t: &TrialResult) -> Self {
        Self {
            n: t.n,
            m: t.m,
            seed: t.seed,
            total_recourse: t.total_recourse,
            phase1_recourse: t.phase1_recourse,
            phase2_recourse: t.phase2_recourse,
            updates: t.updates,
            ratio_total: t.ratio_total,
            ratio_phase1: t.ratio_phase1,
            gap_qualifying_steps: t.gap.map(|g| g.qualifying_steps),
            gap_violating_steps: t.gap.map(|g| g.violating_steps),
            strongly_connected: t.connectivity.map(|c| u8::from(c.strongly_connected)),
            arcs_at_threshold: t.connectivity.map(|c| c.arcs_at_threshold),
            connected_at: t.connectivity.and_then(|c| c.connected_at),
        }
    }
}

pub fn write_trial_matrix<W: Write>(out: W, trials: &[TrialResult]) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    for t in trials {
        w.serialize(TrialRow::from(t))?;
    }
    w.flush()?;
    Ok(())
}
