//! The incremental driver: insert arcs one at a time and keep a maximum
//! arborescence forest, repairing it along one feasible path when needed.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arrivals::ArcEntry;
use crate::forest::{ArborescenceForest, ForestError};
use crate::graph::{Arc, Digraph, GraphError, Vertex};

/// Telemetry for one insertion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// 1-based insertion index.
    pub step: usize,
    pub tail: Vertex,
    pub head: Vertex,
    pub rho: Option<f64>,
    pub updated: bool,
    /// Vertex count of the feasible path, 0 without an update.
    pub path_len: usize,
    /// `|F^(i-1) \ F^(i)|`.
    pub deletions: usize,
    pub forest_size: usize,
    pub num_roots: usize,
    /// `|T'|` of the root that vanished, 0 without an update.
    pub vanishing_arb_size: usize,
    #[serde(skip)]
    pub duplicate: bool,
    /// `(kept, removed)` roots of the merge.
    #[serde(skip)]
    pub merge: Option<(Vertex, Vertex)>,
    #[serde(skip)]
    pub deleted_arcs: Vec<Arc>,
}

impl StepRecord {
    pub fn arc(&self) -> Arc {
        (self.tail, self.head)
    }
}

/// Recourse split by arc value at `2/n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PhaseSplit {
    pub phase1: u64,
    pub phase2: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecourseTrace {
    pub n: usize,
    pub records: Vec<StepRecord>,
}

impl RecourseTrace {
    pub fn m(&self) -> usize {
        self.records.len()
    }

    pub fn total_recourse(&self) -> u64 {
        self.records.iter().map(|r| r.deletions as u64).sum()
    }

    /// Phase totals, or `None` when some step has no arc value.
    pub fn phases(&self) -> Option<PhaseSplit> {
        let threshold = 2.0 / self.n as f64;
        let mut split = PhaseSplit::default();
        for r in &self.records {
            let rho = r.rho?;
            if rho <= threshold {
                split.phase1 += r.deletions as u64;
            } else {
                split.phase2 += r.deletions as u64;
            }
        }
        Some(split)
    }

    pub fn updates(&self) -> usize {
        self.records.iter().filter(|r| r.updated).count()
    }
}

/// A failed invariant, named after the property it encodes.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("step {step}: {property} violated: {detail}")]
pub struct InvariantViolation {
    pub step: usize,
    pub property: &'static str,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("step {step}: {source}")]
    Graph { step: usize, source: GraphError },
    #[error("step {step}: {source}")]
    Forest { step: usize, source: ForestError },
    #[error(transparent)]
    Invariant(#[from] InvariantViolation),
}

impl EngineError {
    pub fn step(&self) -> usize {
        match self {
            EngineError::Graph { step, .. } | EngineError::Forest { step, .. } => *step,
            EngineError::Invariant(v) => v.step,
        }
    }
}

/// Receives the state after every insertion.
pub trait StepObserver {
    fn observe(
        &mut self,
        record: &StepRecord,
        graph: &Digraph,
        forest: &ArborescenceForest,
    ) -> Result<(), InvariantViolation>;
}

#[derive(Debug, Clone)]
pub struct Engine {
    graph: Digraph,
    forest: ArborescenceForest,
    steps: usize,
}

impl Engine {
    pub fn new(n: usize) -> Self {
        Self {
            graph: Digraph::new(n),
            forest: ArborescenceForest::empty(n),
            steps: 0,
        }
    }

    pub fn graph(&self) -> &Digraph {
        &self.graph
    }

    pub fn forest(&self) -> &ArborescenceForest {
        &self.forest
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Inserts one arc and performs at most one path update. On error the
    /// state is unchanged.
    pub fn insert_arc(&mut self, arc: Arc, rho: Option<f64>) -> Result<StepRecord, EngineError> {
        let step = self.steps + 1;
        let (tail, head) = arc;
        let duplicate = self
            .graph
            .add_arc(tail, head)
            .map_err(|source| EngineError::Graph { step, source })?;
        self.steps = step;

        let mut record = StepRecord {
            step,
            tail,
            head,
            rho,
            updated: false,
            path_len: 0,
            deletions: 0,
            forest_size: self.forest.size(),
            num_roots: self.forest.num_roots(),
            vanishing_arb_size: 0,
            duplicate,
            merge: None,
            deleted_arcs: Vec::new(),
        };
        if duplicate {
            return Ok(record);
        }
        if let Some(path) = self.forest.find_feasible_path(&self.graph, arc) {
            let outcome = self
                .forest
                .path_update(&self.graph, &path.vertices)
                .map_err(|source| EngineError::Forest { step, source })?;
            record.updated = true;
            record.path_len = path.len();
            record.deletions = outcome.deleted.len();
            record.vanishing_arb_size = outcome.removed_arb_size;
            record.merge = Some((outcome.kept_root, outcome.removed_root));
            record.deleted_arcs = outcome.deleted;
            record.forest_size = self.forest.size();
            record.num_roots = self.forest.num_roots();
        }
        Ok(record)
    }

    /// Root in-component sizes, largest arborescence and isolated vertices.
    pub fn step_stats(&self) -> StepStats {
        let g = &self.graph;
        let root_in_component_sizes = root_in_component_sizes(g, &self.forest, usize::MAX);
        let largest_arborescence = self
            .forest
            .roots()
            .map(|r| self.forest.members(r).len())
            .max()
            .unwrap_or(0);
        let isolated_vertices = (0..g.n())
            .filter(|&v| g.out_neighbors(v).is_empty() && g.in_neighbors(v).is_empty())
            .count();
        StepStats {
            root_in_component_sizes,
            largest_arborescence,
            isolated_vertices,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepStats {
    /// `(root, |in-component|)` for every root, ascending by root.
    pub root_in_component_sizes: Vec<(Vertex, usize)>,
    pub largest_arborescence: usize,
    pub isolated_vertices: usize,
}

/// In-component size of every root, each search capped at `cap` vertices
/// (the returned size is then `cap`).
pub fn root_in_component_sizes(
    g: &Digraph,
    forest: &ArborescenceForest,
    cap: usize,
) -> Vec<(Vertex, usize)> {
    let mut stamp = vec![usize::MAX; g.n()];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    for r in forest.roots() {
        stamp[r] = r;
        stack.clear();
        stack.push(r);
        let mut size = 1;
        'search: while let Some(x) = stack.pop() {
            for &y in g.in_neighbors(x) {
                if stamp[y] != r {
                    stamp[y] = r;
                    size += 1;
                    if size >= cap {
                        break 'search;
                    }
                    stack.push(y);
                }
            }
        }
        out.push((r, size.min(cap)));
    }
    out
}

/// Runs `entries` from an empty graph on `n` vertices, calling every
/// observer after each step.
pub fn run_sequence(
    n: usize,
    entries: &[ArcEntry],
    observers: &mut [&mut dyn StepObserver],
) -> Result<(RecourseTrace, Engine), EngineError> {
    let mut engine = Engine::new(n);
    let mut records = Vec::with_capacity(entries.len());
    for e in entries {
        let record = engine.insert_arc((e.tail, e.head), e.rho)?;
        for obs in observers.iter_mut() {
            obs.observe(&record, &engine.graph, &engine.forest)?;
        }
        records.push(record);
    }
    Ok((RecourseTrace { n, records }, engine))
}
