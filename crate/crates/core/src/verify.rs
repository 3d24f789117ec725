//! Runtime invariant checking for engine runs.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::engine::{InvariantViolation, StepObserver, StepRecord};
use crate::forest::ArborescenceForest;
use crate::graph::{Digraph, Vertex};
use crate::oracle;

/// How much checking an engine run performs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum VerifyLevel {
    Off,
    /// Cardinality oracle every `sample_every` steps and at the last step.
    #[default]
    Sampled,
    /// Every property after every step.
    Full,
}

impl FromStr for VerifyLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "off" => Ok(Self::Off),
            "sampled" => Ok(Self::Sampled),
            "full" => Ok(Self::Full),
            other => Err(format!("unknown verify level '{other}' (off, sampled, full)")),
        }
    }
}

pub const DEFAULT_SAMPLE_EVERY: usize = 32;

/// Counts of checks performed, per property.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CheckCounts {
    pub cardinality: usize,
    pub maximality: usize,
    pub containment: usize,
    pub preservation: usize,
    pub recourse_bound: usize,
    pub validity: usize,
}

/// Observer asserting the forest properties after each insertion.
///
/// Property names used in violations: `forest-validity`, `cardinality`,
/// `no-root-path`, `in-component-containment`, `in-component-preservation`,
/// `recourse-bound`, `recourse-ledger`.
#[derive(Debug, Clone)]
pub struct InvariantChecker {
    level: VerifyLevel,
    sample_every: usize,
    total_steps: Option<usize>,
    prev_parent: Vec<Option<Vertex>>,
    ledger: u64,
    reported: u64,
    pub counts: CheckCounts,
}

impl InvariantChecker {
    pub fn new(n: usize, level: VerifyLevel) -> Self {
        Self {
            level,
            sample_every: DEFAULT_SAMPLE_EVERY,
            total_steps: None,
            prev_parent: vec![None; n],
            ledger: 0,
            reported: 0,
            counts: CheckCounts::default(),
        }
    }

    pub fn with_sample_every(mut self, k: usize) -> Self {
        self.sample_every = k.max(1);
        self
    }

    /// Lets sampled mode also check the final step.
    pub fn with_total_steps(mut self, m: usize) -> Self {
        self.total_steps = Some(m);
        self
    }

    /// Recourse recomputed from consecutive parent maps.
    pub fn recomputed_recourse(&self) -> u64 {
        self.ledger
    }

    fn fail(step: usize, property: &'static str, detail: String) -> InvariantViolation {
        InvariantViolation { step, property, detail }
    }

    fn check_cardinality(
        &mut self,
        record: &StepRecord,
        graph: &Digraph,
        forest: &ArborescenceForest,
    ) -> Result<(), InvariantViolation> {
        self.counts.cardinality += 1;
        let expected = oracle::max_forest_cardinality(graph);
        if forest.size() != expected {
            return Err(Self::fail(
                record.step,
                "cardinality",
                format!("|F| = {}, oracle = {expected}", forest.size()),
            ));
        }
        Ok(())
    }

    fn check_full(
        &mut self,
        record: &StepRecord,
        graph: &Digraph,
        forest: &ArborescenceForest,
    ) -> Result<(), InvariantViolation> {
        let step = record.step;

        self.counts.validity += 1;
        let report = forest.validate(graph);
        if !report.is_ok() {
            return Err(Self::fail(step, "forest-validity", report.to_string()));
        }

        self.check_cardinality(record, graph, forest)?;

        self.counts.maximality += 1;
        if let Some((r, r2)) = oracle::find_root_to_root(forest, graph) {
            return Err(Self::fail(step, "no-root-path", format!("root {r} reaches root {r2}")));
        }

        for r in forest.roots() {
            self.counts.containment += 1;
            let inc = graph.in_component(r).expect("root in range");
            if let Some(&x) = inc.iter().find(|&&x| forest.root_of(x) != r) {
                return Err(Self::fail(
                    step,
                    "in-component-containment",
                    format!("{x} reaches root {r} but lies under root {}", forest.root_of(x)),
                ));
            }
        }

        if let Some((kept, _)) = record.merge {
            self.counts.preservation += 1;
            let before = graph
                .in_component_without(kept, record.arc())
                .expect("root in range");
            let after = graph.in_component(kept).expect("root in range");
            if before != after {
                return Err(Self::fail(
                    step,
                    "in-component-preservation",
                    format!(
                        "in-component of {kept} grew from {} to {}",
                        before.len(),
                        after.len()
                    ),
                ));
            }
        }
        Ok(())
    }
}

impl StepObserver for InvariantChecker {
    fn observe(
        &mut self,
        record: &StepRecord,
        graph: &Digraph,
        forest: &ArborescenceForest,
    ) -> Result<(), InvariantViolation> {
        let step = record.step;
        if self.level == VerifyLevel::Off {
            return Ok(());
        }

        // Cheap checks run at every step in sampled and full mode.
        if record.updated {
            self.counts.recourse_bound += 1;
            if record.deletions > record.vanishing_arb_size {
                return Err(Self::fail(
                    step,
                    "recourse-bound",
                    format!(
                        "{} deletions exceed |T'| = {}",
                        record.deletions, record.vanishing_arb_size
                    ),
                ));
            }
        } else if record.deletions != 0 {
            return Err(Self::fail(step, "recourse-bound", "deletions without update".into()));
        }
        if record.num_roots + record.forest_size != graph.n() {
            return Err(Self::fail(step, "forest-validity", "roots + |F| != n".into()));
        }

        let removed = self
            .prev_parent
            .iter()
            .enumerate()
            .filter(|&(v, p)| p.is_some() && forest.parent(v) != *p)
            .count() as u64;
        self.ledger += removed;
        self.reported += record.deletions as u64;
        self.prev_parent.copy_from_slice(forest.parents());
        if self.ledger != self.reported {
            return Err(Self::fail(
                step,
                "recourse-ledger",
                format!("reported {} deletions, snapshots show {}", self.reported, self.ledger),
            ));
        }

        match self.level {
            VerifyLevel::Full => self.check_full(record, graph, forest),
            VerifyLevel::Sampled => {
                let last = self.total_steps == Some(step);
                if step.is_multiple_of(self.sample_every) || last {
                    self.check_cardinality(record, graph, forest)?;
                }
                Ok(())
            }
            VerifyLevel::Off => Ok(()),
        }
    }
}
