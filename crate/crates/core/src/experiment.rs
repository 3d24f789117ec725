//! Seeded scaling experiments on uniformly random arrivals.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arrivals::{ArcEntry, UniformArrivals};
use crate::engine::{root_in_component_sizes, run_sequence, InvariantViolation, StepObserver, StepRecord};
use crate::forest::ArborescenceForest;
use crate::graph::Digraph;
use crate::verify::{InvariantChecker, VerifyLevel};

pub const SCHEMA_VERSION: u32 = 1;

/// Upper end of the forbidden in-component band as a fraction of `n`.
pub const GAP_ALPHA: f64 = 0.018;

/// Arc values above `GAP_MIN_C / n` are checked against the band.
pub const GAP_MIN_C: f64 = 1.6;

/// `1 - 1.1/c - ln(c)/c`. Increasing for `c >= 1`, so its minimum over
/// `c >= 1.6` is `beta(1.6) ~ 0.01875`, which `GAP_ALPHA` rounds down.
pub fn beta(c: f64) -> f64 {
    1.0 - 1.1 / c - c.ln() / c
}

/// `ceil(n log2 n)`.
pub fn default_m(n: usize) -> usize {
    let n = n as f64;
    (n * n.log2()).ceil() as usize
}

/// Arc value after which the graph is expected to be strongly connected.
pub fn connectivity_threshold(n: usize) -> f64 {
    2.0 * (n as f64).log2() / n as f64
}

/// Inclusive band `[10 log2 n, GAP_ALPHA n]`; empty when `lo > hi`.
pub fn gap_band(n: usize) -> (f64, f64) {
    (10.0 * (n as f64).log2(), GAP_ALPHA * n as f64)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("n must be at least 2, got {0}")]
    TooFewVertices(usize),
    #[error("n list is empty")]
    NoSizes,
    #[error("m = {m} exceeds the {max} ordered pairs for n = {n}")]
    TooManyArcs { n: usize, m: usize, max: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n_list: Vec<usize>,
    /// Overrides `ceil(n log2 n)` when set.
    pub m: Option<usize>,
    pub trials: usize,
    /// Trial `i` uses seed `base_seed + i`.
    pub base_seed: u64,
    pub verify: VerifyLevel,
    pub component_gap: bool,
    pub connectivity: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_list: vec![128, 256, 512, 1024],
            m: None,
            trials: 20,
            base_seed: 0,
            verify: VerifyLevel::Sampled,
            component_gap: true,
            connectivity: true,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.trials == 0 {
            return Err(ConfigError::NoTrials);
        }
        if self.n_list.is_empty() {
            return Err(ConfigError::NoSizes);
        }
        for &n in &self.n_list {
            if n < 2 {
                return Err(ConfigError::TooFewVertices(n));
            }
            let (m, max) = (self.m_for(n), n * (n - 1));
            if m > max {
                return Err(ConfigError::TooManyArcs { n, m, max });
            }
        }
        Ok(())
    }

    pub fn m_for(&self, n: usize) -> usize {
        self.m.unwrap_or_else(|| default_m(n))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapStats {
    /// Steps with arc value above `1.6/n`.
    pub qualifying_steps: usize,
    /// Qualifying steps with at least one root in the band.
    pub violating_steps: usize,
    /// `(step, root)` pairs in the band.
    pub violations: usize,
}

/// Observer counting roots whose in-component size falls in the band.
#[derive(Debug, Clone)]
pub struct ComponentGapCheck {
    min_rho: f64,
    lo: f64,
    hi: f64,
    pub stats: GapStats,
}

impl ComponentGapCheck {
    pub fn new(n: usize) -> Self {
        let (lo, hi) = gap_band(n);
        Self { min_rho: GAP_MIN_C / n as f64, lo, hi, stats: GapStats::default() }
    }

    /// Number of roots of `forest` whose in-component size is in the band.
    pub fn count(&self, g: &Digraph, forest: &ArborescenceForest) -> usize {
        if self.lo > self.hi {
            return 0;
        }
        let cap = self.hi.floor() as usize + 1;
        root_in_component_sizes(g, forest, cap)
            .into_iter()
            .filter(|&(_, s)| (s as f64) >= self.lo && (s as f64) <= self.hi)
            .count()
    }
}

impl StepObserver for ComponentGapCheck {
    fn observe(
        &mut self,
        record: &StepRecord,
        graph: &Digraph,
        forest: &ArborescenceForest,
    ) -> Result<(), InvariantViolation> {
        if record.rho.is_some_and(|r| r > self.min_rho) {
            self.stats.qualifying_steps += 1;
            let bad = self.count(graph, forest);
            if bad > 0 {
                self.stats.violating_steps += 1;
                self.stats.violations += bad;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityResult {
    pub threshold: f64,
    /// Arcs up to and including the first with value above the threshold.
    pub arcs_at_threshold: usize,
    pub strongly_connected: bool,
    /// Fewest arcs of the stream forming a strongly connected graph.
    pub connected_at: Option<usize>,
}

/// Reads the arrival stream for `seed` past the threshold and checks strong
/// connectivity there; also locates the first strongly connected prefix.
pub fn connectivity_check(n: usize, seed: u64) -> ConnectivityResult {
    let threshold = connectivity_threshold(n);
    let mut arcs = Vec::new();
    for e in UniformArrivals::new(n, seed) {
        arcs.push(e.arc());
        if e.rho.is_some_and(|r| r > threshold) {
            break;
        }
    }
    let connected = |k: usize| Digraph::from_arcs(n, &arcs[..k]).expect("generated arcs are valid").is_strongly_connected();
    let at = arcs.len();
    let strongly_connected = connected(at);
    let connected_at = strongly_connected.then(|| {
        let (mut lo, mut hi) = (0, at);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if connected(mid) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo
    });
    ConnectivityResult { threshold, arcs_at_threshold: at, strongly_connected, connected_at }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub total_recourse: u64,
    pub phase1_recourse: u64,
    pub phase2_recourse: u64,
    pub updates: usize,
    /// `total / (m log2^2 n)`.
    pub ratio_total: f64,
    /// `phase1 / (n log2 n)`.
    pub ratio_phase1: f64,
    pub gap: Option<GapStats>,
    pub connectivity: Option<ConnectivityResult>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub n: usize,
    pub seed: u64,
    pub error: String,
}

pub fn run_trial(
    n: usize,
    m: usize,
    seed: u64,
    verify: VerifyLevel,
    component_gap: bool,
    connectivity: bool,
) -> Result<TrialResult, TrialFailure> {
    let fail = |error: String| TrialFailure { n, seed, error };
    let max = n * n.saturating_sub(1);
    if m > max {
        return Err(fail(format!("m = {m} exceeds {max}")));
    }
    let entries: Vec<ArcEntry> = UniformArrivals::new(n, seed).take(m).collect();
    let mut checker = InvariantChecker::new(n, verify).with_total_steps(m);
    let mut gap = ComponentGapCheck::new(n);
    let (trace, _) = {
        let mut observers: Vec<&mut dyn StepObserver> = vec![&mut checker];
        if component_gap {
            observers.push(&mut gap);
        }
        run_sequence(n, &entries, &mut observers).map_err(|e| fail(e.to_string()))?
    };
    let phases = trace.phases().expect("generated arcs carry values");
    let log = (n as f64).log2();
    let total = trace.total_recourse();
    Ok(TrialResult {
        n,
        m,
        seed,
        total_recourse: total,
        phase1_recourse: phases.phase1,
        phase2_recourse: phases.phase2,
        updates: trace.updates(),
        ratio_total: total as f64 / (m as f64 * log * log),
        ratio_phase1: phases.phase1 as f64 / (n as f64 * log),
        gap: component_gap.then_some(gap.stats),
        connectivity: connectivity.then(|| connectivity_check(n, seed)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Sample standard deviation; 0 for fewer than two values.
    pub fn of(values: &[f64]) -> Self {
        let k = values.len() as f64;
        if values.is_empty() {
            return Self { mean: f64::NAN, std: f64::NAN };
        }
        let mean = values.iter().sum::<f64>() / k;
        let var = if values.len() < 2 {
            0.0
        } else {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)
        };
        Self { mean, std: var.sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeAggregate {
    pub n: usize,
    pub m: usize,
    pub trials_ok: usize,
    pub trials_failed: usize,
    pub total_recourse: MeanStd,
    pub ratio_total: MeanStd,
    pub ratio_phase1: MeanStd,
    pub gap_band: (f64, f64),
    pub gap_qualifying_steps: usize,
    pub gap_violating_steps: usize,
    /// Violating over qualifying steps, pooled across trials.
    pub gap_violation_fraction: Option<f64>,
    pub fraction_strongly_connected: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub schema_version: u32,
    pub log_base: u32,
    pub config: ExperimentConfig,
    pub trials: Vec<TrialResult>,
    pub failures: Vec<TrialFailure>,
    pub aggregates: Vec<SizeAggregate>,
}

impl ExperimentSummary {
    pub fn aggregate(&self, n: usize) -> Option<&SizeAggregate> {
        self.aggregates.iter().find(|a| a.n == n)
    }
}

pub fn aggregate(n: usize, m: usize, trials: &[&TrialResult], failed: usize) -> SizeAggregate {
    let col = |f: fn(&TrialResult) -> f64| trials.iter().map(|t| f(t)).collect::<Vec<_>>();
    let gaps: Vec<GapStats> = trials.iter().filter_map(|t| t.gap).collect();
    let qualifying: usize = gaps.iter().map(|g| g.qualifying_steps).sum();
    let violating: usize = gaps.iter().map(|g| g.violating_steps).sum();
    let conns: Vec<bool> = trials.iter().filter_map(|t| t.connectivity.map(|c| c.strongly_connected)).collect();
    SizeAggregate {
        n,
        m,
        trials_ok: trials.len(),
        trials_failed: failed,
        total_recourse: MeanStd::of(&col(|t| t.total_recourse as f64)),
        ratio_total: MeanStd::of(&col(|t| t.ratio_total)),
        ratio_phase1: MeanStd::of(&col(|t| t.ratio_phase1)),
        gap_band: gap_band(n),
        gap_qualifying_steps: qualifying,
        gap_violating_steps: violating,
        gap_violation_fraction: (qualifying > 0).then(|| violating as f64 / qualifying as f64),
        fraction_strongly_connected: (!conns.is_empty())
            .then(|| conns.iter().filter(|&&c| c).count() as f64 / conns.len() as f64),
    }
}

/// Runs every `(n, trial)` pair in parallel. Results are ordered by `n`
/// then seed regardless of scheduling.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentSummary, ConfigError> {
    config.validate()?;
    let jobs: Vec<(usize, u64)> = config
        .n_list
        .iter()
        .flat_map(|&n| (0..config.trials as u64).map(move |i| (n, config.base_seed.wrapping_add(i))))
        .collect();
    let outcomes: Vec<Result<TrialResult, TrialFailure>> = jobs
        .par_iter()
        .map(|&(n, seed)| {
            run_trial(n, config.m_for(n), seed, config.verify, config.component_gap, config.connectivity)
        })
        .collect();
    let mut trials = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(t) => trials.push(t),
            Err(f) => failures.push(f),
        }
    }
    let aggregates = config
        .n_list
        .iter()
        .map(|&n| {
            let ok: Vec<&TrialResult> = trials.iter().filter(|t| t.n == n).collect();
            let failed = failures.iter().filter(|f| f.n == n).count();
            aggregate(n, config.m_for(n), &ok, failed)
        })
        .collect();
    Ok(ExperimentSummary {
        schema_version: SCHEMA_VERSION,
        log_base: 2,
        config: config.clone(),
        trials,
        failures,
        aggregates,
    })
}
