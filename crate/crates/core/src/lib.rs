//! Incremental maximum arborescence forests with low recourse.
//!
//! Arcs arrive one at a time. The [`engine::Engine`] keeps an arborescence
//! forest of maximum size, repairing it along a single root-to-root path
//! when an insertion allows a larger forest, and records how many forest
//! arcs each repair deletes.

pub mod arrivals;
pub mod engine;
pub mod experiment;
pub mod forest;
pub mod graph;
pub mod io;
pub mod mincost;
pub mod oracle;
pub mod verify;

pub use arrivals::{ArcEntry, ArcSequence, UniformArrivals};
pub use engine::{run_sequence, Engine, RecourseTrace, StepObserver, StepRecord};
pub use forest::{ArborescenceForest, FeasiblePath};
pub use graph::{Arc, Digraph, Vertex};
pub use verify::{InvariantChecker, VerifyLevel};
