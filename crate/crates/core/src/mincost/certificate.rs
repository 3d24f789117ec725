use std::fmt;

use serde::Serialize;

use crate::graph::{Arc, Vertex};

use super::{Weight, WeightedDigraph};

/// A vertex set with its dual multiplier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DualSet {
    /// Sorted members.
    pub vertices: Vec<Vertex>,
    pub multiplier: i64,
}

/// Family of cuts whose multipliers lower-bound every spanning arborescence.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DualPacking {
    pub sets: Vec<DualSet>,
}

impl DualPacking {
    pub fn value(&self) -> i64 {
        self.sets.iter().map(|s| s.multiplier).sum()
    }

    /// Any two sets nested or disjoint.
    pub fn is_laminar(&self) -> bool {
        self.laminar_violation().is_none()
    }

    fn laminar_violation(&self) -> Option<(usize, usize)> {
        for i in 0..self.sets.len() {
            for j in i + 1..self.sets.len() {
                let (a, b) = (&self.sets[i].vertices, &self.sets[j].vertices);
                let common = a.iter().filter(|x| b.binary_search(x).is_ok()).count();
                if common != 0 && common != a.len() && common != b.len() {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// Cost minus the multipliers of every set the arc enters.
    pub fn reduced_cost(&self, arc: Arc, weight: Weight) -> i64 {
        let (t, h) = arc;
        let entered: i64 = self
            .sets
            .iter()
            .filter(|s| s.vertices.binary_search(&h).is_ok() && s.vertices.binary_search(&t).is_err())
            .map(|s| s.multiplier)
            .sum();
        weight as i64 - entered
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CertificateViolation {
    NotArborescence,
    NotLaminar { first: usize, second: usize },
    NegativeMultiplier { set: usize },
    /// A set is empty or contains the root, so not every arborescence
    /// must enter it.
    InvalidSet { set: usize },
    NegativeReducedCost { arc: Arc, reduced: i64 },
    TreeArcNotTight { arc: Arc, reduced: i64 },
    ValueMismatch { dual: i64, primal: i64 },
}

impl fmt::Display for CertificateViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NotArborescence => write!(f, "tree is not a spanning arborescence"),
            Self::NotLaminar { first, second } => write!(f, "(a) sets {first} and {second} cross"),
            Self::NegativeMultiplier { set } => write!(f, "(a) set {set} has a negative multiplier"),
            Self::InvalidSet { set } => write!(f, "(a) set {set} is empty or contains the root"),
            Self::NegativeReducedCost { arc, reduced } => {
                write!(f, "(b) arc {arc:?} has reduced cost {reduced}")
            }
            Self::TreeArcNotTight { arc, reduced } => {
                write!(f, "(c) tree arc {arc:?} has reduced cost {reduced}")
            }
            Self::ValueMismatch { dual, primal } => {
                write!(f, "(d) dual value {dual} != tree cost {primal}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CertificateReport {
    pub violations: Vec<CertificateViolation>,
}

impl CertificateReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for CertificateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return write!(f, "valid");
        }
        let parts: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Checks that `packing` proves `tree` optimal: laminar nonnegative family of
/// root-free sets, all reduced costs nonnegative, tree arcs tight, and dual
/// value equal to the tree cost.
pub fn verify_dual_certificate(g: &WeightedDigraph, tree: &[Arc], packing: &DualPacking) -> CertificateReport {
    let mut report = CertificateReport::default();
    if !g.is_spanning_arborescence(tree) {
        report.violations.push(CertificateViolation::NotArborescence);
        return report;
    }
    if let Some((first, second)) = packing.laminar_violation() {
        report.violations.push(CertificateViolation::NotLaminar { first, second });
    }
    for (i, s) in packing.sets.iter().enumerate() {
        if s.multiplier < 0 {
            report.violations.push(CertificateViolation::NegativeMultiplier { set: i });
        }
        if s.vertices.is_empty() || s.vertices.binary_search(&g.root()).is_ok() {
            report.violations.push(CertificateViolation::InvalidSet { set: i });
        }
    }
    for a in g.arcs() {
        let reduced = packing.reduced_cost((a.tail, a.head), a.weight);
        if reduced < 0 {
            report.violations.push(CertificateViolation::NegativeReducedCost {
                arc: (a.tail, a.head),
                reduced,
            });
        }
    }
    for &(t, h) in tree {
        let w = g.weight(t, h).expect("checked spanning");
        let reduced = packing.reduced_cost((t, h), w);
        if reduced != 0 {
            report.violations.push(CertificateViolation::TreeArcNotTight { arc: (t, h), reduced });
        }
    }
    let primal = g.cost(tree).expect("checked spanning") as i64;
    if packing.value() != primal {
        report.violations.push(CertificateViolation::ValueMismatch {
            dual: packing.value(),
            primal,
        });
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> WeightedDigraph {
        WeightedDigraph::from_arcs(3, 0, &[(0, 1, 0), (0, 2, 5), (1, 2, 1)]).unwrap()
    }

    #[test]
    fn empty_packing_certifies_zero_tree() {
        let g = WeightedDigraph::from_arcs(3, 0, &[(0, 1, 0), (1, 2, 0), (0, 2, 3)]).unwrap();
        assert!(verify_dual_certificate(&g, &[(0, 1), (1, 2)], &DualPacking::default()).is_valid());
    }

    #[test]
    fn hand_packing_for_three_vertices() {
        let g = example();
        let packing = DualPacking {
            sets: vec![DualSet { vertices: vec![2], multiplier: 1 }],
        };
        assert!(verify_dual_certificate(&g, &[(0, 1), (1, 2)], &packing).is_valid());
        // Same packing cannot certify the worse tree.
        let r = verify_dual_certificate(&g, &[(0, 1), (0, 2)], &packing);
        assert!(r
            .violations
            .iter()
            .any(|v| matches!(v, CertificateViolation::ValueMismatch { .. })));
    }

    #[test]
    fn inflated_multiplier_fails() {
        let g = example();
        let packing = DualPacking {
            sets: vec![DualSet { vertices: vec![2], multiplier: 2 }],
        };
        let r = verify_dual_certificate(&g, &[(0, 1), (1, 2)], &packing);
        assert!(r.violations.iter().any(|v| matches!(
            v,
            CertificateViolation::NegativeReducedCost { .. } | CertificateViolation::ValueMismatch { .. }
        )));
    }

    #[test]
    fn crossing_and_rooted_sets_fail() {
        let g = WeightedDigraph::from_arcs(4, 0, &[(0, 1, 1), (1, 2, 1), (2, 3, 1)]).unwrap();
        let packing = DualPacking {
            sets: vec![
                DualSet { vertices: vec![1, 2], multiplier: 0 },
                DualSet { vertices: vec![2, 3], multiplier: 0 },
                DualSet { vertices: vec![0, 1], multiplier: 0 },
            ],
        };
        let r = verify_dual_certificate(&g, &[(0, 1), (1, 2), (2, 3)], &packing);
        assert!(r.violations.contains(&CertificateViolation::NotLaminar { first: 0, second: 1 }));
        assert!(r.violations.contains(&CertificateViolation::InvalidSet { set: 2 }));
    }
}
