//! Arborescence forests: the solution object, its validation, the path
//! update that merges two arborescences, and feasible-path search.

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

use crate::graph::{Arc, Digraph, Direction, GraphError, Vertex};

/// One broken forest property.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// A vertex has more than one entering forest arc.
    InDegree { vertex: Vertex, count: usize },
    /// Following parents from `vertex` revisits a vertex.
    Cycle { vertex: Vertex },
    /// A forest arc is absent from the digraph.
    ArcNotInGraph { arc: Arc },
    /// An arc endpoint is outside `0..n`.
    VertexOutOfRange { arc: Arc },
    /// Cached root label disagrees with the parent chain.
    RootMismatch { vertex: Vertex, cached: Vertex, actual: Vertex },
    /// Cached member lists do not partition the vertex set.
    Membership { root: Vertex },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::InDegree { vertex, count } => {
                write!(f, "vertex {vertex} has in-degree {count} in the forest")
            }
            Violation::Cycle { vertex } => write!(f, "undirected cycle through vertex {vertex}"),
            Violation::ArcNotInGraph { arc } => write!(f, "forest arc {arc:?} is not in the graph"),
            Violation::VertexOutOfRange { arc } => write!(f, "arc {arc:?} has an out-of-range endpoint"),
            Violation::RootMismatch { vertex, cached, actual } => {
                write!(f, "vertex {vertex}: cached root {cached}, actual root {actual}")
            }
            Violation::Membership { root } => write!(f, "member list of root {root} is inconsistent"),
        }
    }
}

/// Result of [`validate_arcs`] / [`ArborescenceForest::validate`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Checks that `arcs` form an arborescence forest of `g`: in-degree at most
/// one, no cycle once directions are forgotten, every arc present in `g`.
pub fn validate_arcs(g: &Digraph, arcs: &[Arc]) -> ValidationReport {
    let n = g.n();
    let mut report = ValidationReport::default();
    let mut parent = vec![None; n];
    let mut indeg = vec![0usize; n];
    for &(t, h) in arcs {
        if t >= n || h >= n {
            report.violations.push(Violation::VertexOutOfRange { arc: (t, h) });
            continue;
        }
        if !g.has_arc(t, h) {
            report.violations.push(Violation::ArcNotInGraph { arc: (t, h) });
        }
        indeg[h] += 1;
        parent[h] = Some(t);
    }
    for (v, &d) in indeg.iter().enumerate() {
        if d > 1 {
            report.violations.push(Violation::InDegree { vertex: v, count: d });
        }
    }
    if report.violations.iter().any(|v| matches!(v, Violation::InDegree { .. })) {
        // With in-degree <= 1 violated the parent map is ambiguous; fall back
        // to an undirected union-find cycle test.
        let mut uf: Vec<usize> = (0..n).collect();
        fn find(uf: &mut [usize], mut x: usize) -> usize {
            while uf[x] != x {
                uf[x] = uf[uf[x]];
                x = uf[x];
            }
            x
        }
        for &(t, h) in arcs {
            if t >= n || h >= n {
                continue;
            }
            let (a, b) = (find(&mut uf, t), find(&mut uf, h));
            if a == b {
                report.violations.push(Violation::Cycle { vertex: h });
            } else {
                uf[a] = b;
            }
        }
        return report;
    }
    if let Some(v) = find_parent_cycle(&parent) {
        report.violations.push(Violation::Cycle { vertex: v });
    }
    report
}

/// Returns a vertex on a parent-pointer cycle, if any.
fn find_parent_cycle(parent: &[Option<Vertex>]) -> Option<Vertex> {
    // 0 = unvisited, 1 = on the current walk, 2 = reaches a root
    let mut state = vec![0u8; parent.len()];
    let mut walk = Vec::new();
    for start in 0..parent.len() {
        walk.clear();
        let mut x = start;
        loop {
            match state[x] {
                1 => return Some(x),
                2 => break,
                _ => {}
            }
            state[x] = 1;
            walk.push(x);
            match parent[x] {
                Some(p) => x = p,
                None => break,
            }
        }
        for &w in &walk {
            state[w] = 2;
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ForestError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("arcs do not form an arborescence forest: {0}")]
    Invalid(ValidationReport),
    #[error("path endpoints {first} and {last} are not distinct roots")]
    EndpointsNotRoots { first: Vertex, last: Vertex },
    #[error("path arc {0:?} is not in the graph")]
    ArcMissing(Arc),
    #[error("path repeats vertex {0}")]
    NotSimple(Vertex),
    #[error("path needs at least two vertices")]
    TooShort,
}

impl std::error::Error for ValidationReport {}

/// A root-to-root path `P_A ⊕ P_V`: the arcs before `split_index` run inside
/// the source root's arborescence, the vertices after it lie in the target
/// root's arborescence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasiblePath {
    pub vertices: Vec<Vertex>,
    /// Position of the last vertex of the tree segment.
    pub split_index: usize,
}

impl FeasiblePath {
    pub fn arcs(&self) -> impl Iterator<Item = Arc> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn source(&self) -> Vertex {
        self.vertices[0]
    }

    pub fn target(&self) -> Vertex {
        *self.vertices.last().expect("feasible path is never empty")
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Checks the split structure against `forest` (before the update).
    pub fn check_structure(&self, forest: &ArborescenceForest) -> Result<(), String> {
        let (r, r2) = (self.source(), self.target());
        if r == r2 || !forest.is_root(r) || !forest.is_root(r2) {
            return Err(format!("endpoints {r},{r2} are not distinct roots"));
        }
        for i in 0..self.split_index {
            let (t, h) = (self.vertices[i], self.vertices[i + 1]);
            if forest.parent(h) != Some(t) || forest.root_of(h) != r {
                return Err(format!("arc ({t},{h}) is not a tree arc of root {r}"));
            }
        }
        for &x in &self.vertices[self.split_index + 1..] {
            if forest.root_of(x) != r2 {
                return Err(format!("vertex {x} is not in the arborescence of {r2}"));
            }
        }
        Ok(())
    }
}

/// What a path update changed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpdateOutcome {
    /// `F \ F'`: parent arcs removed and not re-added by the path.
    pub deleted: Vec<Arc>,
    /// Root that absorbed the other arborescence.
    pub kept_root: Vertex,
    /// Root that stopped being a root.
    pub removed_root: Vertex,
    /// Size of the removed root's arborescence before the update.
    pub removed_arb_size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArborescenceForest {
    parent: Vec<Option<Vertex>>,
    root_of: Vec<Vertex>,
    members: Vec<Vec<Vertex>>,
    size: usize,
}

impl ArborescenceForest {
    /// The empty forest: every vertex is its own root.
    pub fn empty(n: usize) -> Self {
        Self {
            parent: vec![None; n],
            root_of: (0..n).collect(),
            members: (0..n).map(|v| vec![v]).collect(),
            size: 0,
        }
    }

    pub fn from_arcs(g: &Digraph, arcs: &[Arc]) -> Result<Self, ForestError> {
        let report = validate_arcs(g, arcs);
        if !report.is_ok() {
            return Err(ForestError::Invalid(report));
        }
        let mut parent = vec![None; g.n()];
        for &(t, h) in arcs {
            parent[h] = Some(t);
        }
        Ok(Self::from_parents(parent))
    }

    /// Builds the derived maps from an acyclic parent map.
    pub fn from_parents(parent: Vec<Option<Vertex>>) -> Self {
        let n = parent.len();
        let mut forest = Self {
            parent,
            root_of: vec![usize::MAX; n],
            members: vec![Vec::new(); n],
            size: 0,
        };
        forest.size = forest.parent.iter().filter(|p| p.is_some()).count();
        let all: Vec<Vertex> = (0..n).collect();
        forest.relabel(&all);
        forest
    }

    /// Recomputes `root_of` and member lists for `vertices`, which must be a
    /// union of complete arborescences (before and after the change).
    fn relabel(&mut self, vertices: &[Vertex]) {
        const UNKNOWN: usize = usize::MAX;
        for &v in vertices {
            let r = self.root_of[v];
            if r != UNKNOWN {
                self.members[r].clear();
            }
            self.root_of[v] = UNKNOWN;
        }
        let mut chain = Vec::new();
        for &v in vertices {
            chain.clear();
            let mut x = v;
            while self.root_of[x] == UNKNOWN {
                chain.push(x);
                match self.parent[x] {
                    Some(p) => x = p,
                    None => break,
                }
            }
            let root = if self.root_of[x] == UNKNOWN { x } else { self.root_of[x] };
            for &c in &chain {
                self.root_of[c] = root;
            }
        }
        let mut new_roots = Vec::new();
        for &v in vertices {
            let r = self.root_of[v];
            if self.members[r].is_empty() {
                new_roots.push(r);
            }
            self.members[r].push(v);
        }
        for r in new_roots {
            self.members[r].sort_unstable();
        }
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    /// Number of arcs `|F|`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn num_roots(&self) -> usize {
        self.n() - self.size
    }

    pub fn parent(&self, v: Vertex) -> Option<Vertex> {
        self.parent[v]
    }

    pub fn parents(&self) -> &[Option<Vertex>] {
        &self.parent
    }

    pub fn root_of(&self, v: Vertex) -> Vertex {
        self.root_of[v]
    }

    pub fn is_root(&self, v: Vertex) -> bool {
        self.parent[v].is_none()
    }

    pub fn roots(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.n()).filter(|&v| self.parent[v].is_none())
    }

    /// Vertices of the arborescence rooted at `root` (sorted). Empty if
    /// `root` is not a root.
    pub fn members(&self, root: Vertex) -> &[Vertex] {
        &self.members[root]
    }

    /// Forest arcs sorted by head.
    pub fn arcs(&self) -> Vec<Arc> {
        self.parent
            .iter()
            .enumerate()
            .filter_map(|(h, p)| p.map(|t| (t, h)))
            .collect()
    }

    /// Root and member set of the arborescence containing `v`.
    pub fn arborescence_of(&self, v: Vertex) -> Result<(Vertex, &[Vertex]), GraphError> {
        if v >= self.n() {
            return Err(GraphError::VertexOutOfRange { vertex: v, n: self.n() });
        }
        let r = self.root_of[v];
        Ok((r, &self.members[r]))
    }

    /// Tree path from the root of `v` down to `v`.
    pub fn tree_path_to(&self, v: Vertex) -> Vec<Vertex> {
        let mut path = vec![v];
        let mut x = v;
        while let Some(p) = self.parent[x] {
            path.push(p);
            x = p;
        }
        path.reverse();
        path
    }

    /// Checks the forest against `g`, including the cached root labels and
    /// member lists.
    pub fn validate(&self, g: &Digraph) -> ValidationReport {
        let mut report = validate_arcs(g, &self.arcs());
        if !report.is_ok() {
            return report;
        }
        let fresh = Self::from_parents(self.parent.clone());
        for v in 0..self.n() {
            if fresh.root_of[v] != self.root_of[v] {
                report.violations.push(Violation::RootMismatch {
                    vertex: v,
                    cached: self.root_of[v],
                    actual: fresh.root_of[v],
                });
            }
            if fresh.members[v] != self.members[v] {
                report.violations.push(Violation::Membership { root: v });
            }
        }
        if self.size != fresh.size {
            report.violations.push(Violation::Membership { root: usize::MAX });
        }
        report
    }

    /// Applies `UPDATE(F, P)`: drops the parent arcs of the internal vertices
    /// of `path` and adds the path's arcs.
    pub fn path_update(&mut self, g: &Digraph, path: &[Vertex]) -> Result<UpdateOutcome, ForestError> {
        if path.len() < 2 {
            return Err(ForestError::TooShort);
        }
        for &x in path {
            g.check_vertex(x)?;
        }
        let (first, last) = (path[0], path[path.len() - 1]);
        if first == last || !self.is_root(first) || !self.is_root(last) {
            return Err(ForestError::EndpointsNotRoots { first, last });
        }
        let mut seen = vec![false; self.n()];
        for &x in path {
            if std::mem::replace(&mut seen[x], true) {
                return Err(ForestError::NotSimple(x));
            }
        }
        for w in path.windows(2) {
            if !g.has_arc(w[0], w[1]) {
                return Err(ForestError::ArcMissing((w[0], w[1])));
            }
        }

        let removed_arb_size = self.members[last].len();
        let mut deleted = Vec::new();
        for w in path.windows(2) {
            let (t, h) = (w[0], w[1]);
            if let Some(old) = self.parent[h] {
                if old != t {
                    deleted.push((old, h));
                }
            }
            self.parent[h] = Some(t);
        }
        self.size += 1;

        // Only arborescences touched by the path can change labels.
        let mut touched_roots: Vec<Vertex> = path.iter().map(|&x| self.root_of[x]).collect();
        touched_roots.sort_unstable();
        touched_roots.dedup();
        let affected: Vec<Vertex> = touched_roots
            .iter()
            .flat_map(|&r| self.members[r].iter().copied())
            .collect();
        self.relabel(&affected);

        Ok(UpdateOutcome {
            deleted,
            kept_root: first,
            removed_root: last,
            removed_arb_size,
        })
    }

    /// Finds a feasible path created by the just-inserted arc `a = (u, v)`,
    /// assuming the forest was maximum for `g` without `a`.
    ///
    /// The target root is the root of `v`'s arborescence, reached by a
    /// shortest path from `v` avoiding `a`. The source is the root of `u` when
    /// that root differs from the target; otherwise the nearest other root
    /// that reaches `u`. The raw path is then cut at its last vertex `w`
    /// outside the target arborescence and re-routed along the tree path to
    /// `w`. Ties go to the smallest vertex id.
    pub fn find_feasible_path(&self, g: &Digraph, a: Arc) -> Option<FeasiblePath> {
        let (u, v) = a;
        let target = self.root_of[v];

        let suffix = shortest_path_to(g, v, target, a)?;

        let prefix = if self.root_of[u] != target {
            self.tree_path_to(u)
        } else {
            nearest_other_root_path(g, self, u, target, a)?
        };

        let raw: Vec<Vertex> = prefix.into_iter().chain(suffix).collect();
        let w_pos = raw.iter().rposition(|&x| self.root_of[x] != target)?;
        let w = raw[w_pos];
        let mut vertices = self.tree_path_to(w);
        let split_index = vertices.len() - 1;
        vertices.extend_from_slice(&raw[w_pos + 1..]);
        Some(FeasiblePath { vertices, split_index })
    }
}

/// Shortest path `from -> to` in `g` minus `skip`, choosing the smallest next
/// vertex among equally short continuations.
fn shortest_path_to(g: &Digraph, from: Vertex, to: Vertex, skip: Arc) -> Option<Vec<Vertex>> {
    // Distances to `to`, grown backwards until `from` is labelled. Every
    // vertex closer than `from` is labelled by then.
    let n = g.n();
    let mut dist: Vec<Option<usize>> = vec![None; n];
    dist[to] = Some(0);
    let mut queue = VecDeque::from([to]);
    'bfs: while let Some(x) = queue.pop_front() {
        if x == from {
            break;
        }
        let d = dist[x].unwrap_or(0);
        for &y in g.in_neighbors(x) {
            if (y, x) == skip || dist[y].is_some() {
                continue;
            }
            dist[y] = Some(d + 1);
            if y == from {
                break 'bfs;
            }
            queue.push_back(y);
        }
    }
    let mut d = dist[from]?;
    let mut path = vec![from];
    let mut x = from;
    while d > 0 {
        let next = g
            .out_neighbors(x)
            .iter()
            .copied()
            .filter(|&y| (x, y) != skip && dist[y] == Some(d - 1))
            .min()?;
        path.push(next);
        x = next;
        d -= 1;
    }
    Some(path)
}

/// Shortest path from the nearest root other than `exclude` to `u`, in `g`
/// minus `skip`. Among roots at equal distance the smallest id wins.
fn nearest_other_root_path(
    g: &Digraph,
    forest: &ArborescenceForest,
    u: Vertex,
    exclude: Vertex,
    skip: Arc,
) -> Option<Vec<Vertex>> {
    let dist = g.bfs_distances(u, Direction::Backward, Some(skip));
    let source = (0..g.n())
        .filter(|&x| x != exclude && forest.is_root(x))
        .filter_map(|x| dist[x].map(|d| (d, x)))
        .min()?
        .1;
    let mut d = dist[source]?;
    let mut path = vec![source];
    let mut x = source;
    while d > 0 {
        let next = g
            .out_neighbors(x)
            .iter()
            .copied()
            .filter(|&y| (x, y) != skip && dist[y] == Some(d - 1))
            .min()?;
        path.push(next);
        x = next;
        d -= 1;
    }
    Some(path)
}
