//! Append-only digraph on a fixed vertex set `0..n`, plus reachability and
//! strongly connected components.

use std::collections::{HashSet, VecDeque};

use thiserror::Error;

/// Vertex index in `0..n`.
pub type Vertex = usize;

/// An ordered `(tail, head)` pair.
pub type Arc = (Vertex, Vertex);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: Vertex, n: usize },
    #[error("self-loop at vertex {0} is not allowed")]
    SelfLoop(Vertex),
}

#[derive(Debug, Clone, Default)]
pub struct Digraph {
    n: usize,
    arcs: Vec<Arc>,
    out_adj: Vec<Vec<Vertex>>,
    in_adj: Vec<Vec<Vertex>>,
    arc_index: HashSet<Arc>,
}

impl Digraph {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            arcs: Vec::new(),
            out_adj: vec![Vec::new(); n],
            in_adj: vec![Vec::new(); n],
            arc_index: HashSet::new(),
        }
    }

    /// Builds a graph by inserting `arcs` in order. Duplicates are skipped.
    pub fn from_arcs(n: usize, arcs: &[Arc]) -> Result<Self, GraphError> {
        let mut g = Self::new(n);
        for &(t, h) in arcs {
            g.add_arc(t, h)?;
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }

    /// Arcs in insertion order.
    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn out_neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.out_adj[v]
    }

    pub fn in_neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.in_adj[v]
    }

    pub fn has_arc(&self, tail: Vertex, head: Vertex) -> bool {
        self.arc_index.contains(&(tail, head))
    }

    pub fn check_vertex(&self, v: Vertex) -> Result<(), GraphError> {
        if v < self.n {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange { vertex: v, n: self.n })
        }
    }

    /// Appends `(tail, head)` unless it is already present. Returns `true`
    /// when the arc was a duplicate and the graph is unchanged.
    pub fn add_arc(&mut self, tail: Vertex, head: Vertex) -> Result<bool, GraphError> {
        self.check_vertex(tail)?;
        self.check_vertex(head)?;
        if tail == head {
            return Err(GraphError::SelfLoop(tail));
        }
        if !self.arc_index.insert((tail, head)) {
            return Ok(true);
        }
        self.arcs.push((tail, head));
        self.out_adj[tail].push(head);
        self.in_adj[head].push(tail);
        Ok(false)
    }

    /// Out-component of `v` (including `v`).
    pub fn reachable_set(&self, v: Vertex) -> Result<Vec<Vertex>, GraphError> {
        self.check_vertex(v)?;
        Ok(self.search(v, Direction::Forward, None))
    }

    /// In-component of `v` (including `v`): every vertex that can reach `v`.
    pub fn in_component(&self, v: Vertex) -> Result<Vec<Vertex>, GraphError> {
        self.check_vertex(v)?;
        Ok(self.search(v, Direction::Backward, None))
    }

    /// In-component of `v` in the graph with `skip` removed.
    pub fn in_component_without(&self, v: Vertex, skip: Arc) -> Result<Vec<Vertex>, GraphError> {
        self.check_vertex(v)?;
        Ok(self.search(v, Direction::Backward, Some(skip)))
    }

    fn search(&self, start: Vertex, dir: Direction, skip: Option<Arc>) -> Vec<Vertex> {
        let mut seen = vec![false; self.n];
        let mut out = vec![start];
        seen[start] = true;
        let mut i = 0;
        while i < out.len() {
            let x = out[i];
            i += 1;
            let nbrs = match dir {
                Direction::Forward => &self.out_adj[x],
                Direction::Backward => &self.in_adj[x],
            };
            for &y in nbrs {
                let arc = match dir {
                    Direction::Forward => (x, y),
                    Direction::Backward => (y, x),
                };
                if skip == Some(arc) || seen[y] {
                    continue;
                }
                seen[y] = true;
                out.push(y);
            }
        }
        out.sort_unstable();
        out
    }

    /// Breadth-first hop distances from `start` following arcs forward
    /// (`Direction::Forward`) or backward, skipping `skip`.
    pub(crate) fn bfs_distances(
        &self,
        start: Vertex,
        dir: Direction,
        skip: Option<Arc>,
    ) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[start] = Some(0);
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            let d = dist[x].unwrap_or(0);
            let nbrs = match dir {
                Direction::Forward => &self.out_adj[x],
                Direction::Backward => &self.in_adj[x],
            };
            for &y in nbrs {
                let arc = match dir {
                    Direction::Forward => (x, y),
                    Direction::Backward => (y, x),
                };
                if skip == Some(arc) || dist[y].is_some() {
                    continue;
                }
                dist[y] = Some(d + 1);
                queue.push_back(y);
            }
        }
        dist
    }

    /// Strongly connected components with condensation data.
    pub fn scc(&self) -> SccDecomposition {
        SccDecomposition::compute(self)
    }

    /// Whether the whole graph is a single strong component.
    pub fn is_strongly_connected(&self) -> bool {
        self.n <= 1 || self.scc().components.len() == 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SccDecomposition {
    /// Component label per vertex.
    pub component_id: Vec<usize>,
    /// Vertex sets, each sorted; numbered by smallest member ascending.
    pub components: Vec<Vec<Vertex>>,
    /// Distinct arcs of the condensation, sorted.
    pub condensation_arcs: Vec<(usize, usize)>,
    /// Components with no entering condensation arc, ascending.
    pub source_components: Vec<usize>,
}

impl SccDecomposition {
    fn compute(g: &Digraph) -> Self {
        let n = g.n();
        let raw = tarjan(g);

        // Renumber so that component ids follow their smallest vertex.
        let mut order: Vec<usize> = (0..raw.count).collect();
        let mut min_vertex = vec![usize::MAX; raw.count];
        for v in 0..n {
            let c = raw.label[v];
            min_vertex[c] = min_vertex[c].min(v);
        }
        order.sort_by_key(|&c| min_vertex[c]);
        let mut renumber = vec![0; raw.count];
        for (new, &old) in order.iter().enumerate() {
            renumber[old] = new;
        }

        let component_id: Vec<usize> = raw.label.iter().map(|&c| renumber[c]).collect();
        let mut components = vec![Vec::new(); raw.count];
        for v in 0..n {
            components[component_id[v]].push(v);
        }

        let mut has_in = vec![false; raw.count];
        let mut cond = HashSet::new();
        for &(t, h) in g.arcs() {
            let (ct, ch) = (component_id[t], component_id[h]);
            if ct != ch {
                cond.insert((ct, ch));
                has_in[ch] = true;
            }
        }
        let mut condensation_arcs: Vec<_> = cond.into_iter().collect();
        condensation_arcs.sort_unstable();
        let source_components = (0..raw.count).filter(|&c| !has_in[c]).collect();

        Self {
            component_id,
            components,
            condensation_arcs,
            source_components,
        }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

struct RawScc {
    label: Vec<usize>,
    count: usize,
}

/// Iterative Tarjan. An explicit call stack of `(vertex, next edge index)`
/// replaces recursion so deep graphs cannot overflow the thread stack.
fn tarjan(g: &Digraph) -> RawScc {
    const UNVISITED: usize = usize::MAX;
    let n = g.n();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut label = vec![UNVISITED; n];
    let mut count = 0;
    let mut next_index = 0;
    let mut call: Vec<(Vertex, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        call.push((root, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut ei)) = call.last_mut() {
            let nbrs = g.out_neighbors(v);
            if *ei < nbrs.len() {
                let w = nbrs[*ei];
                *ei += 1;
                if index[w] == UNVISITED {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    label[w] = count;
                    if w == v {
                        break;
                    }
                }
                count += 1;
            }
        }
    }
    RawScc { label, count }
}
