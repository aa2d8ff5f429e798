//! Undirected graphs with positive integer edge lengths, canonical shortest
//! paths, weighted girth and the girth dichotomy for shortest paths.
//!
//! Every routine here is exact: lengths are `u64` and unreachable distances
//! are [`Dist::Infinite`], never a large sentinel number.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Vertex = usize;
pub type Weight = u64;

/// A path length or distance, possibly infinite.
///
/// `Finite` sorts before `Infinite`, so `min`/`max` behave as on the extended
/// naturals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dist {
    Finite(u64),
    Infinite,
}

impl Dist {
    pub fn finite(self) -> Option<u64> {
        match self {
            Dist::Finite(d) => Some(d),
            Dist::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Dist::Finite(_))
    }

    pub fn plus(self, w: u64) -> Dist {
        match self {
            Dist::Finite(d) => Dist::Finite(d + w),
            Dist::Infinite => Dist::Infinite,
        }
    }
}

impl fmt::Display for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dist::Finite(d) => write!(f, "{d}"),
            Dist::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Dist {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Dist::Finite(d) => s.serialize_u64(*d),
            Dist::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Dist {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(n) => Ok(Dist::Finite(n)),
            Raw::Text(t) if t == "inf" => Ok(Dist::Infinite),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("expected integer or \"inf\", got {t:?}"))),
        }
    }
}

/// On-disk form: `{"n": 3, "edges": [[0, 1, 1], ...]}` with `u < v` and the
/// triples sorted.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct GraphFile {
    n: usize,
    edges: Vec<(Vertex, Vertex, Weight)>,
}

/// Immutable simple undirected graph with integer weights `>= 1`.
///
/// Adjacency lists are sorted by neighbour index; every canonical choice in
/// the crate is derived from that order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphFile", into = "GraphFile")]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<(Vertex, Vertex, Weight)>,
    adj: Vec<Vec<(Vertex, Weight)>>,
}

impl TryFrom<GraphFile> for WeightedGraph {
    type Error = Error;

    fn try_from(file: GraphFile) -> Result<Self> {
        WeightedGraph::new(file.n, file.edges)
    }
}

impl From<WeightedGraph> for GraphFile {
    fn from(g: WeightedGraph) -> Self {
        GraphFile { n: g.n, edges: g.edges }
    }
}

impl WeightedGraph {
    /// Builds a graph, normalizing each edge to `u < v` and sorting. Rejects
    /// self-loops, parallel edges, zero weights and out-of-range endpoints.
    pub fn new<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vertex, Vertex, Weight)>,
    {
        let mut list = Vec::new();
        for (u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!("edge ({u}, {v}) out of range for n = {n}")));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at {u}")));
            }
            if w == 0 {
                return Err(Error::InvalidGraph(format!("edge ({u}, {v}) has weight 0")));
            }
            list.push((u.min(v), u.max(v), w));
        }
        list.sort_unstable();
        if let Some(pair) = list.windows(2).find(|p| p[0].0 == p[1].0 && p[0].1 == p[1].1) {
            return Err(Error::InvalidGraph(format!("parallel edge ({}, {})", pair[0].0, pair[0].1)));
        }

        let mut adj = vec![Vec::new(); n];
        for &(u, v, w) in &list {
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        for nbrs in &mut adj {
            nbrs.sort_unstable();
        }
        Ok(WeightedGraph { n, edges: list, adj })
    }

    /// Unit-weight graph from vertex pairs.
    pub fn unit<I>(n: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        Self::new(n, pairs.into_iter().map(|(u, v)| (u, v, 1)))
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v, w)` with `u < v`, sorted.
    pub fn edges(&self) -> &[(Vertex, Vertex, Weight)] {
        &self.edges
    }

    pub fn neighbors(&self, v: Vertex) -> &[(Vertex, Weight)] {
        &self.adj[v]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }

    pub fn weight(&self, u: Vertex, v: Vertex) -> Option<Weight> {
        let nbrs = self.adj.get(u)?;
        nbrs.binary_search_by_key(&v, |&(x, _)| x).ok().map(|i| nbrs[i].1)
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.weight(u, v).is_some()
    }

    pub fn is_unit_weight(&self) -> bool {
        self.edges.iter().all(|&(_, _, w)| w == 1)
    }

    pub fn is_regular(&self, d: usize) -> bool {
        self.adj.iter().all(|nbrs| nbrs.len() == d)
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = stack.pop() {
            for &(y, _) in &self.adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        count == self.n
    }

    /// Single-source distances (Dijkstra).
    pub fn distances_from(&self, src: Vertex) -> Vec<Dist> {
        self.dijkstra(src, None, None)
    }

    /// Dijkstra that ignores edge `skip` (given as `(min, max)`) and stops
    /// once the frontier reaches `bound`. Entries at or beyond `bound` may be
    /// tentative upper bounds.
    fn dijkstra(&self, src: Vertex, skip: Option<(Vertex, Vertex)>, bound: Option<u64>) -> Vec<Dist> {
        let mut dist = vec![Dist::Infinite; self.n];
        let mut heap = BinaryHeap::new();
        dist[src] = Dist::Finite(0);
        heap.push(Reverse((0u64, src)));
        while let Some(Reverse((d, x))) = heap.pop() {
            if dist[x] != Dist::Finite(d) {
                continue;
            }
            if bound.is_some_and(|b| d >= b) {
                break;
            }
            for &(y, w) in &self.adj[x] {
                if skip == Some((x.min(y), x.max(y))) {
                    continue;
                }
                let nd = d + w;
                if Dist::Finite(nd) < dist[y] {
                    dist[y] = Dist::Finite(nd);
                    heap.push(Reverse((nd, y)));
                }
            }
        }
        dist
    }

    pub fn distance(&self, u: Vertex, v: Vertex) -> Dist {
        self.distances_from(u)[v]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// A vertex sequence in some host graph together with its length.
///
/// Shortest-path routines only produce simple paths; concatenations (image
/// paths) may be walks that revisit vertices, see [`Path::is_simple`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Path {
    vertices: Vec<Vertex>,
    length: u64,
}

impl Path {
    /// Checks that consecutive vertices are adjacent in `g` and sums weights.
    pub fn new(g: &WeightedGraph, vertices: Vec<Vertex>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Argument("path must contain at least one vertex".into()));
        }
        if let Some(&bad) = vertices.iter().find(|&&v| v >= g.vertex_count()) {
            return Err(Error::Argument(format!("vertex {bad} not in graph")));
        }
        let mut length = 0;
        for pair in vertices.windows(2) {
            let w = g
                .weight(pair[0], pair[1])
                .ok_or_else(|| Error::Argument(format!("({}, {}) is not an edge", pair[0], pair[1])))?;
            length += w;
        }
        Ok(Path { vertices, length })
    }

    pub fn single(v: Vertex) -> Self {
        Path { vertices: vec![v], length: 0 }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    /// Total weight `|P|`.
    pub fn length(&self) -> u64 {
        self.length
    }

    pub fn edge_count(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn first(&self) -> Vertex {
        self.vertices[0]
    }

    pub fn last(&self) -> Vertex {
        *self.vertices.last().expect("paths are non-empty")
    }

    pub fn is_simple(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.vertices.iter().all(|v| seen.insert(*v))
    }

    /// Traversed edges as `(min, max)` pairs, in order, with repetitions.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.vertices.windows(2).map(|p| (p[0].min(p[1]), p[0].max(p[1])))
    }

    pub fn edge_set(&self) -> BTreeSet<(Vertex, Vertex)> {
        self.edges().collect()
    }

    pub fn reversed(&self) -> Path {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        Path { vertices, length: self.length }
    }

    /// Sub-path between vertex positions `from..=to`, re-measured in `g`.
    pub fn slice(&self, g: &WeightedGraph, from: usize, to: usize) -> Result<Path> {
        if from > to || to >= self.vertices.len() {
            return Err(Error::Argument(format!(
                "slice {from}..={to} out of range for a path with {} vertices",
                self.vertices.len()
            )));
        }
        Path::new(g, self.vertices[from..=to].to_vec())
    }
}

/// The lexicographically smallest shortest path from `u` to the vertex whose
/// distance row is `dist_to_target`.
///
/// Walks greedily from `u`, always stepping to the smallest neighbour that
/// stays on some shortest path. Positive weights make the walk strictly
/// decrease the remaining distance, so it terminates and is simple.
pub fn canonical_path_to(g: &WeightedGraph, u: Vertex, v: Vertex, dist_to_target: &[Dist]) -> Result<Path> {
    let Dist::Finite(mut remaining) = dist_to_target[u] else {
        return Err(Error::Disconnected { u, v });
    };
    let mut vertices = vec![u];
    let mut length = 0;
    let mut cur = u;
    while remaining > 0 {
        let (next, w) = g
            .neighbors(cur)
            .iter()
            .copied()
            .find(|&(x, w)| w <= remaining && dist_to_target[x] == Dist::Finite(remaining - w))
            .expect("distance row is consistent with the graph");
        vertices.push(next);
        length += w;
        remaining -= w;
        cur = next;
    }
    debug_assert_eq!(cur, v);
    Ok(Path { vertices, length })
}

/// Minimum-length `u`–`v` path; ties broken towards the lexicographically
/// smallest vertex sequence.
pub fn shortest_path(g: &WeightedGraph, u: Vertex, v: Vertex) -> Result<Path> {
    if u >= g.vertex_count() || v >= g.vertex_count() {
        return Err(Error::Argument(format!("vertex out of range for n = {}", g.vertex_count())));
    }
    let row = g.distances_from(v);
    canonical_path_to(g, u, v, &row)
}

/// Minimum total weight of a cycle, or `Infinite` for forests.
///
/// For every edge `(u, v)` the shortest cycle through it is
/// `dist_{G - uv}(u, v) + w(u, v)`; the girth is the minimum over edges.
pub fn girth(g: &WeightedGraph) -> Dist {
    let mut best = Dist::Infinite;
    for &(u, v, w) in g.edges() {
        let bound = best.finite().map(|b| b.saturating_sub(w));
        if bound == Some(0) {
            continue;
        }
        let around = g.dijkstra(u, Some((u, v)), bound)[v].plus(w);
        best = best.min(around);
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dichotomy {
    /// Every edge of `p` lies on `q`.
    Subset,
    /// `|p| + |q| >= girth`.
    Long,
    /// Neither holds; impossible when `p` is a shortest path.
    Violation,
}

/// Classifies `q` against the shortest path `p` sharing its endpoints.
pub fn girth_dichotomy(g: &WeightedGraph, p: &Path, q: &Path) -> Result<Dichotomy> {
    girth_dichotomy_with(girth(g), p, q)
}

/// As [`girth_dichotomy`] with a precomputed girth.
pub fn girth_dichotomy_with(girth: Dist, p: &Path, q: &Path) -> Result<Dichotomy> {
    let same = p.first() == q.first() && p.last() == q.last();
    let flipped = p.first() == q.last() && p.last() == q.first();
    if !same && !flipped {
        return Err(Error::Argument(format!(
            "endpoints differ: p runs {}..{}, q runs {}..{}",
            p.first(),
            p.last(),
            q.first(),
            q.last()
        )));
    }
    let q_edges = q.edge_set();
    if p.edges().all(|e| q_edges.contains(&e)) {
        return Ok(Dichotomy::Subset);
    }
    if Dist::Finite(p.length() + q.length()) >= girth {
        Ok(Dichotomy::Long)
    } else {
        Ok(Dichotomy::Violation)
    }
}

/// Sequential concatenation; each path must start where the previous ended.
pub fn concat(paths: &[Path]) -> Result<Path> {
    let (head, rest) = paths
        .split_first()
        .ok_or_else(|| Error::Argument("cannot concatenate an empty list of paths".into()))?;
    let mut vertices = head.vertices.clone();
    let mut length = head.length;
    for p in rest {
        let end = *vertices.last().expect("non-empty");
        if p.first() != end {
            return Err(Error::Argument(format!("path starting at {} does not continue from {end}", p.first())));
        }
        vertices.extend_from_slice(&p.vertices[1..]);
        length += p.length;
    }
    Ok(Path { vertices, length })
}
