//! Candidate solutions `H` on the terminal set: validation against the two
//! hypotheses every minor satisfies, exact stretch, image paths, a Voronoi
//! candidate generator and an exhaustive optimum for tiny instances.
//!
//! Vertices of `H` are terminal indices `0..k`.

use std::collections::{BTreeSet, VecDeque};
use std::path::{Path as FsPath, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{concat, shortest_path, Dist, Path, Vertex, WeightedGraph};
use crate::instance::{Instance, InstanceFile};
use crate::numeric::{ExtRatio, Rational};
use crate::report::ValidationReport;

/// Largest number of core vertices without a terminal that
/// [`brute_force_optimal`] will enumerate over.
pub const MAX_FREE_VERTICES: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// `clusters[u]` is the terminal whose cluster contains core vertex `u`.
    Partition { clusters: Vec<usize> },
    Explicit,
}

#[derive(Debug, Clone)]
pub struct SprSolution<'a> {
    host: &'a Instance,
    h: WeightedGraph,
    provenance: Provenance,
}

impl<'a> SprSolution<'a> {
    pub fn explicit(host: &'a Instance, h: WeightedGraph) -> Self {
        SprSolution { host, h, provenance: Provenance::Explicit }
    }

    pub fn from_edges<I>(host: &'a Instance, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, u64)>,
    {
        Ok(Self::explicit(host, WeightedGraph::new(host.terminal_count(), edges)?))
    }

    /// Contracts the clusters of a partition of the core. Each pair of
    /// clusters joined by a core edge becomes an `H`-edge of weight
    /// `dist_G` between their terminals.
    pub fn from_partition(host: &'a Instance, clusters: Vec<usize>) -> Result<Self> {
        let k = host.terminal_count();
        if clusters.len() != host.core().vertex_count() || clusters.iter().any(|&c| c >= k) {
            return Err(Error::Argument("cluster labels must assign a terminal to every core vertex".into()));
        }
        let pairs: BTreeSet<(usize, usize)> = host
            .core()
            .edges()
            .iter()
            .map(|&(u, v, _)| (clusters[u], clusters[v]))
            .filter(|(a, b)| a != b)
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        let mut edges = Vec::with_capacity(pairs.len());
        for (a, b) in pairs {
            let d = host.terminal_distance(a, b).finite().ok_or(Error::Disconnected { u: a, v: b })?;
            edges.push((a, b, d));
        }
        let h = WeightedGraph::new(k, edges)?;
        Ok(SprSolution { host, h, provenance: Provenance::Partition { clusters } })
    }

    /// The complete graph on `T` with `dist_G` weights; stretch 1, but far
    /// over the edge budget once `k` is moderately large.
    pub fn metric_completion(host: &'a Instance) -> Result<Self> {
        let k = host.terminal_count();
        let mut edges = Vec::new();
        for i in 0..k {
            for j in i + 1..k {
                let d = host.terminal_distance(i, j).finite().ok_or(Error::Disconnected { u: i, v: j })?;
                edges.push((i, j, d));
            }
        }
        Self::from_edges(host, edges)
    }

    pub fn host(&self) -> &'a Instance {
        self.host
    }

    pub fn h(&self) -> &WeightedGraph {
        &self.h
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn clusters(&self) -> Option<&[usize]> {
        match &self.provenance {
            Provenance::Partition { clusters } => Some(clusters),
            Provenance::Explicit => None,
        }
    }

    /// Same solution with `H` replaced; partition provenance is dropped.
    pub fn with_h(&self, h: WeightedGraph) -> Self {
        SprSolution { host: self.host, h, provenance: Provenance::Explicit }
    }

    pub fn to_file(&self, instance: InstanceRef) -> SolutionFile {
        SolutionFile {
            instance,
            edges: self.h.edges().to_vec(),
            clusters: self.clusters().map(<[usize]>::to_vec),
        }
    }
}

/// Checks vertex set, edge budget, edge lengths and, for partitions, that
/// the clusters really describe a minor.
pub fn validate_solution(sol: &SprSolution<'_>) -> ValidationReport {
    let inst = sol.host;
    let h = &sol.h;
    let k = inst.terminal_count();
    let mut report = ValidationReport::default();

    report.push("vertex set", h.vertex_count() == k, format!("|V(H)| = {}, |T| = {k}", h.vertex_count()));
    report.push(
        "edge budget",
        h.edge_count() <= inst.full().edge_count(),
        format!("|E(H)| = {}, |E(G)| = {}", h.edge_count(), inst.full().edge_count()),
    );

    let short: Vec<String> = h
        .edges()
        .iter()
        .filter(|&&(i, j, _)| i < k && j < k)
        .filter_map(|&(i, j, w)| {
            let d = inst.terminal_distance(i, j);
            (Dist::Finite(w) < d).then(|| format!("({i}, {j}) has weight {w} < {d}"))
        })
        .collect();
    report.push("edge lengths", short.is_empty(), short.join(", "));

    if let Provenance::Partition { clusters } = &sol.provenance {
        validate_partition(inst, h, clusters, &mut report);
    }
    report
}

fn validate_partition(inst: &Instance, h: &WeightedGraph, clusters: &[usize], report: &mut ValidationReport) {
    let core = inst.core();
    let n = core.vertex_count();
    let k = inst.terminal_count();
    let labels_ok = clusters.len() == n && clusters.iter().all(|&c| c < k);
    report.push("cluster labels", labels_ok, "");
    if !labels_ok {
        return;
    }

    let misplaced: Vec<usize> = (0..k).filter(|&t| clusters[inst.attachment(t)] != t).collect();
    report.push(
        "one terminal per cluster",
        misplaced.is_empty(),
        if misplaced.is_empty() { String::new() } else { format!("terminals {misplaced:?} sit outside their own cluster") },
    );

    let disconnected: Vec<usize> = (0..k).filter(|&t| !cluster_connected(core, clusters, t, inst.attachment(t))).collect();
    report.push(
        "clusters connected",
        disconnected.is_empty(),
        if disconnected.is_empty() { String::new() } else { format!("clusters {disconnected:?} are disconnected in G'") },
    );

    let adjacent: BTreeSet<(usize, usize)> = core
        .edges()
        .iter()
        .map(|&(u, v, _)| (clusters[u].min(clusters[v]), clusters[u].max(clusters[v])))
        .collect();
    let foreign: Vec<String> =
        h.edges().iter().filter(|&&(i, j, _)| !adjacent.contains(&(i, j))).map(|&(i, j, _)| format!("({i}, {j})")).collect();
    report.push("edges join adjacent clusters", foreign.is_empty(), foreign.join(", "));
}

fn cluster_connected(core: &WeightedGraph, clusters: &[usize], label: usize, root: Vertex) -> bool {
    let size = clusters.iter().filter(|&&c| c == label).count();
    if clusters[root] != label {
        return false;
    }
    let mut seen = vec![false; core.vertex_count()];
    seen[root] = true;
    let mut stack = vec![root];
    let mut reached = 1;
    while let Some(x) = stack.pop() {
        for &(y, _) in core.neighbors(x) {
            if !seen[y] && clusters[y] == label {
                seen[y] = true;
                reached += 1;
                stack.push(y);
            }
        }
    }
    reached == size
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairStretch {
    pub a: usize,
    pub b: usize,
    pub dist_g: Dist,
    pub dist_h: Dist,
    pub ratio: ExtRatio,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StretchReport {
    pub max_ratio: ExtRatio,
    pub max_ratio_decimal: String,
    /// Lexicographically first pair attaining the maximum.
    pub witness: Option<(usize, usize)>,
    pub per_pair: Vec<PairStretch>,
}

fn pair_ratio(dist_g: Dist, dist_h: Dist) -> ExtRatio {
    match (dist_g, dist_h) {
        (Dist::Finite(g), Dist::Finite(h)) if g > 0 => ExtRatio::Finite(Rational::new(h, g)),
        (Dist::Finite(0), Dist::Finite(0)) => ExtRatio::one(),
        _ => ExtRatio::Infinite,
    }
}

/// Exact all-pairs stretch of `H` against `G`.
pub fn stretch(sol: &SprSolution<'_>) -> StretchReport {
    let inst = sol.host;
    let k = inst.terminal_count();
    let rows: Vec<Vec<Dist>> = (0..k).into_par_iter().map(|i| sol.h.distances_from(i)).collect();
    let mut per_pair = Vec::with_capacity(k * k.saturating_sub(1) / 2);
    for (a, row) in rows.iter().enumerate() {
        for (b, &dist_h) in row.iter().enumerate().skip(a + 1) {
            let dist_g = inst.terminal_distance(a, b);
            per_pair.push(PairStretch { a, b, dist_g, dist_h, ratio: pair_ratio(dist_g, dist_h) });
        }
    }
    let mut max_ratio = ExtRatio::one();
    let mut witness = None;
    for p in &per_pair {
        if witness.is_none() || p.ratio > max_ratio {
            max_ratio = p.ratio;
            witness = Some((p.a, p.b));
        }
    }
    StretchReport { max_ratio, max_ratio_decimal: max_ratio.decimal(), witness, per_pair }
}

/// `dist_H(t_a, t_b) / dist_G(t_a, t_b)` for one pair.
pub fn pair_stretch(sol: &SprSolution<'_>, a: usize, b: usize) -> ExtRatio {
    pair_ratio(sol.host.terminal_distance(a, b), sol.h.distance(a, b))
}

/// Canonical shortest path between two terminals in `H`.
pub fn h_shortest_path(sol: &SprSolution<'_>, a: usize, b: usize) -> Result<Path> {
    shortest_path(&sol.h, a, b)
}

/// Concatenates the canonical `G`-shortest paths between consecutive
/// terminals of `hpath`; may revisit vertices.
pub fn image_path(sol: &SprSolution<'_>, hpath: &Path) -> Result<Path> {
    let ts = hpath.vertices();
    if ts.len() == 1 {
        return Ok(Path::single(sol.host.terminal_vertex(ts[0])));
    }
    let mut parts = Vec::with_capacity(ts.len() - 1);
    for pair in ts.windows(2) {
        if !sol.h.has_edge(pair[0], pair[1]) {
            return Err(Error::Argument(format!("({}, {}) is not an edge of H", pair[0], pair[1])));
        }
        parts.push(sol.host.terminal_path(pair[0], pair[1])?);
    }
    concat(&parts)
}

/// Assigns every core vertex to the nearest attachment vertex in `G'`
/// (ties to the smaller terminal index) and contracts the cells.
pub fn voronoi_solution(inst: &Instance) -> Result<SprSolution<'_>> {
    let core = inst.core();
    let k = inst.terminal_count();
    let rows: Vec<Vec<Dist>> = (0..k).into_par_iter().map(|t| core.distances_from(inst.attachment(t))).collect();
    let clusters = (0..core.vertex_count())
        .map(|u| (0..k).min_by_key(|&t| (rows[t][u], t)).ok_or_else(|| Error::Argument("instance has no terminals".into())))
        .collect::<Result<Vec<_>>>()?;
    SprSolution::from_partition(inst, clusters)
}

/// Every partition of the core into connected clusters, one per terminal,
/// each containing its terminal's attachment vertex. Labels are terminal
/// indices; the order is deterministic.
pub fn enumerate_partitions(inst: &Instance, budget: usize) -> Result<Vec<Vec<usize>>> {
    let core = inst.core();
    let n = core.vertex_count();
    let k = inst.terminal_count();
    let free: Vec<Vertex> = (0..n).filter(|&u| inst.terminal_at(u).is_none()).collect();
    if free.len() > MAX_FREE_VERTICES {
        return Err(Error::TooLarge(format!("{} core vertices without terminals (limit {MAX_FREE_VERTICES})", free.len())));
    }
    if k == 0 {
        return Err(Error::Argument("instance has no terminals".into()));
    }

    // visit free vertices nearest to the attachments first so that
    // disconnection is detected early
    let mut depth = vec![usize::MAX; n];
    let mut queue: VecDeque<Vertex> = inst.attachments().iter().copied().collect();
    for &a in inst.attachments() {
        depth[a] = 0;
    }
    while let Some(x) = queue.pop_front() {
        for &(y, _) in core.neighbors(x) {
            if depth[y] == usize::MAX {
                depth[y] = depth[x] + 1;
                queue.push_back(y);
            }
        }
    }
    let mut order = free;
    order.sort_by_key(|&u| (depth[u], u));

    const UNSET: usize = usize::MAX;
    let mut labels = vec![UNSET; n];
    for t in 0..k {
        labels[inst.attachment(t)] = t;
    }
    let mut out = Vec::new();
    extend_partition(inst, &order, 0, &mut labels, budget, &mut out)?;
    Ok(out)
}

fn extend_partition(
    inst: &Instance,
    order: &[Vertex],
    pos: usize,
    labels: &mut [usize],
    budget: usize,
    out: &mut Vec<Vec<usize>>,
) -> Result<()> {
    if !still_connectable(inst, labels) {
        return Ok(());
    }
    if pos == order.len() {
        if out.len() >= budget {
            return Err(Error::TooLarge(format!("more than {budget} connected partitions")));
        }
        out.push(labels.to_vec());
        return Ok(());
    }
    let u = order[pos];
    for t in 0..inst.terminal_count() {
        labels[u] = t;
        extend_partition(inst, order, pos + 1, labels, budget, out)?;
    }
    labels[u] = usize::MAX;
    Ok(())
}

/// Every labelled vertex can still reach its attachment through vertices of
/// its own label or unlabelled ones.
fn still_connectable(inst: &Instance, labels: &[usize]) -> bool {
    let core = inst.core();
    let mut seen = vec![false; core.vertex_count()];
    for t in 0..inst.terminal_count() {
        let root = inst.attachment(t);
        seen.fill(false);
        seen[root] = true;
        let mut stack = vec![root];
        while let Some(x) = stack.pop() {
            for &(y, _) in core.neighbors(x) {
                if !seen[y] && (labels[y] == t || labels[y] == usize::MAX) {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        if labels.iter().enumerate().any(|(v, &l)| l == t && !seen[v]) {
            return false;
        }
    }
    true
}

#[derive(Debug, Clone)]
pub struct BruteForceResult<'a> {
    pub min_stretch: ExtRatio,
    pub best: SprSolution<'a>,
    pub partitions: usize,
}

/// Minimum stretch over all contraction minors of `G` on `T` whose edge
/// weights are the terminal distances in `G`. Weights below those violate
/// the length hypothesis and larger ones can only increase stretch.
pub fn brute_force_optimal(inst: &Instance, partition_budget: usize) -> Result<BruteForceResult<'_>> {
    let partitions = enumerate_partitions(inst, partition_budget)?;
    let scored: Vec<(ExtRatio, SprSolution<'_>)> = partitions
        .into_par_iter()
        .map(|clusters| {
            let sol = SprSolution::from_partition(inst, clusters)?;
            Ok((stretch(&sol).max_ratio, sol))
        })
        .collect::<Result<_>>()?;
    let count = scored.len();
    let (min_stretch, best) = scored
        .into_iter()
        .reduce(|best, next| if next.0 < best.0 { next } else { best })
        .ok_or_else(|| Error::Argument("no connected partition exists".into()))?;
    Ok(BruteForceResult { min_stretch, best, partitions: count })
}

/// Where a solution file finds its instance: a path string or an inline
/// instance object.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum InstanceRef {
    Path(PathBuf),
    Inline(Box<InstanceFile>),
}

// Hand-written so the inline object is streamed rather than buffered;
// buffered untagged enums cannot carry the u128 terminal count.
impl<'de> Deserialize<'de> for InstanceRef {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct RefVisitor;

        impl<'de> serde::de::Visitor<'de> for RefVisitor {
            type Value = InstanceRef;

            fn expecting(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str("an instance path or an inline instance object")
            }

            fn visit_str<E: serde::de::Error>(self, v: &str) -> std::result::Result<InstanceRef, E> {
                Ok(InstanceRef::Path(PathBuf::from(v)))
            }

            fn visit_map<A: serde::de::MapAccess<'de>>(self, map: A) -> std::result::Result<InstanceRef, A::Error> {
                let file = InstanceFile::deserialize(serde::de::value::MapAccessDeserializer::new(map))?;
                Ok(InstanceRef::Inline(Box::new(file)))
            }
        }

        d.deserialize_any(RefVisitor)
    }
}

/// On-disk solution: `{"instance": <path or inline>, "edges": [[i, j, w], ...]}`
/// over terminal indices, plus optional cluster labels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionFile {
    pub instance: InstanceRef,
    pub edges: Vec<(usize, usize, u64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clusters: Option<Vec<usize>>,
}

impl SolutionFile {
    pub fn load(path: impl AsRef<FsPath>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn save(&self, path: impl AsRef<FsPath>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    /// Loads the referenced instance; relative paths resolve against `base`.
    pub fn load_instance(&self, base: Option<&FsPath>) -> Result<Instance> {
        match &self.instance {
            InstanceRef::Inline(file) => (**file).clone().into_instance(),
            InstanceRef::Path(p) if p.is_relative() => match base {
                Some(dir) => Instance::load(dir.join(p)),
                None => Instance::load(p),
            },
            InstanceRef::Path(p) => Instance::load(p),
        }
    }

    pub fn into_solution(self, inst: &Instance) -> Result<SprSolution<'_>> {
        let h = WeightedGraph::new(inst.terminal_count(), self.edges)?;
        let provenance = match self.clusters {
            Some(clusters) => Provenance::Partition { clusters },
            None => Provenance::Explicit,
        };
        Ok(SprSolution { host: inst, h, provenance })
    }
}
