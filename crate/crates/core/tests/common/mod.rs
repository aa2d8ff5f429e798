//! Exhaustive oracles and seeded fixtures shared by the integration tests.
//! Nothing here calls the algorithm under test.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spr_lab::graph::{Dist, WeightedGraph};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Erdos-Renyi style graph with weights in `1..=max_w`; may be disconnected.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64, max_w: u64) -> WeightedGraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v, rng.gen_range(1..=max_w)));
            }
        }
    }
    WeightedGraph::new(n, edges).unwrap()
}

/// Connected unit-weight graph: a random spanning tree plus extra edges.
pub fn random_connected_unit(rng: &mut ChaCha8Rng, n: usize, extra: f64) -> WeightedGraph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut pairs = std::collections::BTreeSet::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        let (a, b) = (order[i], order[j]);
        pairs.insert((a.min(b), a.max(b)));
    }
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(extra) {
                pairs.insert((u, v));
            }
        }
    }
    WeightedGraph::unit(n, pairs).unwrap()
}

fn weight(g: &WeightedGraph, u: usize, v: usize) -> Option<u64> {
    g.edges().iter().find(|&&(a, b, _)| (a, b) == (u.min(v), u.max(v))).map(|&(_, _, w)| w)
}

/// Adjacency matrix built from the edge list alone.
pub fn matrix(g: &WeightedGraph) -> Vec<Vec<Option<u64>>> {
    let n = g.vertex_count();
    let mut m = vec![vec![None; n]; n];
    for &(u, v, w) in g.edges() {
        m[u][v] = Some(w);
        m[v][u] = Some(w);
    }
    m
}

/// All-pairs distances by Floyd-Warshall.
pub fn floyd(g: &WeightedGraph) -> Vec<Vec<Dist>> {
    let n = g.vertex_count();
    let adj = matrix(g);
    let mut d = vec![vec![None::<u64>; n]; n];
    for u in 0..n {
        d[u][u] = Some(0);
        for v in 0..n {
            if let Some(w) = adj[u][v] {
                d[u][v] = Some(w);
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(a), Some(b)) = (d[i][k], d[k][j]) {
                    if d[i][j].is_none_or(|c| a + b < c) {
                        d[i][j] = Some(a + b);
                    }
                }
            }
        }
    }
    d.into_iter().map(|row| row.into_iter().map(|x| x.map_or(Dist::Infinite, Dist::Finite)).collect()).collect()
}

/// Every simple path from `u` to `v` as a vertex sequence.
pub fn simple_paths(g: &WeightedGraph, u: usize, v: usize) -> Vec<Vec<usize>> {
    let adj = matrix(g);
    let mut out = Vec::new();
    let mut path = vec![u];
    let mut used = vec![false; g.vertex_count()];
    used[u] = true;
    walk_paths(&adj, v, &mut path, &mut used, &mut out);
    out
}

fn walk_paths(adj: &[Vec<Option<u64>>], target: usize, path: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
    let x = *path.last().unwrap();
    if x == target {
        out.push(path.clone());
        return;
    }
    for y in 0..adj.len() {
        if adj[x][y].is_some() && !used[y] {
            used[y] = true;
            path.push(y);
            walk_paths(adj, target, path, used, out);
            path.pop();
            used[y] = false;
        }
    }
}

pub fn path_weight(g: &WeightedGraph, vertices: &[usize]) -> u64 {
    vertices.windows(2).map(|p| weight(g, p[0], p[1]).unwrap()).sum()
}

/// Distance as the minimum weight over all simple paths.
pub fn distance_by_enumeration(g: &WeightedGraph, u: usize, v: usize) -> Dist {
    simple_paths(g, u, v).iter().map(|p| path_weight(g, p)).min().map_or(Dist::Infinite, Dist::Finite)
}

/// Minimum weight of a simple cycle: each cycle is enumerated from its
/// smallest vertex through larger vertices only.
pub fn girth_by_enumeration(g: &WeightedGraph) -> Dist {
    let n = g.vertex_count();
    let adj = matrix(g);
    let mut best: Option<u64> = None;
    for s in 0..n {
        let mut used = vec![false; n];
        used[s] = true;
        cycles_from(&adj, s, s, 0, 1, &mut used, &mut best);
    }
    best.map_or(Dist::Infinite, Dist::Finite)
}

fn cycles_from(adj: &[Vec<Option<u64>>], s: usize, x: usize, len: u64, count: usize, used: &mut [bool], best: &mut Option<u64>) {
    for y in 0..adj.len() {
        let Some(w) = adj[x][y] else { continue };
        if y == s && count >= 3 {
            let total = len + w;
            if best.is_none_or(|b| total < b) {
                *best = Some(total);
            }
        } else if y > s && !used[y] {
            used[y] = true;
            cycles_from(adj, s, y, len + w, count + 1, used, best);
            used[y] = false;
        }
    }
}

/// Smallest subfamily (by size, then index order) whose union is `0..m`,
/// by scanning every subset.
pub fn brute_set_cover(m: usize, sets: &[Vec<usize>]) -> Option<usize> {
    assert!(sets.len() <= 20 && m <= 64);
    let full: u64 = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
    let masks: Vec<u64> = sets.iter().map(|s| s.iter().fold(0u64, |acc, &i| acc | (1 << i))).collect();
    (0u64..1 << sets.len())
        .filter(|sub| {
            let union = (0..sets.len()).filter(|i| sub >> i & 1 == 1).fold(0u64, |acc, i| acc | masks[i]);
            union & full == full
        })
        .map(|sub| sub.count_ones() as usize)
        .min()
}

/// `cov` straight from the definition: smallest subfamily whose edges
/// contain every edge of `p`.
pub fn brute_cov(p: &[usize], family: &[Vec<usize>]) -> Option<usize> {
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    let p_edges: Vec<(usize, usize)> = p.windows(2).map(|w| key(w[0], w[1])).collect();
    let sets: Vec<Vec<usize>> = family
        .iter()
        .map(|q| {
            let q_edges: Vec<(usize, usize)> = q.windows(2).map(|w| key(w[0], w[1])).collect();
            (0..p_edges.len()).filter(|&i| q_edges.contains(&p_edges[i])).collect()
        })
        .collect();
    brute_set_cover(p_edges.len(), &sets)
}

/// Every labelling of the core by terminals that pins each attachment to
/// its own terminal and leaves every cluster connected.
pub fn connected_partitions(core: &WeightedGraph, attachments: &[usize]) -> Vec<Vec<usize>> {
    let n = core.vertex_count();
    let k = attachments.len();
    let adj = matrix(core);
    let free: Vec<usize> = (0..n).filter(|u| !attachments.contains(u)).collect();
    let mut out = Vec::new();
    let total = (k as u64).pow(free.len() as u32);
    for code in 0..total {
        let mut labels = vec![usize::MAX; n];
        for (t, &a) in attachments.iter().enumerate() {
            labels[a] = t;
        }
        let mut c = code;
        for &u in &free {
            labels[u] = (c % k as u64) as usize;
            c /= k as u64;
        }
        let connected = (0..k).all(|t| {
            let members: Vec<usize> = (0..n).filter(|&u| labels[u] == t).collect();
            let mut seen = vec![false; n];
            let mut stack = vec![attachments[t]];
            seen[attachments[t]] = true;
            let mut reached = 1;
            while let Some(x) = stack.pop() {
                for y in 0..n {
                    if adj[x][y].is_some() && labels[y] == t && !seen[y] {
                        seen[y] = true;
                        reached += 1;
                        stack.push(y);
                    }
                }
            }
            reached == members.len()
        });
        if connected {
            out.push(labels);
        }
    }
    out.sort();
    out
}
