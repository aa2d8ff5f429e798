//! Cubic graphs of prescribed girth: catalog lookup or seeded random
//! pairing followed by edge-swap repair.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::Cage;
use crate::error::{Error, Result};
use crate::graph::{girth, Dist, WeightedGraph};

pub const DEFAULT_REPAIR_BUDGET: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Cage,
    RandomRepair { budget: usize },
}

/// Returns a connected 3-regular unit-weight graph on `n` vertices with
/// girth at least `g`. Deterministic in `(n, g, seed)`.
pub fn generate_cubic_high_girth(n: usize, g: u64, seed: u64, strategy: Strategy) -> Result<WeightedGraph> {
    if n < 4 || n % 2 == 1 {
        return Err(Error::Handshake { n });
    }
    match strategy {
        Strategy::Cage => Cage::lookup(n, g)
            .map(Cage::graph)
            .ok_or_else(|| Error::Argument(format!("no catalog cage with {n} vertices and girth >= {g}"))),
        Strategy::RandomRepair { budget } => random_repair(n, g, seed, budget),
    }
}

/// Multigraph under repair: `ends[e]` holds the two endpoints of edge `e`.
struct Pairing {
    n: usize,
    ends: Vec<[usize; 2]>,
    incident: Vec<Vec<usize>>,
}

impl Pairing {
    fn random(n: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut points: Vec<usize> = (0..3 * n).collect();
        points.shuffle(rng);
        let ends = points.chunks(2).map(|c| [c[0] / 3, c[1] / 3]).collect();
        let mut p = Pairing { n, ends, incident: Vec::new() };
        p.reindex();
        p
    }

    fn reindex(&mut self) {
        self.incident = vec![Vec::new(); self.n];
        for (e, &[a, b]) in self.ends.iter().enumerate() {
            self.incident[a].push(e);
            if a != b {
                self.incident[b].push(e);
            }
        }
    }

    fn other(&self, e: usize, x: usize) -> usize {
        let [a, b] = self.ends[e];
        if a == x {
            b
        } else {
            a
        }
    }

    /// True if edge `e` lies on a cycle with fewer than `g` edges.
    fn on_short_cycle(&self, e: usize, g: u64) -> bool {
        let [a, b] = self.ends[e];
        if a == b {
            return true;
        }
        let limit = g.saturating_sub(2) as usize;
        let mut depth = vec![usize::MAX; self.n];
        depth[a] = 0;
        let mut queue = VecDeque::from([a]);
        while let Some(x) = queue.pop_front() {
            if depth[x] >= limit {
                continue;
            }
            for &f in &self.incident[x] {
                if f == e {
                    continue;
                }
                let y = self.other(f, x);
                if y == b {
                    return true;
                }
                if depth[y] == usize::MAX {
                    depth[y] = depth[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        false
    }

    fn component_of(&self) -> Vec<usize> {
        let mut comp = vec![usize::MAX; self.n];
        let mut next = 0;
        for s in 0..self.n {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = next;
            let mut stack = vec![s];
            while let Some(x) = stack.pop() {
                for &f in &self.incident[x] {
                    let y = self.other(f, x);
                    if comp[y] == usize::MAX {
                        comp[y] = next;
                        stack.push(y);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    fn set(&mut self, e: usize, ends: [usize; 2]) {
        self.ends[e] = ends;
    }
}

fn random_repair(n: usize, g: u64, seed: u64, budget: usize) -> Result<WeightedGraph> {
    // girth 3 already excludes loops and parallel edges
    let g = g.max(3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairing = Pairing::random(n, &mut rng);
    let m = pairing.ends.len();
    let mut order: Vec<usize> = (0..m).collect();

    for _ in 0..budget {
        order.shuffle(&mut rng);
        let (first, candidates): (usize, Vec<usize>) =
            match order.iter().copied().find(|&e| pairing.on_short_cycle(e, g)) {
                Some(e) => (e, (0..m).filter(|&f| f != e).collect()),
                None => {
                    let comp = pairing.component_of();
                    if comp.iter().all(|&c| c == 0) {
                        let graph = WeightedGraph::unit(n, pairing.ends.iter().map(|&[a, b]| (a, b)))?;
                        debug_assert!(girth(&graph) >= Dist::Finite(g));
                        return Ok(graph);
                    }
                    // join two components
                    let e = order[0];
                    let c = comp[pairing.ends[e][0]];
                    (e, (0..m).filter(|&f| comp[pairing.ends[f][0]] != c).collect())
                }
            };
        let second = *candidates.choose(&mut rng).expect("at least two edges");
        let [a, b] = pairing.ends[first];
        let [c, d] = pairing.ends[second];
        let (x, y) = if rng.gen_bool(0.5) { ([a, c], [b, d]) } else { ([a, d], [b, c]) };

        pairing.set(first, x);
        pairing.set(second, y);
        pairing.reindex();
        if pairing.on_short_cycle(first, g) || pairing.on_short_cycle(second, g) {
            pairing.set(first, [a, b]);
            pairing.set(second, [c, d]);
            pairing.reindex();
        }
    }
    Err(Error::GenerationFailed { n, girth: g, budget })
}
