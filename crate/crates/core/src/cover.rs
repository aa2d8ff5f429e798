//! Covering a core path by image paths of short `H`-edges: the family `Q`,
//! `cov(P)`, block decomposition, non-backtracking sampling and exact path
//! counts.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{girth, Dist, Path, Vertex, WeightedGraph};
use crate::instance::Instance;
use crate::solution::{image_path, SprSolution};

/// Most family members the exact set-cover fallback will search over.
pub const MAX_SET_COVER_MEMBERS: usize = 20;

/// `cov` values share the finite-or-infinite representation of distances.
pub type CovValue = Dist;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverFamily {
    pub paths: Vec<Path>,
    /// `H`-edge `(a, b)` behind each member; empty for synthetic families.
    pub source_edges: Vec<(usize, usize)>,
}

impl CoverFamily {
    /// A family of arbitrary paths, not tied to any solution.
    pub fn synthetic(paths: Vec<Path>) -> Self {
        CoverFamily { paths, source_edges: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }
}

/// Image paths of the `H`-edges whose terminals are within `L` in `G`, in
/// `H`-edge order.
pub fn build_cover_family(sol: &SprSolution<'_>) -> Result<CoverFamily> {
    let inst = sol.host();
    let l = inst.params().l;
    let mut family = CoverFamily::default();
    for &(a, b, _) in sol.h().edges() {
        let close = inst.terminal_distance(a, b).finite().is_some_and(|d| l.admits(d));
        if close {
            family.paths.push(image_path(sol, &Path::new(sol.h(), vec![a, b])?)?);
            family.source_edges.push((a, b));
        }
    }
    Ok(family)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reduction {
    Interval,
    SetCover,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CovResult {
    pub value: CovValue,
    /// Indices into the family of a minimum cover; empty when uncoverable.
    pub witness: Vec<usize>,
    pub reduction: Reduction,
}

/// Edge positions of `p` (edge `i` joins vertices `i` and `i + 1`) that lie
/// on `member`.
fn covered_positions(p: &Path, member: &Path) -> Vec<usize> {
    let edges = member.edge_set();
    p.edges().enumerate().filter(|(_, e)| edges.contains(e)).map(|(i, _)| i).collect()
}

/// Minimum number of `q` members whose union contains every edge of `p`.
pub fn cov(p: &Path, q: &CoverFamily) -> Result<CovResult> {
    if !p.is_simple() {
        return Err(Error::Argument("cov is defined for simple paths".into()));
    }
    let m = p.edge_count();
    let hits: Vec<Vec<usize>> = q.paths.iter().map(|member| covered_positions(p, member)).collect();
    let contiguous = hits.iter().all(|h| h.windows(2).all(|w| w[1] == w[0] + 1));

    if contiguous {
        let intervals: Vec<Option<(usize, usize)>> =
            hits.iter().map(|h| Some((*h.first()?, *h.last()? + 1))).collect();
        let witness = min_interval_cover(m, &intervals);
        return Ok(CovResult {
            value: witness.as_ref().map_or(Dist::Infinite, |w| Dist::Finite(w.len() as u64)),
            witness: witness.unwrap_or_default(),
            reduction: Reduction::Interval,
        });
    }

    let relevant: Vec<usize> = (0..hits.len()).filter(|&i| !hits[i].is_empty()).collect();
    let reachable: BTreeSet<usize> = relevant.iter().flat_map(|&i| hits[i].iter().copied()).collect();
    if reachable.len() < m {
        return Ok(CovResult { value: Dist::Infinite, witness: Vec::new(), reduction: Reduction::SetCover });
    }
    if relevant.len() > MAX_SET_COVER_MEMBERS {
        return Err(Error::Capacity { relevant: relevant.len(), limit: MAX_SET_COVER_MEMBERS });
    }
    let sets: Vec<Vec<usize>> = relevant.iter().map(|&i| hits[i].clone()).collect();
    let chosen = min_set_cover(m, &sets).expect("every position is reachable");
    let witness: Vec<usize> = chosen.into_iter().map(|j| relevant[j]).collect();
    Ok(CovResult { value: Dist::Finite(witness.len() as u64), witness, reduction: Reduction::SetCover })
}

/// Greedy minimum cover of the edge positions `0..m` by half-open intervals
/// `[start, end)`; `None` entries are skipped. Returns member indices in the
/// order chosen, or `None` if some position is uncovered.
pub fn min_interval_cover(m: usize, intervals: &[Option<(usize, usize)>]) -> Option<Vec<usize>> {
    let mut chosen = Vec::new();
    let mut reach = 0;
    while reach < m {
        let best = intervals
            .iter()
            .enumerate()
            .filter_map(|(i, iv)| iv.map(|(s, e)| (i, s, e)))
            .filter(|&(_, s, e)| s <= reach && e > reach)
            .max_by_key(|&(i, _, e)| (e, std::cmp::Reverse(i)))?;
        chosen.push(best.0);
        reach = best.2;
    }
    Some(chosen)
}

/// Exact minimum set cover of `0..m` by exhaustive search over subsets in
/// order of size. Returns indices in increasing order.
pub fn min_set_cover(m: usize, sets: &[Vec<usize>]) -> Option<Vec<usize>> {
    let words = m.div_ceil(64).max(1);
    let masks: Vec<Vec<u64>> = sets
        .iter()
        .map(|s| {
            let mut mask = vec![0u64; words];
            for &i in s {
                mask[i / 64] |= 1 << (i % 64);
            }
            mask
        })
        .collect();
    let mut full = vec![u64::MAX; words];
    if !m.is_multiple_of(64) {
        full[words - 1] = (1u64 << (m % 64)) - 1;
    }
    if m == 0 {
        full[0] = 0;
    }
    (0..=sets.len()).find_map(|size| {
        let mut pick = Vec::with_capacity(size);
        search_cover(&masks, &full, size, 0, &mut pick, &vec![0u64; words])
    })
}

fn search_cover(
    masks: &[Vec<u64>],
    full: &[u64],
    size: usize,
    from: usize,
    pick: &mut Vec<usize>,
    union: &[u64],
) -> Option<Vec<usize>> {
    if pick.len() == size {
        return (union == full).then(|| pick.clone());
    }
    for i in from..masks.len() {
        if masks.len() - i < size - pick.len() {
            break;
        }
        let next: Vec<u64> = union.iter().zip(&masks[i]).map(|(a, b)| a | b).collect();
        pick.push(i);
        if let Some(found) = search_cover(masks, full, size, i + 1, pick, &next) {
            return Some(found);
        }
        pick.pop();
    }
    None
}

/// Splits `p` into `floor(m / s)` consecutive pieces of `s` edges, the last
/// absorbing the remainder. Pieces share endpoints.
pub fn decompose(g: &WeightedGraph, p: &Path, s: usize) -> Result<Vec<Path>> {
    let m = p.edge_count();
    if s == 0 || s > m {
        return Err(Error::Argument(format!("block length {s} must lie in 1..={m}")));
    }
    let pieces = m / s;
    (0..pieces)
        .map(|j| {
            let end = if j + 1 == pieces { m } else { (j + 1) * s };
            p.slice(g, j * s, end)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Superadditivity {
    pub lhs: u64,
    pub rhs: u64,
    pub holds: bool,
}

/// A failed superadditivity check with everything needed to replay it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub p: Path,
    pub family: Vec<Path>,
    pub s: usize,
    pub lhs: u64,
    pub rhs: u64,
}

/// Compares `cov(P)` with `sum_j (cov(P_j) - 1)` over [`decompose`].
pub fn check_superadditivity(g: &WeightedGraph, p: &Path, q: &CoverFamily, s: usize) -> Result<Superadditivity> {
    let Dist::Finite(lhs) = cov(p, q)?.value else {
        return Err(Error::Precondition("cov(P) is infinite".into()));
    };
    let mut rhs = 0;
    for piece in decompose(g, p, s)? {
        match cov(&piece, q)?.value {
            Dist::Finite(c) => rhs += c.saturating_sub(1),
            Dist::Infinite => return Err(Error::Precondition("a piece of a covered path is uncovered".into())),
        }
    }
    Ok(Superadditivity { lhs, rhs, holds: lhs >= rhs })
}

/// As [`check_superadditivity`], turning a violation into an error that
/// carries the serialized counterexample.
pub fn assert_superadditivity(g: &WeightedGraph, p: &Path, q: &CoverFamily, s: usize) -> Result<Superadditivity> {
    let check = check_superadditivity(g, p, q, s)?;
    if !check.holds {
        let ce = Counterexample { p: p.clone(), family: q.paths.clone(), s, lhs: check.lhs, rhs: check.rhs };
        return Err(Error::Superadditivity(serde_json::to_string(&ce)?));
    }
    Ok(check)
}

/// Non-backtracking walks on a fixed graph, simple below its girth.
#[derive(Debug, Clone)]
pub struct NbSampler<'g> {
    g: &'g WeightedGraph,
    girth: Dist,
}

impl<'g> NbSampler<'g> {
    pub fn new(g: &'g WeightedGraph) -> Result<Self> {
        if g.vertex_count() == 0 || (0..g.vertex_count()).any(|v| g.degree(v) < 2) {
            return Err(Error::Precondition("non-backtracking walks need minimum degree 2".into()));
        }
        Ok(NbSampler { g, girth: girth(g) })
    }

    pub fn girth(&self) -> Dist {
        self.girth
    }

    /// Uniform start, uniform first step, then uniform over the neighbours
    /// other than the one just left.
    pub fn sample<R: Rng>(&self, length: usize, rng: &mut R) -> Result<Path> {
        if Dist::Finite(length as u64) >= self.girth {
            return Err(Error::Precondition(format!(
                "walk length {length} is not below the girth {}",
                self.girth
            )));
        }
        let mut walk = vec![rng.gen_range(0..self.g.vertex_count())];
        let mut prev = None;
        for _ in 0..length {
            let cur = *walk.last().expect("non-empty");
            let options: Vec<Vertex> =
                self.g.neighbors(cur).iter().map(|&(v, _)| v).filter(|&v| Some(v) != prev).collect();
            let next = *options.choose(rng).expect("minimum degree 2");
            prev = Some(cur);
            walk.push(next);
        }
        Path::new(self.g, walk)
    }
}

/// One non-backtracking path of `length` edges, deterministic in `seed`.
pub fn sample_nb_path(g: &WeightedGraph, length: usize, seed: u64) -> Result<Path> {
    NbSampler::new(g)?.sample(length, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// The generator for trial `i` of a seeded experiment: one ChaCha stream per
/// trial, so results do not depend on how trials are scheduled.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Number of oriented simple paths with exactly `s` edges.
pub fn count_length_s_paths(g: &WeightedGraph, s: usize) -> u64 {
    let n = g.vertex_count();
    (0..n)
        .into_par_iter()
        .map(|start| {
            let mut on_path = vec![false; n];
            on_path[start] = true;
            count_from(g, start, s, &mut on_path)
        })
        .sum()
}

fn count_from(g: &WeightedGraph, v: Vertex, left: usize, on_path: &mut [bool]) -> u64 {
    if left == 0 {
        return 1;
    }
    let mut total = 0;
    for &(w, _) in g.neighbors(v) {
        if !on_path[w] {
            on_path[w] = true;
            total += count_from(g, w, left - 1, on_path);
            on_path[w] = false;
        }
    }
    total
}

/// Every oriented simple path with `s` edges, in lexicographic order of
/// vertex sequences.
pub fn enumerate_length_s_paths(g: &WeightedGraph, s: usize) -> Vec<Path> {
    let n = g.vertex_count();
    let mut out = Vec::new();
    let mut walk = Vec::with_capacity(s + 1);
    let mut on_path = vec![false; n];
    for start in 0..n {
        walk.push(start);
        on_path[start] = true;
        extend_paths(g, s, &mut walk, &mut on_path, &mut out);
        on_path[start] = false;
        walk.pop();
    }
    out
}

fn extend_paths(g: &WeightedGraph, s: usize, walk: &mut Vec<Vertex>, on_path: &mut [bool], out: &mut Vec<Path>) {
    if walk.len() == s + 1 {
        out.push(Path::new(g, walk.clone()).expect("walk follows edges"));
        return;
    }
    let v = *walk.last().expect("non-empty");
    let mut next: Vec<Vertex> = g.neighbors(v).iter().map(|&(w, _)| w).filter(|&w| !on_path[w]).collect();
    next.sort_unstable();
    for w in next {
        walk.push(w);
        on_path[w] = true;
        extend_paths(g, s, walk, on_path, out);
        on_path[w] = false;
        walk.pop();
    }
}

/// Length-`s` windows of a path with `r` edges: `max(0, r - s + 1)`.
pub fn coverable_window_count(qpath: &Path, s: usize) -> u64 {
    (qpath.edge_count() + 1).saturating_sub(s) as u64
}

/// Sum of window counts over the maximal runs of core edges (both ends
/// below `core_order`) of every member.
pub fn family_window_count(q: &CoverFamily, core_order: usize, s: usize) -> u64 {
    let mut total = 0;
    for member in &q.paths {
        let mut run = 0usize;
        for pair in member.vertices().windows(2) {
            if pair[0] < core_order && pair[1] < core_order {
                run += 1;
            } else {
                total += (run + 1).saturating_sub(s) as u64;
                run = 0;
            }
        }
        total += (run + 1).saturating_sub(s) as u64;
    }
    total
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovEstimate {
    pub s: usize,
    pub trials: u64,
    pub seed: u64,
    /// Samples with `cov >= 2`, uncoverable samples included.
    pub at_least_two: u64,
    pub uncovered: u64,
    pub fraction_at_least_two: f64,
    pub uncovered_fraction: f64,
    /// Mean over the samples with finite `cov`.
    pub mean_finite_cov: Option<f64>,
    /// Windows coverable by single members, summed over the family.
    pub window_total: u64,
    /// Oriented length-`s` paths in the core, `n * 3 * 2^(s - 1)` when cubic.
    pub oriented_paths: u64,
    /// `1 - 2 * window_total / oriented_paths`.
    pub analytic_bound: f64,
    /// The looser `1 - 4 L / (3 * 2^(s - 1))`.
    pub paper_bound: f64,
    /// Binomial standard deviation at the analytic bound.
    pub sigma: f64,
}

impl CovEstimate {
    /// Empirical fraction at least the analytic bound minus three sigma.
    pub fn respects_bound(&self) -> bool {
        self.fraction_at_least_two >= self.analytic_bound - 3.0 * self.sigma
    }
}

/// Monte Carlo estimate of `Pr[cov(P) >= 2]` over non-backtracking core
/// paths of `s` edges, against the exact window-count bound.
pub fn estimate_cov_distribution(inst: &Instance, q: &CoverFamily, s: usize, trials: u64, seed: u64) -> Result<CovEstimate> {
    let core = inst.core();
    let sampler = NbSampler::new(core)?;
    if Dist::Finite(s as u64) >= sampler.girth() {
        return Err(Error::Precondition(format!("s = {s} is not below the core girth {}", sampler.girth())));
    }
    let covs: Vec<CovValue> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let p = sampler.sample(s, &mut trial_rng(seed, t))?;
            Ok(cov(&p, q)?.value)
        })
        .collect::<Result<_>>()?;

    let at_least_two = covs.iter().filter(|&&c| c >= Dist::Finite(2)).count() as u64;
    let uncovered = covs.iter().filter(|c| !c.is_finite()).count() as u64;
    let finite: Vec<u64> = covs.iter().filter_map(|c| c.finite()).collect();
    let mean_finite_cov = (!finite.is_empty()).then(|| finite.iter().sum::<u64>() as f64 / finite.len() as f64);

    let window_total = family_window_count(q, core.vertex_count(), s);
    let oriented_paths = count_length_s_paths(core, s);
    let analytic_bound = 1.0 - 2.0 * window_total as f64 / oriented_paths as f64;
    let paper_bound = 1.0 - 4.0 * inst.params().l.to_f64() / (3.0 * 2f64.powi(s as i32 - 1));
    let b = analytic_bound.clamp(0.0, 1.0);
    let n = trials.max(1) as f64;

    Ok(CovEstimate {
        s,
        trials,
        seed,
        at_least_two,
        uncovered,
        fraction_at_least_two: at_least_two as f64 / n,
        uncovered_fraction: uncovered as f64 / n,
        mean_finite_cov,
        window_total,
        oriented_paths,
        analytic_bound,
        paper_bound,
        sigma: (b * (1.0 - b) / n).sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HighCov {
    pub path: Path,
    pub cov: CovResult,
    pub exhaustive: bool,
    pub examined: u64,
}

/// Length-`m` core path maximizing `cov` against `q`: exhaustive when there
/// are at most `budget` oriented paths, otherwise the best of `budget`
/// seeded non-backtracking samples. Infinity beats every finite value; ties
/// go to the lexicographically smallest path.
pub fn find_high_cov_path(inst: &Instance, q: &CoverFamily, m: usize, budget: u64, seed: u64) -> Result<HighCov> {
    let core = inst.core();
    if count_length_s_paths(core, m) <= budget {
        best_of(enumerate_length_s_paths(core, m), q, true)
    } else {
        find_high_cov_path_sampled(inst, q, m, budget, seed)
    }
}

/// The sampling half of [`find_high_cov_path`].
pub fn find_high_cov_path_sampled(inst: &Instance, q: &CoverFamily, m: usize, samples: u64, seed: u64) -> Result<HighCov> {
    let sampler = NbSampler::new(inst.core())?;
    let paths = (0..samples.max(1))
        .into_par_iter()
        .map(|t| sampler.sample(m, &mut trial_rng(seed, t)))
        .collect::<Result<Vec<_>>>()?;
    best_of(paths, q, false)
}

fn best_of(paths: Vec<Path>, q: &CoverFamily, exhaustive: bool) -> Result<HighCov> {
    let examined = paths.len() as u64;
    let scored = paths
        .into_par_iter()
        .map(|p| Ok((cov(&p, q)?, p)))
        .collect::<Result<Vec<_>>>()?;
    let (cov, path) = scored
        .into_iter()
        .reduce(|best, next| {
            let better = next.0.value > best.0.value || (next.0.value == best.0.value && next.1 < best.1);
            if better {
                next
            } else {
                best
            }
        })
        .ok_or_else(|| Error::Argument("the core has no path of the requested length".into()))?;
    Ok(HighCov { path, cov, exhaustive, examined })
}
