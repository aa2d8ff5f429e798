//! Acceptance gate: one PASS/FAIL line per criterion, each with a time limit.
//! Exits non-zero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use rand::Rng;
use spr_lab::catalog::Cage;
use spr_lab::certify::{certify, sweep_csv, Case, CertifyOptions, Solver, SweepConfig};
use spr_lab::cover::{
    assert_superadditivity, count_length_s_paths, cov, estimate_cov_distribution, min_interval_cover, CoverFamily,
    NbSampler, Reduction,
};
use spr_lab::graph::{concat, girth, girth_dichotomy_with, shortest_path, Dichotomy, Dist, Path, WeightedGraph};
use spr_lab::instance::{build_instance, build_subterminal_instance, derive_params, Instance, Mode, Overrides};
use spr_lab::numeric::{ExtRatio, Rational};
use spr_lab::solution::{
    enumerate_partitions, h_shortest_path, image_path, stretch, validate_solution, voronoi_solution, SprSolution,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, u64, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn custom_instance(core: WeightedGraph, m: u64, g: u64) -> Instance {
    let k = core.vertex_count() as u128;
    let params = derive_params(k, Mode::Custom, &Overrides { m: Some(m), g: Some(g), ..Overrides::default() }).unwrap();
    build_instance(core, params).unwrap()
}

fn cage_instance(cage: Cage, m: u64) -> Instance {
    custom_instance(cage.graph(), m, cage.girth())
}

fn oracles_match() -> Outcome {
    let mut rng = common::rng(1);
    for trial in 0..200 {
        let n = rng.gen_range(1..=10);
        let p = rng.gen_range(0.15..0.7);
        let g = common::random_graph(&mut rng, n, p, 6);
        let got = girth(&g);
        let want = common::girth_by_enumeration(&g);
        ensure(got == want, || format!("graph {trial}: girth {got} vs oracle {want}"))?;
        let fw = common::floyd(&g);
        for (u, fw_row) in fw.iter().enumerate() {
            let row = g.distances_from(u);
            for (v, (&got, &floyd)) in row.iter().zip(fw_row).enumerate() {
                let oracle = if u == v { Dist::Finite(0) } else { common::distance_by_enumeration(&g, u, v) };
                ensure(got == oracle && floyd == oracle, || format!("graph {trial}: dist({u}, {v}) = {got} vs oracle {oracle}"))?;
            }
        }
    }
    Ok("200 graphs, girth and all distances exact".into())
}

fn path_counts() -> Outcome {
    for (cage, s, want) in [(Cage::Petersen, 3, 120), (Cage::Petersen, 4, 240), (Cage::Heawood, 5, 672)] {
        let got = count_length_s_paths(&cage.graph(), s);
        let formula = cage.vertex_count() as u64 * 3 * (1 << (s - 1));
        ensure(got == want && got == formula, || format!("{cage} s={s}: {got}, expected {want}"))?;
    }
    Ok("120, 240, 672".into())
}

fn cover_optimality() -> Outcome {
    let mut rng = common::rng(3);
    let mut total = 0;
    for trial in 0..200 {
        let m = rng.gen_range(1..=16);
        let members = rng.gen_range(0..=12);
        let intervals: Vec<Option<(usize, usize)>> = (0..members)
            .map(|_| {
                let s = rng.gen_range(0..m);
                let e = rng.gen_range(s + 1..=m);
                Some((s, e))
            })
            .collect();
        let sets: Vec<Vec<usize>> = intervals.iter().map(|iv| iv.map_or(Vec::new(), |(s, e)| (s..e).collect())).collect();
        let greedy = min_interval_cover(m, &intervals).map(|w| w.len());
        let brute = common::brute_set_cover(m, &sets);
        ensure(greedy == brute, || format!("family {trial}: greedy {greedy:?} vs brute force {brute:?}"))?;

        // the same family through cov on a line
        let g = WeightedGraph::unit(m + 1, (0..m).map(|i| (i, i + 1))).unwrap();
        let p = Path::new(&g, (0..=m).collect()).unwrap();
        let q = CoverFamily::synthetic(intervals.iter().map(|iv| iv.map(|(s, e)| p.slice(&g, s, e).unwrap()).unwrap()).collect());
        let via_cov = cov(&p, &q).map_err(|e| e.to_string())?.value.finite().map(|c| c as usize);
        ensure(via_cov == brute, || format!("family {trial}: cov {via_cov:?} vs brute force {brute:?}"))?;
        total += usize::from(brute.is_some());
    }
    Ok(format!("200 families, {total} coverable, exact agreement"))
}

/// A random path `p` of `m` edges on a cage with members of at most
/// `girth - 1 - m` edges: pieces of `p` extended off `p` plus unrelated
/// walks, tiled so that `p` is coverable.
fn superadditivity_config(rng: &mut rand_chacha::ChaCha8Rng, cage: Cage) -> (WeightedGraph, Path, CoverFamily, usize) {
    let g = cage.graph();
    let girth = cage.girth() as usize;
    let sampler = NbSampler::new(&g).unwrap();
    let m = rng.gen_range(2..=girth - 2);
    let max_len = girth - 1 - m;
    let p = sampler.sample(m, rng).unwrap();
    let mut members = Vec::new();
    let mut at = 0;
    while at < m {
        let back = rng.gen_range(0..=at.min(max_len - 1));
        let start = at - back;
        let end = (start + rng.gen_range(1..=max_len)).min(m).max(at + 1);
        members.push(extend(&g, &p, start, end, max_len, rng));
        at = end;
    }
    for _ in 0..rng.gen_range(0..6) {
        let start = rng.gen_range(0..m);
        let end = rng.gen_range(start + 1..=(start + max_len).min(m));
        members.push(extend(&g, &p, start, end, max_len, rng));
    }
    for _ in 0..rng.gen_range(0..4) {
        members.push(sampler.sample(rng.gen_range(1..=max_len), rng).unwrap());
    }
    let s = rng.gen_range(1..=m);
    (g, p, CoverFamily::synthetic(members), s)
}

/// `p[start..=end]` grown by non-backtracking steps off `p` while the total
/// stays within `max_len` edges.
fn extend(g: &WeightedGraph, p: &Path, start: usize, end: usize, max_len: usize, rng: &mut rand_chacha::ChaCha8Rng) -> Path {
    let mut vs: Vec<usize> = p.vertices()[start..=end].to_vec();
    let extra = rng.gen_range(0..=max_len - (end - start));
    for _ in 0..extra {
        let at_front = rng.gen_bool(0.5);
        let (tip, prev) = if at_front { (vs[0], vs.get(1).copied()) } else { (vs[vs.len() - 1], vs.get(vs.len() - 2).copied()) };
        let options: Vec<usize> = g
            .neighbors(tip)
            .iter()
            .map(|&(w, _)| w)
            .filter(|&w| Some(w) != prev && !vs.contains(&w) && !p.vertices().contains(&w))
            .collect();
        let Some(&next) = options.get(rng.gen_range(0..options.len().max(1))) else { break };
        if at_front {
            vs.insert(0, next);
        } else {
            vs.push(next);
        }
    }
    Path::new(g, vs).unwrap()
}

fn superadditivity() -> Outcome {
    let mut rng = common::rng(4);
    let mut slack = u64::MAX;
    for trial in 0..1000 {
        let cage = Cage::ALL[trial % Cage::ALL.len()];
        let (g, p, q, s) = superadditivity_config(&mut rng, cage);
        let c = cov(&p, &q).map_err(|e| e.to_string())?;
        ensure(c.reduction == Reduction::Interval, || format!("config {trial}: non-contiguous intersection"))?;
        let lists: Vec<Vec<usize>> = q.paths.iter().map(|x| x.vertices().to_vec()).collect();
        let oracle = common::brute_cov(p.vertices(), &lists).map(|x| x as u64);
        ensure(c.value.finite() == oracle, || format!("config {trial}: cov {} vs oracle {oracle:?}", c.value))?;
        let check = assert_superadditivity(&g, &p, &q, s).map_err(|e| format!("config {trial}: {e}"))?;
        slack = slack.min(check.lhs - check.rhs);
    }
    Ok(format!("1000 configurations, 0 violations, minimum slack {slack}"))
}

fn dichotomy() -> Outcome {
    let mut rng = common::rng(5);
    let mut long = 0;
    for trial in 0..1000 {
        let cage = Cage::ALL[trial % Cage::ALL.len()];
        let g = cage.graph();
        let gg = girth(&g);
        let n = g.vertex_count();
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u == v {
            continue;
        }
        let p = shortest_path(&g, u, v).unwrap();
        // detour: wander from u, then head to v
        let mut walk = vec![u];
        for _ in 0..rng.gen_range(0..2 * cage.girth()) {
            let nb = g.neighbors(*walk.last().unwrap());
            walk.push(nb[rng.gen_range(0..nb.len())].0);
        }
        let wander = Path::new(&g, walk).unwrap();
        let q = concat(&[wander.clone(), shortest_path(&g, wander.last(), v).unwrap_or(Path::single(v))]).unwrap();
        let verdict = girth_dichotomy_with(gg, &p, &q).map_err(|e| e.to_string())?;
        ensure(verdict != Dichotomy::Violation, || format!("pair {trial}: violation for p = {:?}, q = {:?}", p.vertices(), q.vertices()))?;
        if verdict == Dichotomy::Long {
            long += 1;
            ensure(Dist::Finite(p.length() + q.length()) >= gg, || format!("pair {trial}: long verdict below girth"))?;
        }
    }
    Ok(format!("1000 pairs, 0 violations, {long} long"))
}

/// A sparse explicit solution: every core edge with its `dist_G` weight, a
/// few of them inflated, plus random chords.
fn inflated_solution(inst: &Instance, seed: u64) -> SprSolution<'_> {
    let mut rng = common::rng(seed);
    let k = inst.terminal_count();
    let mut edges: Vec<(usize, usize, u64)> = inst
        .core()
        .edges()
        .iter()
        .map(|&(a, b, _)| (a, b, inst.terminal_distance(a, b).finite().unwrap() + if rng.gen_bool(0.3) { rng.gen_range(1..10) } else { 0 }))
        .collect();
    while edges.len() < inst.full().edge_count() {
        let (a, b) = (rng.gen_range(0..k), rng.gen_range(0..k));
        let (a, b) = (a.min(b), a.max(b));
        if a != b && !edges.iter().any(|&(x, y, _)| (x, y) == (a, b)) {
            edges.push((a, b, inst.terminal_distance(a, b).finite().unwrap() + rng.gen_range(0..3)));
        }
    }
    SprSolution::from_edges(inst, edges).unwrap()
}

fn sandwich() -> Outcome {
    let mut checked = 0;
    for (i, cage) in [Cage::Petersen, Cage::Heawood, Cage::McGee].into_iter().enumerate() {
        let inst = cage_instance(cage, 2);
        let dg = common::floyd(inst.full());
        let k = inst.terminal_count();
        let sols = [voronoi_solution(&inst).unwrap(), inflated_solution(&inst, i as u64)];
        for (j, sol) in sols.iter().enumerate() {
            ensure(validate_solution(sol).passed(), || format!("{cage} solution {j} is invalid"))?;
            let dh = common::floyd(sol.h());
            let mut rng = common::rng(60 + i as u64);
            let mut sampled = 0;
            while sampled < 100 {
                let (a, b) = (rng.gen_range(0..k), rng.gen_range(0..k));
                if a == b {
                    continue;
                }
                sampled += 1;
                let hp = h_shortest_path(sol, a, b).map_err(|e| e.to_string())?;
                let r = image_path(sol, &hp).map_err(|e| e.to_string())?;
                let g_ab = dg[inst.terminal_vertex(a)][inst.terminal_vertex(b)];
                let ok = Dist::Finite(hp.length()) == dh[a][b]
                    && hp.length() >= r.length()
                    && Dist::Finite(r.length()) >= g_ab
                    && r.first() == inst.terminal_vertex(a)
                    && r.last() == inst.terminal_vertex(b);
                ensure(ok, || format!("{cage} solution {j}, pair ({a}, {b}): {} >= {} >= {g_ab} fails", hp.length(), r.length()))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} sampled H-paths on 3 cages, 2 solutions each"))
}

fn probability_bound() -> Outcome {
    let inst = cage_instance(Cage::Heawood, 1);
    let g = inst.core();
    let sampler = NbSampler::new(g).unwrap();
    let mut lines = Vec::new();
    for (f, s) in [(0u64, 3usize), (1, 4), (2, 4), (3, 5), (4, 5), (5, 3)] {
        let mut rng = common::rng(70 + f);
        let members = (0..20).map(|_| sampler.sample(rng.gen_range(s..=5), &mut rng).unwrap()).collect();
        let q = CoverFamily::synthetic(members);
        let est = estimate_cov_distribution(&inst, &q, s, 10_000, 80 + f).map_err(|e| e.to_string())?;
        ensure(est.respects_bound(), || {
            format!("family {f}, s={s}: {:.4} < {:.4} - 3 * {:.4}", est.fraction_at_least_two, est.analytic_bound, est.sigma)
        })?;
        lines.push(format!("s={s}: {:.3}>={:.3}", est.fraction_at_least_two, est.analytic_bound));
    }
    Ok(format!("6 families, {}", lines.join(", ")))
}

fn subterminal_instances() -> Vec<Instance> {
    let params = |k: usize| derive_params(k as u128, Mode::Custom, &Overrides::default()).unwrap();
    let mut out = Vec::new();
    let triangle = WeightedGraph::unit(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
    out.push(build_subterminal_instance(triangle, vec![0, 1], params(2)).unwrap());
    let c6 = WeightedGraph::unit(6, (0..6).map(|i| (i, (i + 1) % 6))).unwrap();
    out.push(build_subterminal_instance(c6, vec![0, 2, 4], params(3)).unwrap());
    out.push(build_subterminal_instance(Cage::Petersen.graph(), vec![0, 5, 7], params(3)).unwrap());
    out.push(build_subterminal_instance(Cage::Petersen.graph(), vec![1, 2, 3, 8], params(4)).unwrap());
    let mut rng = common::rng(8);
    for _ in 0..16 {
        let n = rng.gen_range(3..=10);
        let core = common::random_connected_unit(&mut rng, n, 0.25);
        let k = rng.gen_range(2..=n.min(5));
        let mut attach = rand::seq::index::sample(&mut rng, n, k).into_vec();
        attach.sort_unstable();
        out.push(build_subterminal_instance(core, attach, params(k)).unwrap());
    }
    out
}

fn brute_force_consistency() -> Outcome {
    let mut partitions = 0;
    let instances = subterminal_instances();
    for (i, inst) in instances.iter().enumerate() {
        let all = enumerate_partitions(inst, 10_000_000).map_err(|e| e.to_string())?;
        let oracle = common::connected_partitions(inst.core(), inst.attachments());
        ensure(all.len() == oracle.len(), || format!("instance {i}: {} partitions vs oracle {}", all.len(), oracle.len()))?;
        let mut best = ExtRatio::Infinite;
        for clusters in all {
            let sol = SprSolution::from_partition(inst, clusters).map_err(|e| e.to_string())?;
            let report = validate_solution(&sol);
            ensure(report.passed(), || format!("instance {i}: enumerated partition rejected:\n{report}"))?;
            best = best.min(stretch(&sol).max_ratio);
            partitions += 1;
        }
        let brute = spr_lab::solution::brute_force_optimal(inst, 10_000_000).map_err(|e| e.to_string())?;
        let voronoi = stretch(&voronoi_solution(inst).map_err(|e| e.to_string())?).max_ratio;
        ensure(brute.min_stretch == best && brute.min_stretch <= voronoi, || {
            format!("instance {i}: brute force {} (recomputed {best}), voronoi {voronoi}", brute.min_stretch)
        })?;
    }
    Ok(format!("{} instances, {partitions} partitions validated", instances.len()))
}

fn certifier_soundness() -> Outcome {
    let mut lines = Vec::new();
    for cage in [Cage::McGee, Cage::TutteCoxeter, Cage::Balaban10] {
        let inst = cage_instance(cage, 1);
        let dg = common::floyd(inst.full());
        for solver in [Solver::Voronoi, Solver::Metric] {
            let sol = solver.solve(&inst, 0).map_err(|e| e.to_string())?;
            let opts = CertifyOptions { ignore_edge_budget: solver == Solver::Metric, ..CertifyOptions::default() };
            let cert = certify(&inst, &sol, &opts).map_err(|e| e.to_string())?;
            ensure(cert.case != Case::PreconditionsUnmet, || format!("{cage}/{}: preconditions unmet", solver.name()))?;
            let (a, b) = cert.witness_terminals.unwrap();
            let dh = common::floyd(sol.h())[a][b].finite().unwrap();
            let g_ab = dg[inst.terminal_vertex(a)][inst.terminal_vertex(b)].finite().unwrap();
            let exact = ExtRatio::Finite(Rational::new(dh, g_ab));
            ensure(cert.exact_ratio == Some(exact) && cert.ratio_bound <= exact, || {
                format!("{cage}/{}: bound {} vs exact {exact}", solver.name(), cert.ratio_bound)
            })?;
            lines.push(format!("{cage}/{}={}<={}", solver.name(), cert.case.name(), exact));
        }
    }
    Ok(lines.join(", "))
}

fn determinism() -> Outcome {
    let cfg = SweepConfig::from_toml(
        r#"
        seed = 11
        solvers = ["voronoi", "metric", "brute"]
        partition_budget = 10

        [[instances]]
        cage = "mcgee"
        M = 1

        [[instances]]
        cage = "balaban-10"
        M = 1

        [[instances]]
        n = 30
        girth = 6
        seed = 3
        M = 1
        "#,
    )
    .map_err(|e| e.to_string())?;
    let reference = sweep_csv(&cfg, None).map_err(|e| e.to_string())?;
    for threads in [1, 2, 8] {
        let again = sweep_csv(&SweepConfig { threads: Some(threads), ..cfg.clone() }, None).map_err(|e| e.to_string())?;
        ensure(again == reference, || format!("sweep CSV differs with {threads} threads"))?;
    }

    let inst = cage_instance(Cage::Heawood, 1);
    let q = CoverFamily::synthetic((0..10).map(|i| spr_lab::cover::sample_nb_path(inst.core(), 4, i).unwrap()).collect());
    let json = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| serde_json::to_string(&estimate_cov_distribution(&inst, &q, 3, 5000, 2).unwrap()).unwrap())
    };
    let first = json(1);
    ensure([2, 8].iter().all(|&t| json(t) == first), || "cover estimate JSON differs across thread counts".into())?;
    Ok(format!("{} CSV rows and cover JSON identical at 1, 2, 8 threads", reference.lines().count() - 1))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 shortest-path and girth oracles", 10, oracles_match),
        ("2 path-counting formula", 5, path_counts),
        ("3 cover optimality", 30, cover_optimality),
        ("4 superadditivity", 60, superadditivity),
        ("5 girth dichotomy", 30, dichotomy),
        ("6 distance sandwich", 30, sandwich),
        ("7 probability bound", 60, probability_bound),
        ("8 brute-force oracle consistency", 120, brute_force_consistency),
        ("9 certifier soundness", 60, certifier_soundness),
        ("10 determinism", 120, determinism),
    ];
    let mut failed = 0;
    for (name, limit, check) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|detail| {
            if elapsed <= Duration::from_secs(limit) {
                Ok(detail)
            } else {
                Err(format!("took {:.2}s, limit {limit}s", elapsed.as_secs_f64()))
            }
        });
        match outcome {
            Ok(detail) => println!("PASS {name} ({:.2}s): {detail}", elapsed.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("FAIL {name} ({:.2}s): {why}", elapsed.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        println!("{failed} of 10 criteria failed");
        std::process::exit(1);
    }
    println!("all 10 criteria passed");
}
