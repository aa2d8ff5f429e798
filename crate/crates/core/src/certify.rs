//! Replays the final case analysis of the lower bound on a concrete solution
//! and records a checkable certificate, plus batch sweeps over instances and
//! solvers.

use std::path::{Path as FsPath, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::catalog::Cage;
use crate::cover::{build_cover_family, find_high_cov_path, CovValue};
use crate::error::{Error, Result};
use crate::generate::{generate_cubic_high_girth, Strategy, DEFAULT_REPAIR_BUDGET};
use crate::graph::{girth, girth_dichotomy_with, Dichotomy, Dist, Path};
use crate::instance::{build_instance, derive_params, Instance, Mode, Overrides};
use crate::numeric::{ExtRatio, Rational, Threshold};
use crate::solution::{
    brute_force_optimal, h_shortest_path, image_path, pair_stretch, stretch, validate_solution, voronoi_solution,
    SprSolution,
};

pub const DEFAULT_PATH_BUDGET: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Case {
    /// `P'` is not contained in the image walk `R`, so `R` is long.
    Detour,
    /// The `H`-path uses an edge whose terminals are farther apart than `L`.
    LongEdge,
    /// Every `H`-edge on the path is a cover-family member.
    ManyEdges,
    PreconditionsUnmet,
    /// The witness terminals are not connected in `H`.
    Disconnected,
}

impl Case {
    pub fn name(self) -> &'static str {
        match self {
            Case::Detour => "detour",
            Case::LongEdge => "long-edge",
            Case::ManyEdges => "many-edges",
            Case::PreconditionsUnmet => "preconditions-unmet",
            Case::Disconnected => "disconnected",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub witness_terminals: Option<(usize, usize)>,
    pub p: Option<Path>,
    pub cov: Option<CovValue>,
    /// `2M + |P|`.
    pub p_prime_length: Option<u64>,
    pub dist_g: Option<Dist>,
    pub dist_h: Option<Dist>,
    pub h_path: Option<Path>,
    /// `|R|` for the image walk of `h_path`.
    pub image_length: Option<u64>,
    pub dichotomy: Option<Dichotomy>,
    pub case: Case,
    /// Lower bound on `dist_H` established by the case.
    pub lower_bound: Option<u64>,
    pub ratio_bound: ExtRatio,
    pub ratio_bound_decimal: String,
    pub exact_ratio: Option<ExtRatio>,
    pub preconditions: Vec<(String, bool)>,
}

impl Certificate {
    /// `ratio_bound <= exact_ratio`, vacuous when no ratio was computed.
    pub fn is_sound(&self) -> bool {
        self.exact_ratio.is_none_or(|exact| self.ratio_bound <= exact)
    }

    fn unmet(preconditions: Vec<(String, bool)>) -> Self {
        let one = ExtRatio::one();
        Certificate {
            witness_terminals: None,
            p: None,
            cov: None,
            p_prime_length: None,
            dist_g: None,
            dist_h: None,
            h_path: None,
            image_length: None,
            dichotomy: None,
            case: Case::PreconditionsUnmet,
            lower_bound: None,
            ratio_bound: one,
            ratio_bound_decimal: one.decimal(),
            exact_ratio: None,
            preconditions,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertifyOptions {
    /// Accept solutions with more edges than `G`, e.g. the metric completion.
    pub ignore_edge_budget: bool,
    /// Path budget handed to the high-cov search.
    pub budget: u64,
    pub seed: u64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions { ignore_edge_budget: false, budget: DEFAULT_PATH_BUDGET, seed: 0 }
    }
}

fn ratio(num: u64, den: u64) -> ExtRatio {
    if den == 0 {
        ExtRatio::Infinite
    } else {
        ExtRatio::Finite(Rational::new(num, den)).max(ExtRatio::one())
    }
}

/// Certifies a lower bound on the stretch of `sol`.
pub fn certify(inst: &Instance, sol: &SprSolution<'_>, opts: &CertifyOptions) -> Result<Certificate> {
    let report = validate_solution(sol);
    let failed: Vec<String> = report
        .failures()
        .filter(|c| !(opts.ignore_edge_budget && c.name == "edge budget"))
        .map(|c| format!("{} ({})", c.name, c.detail))
        .collect();
    if !failed.is_empty() {
        return Err(Error::InvalidSolution(failed.join("; ")));
    }

    let params = inst.params();
    let m = params.m;
    let core_girth = girth(inst.core());
    let below_girth = |x: u64| Dist::Finite(x) < core_girth;
    let preconditions = vec![
        ("3M < girth/2".to_string(), below_girth(6 * m)),
        ("S < girth".to_string(), below_girth(params.s)),
        ("terminal on every core vertex".to_string(), inst.is_full_variant()),
    ];
    if preconditions.iter().any(|(_, ok)| !ok) {
        return Ok(Certificate::unmet(preconditions));
    }

    let q = build_cover_family(sol)?;
    let high = find_high_cov_path(inst, &q, m as usize, opts.budget, opts.seed)?;
    let p = high.path;
    let (a, b) = (
        inst.terminal_at(p.first()).expect("full variant"),
        inst.terminal_at(p.last()).expect("full variant"),
    );
    let dist_g = inst.terminal_distance(a, b);
    let p_prime_length = 2 * m + p.length();
    if dist_g != Dist::Finite(p_prime_length) {
        return Err(Error::Precondition(format!(
            "dist_G(t_{a}, t_{b}) = {dist_g}, expected 2M + |P| = {p_prime_length}"
        )));
    }
    let exact = pair_stretch(sol, a, b);
    let dist_h = sol.h().distance(a, b);

    let mut cert = Certificate {
        witness_terminals: Some((a, b)),
        p: Some(p.clone()),
        cov: Some(high.cov.value),
        p_prime_length: Some(p_prime_length),
        dist_g: Some(dist_g),
        dist_h: Some(dist_h),
        h_path: None,
        image_length: None,
        dichotomy: None,
        case: Case::Disconnected,
        lower_bound: None,
        ratio_bound: ExtRatio::Infinite,
        ratio_bound_decimal: ExtRatio::Infinite.decimal(),
        exact_ratio: Some(exact),
        preconditions,
    };
    if !dist_h.is_finite() {
        return Ok(cert);
    }

    let h_path = h_shortest_path(sol, a, b)?;
    let r = image_path(sol, &h_path)?;
    let p_prime = Path::new(
        inst.full(),
        std::iter::once(inst.terminal_vertex(a))
            .chain(p.vertices().iter().copied())
            .chain(std::iter::once(inst.terminal_vertex(b)))
            .collect(),
    )?;
    let dichotomy = girth_dichotomy_with(core_girth, &p_prime, &r)?;

    let long_edge = h_path
        .vertices()
        .windows(2)
        .filter(|e| !inst.terminal_distance(e[0], e[1]).finite().is_some_and(|d| params.l.admits(d)))
        .map(|e| sol.h().weight(e[0], e[1]).expect("path edge"))
        .max();

    let (case, bound) = match (dichotomy, long_edge) {
        (Dichotomy::Violation, _) => {
            return Err(Error::Precondition("P' is not a shortest path: girth dichotomy violated".into()));
        }
        (Dichotomy::Long, _) => {
            let g = core_girth.finite().expect("a detour closes a cycle");
            (Case::Detour, g.saturating_sub(p_prime_length))
        }
        (Dichotomy::Subset, Some(w)) => (Case::LongEdge, w),
        (Dichotomy::Subset, None) => {
            let c = high.cov.value.finite().ok_or_else(|| {
                Error::Precondition("P lies on an image of cover-family edges yet cov(P) is infinite".into())
            })?;
            let spacing = inst.min_terminal_distance().finite().unwrap_or(0);
            (Case::ManyEdges, c * spacing)
        }
    };

    let lower = bound.max(dist_g.finite().expect("finite"));
    cert.ratio_bound = ratio(lower, p_prime_length);
    cert.ratio_bound_decimal = cert.ratio_bound.decimal();
    cert.case = case;
    cert.lower_bound = Some(lower);
    cert.image_length = Some(r.length());
    cert.h_path = Some(h_path);
    cert.dichotomy = Some(dichotomy);
    Ok(cert)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    Voronoi,
    Brute,
    /// Complete graph with `dist_G` weights; certified ignoring the edge budget.
    Metric,
}

impl Solver {
    pub fn name(self) -> &'static str {
        match self {
            Solver::Voronoi => "voronoi",
            Solver::Brute => "brute",
            Solver::Metric => "metric",
        }
    }

    pub fn solve(self, inst: &Instance, partition_budget: usize) -> Result<SprSolution<'_>> {
        match self {
            Solver::Voronoi => voronoi_solution(inst),
            Solver::Brute => Ok(brute_force_optimal(inst, partition_budget)?.best),
            Solver::Metric => SprSolution::metric_completion(inst),
        }
    }
}

impl std::str::FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "voronoi" => Ok(Solver::Voronoi),
            "brute" => Ok(Solver::Brute),
            "metric" => Ok(Solver::Metric),
            _ => Err(Error::Argument(format!("unknown solver {s:?} (expected voronoi, brute or metric)"))),
        }
    }
}

/// One instance of a sweep, from a file, a cage or the random generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub path: Option<PathBuf>,
    pub cage: Option<Cage>,
    pub n: Option<usize>,
    pub girth: Option<u64>,
    pub seed: Option<u64>,
    pub mode: Option<Mode>,
    #[serde(rename = "M")]
    pub m: Option<u64>,
    #[serde(rename = "S")]
    pub s: Option<u64>,
    #[serde(rename = "L")]
    pub l: Option<Threshold>,
    pub g: Option<u64>,
}

impl InstanceSpec {
    pub fn cage(cage: Cage, m: u64) -> Self {
        InstanceSpec {
            path: None,
            cage: Some(cage),
            n: None,
            girth: None,
            seed: None,
            mode: None,
            m: Some(m),
            s: None,
            l: None,
            g: None,
        }
    }

    /// Builds the instance; relative paths resolve against `base`.
    pub fn build(&self, base: Option<&FsPath>) -> Result<Instance> {
        if let Some(path) = &self.path {
            let full = match base {
                Some(dir) if path.is_relative() => dir.join(path),
                _ => path.clone(),
            };
            return Instance::load(full);
        }
        let (core, core_girth) = match (self.cage, self.n) {
            (Some(cage), None) => (cage.graph(), cage.girth()),
            (None, Some(n)) => {
                let g = self.girth.unwrap_or(3);
                let strategy = Strategy::RandomRepair { budget: DEFAULT_REPAIR_BUDGET };
                (generate_cubic_high_girth(n, g, self.seed.unwrap_or(0), strategy)?, g)
            }
            _ => return Err(Error::Argument("an instance needs exactly one of path, cage or n".into())),
        };
        let mode = self.mode.unwrap_or(Mode::Custom);
        let overrides = match mode {
            Mode::Paper => Overrides::default(),
            Mode::Custom => Overrides { m: self.m, s: self.s, l: self.l, g: Some(self.g.unwrap_or(core_girth)) },
        };
        let params = derive_params(core.vertex_count() as u128, mode, &overrides)?;
        build_instance(core, params)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub seed: u64,
    pub threads: Option<usize>,
    #[serde(default)]
    pub timing: bool,
    #[serde(default = "default_budget")]
    pub budget: u64,
    #[serde(default = "default_partition_budget")]
    pub partition_budget: usize,
    pub solvers: Vec<Solver>,
    #[serde(default)]
    pub instances: Vec<InstanceSpec>,
}

fn default_budget() -> u64 {
    DEFAULT_PATH_BUDGET
}

fn default_partition_budget() -> usize {
    1_000_000
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: impl AsRef<FsPath>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: String,
    pub g: String,
    #[serde(rename = "M")]
    pub m: String,
    #[serde(rename = "S")]
    pub s: String,
    #[serde(rename = "L")]
    pub l: String,
    pub solver: String,
    pub stretch: String,
    pub case: String,
    pub ratio_bound: String,
    pub runtime_ms: String,
    pub error: String,
}

const NA: &str = "NA";

fn sweep_row(inst: &Result<Instance>, solver: Solver, cfg: &SweepConfig) -> SweepRow {
    let start = Instant::now();
    let mut row = SweepRow {
        k: NA.into(),
        g: NA.into(),
        m: NA.into(),
        s: NA.into(),
        l: NA.into(),
        solver: solver.name().into(),
        stretch: NA.into(),
        case: NA.into(),
        ratio_bound: NA.into(),
        runtime_ms: NA.into(),
        error: String::new(),
    };
    let inst = match inst {
        Ok(inst) => inst,
        Err(e) => {
            row.error = e.to_string();
            return row;
        }
    };
    let p = inst.params();
    row.k = p.k.to_string();
    row.g = p.g.to_string();
    row.m = p.m.to_string();
    row.s = p.s.to_string();
    row.l = p.l.to_string();

    let outcome = solver.solve(inst, cfg.partition_budget).and_then(|sol| {
        row.stretch = stretch(&sol).max_ratio.decimal();
        let opts = CertifyOptions { ignore_edge_budget: solver == Solver::Metric, budget: cfg.budget, seed: cfg.seed };
        certify(inst, &sol, &opts)
    });
    match outcome {
        Ok(cert) => {
            row.case = cert.case.name().into();
            row.ratio_bound = cert.ratio_bound_decimal;
        }
        Err(e) => row.error = e.to_string(),
    }
    if cfg.timing {
        row.runtime_ms = start.elapsed().as_millis().to_string();
    }
    row
}

/// Runs every solver on every instance and certifies the result. Rows come
/// out in (instance, solver) order; failures are recorded, not raised.
pub fn sweep(cfg: &SweepConfig, base: Option<&FsPath>) -> Result<Vec<SweepRow>> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        pool = pool.num_threads(t);
    }
    let pool = pool.build().map_err(|e| Error::Argument(e.to_string()))?;
    pool.install(|| {
        use rayon::prelude::*;
        let instances: Vec<Result<Instance>> = cfg.instances.par_iter().map(|spec| spec.build(base)).collect();
        let jobs: Vec<(usize, Solver)> =
            (0..instances.len()).flat_map(|i| cfg.solvers.iter().map(move |&s| (i, s))).collect();
        Ok(jobs.par_iter().map(|&(i, solver)| sweep_row(&instances[i], solver, cfg)).collect())
    })
}

pub fn write_csv<W: std::io::Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(["k", "g", "M", "S", "L", "solver", "stretch", "case", "ratio_bound", "runtime_ms", "error"])?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn sweep_csv(cfg: &SweepConfig, base: Option<&FsPath>) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&sweep(cfg, base)?, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}
