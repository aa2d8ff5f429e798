//! The hard instance: a unit-weight core `G'` of high girth with one pendant
//! terminal of weight `M` hanging off every (or, in the sub-terminal variant,
//! some) core vertex.
//!
//! Core vertices keep their indices in the full graph `G`; terminal `i` is
//! vertex `n + i` where `n` is the core order, attached to core vertex
//! `attachments[i]`. With every core vertex carrying a terminal this is
//! `t_u = n + u`.

use std::path::Path as FsPath;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{canonical_path_to, girth, Dist, Path, Vertex, WeightedGraph};
use crate::numeric::Threshold;
use crate::report::ValidationReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Paper,
    Custom,
}

/// Which side conditions of the lower-bound argument hold for a parameter
/// set, evaluated exactly against the required girth `g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreconditionFlags {
    /// `3M < g/2`
    pub three_m_below_half_girth: bool,
    /// `S < g`
    pub s_below_girth: bool,
    /// `M + L < g`
    pub m_plus_l_below_girth: bool,
    /// `2^(S-1) > log2 k`
    pub pow_s_exceeds_log_k: bool,
}

impl PreconditionFlags {
    pub fn evaluate(k: u128, m: u64, s: u64, l: &Threshold, g: u64) -> Self {
        PreconditionFlags {
            three_m_below_half_girth: 6 * m < g,
            s_below_girth: s < g,
            m_plus_l_below_girth: g > m && l.below(g - m),
            // log2 k < 2^(S-1)  <=>  k < 2^(2^(S-1)); k < 2^128 always
            pow_s_exceeds_log_k: match s.checked_sub(1) {
                None => false,
                Some(e) if e >= 7 => true,
                Some(e) => k < 1u128 << (1u32 << e),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceParams {
    /// Number of terminals.
    pub k: u128,
    /// Pendant edge weight, also the length of the high-cover path.
    pub m: u64,
    /// Block length of the path decomposition.
    pub s: u64,
    /// Short-edge threshold: h-edges with `dist_G <= l` form the cover family.
    pub l: Threshold,
    /// Required girth of the core.
    pub g: u64,
    pub mode: Mode,
    pub flags: PreconditionFlags,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Overrides {
    pub m: Option<u64>,
    pub s: Option<u64>,
    pub l: Option<Threshold>,
    pub g: Option<u64>,
}

impl Overrides {
    pub fn is_empty(&self) -> bool {
        self.m.is_none() && self.s.is_none() && self.l.is_none() && self.g.is_none()
    }
}

/// Parameters for `k` terminals.
///
/// Paper mode evaluates `M = floor(sqrt(log k log log k))`,
/// `S = floor(10 log log k)`, `L = log k / 100` and `g = ceil(log k / 10)`
/// (base-2 logs). Custom mode takes the overrides, defaulting to `M = 1`,
/// `g = 3`, `S = g - 1` and `L = 2M + 1`.
pub fn derive_params(k: u128, mode: Mode, overrides: &Overrides) -> Result<InstanceParams> {
    let (m, s, l, g) = match mode {
        Mode::Paper => {
            if !overrides.is_empty() {
                return Err(Error::ParameterDomain("paper mode takes no overrides".into()));
            }
            if k < 4 {
                return Err(Error::ParameterDomain(format!("paper mode needs k >= 4, got {k}")));
            }
            let log_k = if k.is_power_of_two() { k.trailing_zeros() as f64 } else { (k as f64).log2() };
            let log_log_k = log_k.log2();
            let m = (log_k * log_log_k).sqrt().floor() as u64;
            let s = (10.0 * log_log_k).floor() as u64;
            if m < 1 || s < 1 {
                return Err(Error::ParameterDomain(format!("k = {k} is too small: M = {m}, S = {s}")));
            }
            // g = ceil(log2 k / 10): least g with k <= 2^(10 g)
            let g = (1u64..).find(|&g| 10 * g >= 128 || k <= 1u128 << (10 * g)).expect("bounded by 13");
            (m, s, Threshold::log2_over_100(k), g)
        }
        Mode::Custom => {
            if k < 2 {
                return Err(Error::ParameterDomain(format!("need at least two terminals, got {k}")));
            }
            let m = overrides.m.unwrap_or(1);
            let g = overrides.g.unwrap_or(3);
            let s = overrides.s.unwrap_or(g.saturating_sub(1).max(1));
            let l = overrides.l.unwrap_or(Threshold::integer(2 * m + 1));
            if m < 1 || s < 1 || g < 3 {
                return Err(Error::ParameterDomain(format!("custom mode needs M >= 1, S >= 1, g >= 3 (got M = {m}, S = {s}, g = {g})")));
            }
            (m, s, l, g)
        }
    };
    Ok(InstanceParams { k, m, s, l, g, mode, flags: PreconditionFlags::evaluate(k, m, s, &l, g) })
}

/// Paper instances put a terminal on every vertex of a cubic core; the
/// sub-terminal variant allows any core and any attachment subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Paper,
    SubTerminal,
}

/// `(G', G, T)` plus parameters. Immutable; distance rows from the
/// terminals are computed lazily once and shared.
#[derive(Debug, Clone)]
pub struct Instance {
    core: WeightedGraph,
    full: WeightedGraph,
    attachments: Vec<Vertex>,
    variant: Variant,
    params: InstanceParams,
    terminal_rows: OnceLock<Vec<Vec<Dist>>>,
}

fn attach_pendants(core: &WeightedGraph, attachments: &[Vertex], m: u64) -> Result<WeightedGraph> {
    let n = core.vertex_count();
    let pendants = attachments.iter().enumerate().map(|(i, &u)| (u, n + i, m));
    WeightedGraph::new(n + attachments.len(), core.edges().iter().copied().chain(pendants))
}

/// Builds the instance with a terminal on every core vertex. The core must be
/// a connected cubic unit-weight graph of girth at least `params.g`.
pub fn build_instance(core: WeightedGraph, params: InstanceParams) -> Result<Instance> {
    let n = core.vertex_count();
    if !core.is_regular(3) {
        return Err(Error::InvalidInstance("core is not 3-regular".into()));
    }
    build_with_attachments(core, (0..n).collect(), Variant::Paper, params)
}

/// Sub-terminal variant: terminals only on `attachments` (strictly
/// increasing core vertices). The core need not be cubic.
pub fn build_subterminal_instance(core: WeightedGraph, attachments: Vec<Vertex>, params: InstanceParams) -> Result<Instance> {
    build_with_attachments(core, attachments, Variant::SubTerminal, params)
}

fn build_with_attachments(
    core: WeightedGraph,
    attachments: Vec<Vertex>,
    variant: Variant,
    params: InstanceParams,
) -> Result<Instance> {
    if !attachments.windows(2).all(|w| w[0] < w[1]) || attachments.last().is_some_and(|&u| u >= core.vertex_count()) {
        return Err(Error::InvalidInstance("attachments must be strictly increasing core vertices".into()));
    }
    let full = attach_pendants(&core, &attachments, params.m)?;
    let inst = Instance::from_parts(core, full, attachments, variant, params);
    let report = validate_instance(&inst);
    if !report.passed() {
        let failed: Vec<_> = report.failures().map(|c| format!("{} ({})", c.name, c.detail)).collect();
        return Err(Error::InvalidInstance(failed.join("; ")));
    }
    Ok(inst)
}

impl Instance {
    /// Assembles an instance without checking anything; see
    /// [`validate_instance`].
    pub fn from_parts(
        core: WeightedGraph,
        full: WeightedGraph,
        attachments: Vec<Vertex>,
        variant: Variant,
        params: InstanceParams,
    ) -> Self {
        Instance { core, full, attachments, variant, params, terminal_rows: OnceLock::new() }
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn core(&self) -> &WeightedGraph {
        &self.core
    }

    pub fn full(&self) -> &WeightedGraph {
        &self.full
    }

    pub fn params(&self) -> &InstanceParams {
        &self.params
    }

    pub fn terminal_count(&self) -> usize {
        self.attachments.len()
    }

    pub fn attachments(&self) -> &[Vertex] {
        &self.attachments
    }

    pub fn attachment(&self, terminal: usize) -> Vertex {
        self.attachments[terminal]
    }

    /// Vertex id of terminal `i` in the full graph.
    pub fn terminal_vertex(&self, terminal: usize) -> Vertex {
        self.core.vertex_count() + terminal
    }

    /// Terminal attached to core vertex `u`, if any.
    pub fn terminal_at(&self, u: Vertex) -> Option<usize> {
        self.attachments.binary_search(&u).ok()
    }

    /// True when every core vertex carries a terminal.
    pub fn is_full_variant(&self) -> bool {
        self.attachments.len() == self.core.vertex_count()
    }

    fn rows(&self) -> &[Vec<Dist>] {
        self.terminal_rows.get_or_init(|| {
            (0..self.terminal_count())
                .into_par_iter()
                .map(|i| self.full.distances_from(self.terminal_vertex(i)))
                .collect()
        })
    }

    /// `dist_G(t_i, t_j)`.
    pub fn terminal_distance(&self, i: usize, j: usize) -> Dist {
        self.rows()[j][self.terminal_vertex(i)]
    }

    /// Distances from terminal `i` to every vertex of `G`.
    pub fn terminal_row(&self, i: usize) -> &[Dist] {
        &self.rows()[i]
    }

    /// Canonical `G`-shortest path from `t_i` to `t_j`.
    pub fn terminal_path(&self, i: usize, j: usize) -> Result<Path> {
        canonical_path_to(&self.full, self.terminal_vertex(i), self.terminal_vertex(j), &self.rows()[j])
    }

    /// Smallest distance between two distinct terminals (`Infinite` if `k < 2`).
    pub fn min_terminal_distance(&self) -> Dist {
        let k = self.terminal_count();
        (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).map(|(i, j)| self.terminal_distance(i, j)).min().unwrap_or(Dist::Infinite)
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            params: self.params,
            core: self.core.clone(),
            pendant_weight: self.full.weight(self.attachments.first().copied().unwrap_or(0), self.terminal_vertex(0)).unwrap_or(self.params.m),
            attachments: (self.variant == Variant::SubTerminal).then(|| self.attachments.clone()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("instance serialization cannot fail")
    }

    /// Parses an instance file without validating it.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        file.into_instance()
    }

    pub fn load(path: impl AsRef<FsPath>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<FsPath>) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}

/// On-disk instance: `{"params": {...}, "core": <graph>, "pendant_weight": M}`
/// plus `attachments` for the sub-terminal variant.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    pub params: InstanceParams,
    pub core: WeightedGraph,
    pub pendant_weight: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attachments: Option<Vec<Vertex>>,
}

impl InstanceFile {
    pub fn into_instance(self) -> Result<Instance> {
        let n = self.core.vertex_count();
        let variant = if self.attachments.is_some() { Variant::SubTerminal } else { Variant::Paper };
        let attachments = self.attachments.unwrap_or_else(|| (0..n).collect());
        if !attachments.windows(2).all(|w| w[0] < w[1]) || attachments.last().is_some_and(|&u| u >= n) {
            return Err(Error::InvalidInstance("attachments must be strictly increasing core vertices".into()));
        }
        let full = attach_pendants(&self.core, &attachments, self.pendant_weight)?;
        Ok(Instance::from_parts(self.core, full, attachments, variant, self.params))
    }
}

/// Checks every structural invariant of an instance.
pub fn validate_instance(inst: &Instance) -> ValidationReport {
    let mut report = ValidationReport::default();
    let core = inst.core();
    let full = inst.full();
    let n = core.vertex_count();
    let k = inst.terminal_count();
    let params = inst.params();

    report.push("terminal count", params.k == k as u128, format!("params.k = {}, terminals = {k}", params.k));
    if inst.variant() == Variant::Paper {
        report.push("terminal on every core vertex", inst.is_full_variant(), "");
        let bad: Vec<_> = (0..n).filter(|&u| core.degree(u) != 3).collect();
        report.push("core cubic", bad.is_empty(), if bad.is_empty() { String::new() } else { format!("vertices {bad:?} do not have degree 3") });
    }
    report.push("core unit weight", core.is_unit_weight(), "");
    report.push("core connected", core.is_connected(), "");

    let core_girth = girth(core);
    report.push("core girth", core_girth >= Dist::Finite(params.g), format!("girth {core_girth}, required {}", params.g));

    let extends = full.vertex_count() == n + k
        && full.edges().iter().filter(|&&(u, v, _)| u < n && v < n).copied().eq(core.edges().iter().copied());
    report.push("full graph extends core", extends, "");

    let mut pendant_problems = Vec::new();
    for t in 0..k.min(full.vertex_count().saturating_sub(n)) {
        let tv = inst.terminal_vertex(t);
        let nbrs = full.neighbors(tv);
        match nbrs {
            [(u, w)] if *u == inst.attachment(t) && *w == params.m => {}
            [(u, w)] => pendant_problems.push(format!("t{t} attached to {u} with weight {w}")),
            _ => pendant_problems.push(format!("t{t} has degree {}", nbrs.len())),
        }
    }
    report.push("pendant terminals", pendant_problems.is_empty(), pendant_problems.join(", "));

    let degree_ok = (0..n.min(full.vertex_count())).all(|u| full.degree(u) == core.degree(u) + usize::from(inst.terminal_at(u).is_some()));
    report.push("degrees in G", degree_ok, if inst.is_full_variant() { "every core vertex has degree 4" } else { "" });

    let expected_edges = core.edge_count() + k;
    report.push("edge count", full.edge_count() == expected_edges, format!("|E(G)| = {}, expected {expected_edges}", full.edge_count()));
    report
}
