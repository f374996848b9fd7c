//! The removal loop: sample a uniform `K_k`, delete its edges, repeat until
//! the graph is `K_k`-free or a density floor is reached.
//!
//! A fixed random panel of `m`-sets is tracked along the way. Panel `R`
//! values are refreshed after every step in which the removed clique could
//! have changed them, so the per-step drop diagnostics are exact.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clique_index::{peak_storage_bytes, CliqueIndex, RemovalDelta};
use crate::combinatorics::{binomial, pairs, subsets_of_size};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::rng::{self, SimRng};
use crate::trajectory::p_of;

pub const DEFAULT_PANEL_SIZE: usize = 200;
pub const DEFAULT_MEMORY_BUDGET: u64 = 8 << 30;
/// Exact extreme scans enumerate every `m`-subset; refused above this `n`.
pub const FULL_EXTREMES_MAX_N: usize = 60;

const PROCESS_STREAM: u64 = 0;
const PANEL_STREAM: u64 = 1;
const THINNING_STREAM: u64 = 2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum StopRule {
    #[default]
    AtHittingTime,
    AtPFloor { p_floor: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n: usize,
    pub k: usize,
    #[serde(default)]
    pub seed: u64,
    /// Steps between checkpoints; `None` picks about 400 per run.
    #[serde(default)]
    pub checkpoint_stride: Option<u64>,
    /// Tracked sets per `m`; sizes missing from the map get the default.
    #[serde(default)]
    pub panel_sizes: BTreeMap<usize, usize>,
    #[serde(default)]
    pub stop: StopRule,
    #[serde(default)]
    pub record_full_extremes: bool,
    /// Approximation mode: thin `K_n` to this edge density before the
    /// first step. Not the process as defined; off unless set.
    #[serde(default)]
    pub start_density: Option<f64>,
    #[serde(default = "default_budget")]
    pub memory_budget: u64,
}

fn default_budget() -> u64 {
    DEFAULT_MEMORY_BUDGET
}

impl RunConfig {
    pub fn new(n: usize, k: usize, seed: u64) -> Self {
        RunConfig {
            n,
            k,
            seed,
            checkpoint_stride: None,
            panel_sizes: BTreeMap::new(),
            stop: StopRule::AtHittingTime,
            record_full_extremes: false,
            start_density: None,
            memory_budget: DEFAULT_MEMORY_BUDGET,
        }
    }

    pub fn with_p_floor(mut self, p_floor: f64) -> Self {
        self.stop = StopRule::AtPFloor { p_floor };
        self
    }

    pub fn with_panel_size(mut self, size: usize) -> Self {
        self.panel_sizes = (2..self.k).map(|m| (m, size)).collect();
        self
    }

    pub fn with_stride(mut self, stride: u64) -> Self {
        self.checkpoint_stride = Some(stride);
        self
    }

    pub fn panel_size(&self, m: usize) -> usize {
        self.panel_sizes.get(&m).copied().unwrap_or(DEFAULT_PANEL_SIZE)
    }

    /// `max(1, floor(n²/(k(k-1)·400)))` unless overridden.
    pub fn stride(&self) -> u64 {
        self.checkpoint_stride
            .unwrap_or_else(|| ((self.n * self.n) / (self.k * (self.k - 1) * 400)).max(1) as u64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 3 || self.n < self.k {
            return Err(Error::InvalidOrder { k: self.k, n: self.n });
        }
        if self.checkpoint_stride == Some(0) {
            return Err(Error::InvalidConfig("checkpoint stride must be at least 1".into()));
        }
        if let StopRule::AtPFloor { p_floor } = self.stop {
            if !(p_floor > 0.0 && p_floor <= 1.0) {
                return Err(Error::InvalidConfig(format!("p_floor {p_floor} not in (0, 1]")));
            }
        }
        if let Some(d) = self.start_density {
            if !(d > 0.0 && d <= 1.0) {
                return Err(Error::InvalidConfig(format!("start density {d} not in (0, 1]")));
            }
        }
        if self.record_full_extremes && self.n > FULL_EXTREMES_MAX_N {
            return Err(Error::InvalidConfig(format!(
                "exact extreme scans are limited to n <= {FULL_EXTREMES_MAX_N}"
            )));
        }
        if let Some((&m, _)) = self.panel_sizes.iter().find(|(&m, _)| m < 2 || m >= self.k) {
            return Err(Error::InvalidConfig(format!("panel size given for m = {m}, need 2 <= m < k")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PanelStat {
    pub m: usize,
    pub mean: f64,
    pub min: u64,
    pub max: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extremes {
    pub m: usize,
    pub min: u64,
    pub max: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub i: u64,
    pub p: f64,
    pub edges: u64,
    pub q_k: u64,
    pub panel: Vec<PanelStat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<Vec<Extremes>>,
}

impl Checkpoint {
    pub fn panel_stat(&self, m: usize) -> Option<&PanelStat> {
        self.panel.iter().find(|s| s.m == m)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcessTrace {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub stop: StopRule,
    pub start_density: Option<f64>,
    pub checkpoints: Vec<Checkpoint>,
    /// First step at which no `K_k` remains; `None` if stopped earlier.
    pub hitting_time: Option<u64>,
    pub steps: u64,
    /// `|E(M)|`, present only when the run reached the hitting time.
    pub final_edge_count: Option<u64>,
    pub edges_at_stop: u64,
    pub max_step_drop_q: u64,
    /// Largest one-step decrease of any panel `R`, by `m`.
    pub max_step_drop_r: BTreeMap<usize, u64>,
    /// Per-step invariant failures (edge count formula, `Q_k` drop >= 1,
    /// panel `R` non-increasing). Always zero for a correct engine.
    pub invariant_violations: u64,
}

impl ProcessTrace {
    pub fn last(&self) -> &Checkpoint {
        self.checkpoints.last().expect("a trace always has its initial checkpoint")
    }

    pub fn summary(&self) -> TraceSummary {
        TraceSummary {
            n: self.n,
            k: self.k,
            seed: self.seed,
            hitting_time: self.hitting_time,
            final_edges: self.final_edge_count,
            edges_at_stop: self.edges_at_stop,
            steps: self.steps,
            p_at_stop: self.last().p,
            q_at_stop: self.last().q_k,
            max_step_drop_q: self.max_step_drop_q,
            max_step_drop_r: self.max_step_drop_r.clone(),
            checkpoints: self.checkpoints.len(),
            invariant_violations: self.invariant_violations,
            start_density: self.start_density,
        }
    }

    /// The whole trace, checkpoints included, as JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace is plain data")
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let ms: Vec<usize> = (2..self.k).collect();
        let has_exact = self.checkpoints.iter().any(|c| c.exact.is_some());
        write!(out, "i,p,edges,q_k")?;
        for m in &ms {
            write!(out, ",r_mean_m{m},r_min_m{m},r_max_m{m}")?;
        }
        if has_exact {
            for m in &ms {
                write!(out, ",r_exact_min_m{m},r_exact_max_m{m}")?;
            }
        }
        writeln!(out)?;
        for c in &self.checkpoints {
            write!(out, "{},{},{},{}", c.i, c.p, c.edges, c.q_k)?;
            for &m in &ms {
                match c.panel_stat(m) {
                    Some(s) => write!(out, ",{},{},{}", s.mean, s.min, s.max)?,
                    None => write!(out, ",,,")?,
                }
            }
            if let Some(ex) = &c.exact {
                for e in ex {
                    write!(out, ",{},{}", e.min, e.max)?;
                }
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Per-run JSON summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    #[serde(rename = "M")]
    pub hitting_time: Option<u64>,
    pub final_edges: Option<u64>,
    pub edges_at_stop: u64,
    pub steps: u64,
    pub p_at_stop: f64,
    pub q_at_stop: u64,
    pub max_step_drop_q: u64,
    pub max_step_drop_r: BTreeMap<usize, u64>,
    pub checkpoints: usize,
    pub invariant_violations: u64,
    pub start_density: Option<f64>,
}

/// One tracked `m`-set and its current `R` value.
#[derive(Clone, Debug)]
struct Tracked {
    set: VertexSet,
    r: u64,
}

#[derive(Clone, Debug)]
pub struct StepRecord {
    pub removed: VertexSet,
    pub delta: RemovalDelta,
}

/// A run in progress. [`run`] drives it to completion; tests step it by hand.
pub struct Process {
    cfg: RunConfig,
    graph: Graph,
    index: CliqueIndex,
    rng: SimRng,
    panel: BTreeMap<usize, Vec<Tracked>>,
    start_edges: u64,
    step: u64,
    stride: u64,
    trace: ProcessTrace,
}

impl Process {
    pub fn new(cfg: RunConfig) -> Result<Self> {
        cfg.validate()?;
        let (n, k) = (cfg.n, cfg.k);
        let mut graph = Graph::new_complete(n)?;
        if let Some(d) = cfg.start_density {
            let mut thin = rng::stream(cfg.seed, THINNING_STREAM);
            for a in 0..n as u32 {
                for b in a + 1..n as u32 {
                    if thin.random::<f64>() >= d {
                        graph.remove_edge(a, b)?;
                    }
                }
            }
        }
        let q0 = graph.count_k_cliques(k);
        let needed = peak_storage_bytes(n, k, q0)?;
        if needed > u128::from(cfg.memory_budget) {
            return Err(Error::MemoryBudget { needed, budget: cfg.memory_budget });
        }
        let index = CliqueIndex::build(&graph, k)?;
        let panel = draw_panel(&cfg, &graph);
        let stride = cfg.stride();
        let trace = ProcessTrace {
            n,
            k,
            seed: cfg.seed,
            stop: cfg.stop,
            start_density: cfg.start_density,
            checkpoints: Vec::new(),
            hitting_time: None,
            steps: 0,
            final_edge_count: None,
            edges_at_stop: graph.edge_count(),
            max_step_drop_q: 0,
            max_step_drop_r: (2..k).map(|m| (m, 0)).collect(),
            invariant_violations: 0,
        };
        let mut p = Process {
            rng: rng::stream(cfg.seed, PROCESS_STREAM),
            start_edges: graph.edge_count(),
            cfg,
            graph,
            index,
            panel,
            step: 0,
            stride,
            trace,
        };
        p.record_checkpoint();
        if p.index.is_empty() {
            p.trace.hitting_time = Some(0);
        }
        Ok(p)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn index(&self) -> &CliqueIndex {
        &self.index
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn panel_sets(&self, m: usize) -> Vec<VertexSet> {
        self.panel.get(&m).map(|v| v.iter().map(|t| t.set.clone()).collect()).unwrap_or_default()
    }

    /// Current edge density. In approximation mode this is the density
    /// implied by the edge count, `(2|E| + n)/n²`.
    pub fn density(&self) -> f64 {
        if self.cfg.start_density.is_some() {
            let n = self.cfg.n as f64;
            (2.0 * self.graph.edge_count() as f64 + n) / (n * n)
        } else {
            p_of(self.step as f64, self.cfg.n, self.cfg.k).unwrap_or(0.0)
        }
    }

    pub fn is_finished(&self) -> bool {
        if self.index.is_empty() {
            return true;
        }
        match self.cfg.stop {
            StopRule::AtHittingTime => false,
            StopRule::AtPFloor { p_floor } => self.density() <= p_floor,
        }
    }

    /// Performs one removal; `None` once the stop rule holds.
    pub fn step(&mut self) -> Result<Option<StepRecord>> {
        if self.is_finished() {
            return Ok(None);
        }
        let k = self.cfg.k;
        let removed = self.index.sample_uniform(&self.graph, &mut self.rng)?;
        let touched = self.touched_panel_sets(&removed);
        let delta = self.index.apply_removal(&mut self.graph, &removed)?;
        self.step += 1;

        let drop = delta.total();
        self.trace.max_step_drop_q = self.trace.max_step_drop_q.max(drop);
        if drop < 1 {
            self.trace.invariant_violations += 1;
        }
        if self.graph.edge_count() + pairs(k) as u64 * self.step != self.start_edges {
            self.trace.invariant_violations += 1;
        }
        for (m, j) in touched {
            let t = &mut self.panel.get_mut(&m).expect("panel size")[j];
            let fresh = self.graph.count_r(&t.set, k)?;
            if fresh > t.r {
                self.trace.invariant_violations += 1;
            } else {
                let e = self.trace.max_step_drop_r.entry(m).or_insert(0);
                *e = (*e).max(t.r - fresh);
            }
            t.r = fresh;
        }

        let done = self.is_finished();
        if self.index.is_empty() {
            self.trace.hitting_time = Some(self.step);
        }
        if done || self.step.is_multiple_of(self.stride) {
            self.record_checkpoint();
        }
        Ok(Some(StepRecord { removed, delta }))
    }

    /// Panel sets whose `R` can change when `u` is removed: `u` meets the
    /// common neighborhood `N_U` and either has a vertex in `U` or two in `N_U`.
    fn touched_panel_sets(&self, u: &[u32]) -> Vec<(usize, usize)> {
        let g = &self.graph;
        let mut out = Vec::new();
        for (&m, sets) in &self.panel {
            for (j, t) in sets.iter().enumerate() {
                let mut in_u = 0;
                let mut in_nbhd = 0;
                for &w in u {
                    if t.set.binary_search(&w).is_ok() {
                        in_u += 1;
                    } else if t.set.iter().all(|&x| g.has_edge(x, w)) {
                        in_nbhd += 1;
                    }
                }
                if in_nbhd >= 1 && (in_u >= 1 || in_nbhd >= 2) {
                    out.push((m, j));
                }
            }
        }
        out
    }

    fn record_checkpoint(&mut self) {
        if self.trace.checkpoints.last().is_some_and(|c| c.i == self.step) {
            return;
        }
        let panel = self
            .panel
            .iter()
            .filter(|(_, sets)| !sets.is_empty())
            .map(|(&m, sets)| {
                let sum: u64 = sets.iter().map(|t| t.r).sum();
                PanelStat {
                    m,
                    mean: sum as f64 / sets.len() as f64,
                    min: sets.iter().map(|t| t.r).min().unwrap_or(0),
                    max: sets.iter().map(|t| t.r).max().unwrap_or(0),
                }
            })
            .collect();
        let exact = self
            .cfg
            .record_full_extremes
            .then(|| exact_extremes(&self.graph, self.cfg.k));
        self.trace.checkpoints.push(Checkpoint {
            i: self.step,
            p: self.density(),
            edges: self.graph.edge_count(),
            q_k: self.index.len(),
            panel,
            exact,
        });
    }

    pub fn finish(mut self) -> ProcessTrace {
        self.record_checkpoint();
        self.trace.steps = self.step;
        self.trace.edges_at_stop = self.graph.edge_count();
        if self.trace.hitting_time.is_some() {
            self.trace.final_edge_count = Some(self.graph.edge_count());
        }
        self.trace
    }
}

fn draw_panel(cfg: &RunConfig, g: &Graph) -> BTreeMap<usize, Vec<Tracked>> {
    let mut rng = rng::stream(cfg.seed, PANEL_STREAM);
    let n = cfg.n;
    let mut panel = BTreeMap::new();
    for m in 2..cfg.k {
        let avail = binomial(n as u64, m as u64).unwrap_or(u64::MAX);
        let want = (cfg.panel_size(m) as u64).min(avail) as usize;
        let mut seen = HashSet::with_capacity(want);
        let mut sets = Vec::with_capacity(want);
        while sets.len() < want {
            let mut pick = Vec::with_capacity(m);
            while pick.len() < m {
                let v = rng.random_range(0..n as u32);
                if !pick.contains(&v) {
                    pick.push(v);
                }
            }
            let set = VertexSet::new(pick).expect("distinct by construction");
            if seen.insert(set.clone()) {
                let r = g.count_r(&set, cfg.k).expect("panel set sizes are in range");
                sets.push(Tracked { set, r });
            }
        }
        panel.insert(m, sets);
    }
    panel
}

/// Exact `R` values of the panel sets, recomputed from the graph.
pub fn panel_r_values(g: &Graph, panel: &[VertexSet], k: usize) -> Result<Vec<u64>> {
    panel.iter().map(|u| g.count_r(u, k)).collect()
}

/// Minimum and maximum of `R_{k,U}` over every `m`-subset, `m` in `2..k`.
pub fn exact_extremes(g: &Graph, k: usize) -> Vec<Extremes> {
    let vertices: Vec<u32> = (0..g.n() as u32).collect();
    (2..k)
        .map(|m| {
            let mut min = u64::MAX;
            let mut max = 0;
            for s in subsets_of_size(&vertices, m) {
                let r = g.count_r(&s, k).expect("sizes in range");
                min = min.min(r);
                max = max.max(r);
            }
            Extremes { m, min, max }
        })
        .collect()
}

pub fn run(cfg: RunConfig) -> Result<ProcessTrace> {
    let mut p = Process::new(cfg)?;
    while p.step()?.is_some() {}
    Ok(p.finish())
}

pub fn hitting_time(trace: &ProcessTrace) -> Option<u64> {
    trace.hitting_time
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k6_single_step() {
        for seed in 0..50 {
            let t = run(RunConfig::new(6, 4, seed)).unwrap();
            assert_eq!(t.hitting_time, Some(1));
            assert_eq!(t.final_edge_count, Some(9));
            assert_eq!(t.max_step_drop_q, 15);
            assert_eq!(t.invariant_violations, 0);
        }
    }

    #[test]
    fn single_clique_graph() {
        let t = run(RunConfig::new(5, 5, 3)).unwrap();
        assert_eq!(hitting_time(&t), Some(1));
        assert_eq!(t.final_edge_count, Some(0));
    }

    #[test]
    fn same_seed_same_trace() {
        let a = run(RunConfig::new(20, 4, 77)).unwrap();
        let b = run(RunConfig::new(20, 4, 77)).unwrap();
        assert_eq!(a, b);
        let c = run(RunConfig::new(20, 4, 78)).unwrap();
        assert_ne!(a.checkpoints, c.checkpoints);
    }

    #[test]
    fn panel_values_on_k6() {
        let g = Graph::new_complete(6).unwrap();
        let panel = vec![VertexSet::new(vec![0, 1]).unwrap()];
        assert_eq!(panel_r_values(&g, &panel, 4).unwrap(), vec![6]);
        let triple = vec![VertexSet::new(vec![0, 1, 2]).unwrap()];
        assert_eq!(panel_r_values(&g, &triple, 4).unwrap(), vec![3]);
        let mut g = g;
        g.remove_clique_edges(&[0, 2, 4, 5]).unwrap();
        // {0,1}: N = {2,3,4,5} minus 2,4,5 via vertex 0 -> {3}; no pair left
        assert_eq!(panel_r_values(&g, &panel, 4).unwrap(), vec![0]);
    }

    #[test]
    fn panel_values_after_the_k6_step() {
        // whichever K_4 is removed, a pair inside it keeps exactly the
        // complementary pair, which is the only surviving K_2 extension
        for seed in 0..20 {
            let mut p = Process::new(RunConfig::new(6, 4, seed)).unwrap();
            let rec = p.step().unwrap().unwrap();
            let pair = VertexSet::new(rec.removed[..2].to_vec()).unwrap();
            assert_eq!(panel_r_values(p.graph(), &[pair], 4).unwrap(), vec![1]);
        }
    }

    #[test]
    fn stop_at_p_floor() {
        let t = run(RunConfig::new(100, 4, 5).with_p_floor(0.9)).unwrap();
        assert_eq!(hitting_time(&t), None);
        // ceil(0.1 * 100² / 12) = 84
        assert_eq!(t.steps, 84);
        assert_eq!(t.last().i, 84);
        assert!(t.final_edge_count.is_none());
    }

    #[test]
    fn per_step_invariants_and_checkpoint_exactness() {
        let cfg = RunConfig::new(30, 4, 11).with_stride(3).with_panel_size(25);
        let mut p = Process::new(cfg).unwrap();
        let mut last_q = p.index().len();
        while let Some(rec) = p.step().unwrap() {
            let q = p.index().len();
            assert_eq!(last_q - q, rec.delta.total());
            assert!(rec.delta.total() >= 1);
            last_q = q;
            for m in 2..4 {
                let sets = p.panel_sets(m);
                let fresh = panel_r_values(p.graph(), &sets, 4).unwrap();
                let cached: Vec<u64> = p.panel[&m].iter().map(|t| t.r).collect();
                assert_eq!(fresh, cached);
            }
        }
        let t = p.finish();
        assert_eq!(t.invariant_violations, 0);
        for c in &t.checkpoints {
            assert_eq!(c.edges, 435 - 6 * c.i);
        }
        assert!(t.checkpoints.windows(2).all(|w| w[0].i < w[1].i && w[0].q_k >= w[1].q_k));
    }

    #[test]
    fn full_extremes_small_n() {
        let mut cfg = RunConfig::new(12, 4, 2).with_stride(1);
        cfg.record_full_extremes = true;
        let t = run(cfg).unwrap();
        let first = t.checkpoints[0].exact.as_ref().unwrap();
        assert_eq!(first[0], Extremes { m: 2, min: 45, max: 45 });
        assert_eq!(first[1], Extremes { m: 3, min: 9, max: 9 });
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let header = String::from_utf8(buf).unwrap().lines().next().unwrap().to_string();
        assert!(header.ends_with("r_exact_min_m2,r_exact_max_m2,r_exact_min_m3,r_exact_max_m3"));

        let mut too_big = RunConfig::new(61, 4, 2);
        too_big.record_full_extremes = true;
        assert!(run(too_big).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(run(RunConfig::new(3, 4, 0)).is_err());
        assert!(run(RunConfig::new(10, 2, 0)).is_err());
        assert!(run(RunConfig::new(10, 4, 0).with_stride(0)).is_err());
        assert!(run(RunConfig::new(10, 4, 0).with_p_floor(0.0)).is_err());
        let mut bad = RunConfig::new(10, 4, 0);
        bad.panel_sizes.insert(4, 3);
        assert!(run(bad).is_err());
    }

    #[test]
    fn memory_guard_rejects() {
        let mut cfg = RunConfig::new(200, 4, 0);
        cfg.memory_budget = 1 << 20;
        assert!(matches!(run(cfg), Err(Error::MemoryBudget { .. })));
    }

    #[test]
    fn default_stride() {
        assert_eq!(RunConfig::new(300, 4, 0).stride(), 18);
        assert_eq!(RunConfig::new(20, 4, 0).stride(), 1);
    }

    #[test]
    fn approximation_mode_starts_thinned() {
        let mut cfg = RunConfig::new(60, 4, 4).with_p_floor(0.2);
        cfg.start_density = Some(0.5);
        let t = run(cfg).unwrap();
        let p0 = t.checkpoints[0].p;
        assert!((p0 - 0.5).abs() < 0.05, "start density {p0}");
        assert_eq!(t.invariant_violations, 0);
        assert_eq!(t.start_density, Some(0.5));
    }

    #[test]
    fn csv_and_summary_shape() {
        let t = run(RunConfig::new(20, 4, 1)).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "i,p,edges,q_k,r_mean_m2,r_min_m2,r_max_m2,r_mean_m3,r_min_m3,r_max_m3"
        );
        assert_eq!(text.lines().count(), t.checkpoints.len() + 1);
        let json = serde_json::to_value(t.summary()).unwrap();
        assert_eq!(json["M"].as_u64(), t.hitting_time);
        assert_eq!(json["n"], 20);
    }
}
