//! Seeded multi-trial runs, scoring against the envelopes, and the fit of
//! the final edge count against `n`.
//!
//! Trials are independent and each gets a seed split from the master seed,
//! so the report is the same under any scheduling. With the `parallel`
//! feature trials run on rayon; [`Exec::Sequential`] (or building without
//! the feature) runs them in order on the calling thread.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::process::{run, ProcessTrace, RunConfig, StopRule, TraceSummary};
use crate::rng::trial_seed;
use crate::trajectory::{envelopes, q_traj, r_traj, residuals, TrajectoryParams};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

/// Maps `f` over `0..count`, in parallel when asked and available. Output
/// order is always index order.
pub fn map_indexed<T, F>(count: usize, exec: Exec, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec == Exec::Parallel {
        use rayon::prelude::*;
        return (0..count).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..count).map(f).collect()
}

pub struct TrialOutcome {
    pub config: usize,
    pub trial: usize,
    pub seed: u64,
    pub result: Result<ProcessTrace>,
}

/// Runs `trials` copies of every config. The seed in each config is
/// replaced by one derived from `(master_seed, config index, trial)`.
pub fn run_trials(grid: &[RunConfig], trials: usize, master_seed: u64, exec: Exec) -> Vec<TrialOutcome> {
    map_indexed(grid.len() * trials, exec, |j| {
        let (config, trial) = (j / trials, j % trials);
        let seed = trial_seed(master_seed, config, trial);
        let mut cfg = grid[config].clone();
        cfg.seed = seed;
        TrialOutcome { config, trial, seed, result: run(cfg) }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleOptions {
    pub exec: Exec,
    pub lambda: f64,
    pub mu: f64,
    pub gamma: BTreeMap<usize, f64>,
    /// Envelope scoring covers checkpoints with `p >= p_floor`.
    pub p_floor: f64,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        EnsembleOptions { exec: Exec::Parallel, lambda: 1.0, mu: 2.0, gamma: BTreeMap::new(), p_floor: 0.3 }
    }
}

impl EnsembleOptions {
    pub fn params(&self, k: usize, n: usize) -> Result<TrajectoryParams> {
        let mut p = TrajectoryParams::defaults(k, n)?;
        p.lambda = self.lambda;
        p.mu = self.mu;
        for (&m, &g) in &self.gamma {
            if m >= 2 && m < k {
                p.gamma.insert(m, g);
            }
        }
        p.p_floor = self.p_floor;
        p.validate()?;
        Ok(p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub summary: Option<TraceSummary>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub config: RunConfig,
    pub n: usize,
    pub k: usize,
    pub trials: usize,
    pub errors: usize,
    /// Trials that ran to the hitting time.
    pub completed: usize,
    pub mean_final_edges: Option<f64>,
    pub median_final_edges: Option<f64>,
    pub mean_final_edges_over_n2: Option<f64>,
    pub mean_hitting_time: Option<f64>,
    pub max_step_drop_q: u64,
    pub invariant_violations: u64,
    pub concentration: Option<ConcentrationScore>,
    /// Why concentration is absent, when it is.
    pub concentration_note: Option<String>,
    pub records: Vec<TrialRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub master_seed: u64,
    pub trials: usize,
    pub groups: Vec<GroupReport>,
    /// Pooled over every group with `k >= 4`.
    pub envelope_hit_rate: Option<f64>,
    pub envelope_hit_rate_undefined: bool,
    pub fitted_exponent: Option<ExponentFit>,
    pub fit_error: Option<String>,
    pub note: String,
}

impl EnsembleReport {
    /// Pretty JSON; byte-identical for identical inputs.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is plain data")
    }
}

pub const SCALE_NOTE: &str = "envelope widths are asymptotic; at these n they are not expected to hold literally, \
see the relative deviation profile";

pub fn run_ensemble(grid: &[RunConfig], trials: usize, master_seed: u64) -> Result<EnsembleReport> {
    run_ensemble_with(grid, trials, master_seed, &EnsembleOptions::default())
}

pub fn run_ensemble_with(grid: &[RunConfig], trials: usize, master_seed: u64, opts: &EnsembleOptions) -> Result<EnsembleReport> {
    for cfg in grid {
        cfg.validate()?;
    }
    let outcomes = run_trials(grid, trials, master_seed, opts.exec);
    Ok(build_report(grid, trials, master_seed, outcomes, opts))
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn median(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let h = s.len() / 2;
    Some(if s.len() % 2 == 1 { s[h] } else { 0.5 * (s[h - 1] + s[h]) })
}

pub fn build_report(
    grid: &[RunConfig],
    trials: usize,
    master_seed: u64,
    outcomes: Vec<TrialOutcome>,
    opts: &EnsembleOptions,
) -> EnsembleReport {
    let mut by_config: Vec<Vec<TrialOutcome>> = grid.iter().map(|_| Vec::new()).collect();
    for o in outcomes {
        by_config[o.config].push(o);
    }
    let mut groups = Vec::new();
    let mut hits = 0u64;
    let mut pairs = 0u64;
    let mut all_summaries = Vec::new();
    for (cfg, mut outs) in grid.iter().zip(by_config) {
        outs.sort_by_key(|o| o.trial);
        let traces: Vec<&ProcessTrace> = outs.iter().filter_map(|o| o.result.as_ref().ok()).collect();
        let summaries: Vec<TraceSummary> = traces.iter().map(|t| t.summary()).collect();
        let finals: Vec<f64> = summaries.iter().filter_map(|s| s.final_edges.map(|e| e as f64)).collect();
        let times: Vec<f64> = summaries.iter().filter_map(|s| s.hitting_time.map(|e| e as f64)).collect();
        let n2 = (cfg.n * cfg.n) as f64;

        let (concentration, concentration_note) = match opts.params(cfg.k, cfg.n) {
            Err(e) => (None, Some(e.to_string())),
            Ok(params) => match concentration_score(&traces, &params) {
                Ok(c) => {
                    hits += c.hits;
                    pairs += c.pairs;
                    (Some(c), None)
                }
                Err(e) => (None, Some(e.to_string())),
            },
        };
        let records = outs
            .iter()
            .map(|o| TrialRecord {
                trial: o.trial,
                seed: o.seed,
                summary: o.result.as_ref().ok().map(|t| t.summary()),
                error: o.result.as_ref().err().map(|e| e.to_string()),
            })
            .collect();
        groups.push(GroupReport {
            config: cfg.clone(),
            n: cfg.n,
            k: cfg.k,
            trials,
            errors: outs.len() - traces.len(),
            completed: finals.len(),
            mean_final_edges: mean(&finals),
            median_final_edges: median(&finals),
            mean_final_edges_over_n2: mean(&finals).map(|m| m / n2),
            mean_hitting_time: mean(&times),
            max_step_drop_q: summaries.iter().map(|s| s.max_step_drop_q).max().unwrap_or(0),
            invariant_violations: summaries.iter().map(|s| s.invariant_violations).sum(),
            concentration,
            concentration_note,
            records,
        });
        all_summaries.extend(summaries);
    }
    let (fitted_exponent, fit_error) = match exponent_fit(&all_summaries) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    EnsembleReport {
        master_seed,
        trials,
        groups,
        envelope_hit_rate: (pairs > 0).then(|| hits as f64 / pairs as f64),
        envelope_hit_rate_undefined: pairs == 0,
        fitted_exponent,
        fit_error,
        note: SCALE_NOTE.to_string(),
    }
}

/// Hit counts and relative deviations for one observable in one p-bucket.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BucketStat {
    pub p_low: f64,
    pub p_high: f64,
    pub checkpoints: u64,
    pub inside: u64,
    pub hit_rate: f64,
    pub mean_rel_dev: f64,
    pub max_rel_dev: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualExtremes {
    /// Largest `U` (should stay below 0).
    pub max_u: f64,
    /// Smallest `L` (should stay above 0).
    pub min_l: f64,
    /// Largest `Z_m`, from the panel maximum of `R`.
    pub max_z: BTreeMap<usize, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationScore {
    pub n: usize,
    pub k: usize,
    pub traces: usize,
    pub p_floor: f64,
    pub hits: u64,
    pub pairs: u64,
    pub hit_rate: f64,
    /// Observable name (`"Q"`, `"R2"`, ...) to per-bucket statistics, buckets
    /// of width 0.05 from `p = 1` down to `p_floor`. An `R` checkpoint is
    /// inside when the whole panel range is inside the band; its relative
    /// deviation uses the panel mean.
    pub observables: BTreeMap<String, Vec<BucketStat>>,
    pub max_residuals: ResidualExtremes,
}

const BUCKET: f64 = 0.05;

fn bucket_of(p: f64) -> usize {
    (((1.0 - p) / BUCKET).floor().max(0.0)) as usize
}

/// Envelope hit rates and relative deviations over checkpoints with
/// `p >= params.p_floor`.
pub fn concentration_score(traces: &[&ProcessTrace], params: &TrajectoryParams) -> Result<ConcentrationScore> {
    let first = traces.first().ok_or(Error::EmptyInput)?;
    let (n, k) = (first.n, first.k);
    if traces.iter().any(|t| t.n != n || t.k != k) {
        return Err(Error::InvalidConfig("traces must share (n, k)".into()));
    }
    if params.n != n || params.k != k {
        return Err(Error::InvalidConfig(format!("params are for n = {}, k = {}", params.n, params.k)));
    }
    let buckets = bucket_of(params.p_floor) + 1;
    let mut names = vec!["Q".to_string()];
    names.extend((2..k).map(|m| format!("R{m}")));
    let mut acc: BTreeMap<String, Vec<(u64, u64, f64, f64)>> =
        names.iter().map(|s| (s.clone(), vec![(0, 0, 0.0, 0.0); buckets])).collect();
    let mut ext = ResidualExtremes {
        max_u: f64::NEG_INFINITY,
        min_l: f64::INFINITY,
        max_z: (2..k).map(|m| (m, f64::NEG_INFINITY)).collect(),
    };
    for t in traces {
        for c in t.checkpoints.iter().filter(|c| c.p >= params.p_floor) {
            let env = envelopes(params, c.p)?;
            let b = bucket_of(c.p).min(buckets - 1);
            let q = c.q_k as f64;
            let slot = &mut acc.get_mut("Q").expect("Q")[b];
            let dev = (q / env.q_traj - 1.0).abs();
            *slot = (slot.0 + 1, slot.1 + u64::from(q >= env.q_lower && q <= env.q_upper), slot.2 + dev, slot.3.max(dev));
            let mut r_max = Vec::new();
            for s in &c.panel {
                let band = env.band(s.m).expect("band for each m");
                let lo = band.traj - band.half_width;
                let hi = band.traj + band.half_width;
                let dev = (s.mean / band.traj - 1.0).abs();
                let inside = s.min as f64 >= lo && s.max as f64 <= hi;
                let slot = &mut acc.get_mut(&format!("R{}", s.m)).expect("R name")[b];
                *slot = (slot.0 + 1, slot.1 + u64::from(inside), slot.2 + dev, slot.3.max(dev));
                r_max.push((s.m, s.max as f64));
            }
            let res = residuals(params, c.p, q, &r_max)?;
            ext.max_u = ext.max_u.max(res.u);
            ext.min_l = ext.min_l.min(res.l);
            for (m, z) in res.z {
                let e = ext.max_z.entry(m).or_insert(f64::NEG_INFINITY);
                *e = e.max(z);
            }
        }
    }
    let (mut hits, mut pairs) = (0, 0);
    let observables = acc
        .into_iter()
        .map(|(name, v)| {
            let stats = v
                .into_iter()
                .enumerate()
                .filter(|(_, s)| s.0 > 0)
                .map(|(j, (cnt, ins, sum, max))| {
                    hits += ins;
                    pairs += cnt;
                    BucketStat {
                        p_low: (1.0 - BUCKET * (j + 1) as f64).max(params.p_floor),
                        p_high: 1.0 - BUCKET * j as f64,
                        checkpoints: cnt,
                        inside: ins,
                        hit_rate: ins as f64 / cnt as f64,
                        mean_rel_dev: sum / cnt as f64,
                        max_rel_dev: max,
                    }
                })
                .collect();
            (name, stats)
        })
        .collect();
    if pairs == 0 {
        return Err(Error::InsufficientData(format!("no checkpoint with p >= {}", params.p_floor)));
    }
    Ok(ConcentrationScore {
        n,
        k,
        traces: traces.len(),
        p_floor: params.p_floor,
        hits,
        pairs,
        hit_rate: hits as f64 / pairs as f64,
        observables,
        max_residuals: ext,
    })
}

/// Relative deviation from the trajectory of one checkpoint's `Q_k` and
/// panel-mean `R` values, `(q_dev, [(m, r_dev)])`.
pub fn relative_deviations(c: &crate::process::Checkpoint, n: usize, k: usize) -> (f64, Vec<(usize, f64)>) {
    let q = (c.q_k as f64 / q_traj(c.p, n, k) - 1.0).abs();
    let r = c.panel.iter().map(|s| (s.m, (s.mean / r_traj(c.p, n, k, s.m) - 1.0).abs())).collect();
    (q, r)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackingPass {
    pub checkpoints: u64,
    pub passing: u64,
    pub rate: f64,
    pub worst_q_dev: f64,
    pub worst_r_dev: f64,
}

/// Fraction of checkpoints with `p >= p_min` where `Q_k` is within
/// `q_tol` and every panel mean within `r_tol` of its trajectory, relatively.
pub fn tracking_pass_rate(traces: &[&ProcessTrace], p_min: f64, q_tol: f64, r_tol: f64) -> Result<TrackingPass> {
    let (mut total, mut pass) = (0u64, 0u64);
    let (mut wq, mut wr) = (0f64, 0f64);
    for t in traces {
        for c in t.checkpoints.iter().filter(|c| c.p >= p_min) {
            let (q, r) = relative_deviations(c, t.n, t.k);
            let r_worst = r.iter().map(|x| x.1).fold(0.0, f64::max);
            wq = wq.max(q);
            wr = wr.max(r_worst);
            total += 1;
            pass += u64::from(q <= q_tol && r_worst <= r_tol);
        }
    }
    if total == 0 {
        return Err(Error::InsufficientData(format!("no checkpoint with p >= {p_min}")));
    }
    Ok(TrackingPass { checkpoints: total, passing: pass, rate: pass as f64 / total as f64, worst_q_dev: wq, worst_r_dev: wr })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    /// 95% interval from Student's t with `points - 2` degrees of freedom.
    pub ci_low: f64,
    pub ci_high: f64,
    /// `(n, mean |E(M)|)` used in the fit.
    pub points: Vec<(usize, f64)>,
}

/// Least squares of `ln y` on `ln x`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < 3 {
        return Err(Error::InsufficientData(format!("{} distinct n, need 3", xs.len())));
    }
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(Error::InsufficientData("power-law fit needs positive values".into()));
    }
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let len = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / len;
    let my = ly.iter().sum::<f64>() / len;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let stderr = (sse / (len - 2.0) / sxx).sqrt();
    Ok((slope, intercept, stderr))
}

/// Fit of `ln(mean |E(M)|)` against `ln n` over the summaries that reached
/// the hitting time.
pub fn exponent_fit(summaries: &[TraceSummary]) -> Result<ExponentFit> {
    let mut by_n: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for s in summaries {
        if let Some(e) = s.final_edges {
            by_n.entry(s.n).or_default().push(e as f64);
        }
    }
    let points: Vec<(usize, f64)> = by_n.iter().map(|(&n, v)| (n, mean(v).expect("non-empty"))).collect();
    let xy: Vec<(f64, f64)> = points.iter().map(|&(n, y)| (n as f64, y)).collect();
    let (slope, intercept, stderr) = fit_power_law(&xy)?;
    let df = points.len() as f64 - 2.0;
    let t = StudentsT::new(0.0, 1.0, df)
        .map_err(|e| Error::InsufficientData(e.to_string()))?
        .inverse_cdf(0.975);
    Ok(ExponentFit { slope, intercept, stderr, ci_low: slope - t * stderr, ci_high: slope + t * stderr, points })
}

/// Default ensemble grid: one config per `n`, run to the hitting time.
pub fn grid_for(ns: &[usize], k: usize, template: &RunConfig) -> Vec<RunConfig> {
    ns.iter()
        .map(|&n| RunConfig { n, k, ..template.clone() })
        .collect()
}

/// Whether every config stops at the hitting time, so the fit is meaningful.
pub fn runs_to_hitting_time(grid: &[RunConfig]) -> bool {
    grid.iter().all(|c| c.stop == StopRule::AtHittingTime)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::binomial;

    #[test]
    fn k6_ensemble() {
        let report = run_ensemble(&[RunConfig::new(6, 4, 0)], 10, 42).unwrap();
        let g = &report.groups[0];
        assert_eq!(g.completed, 10);
        for r in &g.records {
            let s = r.summary.as_ref().unwrap();
            assert_eq!(s.final_edges, Some(9));
            assert_eq!(s.hitting_time, Some(1));
        }
        assert_eq!(g.mean_final_edges, Some(9.0));
        assert!(report.fitted_exponent.is_none());
        assert!(report.fit_error.is_some());
    }

    #[test]
    fn zero_trials() {
        let report = run_ensemble(&[RunConfig::new(6, 4, 0)], 0, 1).unwrap();
        assert!(report.envelope_hit_rate_undefined);
        assert!(report.envelope_hit_rate.is_none());
        assert_eq!(report.groups[0].completed, 0);
    }

    #[test]
    fn sequential_matches_parallel() {
        let grid = grid_for(&[12, 16], 4, &RunConfig::new(0, 4, 0));
        let seq = EnsembleOptions { exec: Exec::Sequential, ..Default::default() };
        let a = serde_json::to_string(&run_ensemble_with(&grid, 6, 9, &seq).unwrap()).unwrap();
        let b = serde_json::to_string(&run_ensemble(&grid, 6, 9).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn trial_errors_are_recorded() {
        let mut cfg = RunConfig::new(200, 4, 0);
        cfg.memory_budget = 1024;
        let outcomes = run_trials(&[cfg.clone()], 2, 0, Exec::Sequential);
        let report = build_report(&[cfg], 2, 0, outcomes, &EnsembleOptions::default());
        assert_eq!(report.groups[0].errors, 2);
        assert!(report.groups[0].records[0].error.is_some());
    }

    #[test]
    fn initial_relative_deviation() {
        let t = run(RunConfig::new(100, 4, 0).with_p_floor(0.99)).unwrap();
        let c = &t.checkpoints[0];
        let (q, _) = relative_deviations(c, 100, 4);
        let exact = (binomial(100, 4).unwrap() as f64 * 24.0 / 1e8 - 1.0).abs();
        assert!((q - exact).abs() < 1e-12);
        assert!((q - 0.0589).abs() < 1e-4);
    }

    #[test]
    fn concentration_requires_traces() {
        let params = TrajectoryParams::defaults(4, 50).unwrap();
        assert!(matches!(concentration_score(&[], &params), Err(Error::EmptyInput)));
        let t = run(RunConfig::new(50, 4, 3).with_p_floor(0.3)).unwrap();
        let c = concentration_score(&[&t], &params).unwrap();
        assert!(c.hit_rate >= 0.0 && c.hit_rate <= 1.0);
        assert_eq!(c.observables.len(), 3);
        assert!(c.observables["Q"].iter().all(|b| b.p_low >= 0.3));
    }

    #[test]
    fn power_law_fit() {
        let pts: Vec<(f64, f64)> = [10.0, 20.0, 40.0, 80.0].iter().map(|&n: &f64| (n, n.powf(1.9))).collect();
        let (slope, _, se) = fit_power_law(&pts).unwrap();
        assert!((slope - 1.9).abs() < 1e-9);
        assert!(se < 1e-9);
        assert!(fit_power_law(&[(10.0, 5.0), (10.0, 6.0)]).is_err());
        assert!(exponent_fit(&[]).is_err());
    }

    #[test]
    fn exponent_fit_on_summaries() {
        let grid = grid_for(&[10, 14, 18], 3, &RunConfig::new(0, 3, 0));
        let report = run_ensemble(&grid, 4, 5).unwrap();
        let fit = report.fitted_exponent.unwrap();
        assert_eq!(fit.points.len(), 3);
        assert!(fit.ci_low <= fit.slope && fit.slope <= fit.ci_high);
        assert!(report.envelope_hit_rate_undefined, "k = 3 has no envelopes");
    }
}
