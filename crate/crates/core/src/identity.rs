//! Exact brute-force checks of the counting identities behind the process
//! analysis: decompositions of `ΔQ_k` into `R` terms, expected one-step
//! changes, double counting, and the regroupings of the signed sum for the
//! number of cliques that destroy a given extension.
//!
//! Everything here is integer or rational. Alternating sums are exactly the
//! place where a float comparison would hide a sign error.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clique_index::CliqueIndex;
use crate::combinatorics::{binom_i64, subsets_of_size};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::process::{Process, RunConfig};
use crate::rng;

pub type Rational = BigRational;

fn rational(num: i128, den: u64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

fn sign(e: usize) -> i64 {
    if e.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Members of `set` selected by the bits of `mask`.
fn pick(set: &[u32], mask: u32) -> Vec<u32> {
    set.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &v)| v).collect()
}

fn intersect(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().copied().filter(|v| b.binary_search(v).is_ok()).collect()
}

/// Complete `m`-sets of `g`, lexicographic.
pub fn complete_sets(g: &Graph, m: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    g.for_each_clique_in(&g.common_row(&[]), m, &[], |c| out.push(c.to_vec()));
    out
}

/// `1_X · R_{k,X}`: the number of `K_k` containing `X`, zero when `|X| > k`.
fn covering(g: &Graph, x: &[u32], k: usize) -> i64 {
    if x.len() > k || !g.is_complete(x) {
        return 0;
    }
    g.count_r(x, k).expect("2 <= |X| <= k") as i64
}

fn check_pair(g: &Graph, u_k: &[u32], u_m: &[u32], k: usize) -> Result<()> {
    if u_k.len() != k {
        return Err(Error::SetSize { size: u_k.len(), min: k, max: k });
    }
    if !g.is_complete(u_k) {
        return Err(Error::NotComplete(u_k.to_vec()));
    }
    if u_m.len() < 2 {
        return Err(Error::SetSize { size: u_m.len(), min: 2, max: k });
    }
    if !u_m.iter().all(|v| u_k.contains(v)) {
        return Err(Error::Precondition(format!("{u_m:?} is not a subset of {u_k:?}")));
    }
    Ok(())
}

/// Number of current `K_k` meeting `u_k` in exactly `u_m`, by enumeration.
pub fn q_um(g: &Graph, u_k: &VertexSet, u_m: &VertexSet, k: usize) -> Result<u64> {
    check_pair(g, u_k, u_m, k)?;
    let cliques = g.enumerate_k_cliques(k)?;
    Ok(q_um_among(&cliques, u_k, u_m))
}

fn q_um_among(cliques: &[VertexSet], u_k: &[u32], u_m: &[u32]) -> u64 {
    cliques.iter().filter(|c| intersect(c, u_k) == u_m).count() as u64
}

/// The same count as an alternating sum of `R` over supersets of `u_m`
/// inside `u_k`.
pub fn q_um_via_inclusion_exclusion(g: &Graph, u_k: &VertexSet, u_m: &VertexSet, k: usize) -> Result<i64> {
    check_pair(g, u_k, u_m, k)?;
    let rest: Vec<u32> = u_k.iter().copied().filter(|v| u_m.binary_search(v).is_err()).collect();
    let mut total = 0i64;
    for mask in 0u32..1 << rest.len() {
        let t = pick(&rest, mask);
        let x = u_m.union(&t)?;
        total += sign(t.len()) * g.count_r(&x, k)? as i64;
    }
    Ok(total)
}

/// `Q_k(g) - Q_k(g - E(u_k))`, by recounting.
pub fn observed_delta_q(g: &Graph, u_k: &VertexSet, k: usize) -> Result<u64> {
    let mut after = g.clone();
    after.remove_clique_edges(u_k)?;
    Ok(g.count_k_cliques(k) - after.count_k_cliques(k))
}

/// Cliques destroyed by removing `u_k`, split by intersection size `m`
/// (index `m`, entries below 2 are zero): `Σ_{U_m ⊆ u_k} q_um`.
pub fn removal_decomposition(g: &Graph, u_k: &VertexSet, k: usize) -> Result<Vec<u64>> {
    check_pair(g, u_k, &u_k[..2], k)?;
    let cliques = g.enumerate_k_cliques(k)?;
    Ok(decomposition_among(&cliques, u_k, k))
}

fn decomposition_among(cliques: &[VertexSet], u_k: &[u32], k: usize) -> Vec<u64> {
    let mut by_m = vec![0u64; k + 1];
    for m in 2..=k {
        for u_m in subsets_of_size(u_k, m) {
            by_m[m] += q_um_among(cliques, u_k, &u_m);
        }
    }
    by_m
}

/// `ΔQ_k` from `R` values alone:
/// `Σ_{m=2}^{k-1} (-1)^m (m-1) Σ_{U_m ⊂ u_k} R_{k,U_m} + (-1)^k (k-1)`.
pub fn delta_q_via_r(g: &Graph, u_k: &VertexSet, k: usize) -> Result<i64> {
    check_pair(g, u_k, &u_k[..2], k)?;
    let mut total = sign(k) * (k as i64 - 1);
    for m in 2..k {
        let s: i64 = subsets_of_size(u_k, m)
            .iter()
            .map(|u| g.count_r(u, k).map(|r| r as i64))
            .sum::<Result<i64>>()?;
        total += sign(m) * (m as i64 - 1) * s;
    }
    Ok(total)
}

/// Both sides of `Σ_{j=2}^r (-1)^{r-j} C(r,j) = (-1)^r (r-1)`.
pub fn sign_identity(r: usize) -> (i64, i64) {
    let lhs = (2..=r).map(|j| sign(r - j) * binom_i64(r, j)).sum();
    (lhs, sign(r) * (r as i64 - 1))
}

/// Both sides of `C(k-m,2) + m(k-m) = C(k,2) - C(m,2)`.
pub fn coefficient_identity(k: usize, m: usize) -> (i64, i64) {
    let km = k - m;
    (binom_i64(km, 2) + (m * km) as i64, binom_i64(k, 2) - binom_i64(m, 2))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpectedDeltaQ {
    /// Mean of `-ΔQ_k` over all current cliques.
    pub exhaustive: Rational,
    /// The closed form in sums of `R²` over complete `m`-sets.
    pub formula: Rational,
}

/// `E[ΔQ_k]` for one uniform step from `g`, computed two ways.
pub fn expected_delta_q(g: &Graph, k: usize) -> Result<ExpectedDeltaQ> {
    let cliques = g.enumerate_k_cliques(k)?;
    let q = cliques.len() as u64;
    if q == 0 {
        return Err(Error::Terminated);
    }
    let mut drop_sum = 0i128;
    for c in &cliques {
        drop_sum += i128::from(observed_delta_q(g, c, k)?);
    }
    let exhaustive = rational(-drop_sum, q);

    let mut formula = rational(i128::from(-sign(k) * (k as i64 - 1)), 1);
    for m in 2..k {
        let sq: i128 = squares_sum(g, m, k)?;
        formula -= rational(i128::from(sign(m) * (m as i64 - 1)) * sq, q);
    }
    Ok(ExpectedDeltaQ { exhaustive, formula })
}

fn squares_sum(g: &Graph, m: usize, k: usize) -> Result<i128> {
    complete_sets(g, m)
        .iter()
        .map(|u| g.count_r(u, k).map(|r| i128::from(r) * i128::from(r)))
        .sum()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DoubleCounting {
    pub m: usize,
    /// `Σ_{U_m ∈ K_m} R_{k,U_m}`
    pub sum_r: u128,
    /// `C(k,m) · Q_k`
    pub binom_q: u128,
    /// `Σ_{U_k ∈ K_k} Σ_{U_m ⊂ U_k} R_{k,U_m}`
    pub clique_sum: u128,
    /// `Σ_{U_m ∈ K_m} R_{k,U_m}²`
    pub sum_r_squared: u128,
}

impl DoubleCounting {
    pub fn holds(&self) -> bool {
        self.sum_r == self.binom_q && self.clique_sum == self.sum_r_squared
    }
}

pub fn double_counting(g: &Graph, k: usize, m: usize) -> Result<DoubleCounting> {
    if m < 2 || m >= k {
        return Err(Error::SetSize { size: m, min: 2, max: k - 1 });
    }
    let mut sum_r = 0u128;
    let mut sum_r_squared = 0u128;
    for u in complete_sets(g, m) {
        let r = u128::from(g.count_r(&u, k)?);
        sum_r += r;
        sum_r_squared += r * r;
    }
    let cliques = g.enumerate_k_cliques(k)?;
    let mut clique_sum = 0u128;
    for c in &cliques {
        for u in subsets_of_size(c, m) {
            clique_sum += u128::from(g.count_r(&u, k)?);
        }
    }
    Ok(DoubleCounting {
        m,
        sum_r,
        binom_q: binom_i64(k, m) as u128 * cliques.len() as u128,
        clique_sum,
        sum_r_squared,
    })
}

/// Number of cliques whose removal would destroy the extension `u_c` of
/// `u_star`, computed four ways.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QDestroying {
    /// Cliques containing at least one relevant edge, by enumeration.
    pub brute: u64,
    /// Sum over the exact intersection `H` with `S = u_star ∪ u_c`.
    pub direct: i64,
    /// Double sum over `(h, z)`, grouped by `|H| = h` and `|T| = z`.
    pub double_sum: i64,
    /// The same terms regrouped by `x = h + z`.
    pub back_diagonal: i64,
    /// `double_sum` restricted to `h + z = x`, indexed by `x`.
    pub double_sum_by_x: Vec<i64>,
    /// The `x`-th back-diagonal term, indexed by `x`.
    pub back_diagonal_by_x: Vec<i64>,
}

impl QDestroying {
    pub fn agrees(&self) -> bool {
        let b = self.brute as i64;
        self.direct == b
            && self.double_sum == b
            && self.back_diagonal == b
            && self.double_sum_by_x == self.back_diagonal_by_x
    }
}

fn check_extension(g: &Graph, u_star: &[u32], u_c: &[u32], k: usize) -> Result<()> {
    let m = u_star.len();
    if m < 2 || m >= k {
        return Err(Error::SetSize { size: m, min: 2, max: k - 1 });
    }
    if u_c.len() != k - m {
        return Err(Error::SetSize { size: u_c.len(), min: k - m, max: k - m });
    }
    if !g.is_complete(u_c) {
        return Err(Error::NotComplete(u_c.to_vec()));
    }
    let nbhd = g.common_neighborhood(u_star)?;
    if !u_c.iter().all(|v| nbhd.binary_search(v).is_ok()) {
        return Err(Error::Precondition(format!("{u_c:?} is not inside the common neighborhood of {u_star:?}")));
    }
    Ok(())
}

/// Edges whose loss destroys `u_c` as an extension of `u_star`: those inside
/// `u_c` and those between `u_star` and `u_c`. Edges inside `u_star` do not
/// count, since `R` never asks `u_star` to be complete.
pub fn relevant_edges(u_star: &[u32], u_c: &[u32]) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for (i, &a) in u_c.iter().enumerate() {
        for &b in &u_c[i + 1..] {
            out.push((a, b));
        }
        for &s in u_star {
            out.push((a.min(s), a.max(s)));
        }
    }
    out.sort_unstable();
    out
}

pub fn q_destroying(g: &Graph, u_star: &VertexSet, u_c: &VertexSet, k: usize) -> Result<QDestroying> {
    check_extension(g, u_star, u_c, k)?;
    let cliques = g.enumerate_k_cliques(k)?;
    Ok(q_destroying_among(g, &cliques, u_star, u_c, k))
}

fn q_destroying_among(g: &Graph, cliques: &[VertexSet], u_star: &[u32], u_c: &[u32], k: usize) -> QDestroying {
    let edges = relevant_edges(u_star, u_c);
    let brute = cliques
        .iter()
        .filter(|c| edges.iter().any(|&(a, b)| c.binary_search(&a).is_ok() && c.binary_search(&b).is_ok()))
        .count() as u64;

    let s = VertexSet::new(u_star.iter().chain(u_c).copied().collect::<Vec<_>>()).expect("disjoint");
    let full = (1u32 << s.len()) - 1;
    let star_mask = (0..s.len()).filter(|&b| u_star.contains(&s[b])).fold(0u32, |a, b| a | 1 << b);
    let term: Vec<i64> = (0..=full).map(|x| if x.count_ones() < 2 { 0 } else { covering(g, &pick(&s, x), k) }).collect();

    let mut direct = 0;
    for h in 0..=full {
        if h.count_ones() < 2 || h & !star_mask == 0 {
            continue;
        }
        let rest = full & !h;
        // iterate over subsets t of rest
        let mut t = rest;
        loop {
            direct += sign(t.count_ones() as usize) * term[(h | t) as usize];
            if t == 0 {
                break;
            }
            t = (t - 1) & rest;
        }
    }

    let zeta = |x: u32| (x & star_mask).count_ones() as usize;
    let mut double_sum_by_x = vec![0i64; k + 1];
    for h in 2..=k {
        for z in 0..=k - h {
            for x in (0..=full).filter(|x| x.count_ones() as usize == h + z) {
                let coef = binom_i64(h + z, h) - binom_i64(zeta(x), h);
                double_sum_by_x[h + z] += coef * sign(z) * term[x as usize];
            }
        }
    }
    let mut back_diagonal_by_x = vec![0i64; k + 1];
    for xs in 2..=k {
        for x in (0..=full).filter(|x| x.count_ones() as usize == xs) {
            let coef: i64 = (2..=xs).map(|s| sign(xs - s) * (binom_i64(xs, s) - binom_i64(zeta(x), s))).sum();
            back_diagonal_by_x[xs] += coef * term[x as usize];
        }
    }
    QDestroying {
        brute,
        direct,
        double_sum: double_sum_by_x.iter().sum(),
        back_diagonal: back_diagonal_by_x.iter().sum(),
        double_sum_by_x,
        back_diagonal_by_x,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpectedDeltaR {
    /// `-(1/Q_k) Σ_{u_c} q_destroying(u_star, u_c)`
    pub formula: Rational,
    /// Mean one-step change of `R_{k,u_star}` over all current cliques.
    pub exhaustive: Rational,
}

pub fn expected_delta_r(g: &Graph, u_star: &VertexSet, k: usize) -> Result<ExpectedDeltaR> {
    let m = u_star.len();
    if m < 2 || m >= k {
        return Err(Error::SetSize { size: m, min: 2, max: k - 1 });
    }
    let cliques = g.enumerate_k_cliques(k)?;
    let q = cliques.len() as u64;
    if q == 0 {
        return Err(Error::Terminated);
    }
    Ok(expected_delta_r_among(g, &cliques, u_star, k))
}

fn expected_delta_r_among(g: &Graph, cliques: &[VertexSet], u_star: &[u32], k: usize) -> ExpectedDeltaR {
    let m = u_star.len();
    let q = cliques.len() as u64;
    let mut destroyed = 0i128;
    g.for_each_clique_in(&g.common_row(u_star), k - m, &[], |u_c| {
        destroyed += i128::from(q_destroying_among(g, cliques, u_star, u_c, k).brute);
    });
    let before = g.extension_count(u_star, k - m) as i128;
    let mut change = 0i128;
    for c in cliques {
        let mut after = g.clone();
        after.remove_clique_edges(c).expect("clique");
        change += after.extension_count(u_star, k - m) as i128 - before;
    }
    ExpectedDeltaR { formula: rational(-destroyed, q), exhaustive: rational(change, q) }
}

/// One-step drop of `R_{k,U}` against the bound from the vertices of the
/// removed clique that lie in `N_U`: every destroyed extension contains such
/// a vertex `w`, and there are at most `R_{k,U∪{w}}` of them per `w`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StepDropBound {
    pub drop: u64,
    pub bound: u64,
    /// `|removed ∩ N_U|`
    pub neighbors_hit: usize,
}

impl StepDropBound {
    pub fn holds(&self) -> bool {
        self.drop <= self.bound
    }
}

pub fn one_step_r_drop(g: &Graph, removed: &VertexSet, u: &VertexSet, k: usize) -> Result<StepDropBound> {
    let m = u.len();
    if m < 2 || m >= k {
        return Err(Error::SetSize { size: m, min: 2, max: k - 1 });
    }
    let nbhd = g.common_neighborhood(u)?;
    let mut after = g.clone();
    after.remove_clique_edges(removed)?;
    let hit: Vec<u32> = intersect(removed, &nbhd);
    let mut bound = 0;
    for &w in &hit {
        // R_{k,U∪{w}} counted as extensions, so a lone w at m = k-1 counts 1
        bound += g.extension_count(&u.union(&[w])?, k - m - 1);
    }
    Ok(StepDropBound {
        drop: g.extension_count(u, k - m) - after.extension_count(u, k - m),
        bound,
        neighbors_hit: hit.len(),
    })
}

/// For reals within `eps` of a common center:
/// `(Σa)²/ℓ <= Σa² <= (Σa)²/ℓ + 4ℓε²`. Returns whether both hold, up to
/// float rounding.
pub fn squares_spread_check(values: &[f64], eps: f64) -> Result<bool> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo > 2.0 * eps {
        return Err(Error::Precondition(format!("values span {} > 2·eps", hi - lo)));
    }
    let l = values.len() as f64;
    let s: f64 = values.iter().sum();
    let sq: f64 = values.iter().map(|a| a * a).sum();
    let tol = 1e-12 * sq.abs().max(1.0);
    Ok(s * s / l <= sq + tol && sq <= s * s / l + 4.0 * l * eps * eps + tol)
}

/// Test graphs: `K_n` with random edges deleted at a few rates, plus states
/// harvested from short runs of the process itself.
pub fn generate_instances(n: usize, k: usize, seed: u64) -> Result<Vec<(String, Graph)>> {
    let mut out = vec![("complete".to_string(), Graph::new_complete(n)?)];
    let mut rng = rng::stream(seed, 7);
    for rate in [0.1, 0.2, 0.35] {
        let mut g = Graph::new_complete(n)?;
        for a in 0..n as u32 {
            for b in a + 1..n as u32 {
                if rng.random::<f64>() < rate {
                    g.remove_edge(a, b)?;
                }
            }
        }
        out.push((format!("deleted_{rate}"), g));
    }
    let mut p = Process::new(RunConfig::new(n, k, seed))?;
    let mut states = Vec::new();
    while p.step()?.is_some() {
        if !p.index().is_empty() {
            states.push(p.graph().clone());
        }
    }
    for (j, frac) in [(0usize, 1u32), (1, 2)] {
        if states.is_empty() {
            break;
        }
        let at = (states.len() * frac as usize / 3).min(states.len() - 1);
        out.push((format!("process_state_{j}"), states[at].clone()));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub max_n: usize,
    pub orders: Vec<usize>,
    /// Largest `n` for the destroying-count and expected `ΔR` checks.
    pub destroying_max_n: usize,
    pub seed: u64,
    pub max_counterexamples: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { max_n: 10, orders: vec![3, 4, 5], destroying_max_n: 8, seed: 2024, max_counterexamples: 5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub n: usize,
    pub k: usize,
    pub instance: String,
    pub edges: String,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityResult {
    pub name: String,
    pub instances: u64,
    pub checks: u64,
    pub failures: u64,
    pub counterexamples: Vec<Counterexample>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub config: SuiteConfig,
    pub identities: Vec<IdentityResult>,
}

impl VerifyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is plain data")
    }

    pub fn get(&self, name: &str) -> Option<&IdentityResult> {
        self.identities.iter().find(|r| r.name == name)
    }
}

struct Tally {
    results: Vec<IdentityResult>,
    limit: usize,
}

struct Ctx<'a> {
    n: usize,
    k: usize,
    label: &'a str,
    g: &'a Graph,
}

impl Tally {
    fn slot(&mut self, name: &str) -> &mut IdentityResult {
        if let Some(i) = self.results.iter().position(|r| r.name == name) {
            return &mut self.results[i];
        }
        self.results.push(IdentityResult {
            name: name.to_string(),
            instances: 0,
            checks: 0,
            failures: 0,
            counterexamples: Vec::new(),
        });
        self.results.last_mut().expect("just pushed")
    }

    fn instance(&mut self, name: &str) {
        self.slot(name).instances += 1;
    }

    fn check(&mut self, name: &str, ok: bool, ctx: Option<&Ctx>, detail: impl FnOnce() -> String) {
        let limit = self.limit;
        let r = self.slot(name);
        r.checks += 1;
        if ok {
            return;
        }
        r.failures += 1;
        if r.counterexamples.len() < limit {
            r.counterexamples.push(match ctx {
                Some(c) => Counterexample {
                    n: c.n,
                    k: c.k,
                    instance: c.label.to_string(),
                    edges: c.g.to_edge_list(),
                    detail: detail(),
                },
                None => Counterexample { n: 0, k: 0, instance: String::new(), edges: String::new(), detail: detail() },
            });
        }
    }
}

pub const SUITES: [&str; 13] = [
    "removal_decomposition",
    "inclusion_exclusion",
    "delta_q_via_r",
    "engine_delta",
    "expected_delta_q",
    "double_counting_sum",
    "double_counting_squares",
    "q_destroying",
    "back_diagonal_regrouping",
    "expected_delta_r",
    "one_step_r_drop_bound",
    "sign_identity",
    "coefficient_identity",
];

/// Runs every identity on every generated instance and collects failures.
pub fn run_suite(cfg: &SuiteConfig) -> Result<VerifyReport> {
    let mut tally = Tally { results: Vec::new(), limit: cfg.max_counterexamples };
    for name in SUITES.iter().chain(["squares_spread"].iter()) {
        tally.slot(name);
    }
    for &k in &cfg.orders {
        for n in k..=cfg.max_n {
            let seed = rng::trial_seed(cfg.seed, k, n);
            for (label, g) in generate_instances(n, k, seed)? {
                let ctx = Ctx { n, k, label: &label, g: &g };
                check_instance(&mut tally, &ctx, n <= cfg.destroying_max_n)?;
            }
        }
    }
    for r in 2..=12 {
        let (l, rr) = sign_identity(r);
        tally.check("sign_identity", l == rr, None, || format!("r = {r}: {l} != {rr}"));
    }
    for k in 3..=8 {
        for m in 2..k {
            let (l, r) = coefficient_identity(k, m);
            tally.check("coefficient_identity", l == r, None, || format!("k = {k}, m = {m}: {l} != {r}"));
        }
    }
    let mut rng = rng::stream(cfg.seed, 9);
    for _ in 0..1000 {
        let len = rng.random_range(1..40);
        let center = rng.random_range(-50.0..50.0);
        let eps = rng.random_range(0.0..5.0);
        let values: Vec<f64> = (0..len).map(|_| center + rng.random_range(-eps..=eps)).collect();
        let ok = squares_spread_check(&values, eps).unwrap_or(false);
        tally.check("squares_spread", ok, None, || format!("{values:?} eps {eps}"));
    }
    let passed = tally.results.iter().all(|r| r.failures == 0);
    Ok(VerifyReport { passed, config: cfg.clone(), identities: tally.results })
}

fn check_instance(tally: &mut Tally, ctx: &Ctx, destroying: bool) -> Result<()> {
    let (g, k) = (ctx.g, ctx.k);
    let cliques = g.enumerate_k_cliques(k)?;
    let q = g.count_k_cliques(k);
    for name in ["removal_decomposition", "inclusion_exclusion", "delta_q_via_r", "engine_delta", "double_counting_sum", "double_counting_squares"] {
        tally.instance(name);
    }

    for u in &cliques {
        let observed = observed_delta_q(g, u, k)?;
        let by_m = decomposition_among(&cliques, u, k);
        let sum: u64 = by_m.iter().sum();
        tally.check("removal_decomposition", sum == observed, Some(ctx), || {
            format!("u = {u:?}: Σ q_um = {sum}, observed ΔQ = {observed}")
        });
        let engine = CliqueIndex::removal_delta(g, u, k).by_size;
        tally.check("engine_delta", engine == by_m, Some(ctx), || format!("u = {u:?}: engine {engine:?}, brute {by_m:?}"));
        let via_r = delta_q_via_r(g, u, k)?;
        tally.check("delta_q_via_r", via_r == observed as i64, Some(ctx), || {
            format!("u = {u:?}: via R {via_r}, observed {observed}")
        });
        for m in 2..=k {
            for u_m in subsets_of_size(u, m) {
                let u_m = VertexSet::new(u_m)?;
                let brute = q_um_among(&cliques, u, &u_m);
                let ie = q_um_via_inclusion_exclusion(g, u, &u_m, k)?;
                tally.check("inclusion_exclusion", ie == brute as i64, Some(ctx), || {
                    format!("u_k = {u:?}, u_m = {u_m:?}: brute {brute}, alternating {ie}")
                });
            }
        }
    }

    if q > 0 {
        tally.instance("expected_delta_q");
        let e = expected_delta_q(g, k)?;
        tally.check("expected_delta_q", e.exhaustive == e.formula, Some(ctx), || {
            format!("exhaustive {}, formula {}", e.exhaustive, e.formula)
        });
    }
    for m in 2..k {
        let d = double_counting(g, k, m)?;
        tally.check("double_counting_sum", d.sum_r == d.binom_q, Some(ctx), || format!("{d:?}"));
        tally.check("double_counting_squares", d.clique_sum == d.sum_r_squared, Some(ctx), || format!("{d:?}"));
    }

    if !destroying {
        return Ok(());
    }
    for name in ["q_destroying", "back_diagonal_regrouping", "one_step_r_drop_bound"] {
        tally.instance(name);
    }
    let vertices: Vec<u32> = (0..ctx.n as u32).collect();
    for m in 2..k {
        for u_star in subsets_of_size(&vertices, m) {
            let u_star = VertexSet::new(u_star)?;
            let row = g.common_row(&u_star);
            let mut extensions = Vec::new();
            g.for_each_clique_in(&row, k - m, &[], |c| extensions.push(c.to_vec()));
            for u_c in extensions {
                let d = q_destroying_among(g, &cliques, &u_star, &u_c, k);
                let b = d.brute as i64;
                tally.check("q_destroying", d.direct == b && d.back_diagonal == b, Some(ctx), || {
                    format!("u* = {u_star:?}, u_c = {u_c:?}: {d:?}")
                });
                tally.check(
                    "back_diagonal_regrouping",
                    d.double_sum == d.back_diagonal && d.double_sum_by_x == d.back_diagonal_by_x,
                    Some(ctx),
                    || format!("u* = {u_star:?}, u_c = {u_c:?}: {d:?}"),
                );
            }
            if q > 0 {
                let e = expected_delta_r_among(g, &cliques, &u_star, k);
                tally.check("expected_delta_r", e.formula == e.exhaustive, Some(ctx), || {
                    format!("u* = {u_star:?}: formula {}, exhaustive {}", e.formula, e.exhaustive)
                });
            }
            for c in &cliques {
                let s = one_step_r_drop(g, c, &u_star, k)?;
                tally.check("one_step_r_drop_bound", s.holds(), Some(ctx), || {
                    format!("removed {c:?}, U = {u_star:?}: {s:?}")
                });
            }
        }
    }
    if q > 0 {
        tally.instance("expected_delta_r");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vs(v: &[u32]) -> VertexSet {
        VertexSet::new(v.to_vec()).unwrap()
    }

    #[test]
    fn q_um_on_k6() {
        let g = Graph::new_complete(6).unwrap();
        let u = vs(&[0, 1, 2, 3]);
        assert_eq!(q_um(&g, &u, &vs(&[0, 1]), 4).unwrap(), 1);
        assert_eq!(q_um(&g, &u, &u, 4).unwrap(), 1);
        assert_eq!(q_um_via_inclusion_exclusion(&g, &u, &vs(&[0, 1]), 4).unwrap(), 1);
        assert_eq!(q_um_via_inclusion_exclusion(&g, &u, &u, 4).unwrap(), 1);
        let by_m = removal_decomposition(&g, &u, 4).unwrap();
        assert_eq!(by_m, vec![0, 0, 6, 8, 1]);
        assert_eq!(by_m.iter().sum::<u64>(), 15);
        assert_eq!(observed_delta_q(&g, &u, 4).unwrap(), 15);
    }

    #[test]
    fn preconditions() {
        let mut g = Graph::new_complete(6).unwrap();
        assert!(q_um(&g, &vs(&[0, 1, 2]), &vs(&[0, 1]), 4).is_err());
        assert!(q_um(&g, &vs(&[0, 1, 2, 3]), &vs(&[0, 5]), 4).is_err());
        g.remove_edge(0, 1).unwrap();
        assert!(matches!(q_um(&g, &vs(&[0, 1, 2, 3]), &vs(&[2, 3]), 4), Err(Error::NotComplete(_))));
        assert!(q_destroying(&g, &vs(&[0, 2]), &vs(&[1, 3]), 4).is_err());
    }

    #[test]
    fn delta_q_from_r() {
        let g = Graph::new_complete(6).unwrap();
        assert_eq!(delta_q_via_r(&g, &vs(&[0, 1, 2, 3]), 4).unwrap(), 15);
        let g = Graph::new_complete(5).unwrap();
        assert_eq!(delta_q_via_r(&g, &vs(&[0, 1, 2, 3, 4]), 5).unwrap(), 1);
        assert_eq!(sign_identity(3), (-2, -2));
        for r in 2..=12 {
            let (l, rr) = sign_identity(r);
            assert_eq!(l, rr);
        }
    }

    #[test]
    fn expected_delta_q_both_ways() {
        let g = Graph::new_complete(6).unwrap();
        let e = expected_delta_q(&g, 4).unwrap();
        assert_eq!(e.exhaustive, rational(-15, 1));
        assert_eq!(e.formula, rational(-15, 1));
        let g = Graph::new_complete(5).unwrap();
        let e = expected_delta_q(&g, 5).unwrap();
        assert_eq!(e.exhaustive, rational(-1, 1));
        assert_eq!(e.formula, e.exhaustive);
        assert!(matches!(expected_delta_q(&Graph::empty(6).unwrap(), 4), Err(Error::Terminated)));
    }

    #[test]
    fn destroying_count_on_k6() {
        let g = Graph::new_complete(6).unwrap();
        let d = q_destroying(&g, &vs(&[0, 1]), &vs(&[2, 3]), 4).unwrap();
        assert_eq!(d.brute, 14);
        assert!(d.agrees(), "{d:?}");
        assert_eq!(relevant_edges(&[0, 1], &[2, 3]).len(), 5);
        let e = expected_delta_r(&g, &vs(&[0, 1]), 4).unwrap();
        assert_eq!(e.formula, rational(-28, 5));
        assert_eq!(e.exhaustive, rational(-28, 5));
    }

    #[test]
    fn destroying_ignores_edges_inside_u_star() {
        // u* = {0,1} with the edge 01 missing still has extensions
        let mut g = Graph::new_complete(6).unwrap();
        g.remove_edge(0, 1).unwrap();
        let d = q_destroying(&g, &vs(&[0, 1]), &vs(&[2, 3]), 4).unwrap();
        assert!(d.agrees(), "{d:?}");
        // K_4s avoiding 01 on K_6 - 01: 15 - 6 = 9, none of them avoid all five relevant edges
        assert_eq!(d.brute, 9);
    }

    #[test]
    fn coefficient_identity_holds() {
        for k in 3..=8 {
            for m in 2..k {
                let (l, r) = coefficient_identity(k, m);
                assert_eq!(l, r);
            }
        }
    }

    #[test]
    fn squares_spread() {
        assert!(squares_spread_check(&[1.0, 2.0, 3.0], 1.0).unwrap());
        assert!(squares_spread_check(&[2.5; 7], 0.0).unwrap());
        assert!(squares_spread_check(&[0.0, 10.0], 1.0).is_err());
        assert!(squares_spread_check(&[], 1.0).is_err());
    }

    #[test]
    fn step_drop_bound_on_k6() {
        let g = Graph::new_complete(6).unwrap();
        // removed clique {0,2,4,5} meets U = {0,1} and hits 2,4,5 in N_U
        let s = one_step_r_drop(&g, &vs(&[0, 2, 4, 5]), &vs(&[0, 1]), 4).unwrap();
        assert_eq!(s.drop, 6);
        assert_eq!(s.neighbors_hit, 3);
        assert_eq!(s.bound, 9);
        assert!(s.holds());
    }

    #[test]
    fn small_suite_passes() {
        let cfg = SuiteConfig { max_n: 7, orders: vec![3, 4], destroying_max_n: 6, ..SuiteConfig::default() };
        let report = run_suite(&cfg).unwrap();
        for r in &report.identities {
            assert_eq!(r.failures, 0, "{}: {:?}", r.name, r.counterexamples);
            assert!(r.checks > 0, "{} never ran", r.name);
        }
        assert!(report.passed);
    }

    #[test]
    fn instance_family() {
        let inst = generate_instances(8, 4, 3).unwrap();
        assert_eq!(inst.len(), 6);
        assert!(inst.iter().all(|(_, g)| g.check_invariants()));
        assert_eq!(inst[0].1.edge_count(), 28);
    }
}
