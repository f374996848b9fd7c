//! The set of current `K_k` copies, with exact uniform sampling and an
//! exact running count.
//!
//! Storage has two phases. While the graph is dense the index stores
//! nothing: a uniform `k`-subset of `0..n` is drawn and kept if it is
//! complete, which is uniform over the live cliques and needs fewer than
//! [`IMPLICIT_MIN_FRACTION`]`⁻¹` draws on average. Once the live count
//! falls below that fraction of `C(n,k)` the live cliques are written into
//! a dense slot array. Slots are never inserted again (the process only
//! deletes edges), so a slot whose vertex set is no longer complete is
//! dead for good; dead slots are swap-removed when a draw lands on them,
//! and the array is compacted once more than half of it is dead.
//!
//! The count `Q_k` is maintained exactly on every removal from the
//! per-intersection breakdown in [`RemovalDelta`].

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::combinatorics::binomial;
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};

/// Implicit sampling is used while `Q_k >= C(n,k) / 8`.
pub const IMPLICIT_MIN_FRACTION: f64 = 1.0 / 8.0;
const IMPLICIT_DIVISOR: u64 = 8;
/// Below this many `k`-subsets the index is dense from the start.
const ALWAYS_DENSE: u64 = 1 << 14;

/// Cliques destroyed by one removal, split by the size of their
/// intersection with the removed clique.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovalDelta {
    /// `by_size[m]` for `m` in `0..=k`; entries below 2 are always zero.
    pub by_size: Vec<u64>,
}

impl RemovalDelta {
    pub fn get(&self, m: usize) -> u64 {
        self.by_size.get(m).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.by_size.iter().sum()
    }
}

#[derive(Clone, Debug)]
pub struct CliqueIndex {
    k: usize,
    n: usize,
    live: u64,
    all_sets: u64,
    /// Flat `k`-stride slot array, `None` while sampling implicitly.
    slots: Option<Vec<u32>>,
}

impl CliqueIndex {
    pub fn build(g: &Graph, k: usize) -> Result<Self> {
        let n = g.n();
        if k < 3 || k > n {
            return Err(Error::InvalidOrder { k, n });
        }
        let all_sets = checked_total(n, k)?;
        let live = g.count_k_cliques(k);
        let mut idx = CliqueIndex {
            k,
            n,
            live,
            all_sets,
            slots: None,
        };
        if all_sets <= ALWAYS_DENSE || live < all_sets / IMPLICIT_DIVISOR {
            idx.materialize(g);
        }
        Ok(idx)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `Q_k`.
    pub fn len(&self) -> u64 {
        self.live
    }

    pub fn is_empty(&self) -> bool {
        self.live == 0
    }

    pub fn is_materialized(&self) -> bool {
        self.slots.is_some()
    }

    /// Number of occupied slots, live or dead; zero while implicit.
    pub fn slot_count(&self) -> usize {
        self.slots.as_ref().map_or(0, |s| s.len() / self.k)
    }

    fn materialize(&mut self, g: &Graph) {
        let mut slots = Vec::with_capacity(self.live as usize * self.k);
        let all = g.common_row(&[]);
        g.for_each_clique_in(&all, self.k, &[], |c| slots.extend_from_slice(c));
        debug_assert_eq!(slots.len() as u64, self.live * self.k as u64);
        self.slots = Some(slots);
    }

    fn compact(&mut self, g: &Graph) {
        let k = self.k;
        if let Some(slots) = self.slots.as_mut() {
            let mut write = 0;
            for read in 0..slots.len() / k {
                let r = read * k;
                if g.is_complete(&slots[r..r + k]) {
                    slots.copy_within(r..r + k, write * k);
                    write += 1;
                }
            }
            slots.truncate(write * k);
            debug_assert_eq!(write as u64, self.live);
        }
    }

    fn maintain(&mut self, g: &Graph) {
        match &self.slots {
            None if self.live < self.all_sets / IMPLICIT_DIVISOR => self.materialize(g),
            Some(s) if self.live * 2 < (s.len() / self.k) as u64 => self.compact(g),
            _ => {}
        }
    }

    /// Draws a current clique uniformly at random.
    pub fn sample_uniform<R: Rng + ?Sized>(&mut self, g: &Graph, rng: &mut R) -> Result<VertexSet> {
        if self.live == 0 {
            return Err(Error::Terminated);
        }
        let k = self.k;
        match self.slots.as_mut() {
            None => {
                let mut pick = Vec::with_capacity(k);
                loop {
                    pick.clear();
                    while pick.len() < k {
                        let v = rng.random_range(0..self.n as u32);
                        if !pick.contains(&v) {
                            pick.push(v);
                        }
                    }
                    pick.sort_unstable();
                    if g.is_complete(&pick) {
                        return Ok(VertexSet::from_sorted(pick));
                    }
                }
            }
            Some(slots) => loop {
                let count = slots.len() / k;
                debug_assert!(count > 0, "live cliques missing from slot array");
                let s = rng.random_range(0..count);
                let r = s * k;
                if g.is_complete(&slots[r..r + k]) {
                    return Ok(VertexSet::from_sorted(slots[r..r + k].to_vec()));
                }
                let last = (count - 1) * k;
                slots.copy_within(last..last + k, r);
                slots.truncate(last);
            },
        }
    }

    /// Number of cliques that would be destroyed by removing `u`, by
    /// intersection size. Does not modify anything.
    pub fn removal_delta(g: &Graph, u: &[u32], k: usize) -> RemovalDelta {
        let mut by_size = vec![0u64; k + 1];
        let mut cand = vec![0u64; g.words()];
        let kk = u.len();
        for mask in 1u32..(1 << kk) {
            let m = mask.count_ones() as usize;
            if m < 2 {
                continue;
            }
            let inter: Vec<u32> = (0..kk).filter(|b| mask >> b & 1 == 1).map(|b| u[b]).collect();
            g.common_row_into(&inter, &mut cand);
            for &v in u {
                crate::bits::clear(&mut cand, v as usize);
            }
            // cliques meeting u in exactly `inter`
            by_size[m] += g.count_cliques_in(&cand, k - m);
        }
        by_size[0] = 0;
        by_size[1] = 0;
        RemovalDelta { by_size }
    }

    /// Removes the edges of `u` from `g` and drops every clique that shared
    /// an edge with it.
    pub fn apply_removal(&mut self, g: &mut Graph, u: &[u32]) -> Result<RemovalDelta> {
        if u.len() != self.k {
            return Err(Error::SetSize { size: u.len(), min: self.k, max: self.k });
        }
        if !g.is_complete(u) {
            return Err(Error::NotComplete(u.to_vec()));
        }
        let delta = Self::removal_delta(g, u, self.k);
        g.remove_clique_edges(u)?;
        let total = delta.total();
        debug_assert!(total <= self.live);
        self.live -= total;
        self.maintain(g);
        Ok(delta)
    }

    /// The live cliques in lexicographic order.
    pub fn cliques(&self, g: &Graph) -> Vec<VertexSet> {
        match &self.slots {
            None => g.enumerate_k_cliques(self.k).unwrap_or_default(),
            Some(slots) => {
                let mut out: Vec<VertexSet> = slots
                    .chunks_exact(self.k)
                    .filter(|c| g.is_complete(c))
                    .map(|c| VertexSet::from_sorted(c.to_vec()))
                    .collect();
                out.sort_unstable();
                out
            }
        }
    }

    /// Cross-checks the index against a from-scratch enumeration of `g`.
    pub fn verify(&self, g: &Graph) -> std::result::Result<(), String> {
        let fresh = g.enumerate_k_cliques(self.k).map_err(|e| e.to_string())?;
        if fresh.len() as u64 != self.live {
            return Err(format!("maintained Q_k = {}, rebuild finds {}", self.live, fresh.len()));
        }
        if let Some(slots) = &self.slots {
            let held = self.cliques(g);
            if held.windows(2).any(|w| w[0] == w[1]) {
                return Err("a clique occupies two live slots".into());
            }
            if held != fresh {
                return Err("live slot set differs from rebuild".into());
            }
            if slots.len() % self.k != 0 {
                return Err("slot array length not a multiple of k".into());
            }
        }
        Ok(())
    }
}

fn checked_total(n: usize, k: usize) -> Result<u64> {
    match binomial(n as u64, k as u64) {
        Some(c) if c < 1u64 << 63 => Ok(c),
        _ => Err(Error::CountOverflow { n, k }),
    }
}

/// Peak bytes the slot array can reach for a run starting from a graph with
/// `q0` cliques.
pub fn peak_storage_bytes(n: usize, k: usize, q0: u64) -> Result<u128> {
    let all = checked_total(n, k)?;
    let slots = if all <= ALWAYS_DENSE { q0 } else { q0.min(all / IMPLICIT_DIVISOR) };
    Ok(u128::from(slots) * k as u128 * 4)
}
