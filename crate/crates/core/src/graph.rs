//! Dynamic simple graph on `0..n` with bit-packed adjacency.
//!
//! This is the ground-truth layer: every count here is computed directly
//! from the adjacency rows, and the faster maintained structures elsewhere
//! in the crate are checked against it.

use std::fmt::Write as _;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::bits;
use crate::error::{Error, Result};

/// Strictly increasing list of vertex ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct VertexSet(Vec<u32>);

impl VertexSet {
    /// Sorts the members; duplicates are rejected.
    pub fn new(members: impl Into<Vec<u32>>) -> Result<Self> {
        let mut v = members.into();
        v.sort_unstable();
        if let Some(w) = v.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateVertex(w[0]));
        }
        Ok(VertexSet(v))
    }

    pub(crate) fn from_sorted(v: Vec<u32>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        VertexSet(v)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<u32> {
        self.0
    }

    pub fn union(&self, other: &[u32]) -> Result<VertexSet> {
        let mut v = self.0.clone();
        v.extend_from_slice(other);
        VertexSet::new(v)
    }

    pub fn is_subset_of(&self, other: &[u32]) -> bool {
        self.0.iter().all(|x| other.binary_search(x).is_ok())
    }
}

impl Deref for VertexSet {
    type Target = [u32];

    fn deref(&self) -> &[u32] {
        &self.0
    }
}

impl TryFrom<Vec<u32>> for VertexSet {
    type Error = Error;

    fn try_from(v: Vec<u32>) -> Result<Self> {
        VertexSet::new(v)
    }
}

impl From<VertexSet> for Vec<u32> {
    fn from(s: VertexSet) -> Vec<u32> {
        s.0
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    words: usize,
    rows: Vec<u64>,
    edge_count: u64,
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edge_count", &self.edge_count)
            .finish()
    }
}

impl Graph {
    pub fn empty(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroVertices);
        }
        let words = bits::words_for(n);
        Ok(Graph {
            n,
            words,
            rows: vec![0; n * words],
            edge_count: 0,
        })
    }

    /// `K_n`, the starting state of the process.
    pub fn new_complete(n: usize) -> Result<Self> {
        let mut g = Graph::empty(n)?;
        let words = g.words;
        let mut full = vec![0u64; words];
        for v in 0..n {
            bits::set(&mut full, v);
        }
        for v in 0..n {
            let row = &mut g.rows[v * words..(v + 1) * words];
            row.copy_from_slice(&full);
            bits::clear(row, v);
        }
        g.edge_count = (n as u64) * (n as u64 - 1) / 2;
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> u64 {
        self.edge_count
    }

    pub fn words(&self) -> usize {
        self.words
    }

    #[inline]
    pub fn row(&self, v: usize) -> &[u64] {
        &self.rows[v * self.words..(v + 1) * self.words]
    }

    #[inline]
    fn row_mut(&mut self, v: usize) -> &mut [u64] {
        &mut self.rows[v * self.words..(v + 1) * self.words]
    }

    #[inline]
    pub fn has_edge(&self, a: u32, b: u32) -> bool {
        bits::test(self.row(a as usize), b as usize)
    }

    fn check_vertex(&self, v: u32) -> Result<()> {
        if (v as usize) < self.n {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange { vertex: v, n: self.n })
        }
    }

    fn check_set(&self, s: &[u32]) -> Result<()> {
        s.iter().try_for_each(|&v| self.check_vertex(v))
    }

    /// Returns whether the edge was newly added.
    pub fn add_edge(&mut self, a: u32, b: u32) -> Result<bool> {
        self.check_vertex(a)?;
        self.check_vertex(b)?;
        if a == b || self.has_edge(a, b) {
            return Ok(false);
        }
        bits::set(self.row_mut(a as usize), b as usize);
        bits::set(self.row_mut(b as usize), a as usize);
        self.edge_count += 1;
        Ok(true)
    }

    /// Returns whether the edge was present.
    pub fn remove_edge(&mut self, a: u32, b: u32) -> Result<bool> {
        self.check_vertex(a)?;
        self.check_vertex(b)?;
        if a == b || !self.has_edge(a, b) {
            return Ok(false);
        }
        bits::clear(self.row_mut(a as usize), b as usize);
        bits::clear(self.row_mut(b as usize), a as usize);
        self.edge_count -= 1;
        Ok(true)
    }

    /// Deletes every edge inside `u`, which must currently be a clique.
    pub fn remove_clique_edges(&mut self, u: &[u32]) -> Result<()> {
        self.check_set(u)?;
        if !self.is_complete(u) {
            return Err(Error::NotComplete(u.to_vec()));
        }
        for (i, &a) in u.iter().enumerate() {
            for &b in &u[i + 1..] {
                bits::clear(self.row_mut(a as usize), b as usize);
                bits::clear(self.row_mut(b as usize), a as usize);
            }
        }
        let k = u.len() as u64;
        self.edge_count -= k * k.saturating_sub(1) / 2;
        Ok(())
    }

    /// Bit row of `N_U`, the common neighborhood of `u`. For empty `u`
    /// this is every vertex.
    pub fn common_row(&self, u: &[u32]) -> Vec<u64> {
        let mut out = vec![0u64; self.words];
        self.common_row_into(u, &mut out);
        out
    }

    pub fn common_row_into(&self, u: &[u32], out: &mut [u64]) {
        match u.split_first() {
            None => {
                out.fill(0);
                for v in 0..self.n {
                    bits::set(out, v);
                }
            }
            Some((&first, rest)) => {
                out.copy_from_slice(self.row(first as usize));
                for &v in rest {
                    bits::and_assign(out, self.row(v as usize));
                }
            }
        }
    }

    pub fn common_neighborhood(&self, u: &[u32]) -> Result<VertexSet> {
        if u.is_empty() {
            return Err(Error::SetSize { size: 0, min: 1, max: self.n });
        }
        self.check_set(u)?;
        let row = self.common_row(u);
        Ok(VertexSet::from_sorted(bits::ones(&row).map(|v| v as u32).collect()))
    }

    pub fn is_complete(&self, s: &[u32]) -> bool {
        s.iter()
            .enumerate()
            .all(|(i, &a)| s[i + 1..].iter().all(|&b| self.has_edge(a, b)))
    }

    /// Number of complete `order`-subsets of the vertices in `cand`.
    pub fn count_cliques_in(&self, cand: &[u64], order: usize) -> u64 {
        match order {
            0 => 1,
            1 => bits::popcount(cand),
            2 => bits::ones(cand)
                .map(|x| bits::count_and_above(cand, self.row(x), x))
                .sum(),
            _ => {
                let mut scratch = vec![vec![0u64; self.words]; order - 2];
                self.count_rec(cand, order, &mut scratch)
            }
        }
    }

    fn count_rec(&self, cand: &[u64], order: usize, scratch: &mut [Vec<u64>]) -> u64 {
        if order == 2 {
            return bits::ones(cand)
                .map(|x| bits::count_and_above(cand, self.row(x), x))
                .sum();
        }
        let (head, tail) = scratch.split_first_mut().expect("scratch depth");
        let mut total = 0;
        for x in bits::ones(cand) {
            bits::and_above(head, cand, self.row(x), x);
            if bits::popcount(head) + 1 >= order as u64 {
                total += self.count_rec(head, order - 1, tail);
            }
        }
        total
    }

    /// Calls `f` on every complete `order`-subset of `cand`, in
    /// lexicographic order. `prefix` is prepended to every reported set.
    pub fn for_each_clique_in(&self, cand: &[u64], order: usize, prefix: &[u32], mut f: impl FnMut(&[u32])) {
        let mut stack = prefix.to_vec();
        let mut scratch = vec![vec![0u64; self.words]; order];
        self.enum_rec(cand, order, &mut stack, &mut scratch, &mut f);
    }

    fn enum_rec(
        &self,
        cand: &[u64],
        order: usize,
        stack: &mut Vec<u32>,
        scratch: &mut [Vec<u64>],
        f: &mut impl FnMut(&[u32]),
    ) {
        if order == 0 {
            f(stack);
            return;
        }
        let (head, tail) = scratch.split_first_mut().expect("scratch depth");
        for x in bits::ones(cand) {
            stack.push(x as u32);
            if order == 1 {
                f(stack);
            } else {
                bits::and_above(head, cand, self.row(x), x);
                if bits::popcount(head) + 1 >= order as u64 {
                    self.enum_rec(head, order - 1, stack, tail, f);
                }
            }
            stack.pop();
        }
    }

    /// Number of complete `order`-sets inside `N_U`. Unlike [`Graph::count_r`]
    /// this has no indicator special case: `order = 0` counts the empty set.
    pub fn extension_count(&self, u: &[u32], order: usize) -> u64 {
        let row = self.common_row(u);
        self.count_cliques_in(&row, order)
    }

    /// `R_{k,U}`: for `|U| = m < k` the number of `K_{k-m}` inside the common
    /// neighborhood of `U`; for `|U| = k` the indicator that `U` is complete.
    pub fn count_r(&self, u: &[u32], k: usize) -> Result<u64> {
        if k < 3 {
            return Err(Error::InvalidOrder { k, n: self.n });
        }
        if u.len() < 2 || u.len() > k {
            return Err(Error::SetSize { size: u.len(), min: 2, max: k });
        }
        self.check_set(u)?;
        if u.len() == k {
            return Ok(u64::from(self.is_complete(u)));
        }
        let row = self.common_row(u);
        // |U| = k - 1 reduces to the codegree
        Ok(self.count_cliques_in(&row, k - u.len()))
    }

    /// Number of `K_k` copies, `Q_k`.
    pub fn count_k_cliques(&self, k: usize) -> u64 {
        let all = self.common_row(&[]);
        self.count_cliques_in(&all, k)
    }

    pub fn enumerate_k_cliques(&self, k: usize) -> Result<Vec<VertexSet>> {
        if k < 3 || k > self.n {
            return Err(Error::InvalidOrder { k, n: self.n });
        }
        let all = self.common_row(&[]);
        let mut out = Vec::new();
        self.for_each_clique_in(&all, k, &[], |c| out.push(VertexSet::from_sorted(c.to_vec())));
        Ok(out)
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.n).flat_map(move |a| {
            bits::ones(self.row(a))
                .filter(move |&b| b > a)
                .map(move |b| (a as u32, b as u32))
        })
    }

    /// Symmetric, irreflexive, and consistent with `edge_count`.
    pub fn check_invariants(&self) -> bool {
        let mut degree_sum = 0u64;
        for v in 0..self.n {
            let row = self.row(v);
            if bits::test(row, v) {
                return false;
            }
            // no bits past n
            let tail_bits = self.words * 64 - self.n;
            if tail_bits > 0 && row[self.words - 1] >> (64 - tail_bits) != 0 {
                return false;
            }
            for w in bits::ones(row) {
                if !bits::test(self.row(w), v) {
                    return false;
                }
            }
            degree_sum += bits::popcount(row);
        }
        degree_sum == 2 * self.edge_count
    }

    /// One `"u v"` line per edge, sorted.
    pub fn to_edge_list(&self) -> String {
        let mut s = String::new();
        for (a, b) in self.edges() {
            let _ = writeln!(s, "{a} {b}");
        }
        s
    }

    pub fn from_edge_list(n: usize, text: &str) -> Result<Self> {
        let mut g = Graph::empty(n)?;
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let parse = |tok: Option<&str>| -> Result<u32> {
                tok.and_then(|t| t.parse().ok()).ok_or_else(|| Error::Parse {
                    line: idx + 1,
                    msg: format!("expected two vertex ids, got {line:?}"),
                })
            };
            let mut it = line.split_whitespace();
            let a = parse(it.next())?;
            let b = parse(it.next())?;
            if a == b {
                return Err(Error::Parse { line: idx + 1, msg: "self-loop".into() });
            }
            g.add_edge(a, b)?;
        }
        Ok(g)
    }
}
