//! Exhaustive ground truth: the best complete multipartite host for a
//! pattern, and the best arbitrary graph on at most eight vertices.
//!
//! The partition search is a branch and bound over descending partitions.
//! A node is a prefix of parts; its state is the vector `E_P[u]` counting
//! placements of each sub-pattern `u` into the prefix. Any completion `Q`
//! gives `I = sum_u E_P[u] E_Q[full - u]`, and each `E_Q[v]` is bounded by a
//! precomputed table indexed by the remaining vertices, the largest allowed
//! part and the number of remaining parts. Subtrees whose bound is below the
//! incumbent are skipped; equal bounds are explored so every maximizer is
//! found.

use std::collections::BTreeSet;
use std::sync::Mutex;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_with::{serde_as, DisplayFromStr};

use crate::counting::{induced_count, ClassIndex, MultipartitePartition};
use crate::error::{Error, Result};
use crate::exactmath::binomial_u128;
use crate::graph::{for_each_subset, AdjacencyGraph};
use crate::profile::{turan_sizes, PatternSpec};

/// Largest bound table (in entries) the partition search will allocate.
pub const MAX_TABLE_ENTRIES: usize = 24_000_000;

/// Remaining-part counts at or above this share one bucket in the bound table.
const PART_BUCKETS: usize = 16;

const INF: u64 = u64::MAX;

fn add_inf(a: u64, b: u64) -> u64 {
    a.checked_add(b).unwrap_or(INF)
}

fn mul_inf(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        0
    } else {
        a.checked_mul(b).unwrap_or(INF)
    }
}

/// Result of [`best_partition`].
#[serde_as]
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionSearch {
    #[serde_as(as = "DisplayFromStr")]
    pub max: BigInt,
    /// Every maximizing partition, in descending lexicographic order.
    pub argmax: Vec<MultipartitePartition>,
    /// Search nodes visited (a cost measure, independent of scheduling).
    pub nodes: u64,
}

struct Search {
    idx: ClassIndex,
    n: usize,
    /// Number of part-count buckets (`0..buckets-1` exact, last one "at least").
    buckets: usize,
    /// Last bucket means "at least `buckets - 1` parts" unless the part count
    /// is capped below it.
    open_ended: bool,
    max_parts: usize,
    /// `binom(s, b_c)` for every part size `s <= n` and class `c`.
    weights: Vec<Vec<u64>>,
    table: Vec<u64>,
    /// `table` as floats (overflow becomes infinity), for fast bounding.
    table_f: Vec<f64>,
}

impl Search {
    fn new(f: &PatternSpec, n: usize, max_parts: Option<usize>) -> Result<Self> {
        let idx = ClassIndex::new(f);
        let max_parts = max_parts.unwrap_or(n).min(n);
        let (buckets, open_ended) =
            if max_parts < PART_BUCKETS { (max_parts + 1, false) } else { (PART_BUCKETS + 1, true) };
        let entries = idx.states * (n + 1) * (n + 1) * buckets;
        if entries > MAX_TABLE_ENTRIES {
            return Err(Error::Infeasible(format!(
                "partition search for {f} at n = {n} needs a {entries}-entry bound table (limit {MAX_TABLE_ENTRIES})"
            )));
        }
        let mut weights = Vec::with_capacity(n + 1);
        for s in 0..=n as u64 {
            let mut row = Vec::with_capacity(idx.classes.len());
            for c in &idx.classes {
                let w = binomial_u128(s, c.size).and_then(|v| u64::try_from(v).ok());
                row.push(w.ok_or_else(|| Error::Infeasible(format!("binom({s}, {}) overflows", c.size)))?);
            }
            weights.push(row);
        }
        let mut search =
            Search { idx, n, buckets, open_ended, max_parts, weights, table: vec![0; entries], table_f: Vec::new() };
        search.fill_table();
        search.table_f = search.table.iter().map(|&v| if v == INF { f64::INFINITY } else { v as f64 }).collect();
        // the exact table is only needed while filling
        search.table = Vec::new();
        Ok(search)
    }

    // one contiguous (v, j) block per (r, cap)
    fn at(&self, v: usize, r: usize, cap: usize, j: usize) -> usize {
        ((r * (self.n + 1) + cap) * self.idx.states + v) * self.buckets + j
    }

    fn ub(&self, v: usize, r: usize, cap: usize, j: usize) -> u64 {
        self.table[self.at(v, r, cap.min(r), j)]
    }

    /// Buckets a part count `j` may come from when one more part is added.
    fn predecessors(&self, j: usize) -> &'static [isize] {
        if self.open_ended && j == self.buckets - 1 {
            &[-1, 0]
        } else {
            &[-1]
        }
    }

    fn fill_table(&mut self) {
        let states = self.idx.states;
        let classes = self.idx.classes.len();
        for r in 0..=self.n {
            for cap in 0..=r {
                for j in 0..self.buckets {
                    for v in 0..states {
                        let val = if r == 0 {
                            u64::from(v == 0 && j == 0)
                        } else if cap == 0 || j == 0 {
                            0
                        } else {
                            // largest part below cap, or exactly cap
                            let mut best = if cap > 1 { self.ub(v, r, cap - 1, j) } else { 0 };
                            let rest = r - cap;
                            for &dj in self.predecessors(j) {
                                let pj = (j as isize + dj) as usize;
                                let mut t = self.ub(v, rest, cap, pj);
                                for c in 0..classes {
                                    if self.idx.usage(v, c) == 0 {
                                        continue;
                                    }
                                    let w = self.weights[cap][c];
                                    t = add_inf(t, mul_inf(w, self.ub(v - self.idx.stride(c), rest, cap, pj)));
                                }
                                best = best.max(t);
                            }
                            best
                        };
                        let at = self.at(v, r, cap, j);
                        self.table[at] = val;
                    }
                }
            }
        }
    }

    fn bucket_range(&self, depth: usize, r: usize, cap: usize) -> std::ops::RangeInclusive<usize> {
        let min_parts = if r == 0 { 0 } else { r.div_ceil(cap.max(1)) };
        let left = self.max_parts.saturating_sub(depth);
        let hi = left.min(self.buckets - 1);
        let lo = min_parts.min(self.buckets - 1);
        lo..=hi
    }

    /// Upper bound on `I` over all completions of the prefix, in floating
    /// point. Each bucket `j` of remaining part counts gets its own sum; the
    /// bound is the largest.
    fn bound(&self, e: &[u128], depth: usize, r: usize, cap: usize) -> f64 {
        let range = self.bucket_range(depth, r, cap);
        let (lo, hi) = (*range.start(), *range.end());
        if lo > hi {
            return 0.0;
        }
        let mut totals = [0f64; PART_BUCKETS + 1];
        let full = self.idx.full();
        for (u, &eu) in e.iter().enumerate() {
            if eu == 0 {
                continue;
            }
            let eu = eu as f64;
            let base = self.at(full - u, r, cap.min(r), 0);
            for (t, &ub) in totals[lo..=hi].iter_mut().zip(&self.table_f[base + lo..=base + hi]) {
                *t += eu * ub;
            }
        }
        totals[lo..=hi].iter().copied().fold(0.0, f64::max)
    }

    /// True when no completion of the prefix can reach `target`. The float
    /// bound carries far fewer than 1e-12 relative rounding error, so the
    /// margin keeps the test exact.
    fn prunes(&self, e: &[u128], depth: usize, r: usize, cap: usize, target: u128) -> bool {
        self.bound(e, depth, r, cap) * (1.0 + 1e-12) < target as f64 * (1.0 - 1e-15)
    }

    /// Writes `E_{P + s}` into `next`.
    fn extend_into(&self, e: &[u128], s: usize, next: &mut [u128]) {
        next.copy_from_slice(e);
        for (u, &eu) in e.iter().enumerate() {
            if eu == 0 {
                continue;
            }
            for (c, class) in self.idx.classes.iter().enumerate() {
                if self.idx.usage(u, c) == class.mult {
                    continue;
                }
                let w = self.weights[s][c] as u128;
                if w == 0 {
                    continue;
                }
                let t = u + self.idx.stride(c);
                next[t] = next[t].saturating_add(eu.saturating_mul(w));
            }
        }
    }

    fn extend(&self, e: &[u128], s: usize) -> Vec<u128> {
        let mut next = vec![0; e.len()];
        self.extend_into(e, s, &mut next);
        next
    }

    fn start_vector(&self) -> Vec<u128> {
        let mut e = vec![0u128; self.idx.states];
        e[0] = 1;
        e
    }
}

struct Incumbent {
    best: u128,
    argmax: BTreeSet<Vec<u64>>,
}

/// Per-shard search state. `best` is a possibly stale copy of the shared
/// incumbent value; it only ever lags behind, so pruning with it stays safe.
struct Walker<'a> {
    s: &'a Search,
    inc: &'a Mutex<Incumbent>,
    best: u128,
    prefix: Vec<u64>,
    /// `E` vectors, one per depth.
    stack: Vec<Vec<u128>>,
    nodes: u64,
}

impl Walker<'_> {
    fn leaf(&mut self, value: u128) {
        let mut g = self.inc.lock().expect("incumbent lock");
        if value > g.best {
            g.best = value;
            g.argmax.clear();
        }
        if value == g.best {
            g.argmax.insert(self.prefix.clone());
        }
        self.best = g.best;
    }

    /// Explores completions of the prefix whose `E` vector sits at `stack[depth]`.
    fn dfs(&mut self, r: usize, cap: usize) {
        self.nodes += 1;
        let s = self.s;
        let depth = self.prefix.len();
        if r == 0 {
            let v = self.stack[depth][s.idx.full()];
            self.leaf(v);
            return;
        }
        let left = s.max_parts - depth;
        if left == 0 {
            return;
        }
        if self.stack.len() <= depth + 1 {
            self.stack.push(vec![0; s.idx.states]);
        }
        // the remaining parts are at most `part` each, so `part * left >= r`
        let smallest = r.div_ceil(left).max(1);
        for part in (smallest..=cap.min(r)).rev() {
            let (head, tail) = self.stack.split_at_mut(depth + 1);
            s.extend_into(&head[depth], part, &mut tail[0]);
            let rest = r - part;
            if rest > 0 && s.prunes(&tail[0], depth + 1, rest, part, self.best) {
                continue;
            }
            self.prefix.push(part as u64);
            self.dfs(rest, part);
            self.prefix.pop();
        }
    }
}

/// The maximum of `I(F, G)` over complete multipartite hosts on `n`
/// vertices with at most `max_parts` parts, and all maximizers.
pub fn best_partition(f: &PatternSpec, n: u64, max_parts: Option<usize>) -> Result<PartitionSearch> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    if max_parts == Some(0) {
        return Err(Error::InvalidArgument("max_parts must be positive".into()));
    }
    let n_us = n as usize;
    let s = Search::new(f, n_us, max_parts)?;

    // incumbent: best Turan host, so the first pass already prunes hard
    let mut seed = 0u128;
    let kmax = s.max_parts;
    for k in 1..=kmax {
        let t = turan_sizes(k, n)?;
        let mut e = s.start_vector();
        for &p in t.parts() {
            e = s.extend(&e, p as usize);
        }
        seed = seed.max(e[s.idx.full()]);
    }
    let inc = Mutex::new(Incumbent { best: seed, argmax: BTreeSet::new() });

    // shards by largest part, largest first
    let smallest_first = n_us.div_ceil(s.max_parts);
    let firsts: Vec<usize> = (smallest_first..=n_us).rev().collect();
    let nodes: u64 = firsts
        .par_iter()
        .map(|&first| {
            let e = s.extend(&s.start_vector(), first);
            let rest = n_us - first;
            let best = inc.lock().expect("incumbent lock").best;
            if rest > 0 && s.prunes(&e, 1, rest, first, best) {
                return 1;
            }
            let mut w =
                Walker { s: &s, inc: &inc, best, prefix: vec![first as u64], stack: vec![Vec::new(), e], nodes: 0 };
            w.dfs(rest, first);
            w.nodes
        })
        .sum();
    let inc = inc.into_inner().expect("incumbent lock");
    if inc.argmax.is_empty() {
        // every host beats nothing only when no partition was admissible
        return Err(Error::Internal(format!("no partition of {n} reached the incumbent {}", inc.best)));
    }
    if inc.best == u128::MAX {
        return Err(Error::Infeasible("count overflowed 128 bits".into()));
    }
    let mut argmax = inc.argmax.into_iter().map(MultipartitePartition::new).collect::<Result<Vec<_>>>()?;
    argmax.sort_by(|a, b| b.parts().cmp(a.parts()));
    let max = BigInt::from(inc.best);
    // the u128 search must agree with the exact counter
    for g in &argmax {
        let exact = induced_count(f, g);
        if exact != max {
            return Err(Error::Internal(format!("search value {max} differs from exact count {exact} at {g}")));
        }
    }
    Ok(PartitionSearch { max, argmax, nodes })
}

/// Plain enumeration of every partition of `n` (at most `max_parts` parts),
/// for cross-checking [`best_partition`] at small `n`.
pub fn best_partition_enumerated(f: &PatternSpec, n: u64, max_parts: Option<usize>) -> Result<PartitionSearch> {
    if n > 60 {
        return Err(Error::Infeasible(format!("plain enumeration is limited to n <= 60, got {n}")));
    }
    let limit = max_parts.unwrap_or(n as usize);
    let mut best = BigInt::from(-1);
    let mut argmax = Vec::new();
    let mut nodes = 0;
    let mut prefix = Vec::new();
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &PatternSpec,
        r: u64,
        cap: u64,
        limit: usize,
        prefix: &mut Vec<u64>,
        best: &mut BigInt,
        argmax: &mut Vec<MultipartitePartition>,
        nodes: &mut u64,
    ) {
        if r == 0 {
            *nodes += 1;
            let g = MultipartitePartition::new(prefix.clone()).expect("positive parts");
            let v = induced_count(f, &g);
            if v > *best {
                *best = v.clone();
                argmax.clear();
            }
            if v == *best {
                argmax.push(g);
            }
            return;
        }
        if prefix.len() == limit {
            return;
        }
        for p in (1..=cap.min(r)).rev() {
            prefix.push(p);
            rec(f, r - p, p, limit, prefix, best, argmax, nodes);
            prefix.pop();
        }
    }
    rec(f, n, n, limit, &mut prefix, &mut best, &mut argmax, &mut nodes);
    Ok(PartitionSearch { max: best, argmax, nodes })
}

/// True iff the set of maximizing partitions is exactly `{T_m(n)}`.
pub fn extremal_is_turan(f: &PatternSpec, n: u64, expect_m: usize) -> Result<bool> {
    if !f.is_almost_balanced() {
        return Err(Error::NotAlmostBalanced(f.to_string()));
    }
    let res = best_partition(f, n, None)?;
    let t = turan_sizes(expect_m, n)?;
    Ok(res.argmax == vec![t])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TuranFamilyRow {
    pub n: u64,
    pub max: String,
    pub argmax: Vec<String>,
    /// Part counts of the maximizers.
    pub part_counts: Vec<usize>,
    pub all_turan: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TuranFamilyReport {
    pub r: usize,
    pub t: u64,
    pub rows: Vec<TuranFamilyRow>,
    pub pass: bool,
}

/// For `F = K_r(t)` and each `n` in the range, checks that every maximizing
/// partition is a Turan shape with at least `r` parts.
pub fn turan_family_check(r: usize, t: u64, ns: std::ops::RangeInclusive<u64>) -> Result<TuranFamilyReport> {
    if r < 2 || t < 2 {
        return Err(Error::InvalidArgument(format!("need r, t >= 2, got r = {r}, t = {t}")));
    }
    let f = PatternSpec::balanced(r, t)?;
    let mut rows = Vec::new();
    for n in ns {
        let res = best_partition(&f, n, None)?;
        let all_turan = res.argmax.iter().all(|g| g.is_turan_shape() && g.k() >= r);
        rows.push(TuranFamilyRow {
            n,
            max: res.max.to_string(),
            argmax: res.argmax.iter().map(|g| g.to_string()).collect(),
            part_counts: res.argmax.iter().map(|g| g.k()).collect(),
            all_turan,
        });
    }
    let pass = rows.iter().all(|row| row.all_turan);
    Ok(TuranFamilyReport { r, t, rows, pass })
}

/// Smallest `n0` in `lo..=hi` such that the unique maximizer is `T_m(n)`
/// for every `n` in `n0..=hi`, or `None` if it fails at `hi`.
pub fn turan_onset(f: &PatternSpec, m: usize, lo: u64, hi: u64) -> Result<Option<u64>> {
    let mut onset = None;
    for n in (lo..=hi).rev() {
        if n < m as u64 || !extremal_is_turan(f, n, m)? {
            break;
        }
        onset = Some(n);
    }
    Ok(onset)
}

/// Result of the exhaustive graph search for one pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphSearch {
    pub max: BigInt,
    /// The first maximizing graph in pair-mask order.
    pub witness: AdjacencyGraph,
}

pub const MAX_EXHAUSTIVE_VERTICES: usize = 8;

/// Maximum of `I(F, G)` over all graphs on `n <= 8` vertices, for several
/// patterns in one pass over the graphs.
pub fn exhaustive_maxima(patterns: &[PatternSpec], n: usize) -> Result<Vec<GraphSearch>> {
    if n > MAX_EXHAUSTIVE_VERTICES {
        return Err(Error::Infeasible(format!(
            "exhaustive graph search is limited to n <= {MAX_EXHAUSTIVE_VERTICES}, got {n}"
        )));
    }
    let pairs = n * n.saturating_sub(1) / 2;
    let total: u64 = 1 << pairs;
    // subsets grouped by size, for the sizes that some pattern needs
    let ells: BTreeSet<usize> = patterns.iter().map(|f| f.ell() as usize).filter(|&l| l <= n).collect();
    let mut subsets: Vec<(usize, Vec<u16>)> = Vec::new();
    for &l in &ells {
        let mut v = Vec::new();
        for_each_subset(n, l, |s| v.push(s));
        subsets.push((l, v));
    }
    let targets: Vec<Vec<u64>> = patterns.iter().map(|f| f.sizes().to_vec()).collect();

    let shards: u64 = total.min(64);
    let per = total / shards;
    let results: Vec<Vec<(u32, u64)>> = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let mut best: Vec<(u32, u64)> = vec![(0, u64::MAX); patterns.len()];
            let mut counts = vec![0u32; patterns.len()];
            let end = if shard == shards - 1 { total } else { (shard + 1) * per };
            for mask in shard * per..end {
                let g = AdjacencyGraph::from_pair_mask(n, mask).expect("n <= 8");
                counts.iter_mut().for_each(|c| *c = 0);
                for (l, subs) in &subsets {
                    for &s in subs {
                        if let Some(shape) = g.multipartite_shape(s) {
                            for (i, t) in targets.iter().enumerate() {
                                if t.len() as u64 <= *l as u64 && t.iter().sum::<u64>() == *l as u64 && *t == shape {
                                    counts[i] += 1;
                                }
                            }
                        }
                    }
                }
                for (i, &c) in counts.iter().enumerate() {
                    if (c > best[i].0 || best[i].1 == u64::MAX)
                        && (c > best[i].0 || best[i].1 == u64::MAX && c == best[i].0)
                    {
                        best[i] = (c, mask);
                    }
                }
            }
            best
        })
        .collect();
    let mut out = Vec::with_capacity(patterns.len());
    for i in 0..patterns.len() {
        // highest count, ties broken by the smallest mask
        let (count, mask) = results.iter().map(|b| b[i]).fold((0u32, u64::MAX), |acc, x| {
            if x.0 > acc.0 || (x.0 == acc.0 && x.1 < acc.1) {
                x
            } else {
                acc
            }
        });
        out.push(GraphSearch { max: BigInt::from(count), witness: AdjacencyGraph::from_pair_mask(n, mask)? });
    }
    Ok(out)
}

/// `I(F, n)`: the maximum of `I(F, G)` over all graphs on `n <= 8` vertices.
pub fn best_graph_exhaustive(f: &PatternSpec, n: usize) -> Result<GraphSearch> {
    Ok(exhaustive_maxima(std::slice::from_ref(f), n)?.remove(0))
}
