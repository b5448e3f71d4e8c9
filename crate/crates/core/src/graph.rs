//! Small arbitrary graphs (at most 16 vertices) stored as bit rows, and
//! brute-force induced counting over vertex subsets.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::counting::{FlipPair, MultipartitePartition};
use crate::error::{Error, Result};
use crate::profile::PatternSpec;

pub const MAX_VERTICES: usize = 16;

/// Simple undirected graph on at most [`MAX_VERTICES`] vertices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AdjacencyGraph {
    n: usize,
    rows: Vec<u16>,
}

impl AdjacencyGraph {
    pub fn empty(n: usize) -> Result<Self> {
        if n > MAX_VERTICES {
            return Err(Error::Infeasible(format!("graphs are limited to {MAX_VERTICES} vertices, got {n}")));
        }
        Ok(AdjacencyGraph { n, rows: vec![0; n] })
    }

    /// Builds a graph from the bits of `mask`, one bit per pair `i < j` in
    /// lexicographic pair order.
    pub fn from_pair_mask(n: usize, mask: u64) -> Result<Self> {
        let mut g = Self::empty(n)?;
        let mut bit = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                if mask >> bit & 1 == 1 {
                    g.add_edge(i, j);
                }
                bit += 1;
            }
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, v: usize) -> u16 {
        self.rows[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.rows[u] >> v & 1 == 1
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert!(u != v && u < self.n && v < self.n, "bad edge {u}-{v}");
        self.rows[u] |= 1 << v;
        self.rows[v] |= 1 << u;
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) {
        self.rows[u] &= !(1 << v);
        self.rows[v] &= !(1 << u);
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones() as usize).sum::<usize>() / 2
    }

    fn all(&self) -> u16 {
        if self.n == 16 {
            u16::MAX
        } else {
            (1u16 << self.n) - 1
        }
    }

    pub fn complement(&self) -> Self {
        let all = self.all();
        let rows = (0..self.n).map(|v| !self.rows[v] & all & !(1 << v)).collect();
        AdjacencyGraph { n: self.n, rows }
    }

    /// The complete multipartite graph with the given parts. Vertices are
    /// numbered part by part; the returned offsets give each part's first vertex.
    pub fn from_partition(g: &MultipartitePartition) -> Result<(Self, Vec<usize>)> {
        let n = g.n() as usize;
        let mut out = Self::empty(n)?;
        let mut offsets = Vec::with_capacity(g.k());
        let mut start = 0;
        let mut owner = vec![0usize; n];
        for (i, &p) in g.parts().iter().enumerate() {
            offsets.push(start);
            owner[start..start + p as usize].fill(i);
            start += p as usize;
        }
        for u in 0..n {
            for v in (u + 1)..n {
                if owner[u] != owner[v] {
                    out.add_edge(u, v);
                }
            }
        }
        Ok((out, offsets))
    }

    /// The partition host with one vertex pair flipped: the first two vertices
    /// of a part, or the first vertices of two parts.
    pub fn flipped_partition(g: &MultipartitePartition, pair: FlipPair) -> Result<Self> {
        let (mut out, off) = Self::from_partition(g)?;
        match pair {
            FlipPair::SamePartAdded(p) => {
                g.check_index(p)?;
                if g.parts()[p] < 2 {
                    return Err(Error::InvalidArgument(format!("part {p} has fewer than two vertices")));
                }
                out.add_edge(off[p], off[p] + 1);
            }
            FlipPair::CrossPartRemoved(i, j) => {
                g.check_index(i)?;
                g.check_index(j)?;
                if i == j {
                    return Err(Error::InvalidArgument("cross pair needs distinct parts".into()));
                }
                out.remove_edge(off[i], off[j]);
            }
        }
        Ok(out)
    }

    /// The partition host plus one extra vertex (the last one) adjacent to
    /// exactly the listed parts.
    pub fn with_apex(g: &MultipartitePartition, apex_parts: &[usize]) -> Result<Self> {
        let (base, off) = Self::from_partition(g)?;
        let n = base.n + 1;
        let mut out = Self::empty(n)?;
        for u in 0..base.n {
            for v in (u + 1)..base.n {
                if base.has_edge(u, v) {
                    out.add_edge(u, v);
                }
            }
        }
        for &i in apex_parts {
            g.check_index(i)?;
            for v in off[i]..off[i] + g.parts()[i] as usize {
                out.add_edge(base.n, v);
            }
        }
        Ok(out)
    }

    /// Part sizes (descending) if `G[S]` is complete multipartite, i.e. if
    /// non-adjacency restricted to `S` is an equivalence relation.
    pub fn multipartite_shape(&self, s: u16) -> Option<Vec<u64>> {
        let mut seen = 0u16;
        let mut sizes = Vec::new();
        let mut rest = s;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            let class = s & !self.rows[v];
            // every member of the class must see exactly the same non-neighbours
            let mut members = class;
            while members != 0 {
                let u = members.trailing_zeros() as usize;
                if s & !self.rows[u] != class {
                    return None;
                }
                members &= members - 1;
            }
            if class & seen != 0 {
                return None;
            }
            seen |= class;
            sizes.push(class.count_ones() as u64);
            rest &= !class;
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        Some(sizes)
    }

    /// Clique sizes (descending) if `G[S]` is a disjoint union of cliques.
    pub fn clique_union_shape(&self, s: u16) -> Option<Vec<u64>> {
        let mut sizes = Vec::new();
        let mut rest = s;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            // closed neighbourhood inside S must be a clique, and equal for all members
            let comp = (self.rows[v] & s) | (1 << v);
            let mut members = comp;
            while members != 0 {
                let u = members.trailing_zeros() as usize;
                if (self.rows[u] & s) | (1 << u) != comp {
                    return None;
                }
                members &= members - 1;
            }
            sizes.push(comp.count_ones() as u64);
            rest &= !comp;
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        Some(sizes)
    }
}

/// Calls `visit` with every `k`-subset of `{0..n}` as a bit mask.
pub fn for_each_subset(n: usize, k: usize, mut visit: impl FnMut(u16)) {
    if k > n {
        return;
    }
    if k == 0 {
        visit(0);
        return;
    }
    // Gosper's hack over u32 to avoid overflow at n = 16
    let mut s: u32 = (1 << k) - 1;
    let limit: u32 = 1 << n;
    while s < limit {
        visit(s as u16);
        let c = s & s.wrapping_neg();
        let r = s + c;
        s = (((r ^ s) >> 2) / c) | r;
    }
}

/// `I(F, G)` by enumerating every `ell`-subset of the graph.
pub fn induced_count_general(f: &PatternSpec, g: &AdjacencyGraph) -> Result<BigInt> {
    let ell = f.ell() as usize;
    let mut count: u64 = 0;
    for_each_subset(g.n(), ell, |s| {
        if g.multipartite_shape(s).as_deref() == Some(f.sizes()) {
            count += 1;
        }
    });
    Ok(BigInt::from(count))
}

/// Number of `ell`-subsets inducing a disjoint union of cliques of the given
/// sizes. Counting these in the complement graph gives `I(F, G)` again.
pub fn count_clique_unions(sizes: &[u64], g: &AdjacencyGraph) -> BigInt {
    let mut want = sizes.to_vec();
    want.sort_unstable_by(|a, b| b.cmp(a));
    let ell: u64 = want.iter().sum();
    let mut count: u64 = 0;
    for_each_subset(g.n(), ell as usize, |s| {
        if g.clique_union_shape(s).as_deref() == Some(&want[..]) {
            count += 1;
        }
    });
    BigInt::from(count)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PatternSpec {
        s.parse().unwrap()
    }

    #[test]
    fn general_count_examples() {
        let (k22, _) = AdjacencyGraph::from_partition(&"2,2".parse().unwrap()).unwrap();
        assert_eq!(induced_count_general(&p("2,1"), &k22).unwrap(), BigInt::from(4));
        // the 4-cycle 0-1-2-3-0 is K_{2,2}
        let mut c4 = AdjacencyGraph::empty(4).unwrap();
        for (u, v) in [(0, 1), (1, 2), (2, 3), (3, 0)] {
            c4.add_edge(u, v);
        }
        assert_eq!(induced_count_general(&p("2,2"), &c4).unwrap(), BigInt::from(1));
        let (tri, _) = AdjacencyGraph::from_partition(&"1,1,1".parse().unwrap()).unwrap();
        assert_eq!(induced_count_general(&p("2,1"), &tri).unwrap(), BigInt::from(0));
    }

    #[test]
    fn rejects_large_graphs() {
        assert!(AdjacencyGraph::empty(17).is_err());
    }

    #[test]
    fn subset_enumeration_counts() {
        let mut c = 0;
        for_each_subset(16, 8, |_| c += 1);
        assert_eq!(c, 12870);
        let mut c = 0;
        for_each_subset(16, 16, |_| c += 1);
        assert_eq!(c, 1);
    }

    #[test]
    fn path_is_not_multipartite() {
        let mut p3 = AdjacencyGraph::empty(4).unwrap();
        p3.add_edge(0, 1);
        p3.add_edge(1, 2);
        p3.add_edge(2, 3);
        assert_eq!(p3.multipartite_shape(0b1111), None);
        assert_eq!(p3.multipartite_shape(0b0111), Some(vec![2, 1]));
        assert_eq!(p3.complement().edge_count(), 3);
    }
}
