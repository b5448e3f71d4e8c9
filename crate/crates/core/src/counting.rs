//! Exact induced-copy counts of a complete multipartite pattern in complete
//! multipartite hosts, plus the forced-vertex variants used by the stability
//! checks.
//!
//! The main engine is a DP over host parts whose state is the vector of how
//! many parts of each pattern size class have been placed so far. Its cost is
//! linear in the number of host parts, so hosts with thousands of parts are
//! fine.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{FromPrimitive, Num, One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactmath::{binomial_int, factorial, falling_factorial};
use crate::profile::{PatternSpec, SizeClass};
use crate::scalar::Rational;

/// A complete multipartite host `K_{n_1,...,n_k}`, parts in descending order.
/// The empty partition (no vertices) is allowed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultipartitePartition {
    parts: Vec<u64>,
}

impl MultipartitePartition {
    pub fn new(mut parts: Vec<u64>) -> Result<Self> {
        if parts.contains(&0) {
            return Err(Error::InvalidPartition("part sizes must be positive".into()));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(MultipartitePartition { parts })
    }

    pub fn parts(&self) -> &[u64] {
        &self.parts
    }

    /// Number of parts.
    pub fn k(&self) -> usize {
        self.parts.len()
    }

    pub fn n(&self) -> u64 {
        self.parts.iter().sum()
    }

    /// Number of singleton parts.
    pub fn sc_g(&self) -> usize {
        self.parts.iter().filter(|&&p| p == 1).count()
    }

    /// The partition with the parts at the given indices removed.
    pub fn without_indices(&self, idx: &[usize]) -> Result<Self> {
        for &i in idx {
            self.check_index(i)?;
        }
        let parts = self.parts.iter().enumerate().filter(|(i, _)| !idx.contains(i)).map(|(_, &p)| p).collect();
        Ok(MultipartitePartition { parts })
    }

    /// The sub-partition formed by the parts at the given indices.
    pub fn select(&self, idx: &[usize]) -> Result<Self> {
        let mut parts = Vec::with_capacity(idx.len());
        for &i in idx {
            self.check_index(i)?;
            parts.push(self.parts[i]);
        }
        MultipartitePartition::new(parts)
    }

    pub(crate) fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.parts.len() {
            return Err(Error::InvalidArgument(format!(
                "part index {i} out of range for {self} ({} parts)",
                self.parts.len()
            )));
        }
        Ok(())
    }

    /// Part sizes differ by at most one.
    pub fn is_turan_shape(&self) -> bool {
        match (self.parts.first(), self.parts.last()) {
            (Some(a), Some(b)) => a - b <= 1,
            _ => true,
        }
    }

    pub fn literal(&self) -> String {
        self.parts.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",")
    }
}

impl fmt::Display for MultipartitePartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.literal())
    }
}

impl FromStr for MultipartitePartition {
    type Err = Error;

    /// Parses `"4,3"` or `"(4,3)"`.
    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim().trim_start_matches('(').trim_end_matches(')');
        if body.trim().is_empty() {
            return Ok(MultipartitePartition { parts: Vec::new() });
        }
        let parts = body
            .split(',')
            .map(|t| {
                t.trim().parse::<u64>().map_err(|_| Error::Parse(format!("bad part size {t:?} in partition {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        MultipartitePartition::new(parts)
    }
}

/// Mixed-radix indexing of class-usage vectors `u` with `0 <= u_c <= r_c`.
#[derive(Debug, Clone)]
pub(crate) struct ClassIndex {
    pub classes: Vec<SizeClass>,
    strides: Vec<usize>,
    pub states: usize,
}

impl ClassIndex {
    pub fn new(f: &PatternSpec) -> Self {
        let classes = f.classes();
        let mut strides = Vec::with_capacity(classes.len());
        let mut states = 1;
        for c in &classes {
            strides.push(states);
            states *= c.mult + 1;
        }
        ClassIndex { classes, strides, states }
    }

    pub fn full(&self) -> usize {
        self.states - 1
    }

    /// Usage of class `c` in state `s`.
    pub fn usage(&self, s: usize, c: usize) -> usize {
        (s / self.strides[c]) % (self.classes[c].mult + 1)
    }

    pub fn stride(&self, c: usize) -> usize {
        self.strides[c]
    }
}

/// One host part as seen by the DP: a weight per pattern class, and whether
/// the part may be left unused.
pub(crate) struct HostTerm<T> {
    pub weights: Vec<T>,
    pub forced: bool,
}

/// Runs the class-usage DP. Entry `s` of the result is the weighted number of
/// ways to place the parts counted by `s` into distinct host parts. With
/// `ordered` set, pattern parts of the same size are distinguishable (the
/// ordered-injection sum); otherwise they are not.
pub(crate) fn class_dp<T>(idx: &ClassIndex, hosts: &[HostTerm<T>], ordered: bool) -> Vec<T>
where
    T: Num + Clone + FromPrimitive,
{
    let mut cur = vec![T::zero(); idx.states];
    cur[0] = T::one();
    for host in hosts {
        let mut next = if host.forced { vec![T::zero(); idx.states] } else { cur.clone() };
        for (s, v) in cur.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            for (c, class) in idx.classes.iter().enumerate() {
                let used = idx.usage(s, c);
                if used == class.mult || host.weights[c].is_zero() {
                    continue;
                }
                let mut term = v.clone() * host.weights[c].clone();
                if ordered {
                    term = term * T::from_usize(class.mult - used).expect("small multiplier");
                }
                let t = s + idx.stride(c);
                next[t] = next[t].clone() + term;
            }
        }
        cur = next;
    }
    cur
}

fn plain_hosts(idx: &ClassIndex, g: &MultipartitePartition) -> Vec<HostTerm<BigInt>> {
    g.parts()
        .iter()
        .map(|&n| HostTerm { weights: idx.classes.iter().map(|c| binomial_int(n, c.size)).collect(), forced: false })
        .collect()
}

/// `binom(n - d, a - d)`, zero when `a < d`.
fn shifted_binomial(n: u64, a: u64, d: u64) -> BigInt {
    if a < d || n < d {
        BigInt::zero()
    } else {
        binomial_int(n - d, a - d)
    }
}

fn ordered_total(f: &PatternSpec, idx: &ClassIndex, hosts: &[HostTerm<BigInt>]) -> BigInt {
    let table = class_dp(idx, hosts, true);
    let total = table[idx.full()].clone();
    let sym = f.sym();
    debug_assert!((&total % &sym).is_zero());
    total / sym
}

/// `I(F, G)`: the number of vertex subsets of the host inducing `F`.
///
/// Evaluated as the ordered-injection sum over distinct host parts divided
/// by `sym(F)`. The empty pattern has exactly one copy.
pub fn induced_count(f: &PatternSpec, g: &MultipartitePartition) -> BigInt {
    if f.is_empty() {
        return BigInt::one();
    }
    let idx = ClassIndex::new(f);
    ordered_total(f, &idx, &plain_hosts(&idx, g))
}

/// `I(F, G)` by the grouped-singleton form: choose how many singleton parts
/// of `F` land in singleton host parts, then inject the remaining pattern
/// parts into the non-singleton host parts by a memoized search over used
/// host parts. Independent of [`induced_count`]; the two must agree.
pub fn induced_count_grouped(f: &PatternSpec, g: &MultipartitePartition) -> Result<BigInt> {
    if f.is_empty() {
        return Ok(BigInt::one());
    }
    let big: Vec<u64> = g.parts().iter().copied().filter(|&p| p >= 2).collect();
    if big.len() > 64 {
        return Err(Error::Infeasible(format!(
            "grouped count supports at most 64 non-singleton host parts, got {}",
            big.len()
        )));
    }
    let sc_f = f.sc();
    let sc_g = g.sc_g() as u64;
    let non_single: Vec<u64> = f.sizes().iter().copied().filter(|&a| a >= 2).collect();
    let mut total = BigInt::zero();
    for i in 0..=sc_f.min(sc_g as usize) {
        let mut rest = non_single.clone();
        rest.extend(std::iter::repeat_n(1, sc_f - i));
        let mut memo = HashMap::new();
        let inj = injections(&rest, 0, 0, &big, &mut memo);
        if inj.is_zero() {
            continue;
        }
        let i = i as u64;
        total += factorial(i) * binomial_int(sc_f as u64, i) * binomial_int(sc_g, i) * inj;
    }
    Ok(total / f.sym())
}

/// Ordered injections of `sizes[pos..]` into host parts not in `used`.
fn injections(sizes: &[u64], pos: usize, used: u64, hosts: &[u64], memo: &mut HashMap<(usize, u64), BigInt>) -> BigInt {
    if pos == sizes.len() {
        return BigInt::one();
    }
    if let Some(v) = memo.get(&(pos, used)) {
        return v.clone();
    }
    let mut acc = BigInt::zero();
    for (h, &n) in hosts.iter().enumerate() {
        if used & (1u64 << h) != 0 || n < sizes[pos] {
            continue;
        }
        let rest = injections(sizes, pos + 1, used | (1u64 << h), hosts, memo);
        if !rest.is_zero() {
            acc += binomial_int(n, sizes[pos]) * rest;
        }
    }
    memo.insert((pos, used), acc.clone());
    acc
}

/// Copies of `F` containing two fixed vertices of host part `part`.
pub fn count_through_nonedge(f: &PatternSpec, g: &MultipartitePartition, part: usize) -> Result<BigInt> {
    g.check_index(part)?;
    if g.parts()[part] < 2 {
        return Err(Error::InvalidArgument(format!("part {part} of {g} has fewer than two vertices")));
    }
    if f.is_empty() {
        return Ok(BigInt::zero());
    }
    let idx = ClassIndex::new(f);
    let mut hosts = plain_hosts(&idx, g);
    let n = g.parts()[part];
    hosts[part] =
        HostTerm { weights: idx.classes.iter().map(|c| shifted_binomial(n, c.size, 2)).collect(), forced: true };
    Ok(ordered_total(f, &idx, &hosts))
}

/// Copies of `F` containing one fixed vertex of part `i` and one of part `j`.
pub fn count_through_edge(f: &PatternSpec, g: &MultipartitePartition, i: usize, j: usize) -> Result<BigInt> {
    g.check_index(i)?;
    g.check_index(j)?;
    if i == j {
        return Err(Error::InvalidArgument("an edge needs two distinct host parts".into()));
    }
    if f.is_empty() {
        return Ok(BigInt::zero());
    }
    let idx = ClassIndex::new(f);
    let mut hosts = plain_hosts(&idx, g);
    for &p in &[i, j] {
        let n = g.parts()[p];
        hosts[p] =
            HostTerm { weights: idx.classes.iter().map(|c| shifted_binomial(n, c.size, 1)).collect(), forced: true };
    }
    Ok(ordered_total(f, &idx, &hosts))
}

/// A single flipped vertex pair of a complete multipartite host.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlipPair {
    /// An edge added inside host part `0`.
    SamePartAdded(usize),
    /// The edge between host parts `0` and `1` removed.
    CrossPartRemoved(usize, usize),
}

impl FlipPair {
    fn validate(&self, g: &MultipartitePartition) -> Result<()> {
        match *self {
            FlipPair::SamePartAdded(p) => {
                g.check_index(p)?;
                if g.parts()[p] < 2 {
                    return Err(Error::InvalidArgument(format!("part {p} of {g} has fewer than two vertices")));
                }
            }
            FlipPair::CrossPartRemoved(i, j) => {
                g.check_index(i)?;
                g.check_index(j)?;
                if i == j {
                    return Err(Error::InvalidArgument("cross pair needs two distinct host parts".into()));
                }
            }
        }
        Ok(())
    }
}

/// Copies of `F` in the flipped host that contain both flipped vertices.
///
/// After adding an edge inside a part, both endpoints must be singleton parts
/// of the copy and everything else sits outside that host part. After
/// removing a cross edge, the two endpoints form a part of size exactly two
/// and everything else avoids both host parts.
pub fn count_flip_pair(f: &PatternSpec, g: &MultipartitePartition, pair: FlipPair) -> Result<BigInt> {
    pair.validate(g)?;
    Ok(match pair {
        FlipPair::SamePartAdded(p) => match f.without_parts(&[1, 1]) {
            Some(rest) => induced_count(&rest, &g.without_indices(&[p])?),
            None => BigInt::zero(),
        },
        FlipPair::CrossPartRemoved(i, j) => match f.without_part(2) {
            Some(rest) => induced_count(&rest, &g.without_indices(&[i, j])?),
            None => BigInt::zero(),
        },
    })
}

/// Copies of `F` in the host with the given pair flipped.
pub fn flipped_total(f: &PatternSpec, g: &MultipartitePartition, pair: FlipPair) -> Result<BigInt> {
    let through = match pair {
        FlipPair::SamePartAdded(p) => count_through_nonedge(f, g, p)?,
        FlipPair::CrossPartRemoved(i, j) => count_through_edge(f, g, i, j)?,
    };
    let flip = count_flip_pair(f, g, pair)?;
    Ok(induced_count(f, g) - through + flip)
}

/// Copies of `F` through an extra vertex joined to exactly the host parts
/// listed in `apex_parts`.
pub fn count_with_apex(f: &PatternSpec, g: &MultipartitePartition, apex_parts: &[usize]) -> Result<BigInt> {
    let mut sorted = apex_parts.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != apex_parts.len() {
        return Err(Error::InvalidArgument("apex part indices must be distinct".into()));
    }
    let inside = g.select(&sorted)?;
    let mut total = BigInt::zero();
    for class in f.classes() {
        let rest = f.without_part(class.size).expect("class is present");
        let inner = induced_count(&rest, &inside);
        if inner.is_zero() {
            continue;
        }
        if class.size == 1 {
            total += inner;
        } else {
            let partners: BigInt = g
                .parts()
                .iter()
                .enumerate()
                .filter(|(j, _)| !sorted.contains(j))
                .map(|(_, &nj)| binomial_int(nj, class.size - 1))
                .sum();
            total += partners * inner;
        }
    }
    Ok(total)
}

/// `(m)_r / (prod a_i! * sym)`: the coefficient `c` with
/// `I(F, T_m(mn)) = (1 + o(1)) c n^ell`.
pub fn leading_term(f: &PatternSpec, m: u64) -> Rational {
    let num = falling_factorial(&BigInt::from(m), f.r() as u32);
    let den: BigInt = f.sizes().iter().map(|&a| factorial(a)).product::<BigInt>() * f.sym();
    Rational::new(num, den)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PatternSpec {
        s.parse().unwrap()
    }

    fn g(s: &str) -> MultipartitePartition {
        s.parse().unwrap()
    }

    fn int(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn induced_count_examples() {
        assert_eq!(induced_count(&p("2,1"), &g("2,2")), int(4));
        assert_eq!(induced_count(&p("2,1"), &g("1,1,1")), int(0));
        assert_eq!(induced_count(&p("2,1"), &g("4,3")), int(30));
        assert_eq!(induced_count(&p("2,2"), &g("4,4")), int(36));
        assert_eq!(induced_count(&p("2,1"), &g("")), int(0));
    }

    #[test]
    fn grouped_form_matches_examples() {
        for (f, h) in [("2,1", "2,2"), ("2,1", "1,1,1"), ("2,1", "4,3"), ("2,1,1", "3,1,1,2"), ("1,1", "1,1,1")] {
            assert_eq!(induced_count_grouped(&p(f), &g(h)).unwrap(), induced_count(&p(f), &g(h)), "{f} in {h}");
        }
    }

    #[test]
    fn through_nonedge_examples() {
        assert_eq!(count_through_nonedge(&p("2,2"), &g("4,4"), 0).unwrap(), int(6));
        assert_eq!(count_through_nonedge(&p("2,1"), &g("2,2"), 0).unwrap(), int(2));
        assert_eq!(count_through_nonedge(&p("3,3"), &g("2,2"), 0).unwrap(), int(0));
        assert!(count_through_nonedge(&p("2,1"), &g("2,1"), 1).is_err());
    }

    #[test]
    fn through_edge_examples() {
        assert_eq!(count_through_edge(&p("2,1"), &g("3,2"), 0, 1).unwrap(), int(3));
        assert_eq!(count_through_edge(&p("2,2"), &g("2,2"), 0, 1).unwrap(), int(1));
        assert_eq!(count_through_edge(&p("1,1"), &g("2,2"), 0, 1).unwrap(), int(1));
        assert!(count_through_edge(&p("1,1"), &g("2,2"), 1, 1).is_err());
    }

    #[test]
    fn flip_pair_examples() {
        let f = p("2,1,1");
        let h = g("4,4,4,4,4");
        assert_eq!(count_flip_pair(&f, &h, FlipPair::SamePartAdded(0)).unwrap(), int(24));
        assert_eq!(count_flip_pair(&p("3,3"), &g("3,3,3"), FlipPair::CrossPartRemoved(0, 1)).unwrap(), int(0));
        assert_eq!(count_flip_pair(&p("2,2"), &g("2,2,2"), FlipPair::CrossPartRemoved(0, 1)).unwrap(), int(1));
    }

    #[test]
    fn flipped_total_examples() {
        assert_eq!(flipped_total(&p("2,2"), &g("2,2"), FlipPair::CrossPartRemoved(0, 1)).unwrap(), int(0));
        assert_eq!(flipped_total(&p("2,1"), &g("2,2"), FlipPair::SamePartAdded(0)).unwrap(), int(2));
    }

    #[test]
    fn apex_examples() {
        assert_eq!(count_with_apex(&p("2,1"), &g("2,2"), &[0, 1]).unwrap(), int(2));
        assert_eq!(count_with_apex(&p("2,2"), &g("2,2"), &[]).unwrap(), int(0));
        assert!(count_with_apex(&p("2,2"), &g("2,2"), &[0, 0]).is_err());
    }

    #[test]
    fn leading_term_examples() {
        assert_eq!(leading_term(&p("2,1"), 2), Rational::from_integer(int(1)));
        assert_eq!(leading_term(&p("2,2"), 2), Rational::new(int(1), int(4)));
        assert_eq!(leading_term(&p("2,1"), 1), Rational::from_integer(int(0)));
    }

    #[test]
    fn partition_parsing() {
        assert_eq!(g("(3, 4)").parts(), &[4, 3]);
        assert!("3,0".parse::<MultipartitePartition>().is_err());
        assert_eq!(g("()").k(), 0);
        assert!(g("3,2").without_indices(&[5]).is_err());
    }

    #[test]
    fn many_host_parts_are_fast() {
        let h = MultipartitePartition::new(vec![3; 10_000]).unwrap();
        let v = induced_count(&p("2,1"), &h);
        // choose the part hosting the pair, then a vertex elsewhere
        assert_eq!(v, int(10_000) * int(3) * int(29_997));
    }
}
