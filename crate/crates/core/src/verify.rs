//! Executable checks of the standalone inequalities and the finite-n
//! stability premises. Everything rational is evaluated exactly.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_with::{serde_as, DisplayFromStr};

use crate::counting::{count_with_apex, flipped_total, induced_count, FlipPair, MultipartitePartition};
use crate::error::{Error, Result};
use crate::exactmath::{binomial, binomial_int, factorial, falling_factorial};
use crate::landscape::m_star;
use crate::profile::{turan_sizes, PatternSpec};
use crate::roots::{largest_real_root, Polynomial};
use crate::scalar::{rational_to_f64, BigFloat, Rational, Scalar};
use crate::simplex::{s_poly, LimitPoint};

fn int(v: u64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

fn pow(q: &Rational, e: u64) -> Rational {
    num_traits::pow(q.clone(), e as usize)
}

/// `q^e` for a possibly negative exponent.
fn pow_signed(q: &Rational, e: i64) -> Rational {
    if e >= 0 {
        pow(q, e as u64)
    } else {
        pow(q, e.unsigned_abs()).recip()
    }
}

fn ratio_string(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

// ---------------------------------------------------------------------------
// ratio chain

fn mu(x: &Rational, y: &Rational, d: u64) -> Rational {
    pow(&(x + y), d) - pow(x, d) - pow(y, d)
}

fn omega(x: &Rational, y: &Rational, d: u64) -> Rational {
    let mid = (x + y) / int(2);
    pow(x, d) + pow(y, d) - int(2) * pow(&mid, d)
}

fn psi(x: &Rational, y: &Rational, d1: u64, d2: u64) -> Rational {
    pow(x, d1) * pow(y, d2) + pow(x, d2) * pow(y, d1)
}

fn phi(x: &Rational, y: &Rational, d1: u64, d2: u64) -> Rational {
    let mid = (x + y) / int(2);
    int(2) * pow(&mid, d1 + d2) - psi(x, y, d1, d2)
}

/// True for positive integers with `b >= t >= s >= a > binom(b - a, 2)`.
pub fn is_valid_tuple(a: u64, s: u64, t: u64, b: u64) -> bool {
    a >= 1 && b >= t && t >= s && s >= a && BigInt::from(a) > binomial_int(b - a, 2)
}

/// Inputs and derived quantities of the two-ratio chain.
#[serde_as]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioWitness {
    #[serde_as(as = "DisplayFromStr")]
    pub x: Rational,
    #[serde_as(as = "DisplayFromStr")]
    pub y: Rational,
    pub a: u64,
    pub s: u64,
    pub t: u64,
    pub b: u64,
    #[serde_as(as = "DisplayFromStr")]
    pub mu_a: Rational,
    #[serde_as(as = "DisplayFromStr")]
    pub mu_t: Rational,
    #[serde_as(as = "DisplayFromStr")]
    pub omega_a: Rational,
    #[serde_as(as = "DisplayFromStr")]
    pub omega_t: Rational,
    #[serde_as(as = "DisplayFromStr")]
    pub psi_st: Rational,
    #[serde_as(as = "DisplayFromStr")]
    pub phi_st: Rational,
}

impl RatioWitness {
    pub fn new(x: Rational, y: Rational, a: u64, s: u64, t: u64, b: u64) -> Result<Self> {
        if !x.is_positive() || !y.is_positive() {
            return Err(Error::Precondition(format!("x and y must be positive, got {x}, {y}")));
        }
        if x == y {
            return Err(Error::Precondition("x and y must differ".into()));
        }
        if !is_valid_tuple(a, s, t, b) {
            return Err(Error::Precondition(format!(
                "need b >= t >= s >= a > binom(b - a, 2), got a = {a}, s = {s}, t = {t}, b = {b}"
            )));
        }
        if a < 2 {
            // mu_1 = 0, so the ratios are undefined
            return Err(Error::Precondition("a = 1 makes mu_a vanish".into()));
        }
        Ok(RatioWitness {
            mu_a: mu(&x, &y, a),
            mu_t: mu(&x, &y, t),
            omega_a: omega(&x, &y, a),
            omega_t: omega(&x, &y, t),
            psi_st: psi(&x, &y, s, t),
            phi_st: phi(&x, &y, s, t),
            x,
            y,
            a,
            s,
            t,
            b,
        })
    }
}

#[serde_as]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioChainOutcome {
    /// `omega_t / mu_t <= omega_a / mu_a`.
    pub first: bool,
    /// The first comparison holds with equality.
    pub first_equal: bool,
    /// `omega_a / mu_a < phi_st / psi_st`.
    pub second: bool,
    #[serde_as(as = "DisplayFromStr")]
    pub omega_t_over_mu_t: Rational,
    #[serde_as(as = "DisplayFromStr")]
    pub omega_a_over_mu_a: Rational,
    #[serde_as(as = "DisplayFromStr")]
    pub phi_over_psi: Rational,
}

/// Evaluates `omega_t/mu_t <= omega_a/mu_a < phi_st/psi_st` exactly.
pub fn check_ratio_chain(w: &RatioWitness) -> RatioChainOutcome {
    let lo = &w.omega_t / &w.mu_t;
    let mid = &w.omega_a / &w.mu_a;
    let hi = &w.phi_st / &w.psi_st;
    RatioChainOutcome {
        first: lo <= mid,
        first_equal: lo == mid,
        second: mid < hi,
        omega_t_over_mu_t: lo,
        omega_a_over_mu_a: mid,
        phi_over_psi: hi,
    }
}

/// `2^{a-2} mu_a - (2^a - 2) x y (x+y)^{a-2}`; nonnegative, zero for `a` in {2, 3}.
pub fn reduction_gap(x: &Rational, y: &Rational, a: u64) -> Rational {
    let two = int(2);
    pow(&two, a - 2) * mu(x, y, a) - (pow(&two, a) - two) * x * y * pow(&(x + y), a - 2)
}

/// `2((x+y)/2)^{s+t-2} - x^{s-1} y^{t-1} - x^{t-1} y^{s-1}`; positive for `x != y`.
pub fn midpoint_gap(x: &Rational, y: &Rational, s: u64, t: u64) -> Rational {
    let mid = (x + y) / int(2);
    int(2) * pow(&mid, s + t - 2) - psi(x, y, s - 1, t - 1)
}

/// `g(z) = z^{t-1}(1-z)^{s-1} + z^{s-1}(1-z)^{t-1}`.
pub fn g_profile(z: &Rational, s: u64, t: u64) -> Rational {
    psi(z, &(Rational::one() - z), t - 1, s - 1)
}

/// Grid for [`sweep_ratio_chain`]: `x, y` range over `k / denom` for
/// `k = 1..=max_num`, tuples over `b <= b_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatioGrid {
    pub denom: u64,
    pub max_num: u64,
    pub b_max: u64,
    /// Resolution of the `g` profile scan on `(0, 1)`.
    pub g_steps: u64,
}

impl Default for RatioGrid {
    fn default() -> Self {
        RatioGrid { denom: 10, max_num: 30, b_max: 7, g_steps: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSweepReport {
    pub grid: RatioGrid,
    pub tuples: Vec<(u64, u64, u64, u64)>,
    pub cells: u64,
    /// Witnesses (as `x, y, a, s, t, b`) of any violation of either ratio.
    pub violations: Vec<String>,
    /// `(a, t)` pairs where the first ratio comparison was an equality.
    pub first_equalities: BTreeSet<(u64, u64)>,
    /// `a` values for which the reduction inequality was an exact equality at every grid point.
    pub reduction_equal_at: Vec<u64>,
    pub reduction_violations: Vec<String>,
    pub midpoint_violations: Vec<String>,
    /// `(s, t)` pairs whose `g` did not have its unique grid maximum at 1/2.
    pub g_violations: Vec<(u64, u64)>,
    pub pass: bool,
}

/// Sweeps the ratio chain and its two auxiliary inequalities over a grid.
pub fn sweep_ratio_chain(grid: RatioGrid) -> Result<RatioSweepReport> {
    if grid.denom == 0 || grid.max_num == 0 {
        return Err(Error::InvalidArgument("empty grid".into()));
    }
    let mut tuples = Vec::new();
    for b in 2..=grid.b_max {
        for t in 2..=b {
            for s in 2..=t {
                for a in 2..=s {
                    if is_valid_tuple(a, s, t, b) {
                        tuples.push((a, s, t, b));
                    }
                }
            }
        }
    }
    let values: Vec<Rational> = (1..=grid.max_num).map(|k| Rational::new(k.into(), grid.denom.into())).collect();
    let mut pairs = Vec::new();
    for i in 0..values.len() {
        for j in (i + 1)..values.len() {
            pairs.push((values[i].clone(), values[j].clone()));
        }
    }
    // all quantities are symmetric in x and y, so unordered pairs suffice
    struct Cell {
        violations: Vec<String>,
        equalities: BTreeSet<(u64, u64)>,
        reduction_strict: BTreeSet<u64>,
        reduction_violations: Vec<String>,
        midpoint_violations: Vec<String>,
    }
    let a_values: BTreeSet<u64> = tuples.iter().map(|t| t.0).collect();
    let st_values: BTreeSet<(u64, u64)> = tuples.iter().map(|t| (t.1, t.2)).collect();
    let cells: Vec<Cell> = pairs
        .par_iter()
        .map(|(x, y)| {
            let mut c = Cell {
                violations: Vec::new(),
                equalities: BTreeSet::new(),
                reduction_strict: BTreeSet::new(),
                reduction_violations: Vec::new(),
                midpoint_violations: Vec::new(),
            };
            for &(a, s, t, b) in &tuples {
                let w = RatioWitness::new(x.clone(), y.clone(), a, s, t, b).expect("valid tuple");
                let out = check_ratio_chain(&w);
                if !out.first || !out.second {
                    c.violations.push(format!("x={x}, y={y}, a={a}, s={s}, t={t}, b={b}"));
                }
                if out.first_equal {
                    c.equalities.insert((a, t));
                }
            }
            for &a in &a_values {
                let gap = reduction_gap(x, y, a);
                if gap.is_negative() {
                    c.reduction_violations.push(format!("x={x}, y={y}, a={a}"));
                } else if gap.is_positive() {
                    c.reduction_strict.insert(a);
                }
            }
            for &(s, t) in &st_values {
                if !midpoint_gap(x, y, s, t).is_positive() {
                    c.midpoint_violations.push(format!("x={x}, y={y}, s={s}, t={t}"));
                }
            }
            c
        })
        .collect();

    let mut violations = Vec::new();
    let mut first_equalities = BTreeSet::new();
    let mut strict = BTreeSet::new();
    let mut reduction_violations = Vec::new();
    let mut midpoint_violations = Vec::new();
    for c in cells {
        violations.extend(c.violations);
        first_equalities.extend(c.equalities);
        strict.extend(c.reduction_strict);
        reduction_violations.extend(c.reduction_violations);
        midpoint_violations.extend(c.midpoint_violations);
    }
    let reduction_equal_at: Vec<u64> = a_values.iter().copied().filter(|a| !strict.contains(a)).collect();

    let half = Rational::new(1.into(), 2.into());
    let mut g_violations = Vec::new();
    for &(s, t) in &st_values {
        let top = g_profile(&half, s, t);
        let unique = (1..grid.g_steps).all(|k| {
            let z = Rational::new(k.into(), grid.g_steps.into());
            z == half || g_profile(&z, s, t) < top
        });
        if !unique {
            g_violations.push((s, t));
        }
    }
    let pass = violations.is_empty()
        && reduction_violations.is_empty()
        && midpoint_violations.is_empty()
        && g_violations.is_empty()
        && reduction_equal_at.iter().all(|&a| a == 2 || a == 3);
    Ok(RatioSweepReport {
        grid,
        tuples,
        cells: pairs.len() as u64,
        violations,
        first_equalities,
        reduction_equal_at,
        reduction_violations,
        midpoint_violations,
        g_violations,
        pass,
    })
}

// ---------------------------------------------------------------------------
// apex profiles h and H

#[serde_as]
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileArgmaxReport {
    pub r: u64,
    pub ell: u64,
    pub m: u64,
    /// Values for `q = 0..=m`.
    #[serde_as(as = "Vec<DisplayFromStr>")]
    pub values: Vec<BigInt>,
    pub argmax: Vec<u64>,
    /// The unique argmax is `m - 1`.
    pub pass: bool,
}

fn argmax_report(r: u64, ell: u64, m: u64, values: Vec<BigInt>) -> ProfileArgmaxReport {
    let top = values.iter().max().cloned().unwrap_or_default();
    let argmax: Vec<u64> = values.iter().enumerate().filter(|(_, v)| **v == top).map(|(q, _)| q as u64).collect();
    let pass = argmax == vec![m - 1];
    ProfileArgmaxReport { r, ell, m, values, argmax, pass }
}

/// `h(q) = (q)_{r-1} (2r - ell + 2(m - q)(ell - r))` for `r < ell < 2r`.
pub fn check_h_small(r: u64, ell: u64) -> Result<ProfileArgmaxReport> {
    if r < 2 || ell < r + 1 || ell > 2 * r - 1 {
        return Err(Error::InvalidArgument(format!("need r + 1 <= ell <= 2r - 1, got r = {r}, ell = {ell}")));
    }
    let m = m_star(r, ell)?;
    let values = (0..=m)
        .map(|q| {
            let ff = falling_factorial(&BigInt::from(q), (r - 1) as u32);
            let tail = BigInt::from(2 * r) - BigInt::from(ell) + BigInt::from(2 * (m - q) * (ell - r));
            ff * tail
        })
        .collect();
    Ok(argmax_report(r, ell, m, values))
}

/// `H(q) = (m - q)(q)_{r-1}` for `ell >= 2r`.
#[allow(non_snake_case)]
pub fn check_H_large(r: u64, ell: u64) -> Result<ProfileArgmaxReport> {
    if r < 2 || ell < 2 * r {
        return Err(Error::InvalidArgument(format!("need ell >= 2r, got r = {r}, ell = {ell}")));
    }
    let m = m_star(r, ell)?;
    let values = (0..=m).map(|q| BigInt::from(m - q) * falling_factorial(&BigInt::from(q), (r - 1) as u32)).collect();
    Ok(argmax_report(r, ell, m, values))
}

// ---------------------------------------------------------------------------
// exactness conditions

/// `binom(ell, 2) - m sum_k binom(a_k, 2)`.
pub fn necessary_margin(f: &PatternSpec) -> Result<BigInt> {
    f.require_nontrivial()?;
    let m = m_star(f.r() as u64, f.ell())?;
    let inner: BigInt = f.sizes().iter().map(|&a| binomial_int(a, 2)).sum();
    Ok(binomial_int(f.ell(), 2) - BigInt::from(m) * inner)
}

/// `binom(ell, 2) > m sum_k binom(a_k, 2)` for almost balanced `F`.
pub fn check_prepare_exact(f: &PatternSpec) -> Result<bool> {
    if !f.is_almost_balanced() {
        return Err(Error::NotAlmostBalanced(f.to_string()));
    }
    Ok(necessary_margin(f)?.is_positive())
}

/// `binom(ell, 2) >= m sum_k binom(a_k, 2)`: necessary for the balanced
/// `m`-point to be the unique maximizer.
pub fn check_necessary(f: &PatternSpec) -> Result<bool> {
    Ok(!necessary_margin(f)?.is_negative())
}

// ---------------------------------------------------------------------------
// stability premises

#[serde_as]
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairDelta {
    pub pair: FlipPair,
    /// Host part sizes involved (one for a same-part pair, two for a cross pair).
    pub sizes: Vec<u64>,
    /// `I(F, G) - I(F, G with the pair flipped)`.
    #[serde_as(as = "DisplayFromStr")]
    pub delta: BigInt,
}

#[serde_as]
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApexCount {
    /// `|A|`.
    pub q: usize,
    /// How many of the chosen parts are of the larger size (uneven hosts).
    pub large_parts: usize,
    #[serde_as(as = "DisplayFromStr")]
    pub count: BigInt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub f: PatternSpec,
    pub n: u64,
    pub m: u64,
    pub host: MultipartitePartition,
    pub pair_deltas: Vec<PairDelta>,
    pub apex_counts: Vec<ApexCount>,
    /// Smallest pair delta over `n^{ell-2}`.
    pub eps_pairs: f64,
    /// Gap between the worst `q = m-1` apex count and the best other one, over `n^{ell-1}`.
    pub eps_apex: f64,
    pub s1_pass: bool,
    pub s2_pass: bool,
}

impl StabilityReport {
    pub fn pass(&self) -> bool {
        self.s1_pass && self.s2_pass
    }
}

/// Checks both finite-n premises on `T_m(n)`: every single pair flip loses
/// copies, and an extra vertex gains the most copies when joined to all but
/// one part. One representative per symmetry class is evaluated.
pub fn stability_premises(f: &PatternSpec, n: u64) -> Result<StabilityReport> {
    if !f.is_almost_balanced() {
        return Err(Error::NotAlmostBalanced(f.to_string()));
    }
    f.require_nontrivial()?;
    let (r, ell) = (f.r() as u64, f.ell());
    let m = m_star(r, ell)?;
    if n < m * ell {
        return Err(Error::Precondition(format!("need n >= m ell = {}, got {n}", m * ell)));
    }
    let g = turan_sizes(m as usize, n)?;
    let parts = g.parts();
    let base = induced_count(f, &g);

    // representatives: first part of each size; two parts per size combination
    let sizes: Vec<u64> = {
        let mut s: Vec<u64> = parts.to_vec();
        s.dedup();
        s
    };
    let first_of = |size: u64| parts.iter().position(|&p| p == size).expect("size present");
    let mut pairs = Vec::new();
    for &sz in &sizes {
        if sz >= 2 {
            pairs.push((FlipPair::SamePartAdded(first_of(sz)), vec![sz]));
        }
    }
    for (i, &s1) in sizes.iter().enumerate() {
        for &s2 in &sizes[i..] {
            let p1 = first_of(s1);
            let p2 = if s1 == s2 {
                match parts.iter().enumerate().skip(p1 + 1).find(|(_, &p)| p == s2) {
                    Some((j, _)) => j,
                    None => continue,
                }
            } else {
                first_of(s2)
            };
            pairs.push((FlipPair::CrossPartRemoved(p1, p2), vec![s1, s2]));
        }
    }
    let pair_deltas = pairs
        .into_iter()
        .map(|(pair, sizes)| Ok(PairDelta { pair, sizes, delta: &base - flipped_total(f, &g, pair)? }))
        .collect::<Result<Vec<_>>>()?;

    // apex: parts of the larger size come first in the descending host
    let large = parts.iter().filter(|&&p| p == parts[0]).count();
    let small = parts.len() - large;
    let mut apex_counts = Vec::new();
    for q in 0..=parts.len() {
        for lq in 0..=q.min(large) {
            if q - lq > small {
                continue;
            }
            let chosen: Vec<usize> = (0..lq).chain(large..large + (q - lq)).collect();
            apex_counts.push(ApexCount { q, large_parts: lq, count: count_with_apex(f, &g, &chosen)? });
        }
    }

    let min_delta = pair_deltas.iter().map(|d| d.delta.clone()).min().unwrap_or_default();
    let s1_pass = pair_deltas.iter().all(|d| d.delta.is_positive());
    let target = m as usize - 1;
    let best_target = apex_counts.iter().filter(|a| a.q == target).map(|a| a.count.clone()).min();
    let best_other = apex_counts.iter().filter(|a| a.q != target).map(|a| a.count.clone()).max();
    let (s2_pass, gap) = match (best_target, best_other) {
        (Some(t), Some(o)) => (t > o, t - o),
        _ => (false, BigInt::zero()),
    };
    let nf = n as f64;
    Ok(StabilityReport {
        f: f.clone(),
        n,
        m,
        host: g.clone(),
        eps_pairs: rational_to_f64(&Rational::from_integer(min_delta)) / nf.powi(ell as i32 - 2),
        eps_apex: rational_to_f64(&Rational::from_integer(gap)) / nf.powi(ell as i32 - 1),
        pair_deltas,
        apex_counts,
        s1_pass,
        s2_pass,
    })
}

/// `Delta(n2) / Delta(n1)` for each pair class present at both sizes.
pub fn delta_growth(a: &StabilityReport, b: &StabilityReport) -> Vec<(FlipPair, f64)> {
    a.pair_deltas
        .iter()
        .filter_map(|da| {
            b.pair_deltas.iter().find(|db| db.pair == da.pair && db.sizes.len() == da.sizes.len()).map(|db| {
                let q = Rational::new(db.delta.clone(), da.delta.clone());
                (da.pair, rational_to_f64(&q))
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// shifting and adjustment

/// The host with one vertex moved from the largest to the smallest part.
pub fn shifted(g: &MultipartitePartition) -> Result<MultipartitePartition> {
    let p = g.parts();
    if p.len() < 2 || p[0] < p[p.len() - 1] + 2 {
        return Err(Error::Precondition(format!("{g} needs at least two parts with n_1 >= n_k + 2")));
    }
    let mut q = p.to_vec();
    q[0] -= 1;
    *q.last_mut().expect("two parts") += 1;
    MultipartitePartition::new(q)
}

/// `I(F, shifted) - I(F, g)`.
pub fn shift_comparison(f: &PatternSpec, g: &MultipartitePartition) -> Result<BigInt> {
    let s = shifted(g)?;
    Ok(induced_count(f, &s) - induced_count(f, g))
}

/// `m`-part partitions of `n` near `T_m(n)` with spread at least 2, from a
/// seeded generator: random single-vertex transfers applied to `T_m(n)`.
pub fn random_near_balanced(m: usize, n: u64, count: usize, seed: u64) -> Result<Vec<MultipartitePartition>> {
    let base = turan_sizes(m, n)?;
    if m < 2 || n < 2 * m as u64 {
        return Err(Error::InvalidArgument(format!("need m >= 2 and n >= 2m, got m = {m}, n = {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut parts = base.parts().to_vec();
        let moves = rng.gen_range(1..=3 * m);
        for _ in 0..moves {
            let i = rng.gen_range(0..m);
            let j = rng.gen_range(0..m);
            if i != j && parts[i] > 1 {
                parts[i] -= 1;
                parts[j] += 1;
            }
        }
        let g = MultipartitePartition::new(parts)?;
        let p = g.parts();
        if p[0] >= p[p.len() - 1] + 2 {
            out.push(g);
        }
    }
    Ok(out)
}

#[serde_as]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftSuiteReport {
    pub f: PatternSpec,
    pub n: u64,
    pub m: u64,
    pub seed: u64,
    #[serde_as(as = "Vec<(_, DisplayFromStr)>")]
    pub cases: Vec<(MultipartitePartition, BigInt)>,
    pub pass: bool,
}

/// [`shift_comparison`] on `count` random near-balanced `m`-part hosts.
pub fn shift_suite(f: &PatternSpec, n: u64, count: usize, seed: u64) -> Result<ShiftSuiteReport> {
    f.require_nontrivial()?;
    let m = m_star(f.r() as u64, f.ell())?;
    let hosts = random_near_balanced(m as usize, n, count, seed)?;
    let cases = hosts.into_par_iter().map(|g| shift_comparison(f, &g).map(|d| (g, d))).collect::<Result<Vec<_>>>()?;
    let pass = cases.iter().all(|(_, d)| d.is_positive());
    Ok(ShiftSuiteReport { f: f.clone(), n, m, seed, cases, pass })
}

#[serde_as]
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdjustmentOutcome {
    #[serde_as(as = "DisplayFromStr")]
    pub base: BigInt,
    #[serde_as(as = "DisplayFromStr")]
    pub shifted: BigInt,
    #[serde_as(as = "DisplayFromStr")]
    pub merged: BigInt,
    /// `base < max(shifted, merged)`.
    pub holds: bool,
}

/// For balanced `F = K_r(t)`: a host with `k >= r` parts, `a_1 >= a_k + 2`
/// and all parts at least `t` is beaten either by shifting one vertex from the largest to the
/// smallest part or by merging those two parts.
pub fn adjustment_check(f: &PatternSpec, g: &MultipartitePartition) -> Result<AdjustmentOutcome> {
    let t = f.smallest();
    if f.r() < 2 || f.largest() != t {
        return Err(Error::Precondition(format!("{f} is not a balanced pattern K_r(t)")));
    }
    if g.k() < f.r() {
        return Err(Error::Precondition(format!("{g} has fewer than {} parts, so it holds no copy of {f}", f.r())));
    }
    if g.parts().iter().any(|&p| p < t) {
        return Err(Error::Precondition(format!("every part of {g} must have at least {t} vertices")));
    }
    let s = shifted(g)?;
    let p = g.parts();
    let mut merged = p[1..p.len() - 1].to_vec();
    merged.push(p[0] + p[p.len() - 1]);
    let merged = MultipartitePartition::new(merged)?;
    let base = induced_count(f, g);
    let shifted = induced_count(f, &s);
    let merged = induced_count(f, &merged);
    let holds = base < shifted.clone().max(merged.clone());
    Ok(AdjustmentOutcome { base, shifted, merged, holds })
}

// ---------------------------------------------------------------------------
// mean-value asymptotics

#[serde_as]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanValueRow {
    pub n: u64,
    /// `binom(x+1,s) + binom(y-1,s) - binom(x,s) - binom(y,s)`.
    #[serde_as(as = "DisplayFromStr")]
    pub single: Rational,
    /// The two-binomial analogue with `t` and `s`.
    #[serde_as(as = "DisplayFromStr")]
    pub pair: Rational,
    /// `single / N^{s-2}`.
    pub single_ratio: f64,
    /// `pair / N^{t+s-2}`.
    pub pair_ratio: f64,
    pub single_err: f64,
    pub pair_err: f64,
}

#[serde_as]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanValueReport {
    pub s: u64,
    pub t: u64,
    #[serde_as(as = "DisplayFromStr")]
    pub gap: Rational,
    /// `-s(s-1)/s! * gap`.
    #[serde_as(as = "DisplayFromStr")]
    pub single_limit: Rational,
    /// `(t+s-(t-s)^2)/(s!t!) * gap`.
    #[serde_as(as = "DisplayFromStr")]
    pub pair_limit: Rational,
    pub rows: Vec<MeanValueRow>,
    pub pass: bool,
}

/// Error of `ratio` against `limit`: relative when the limit is nonzero,
/// otherwise measured against `scale`, the size of the cancelling terms.
fn limit_error(ratio: &Rational, limit: &Rational, scale: &Rational) -> f64 {
    if limit.is_zero() {
        if scale.is_zero() {
            return rational_to_f64(&ratio.abs());
        }
        return rational_to_f64(&(ratio.abs() / scale));
    }
    rational_to_f64(&((ratio - limit) / limit).abs())
}

/// Tolerance on the error at the largest `N`.
pub const MEAN_VALUE_TOL: f64 = 0.01;

/// Exact left sides of the two mean-value expansions at `x = N`,
/// `y = N + 1 + gap`, scaled by their predicted orders.
pub fn mean_value_convergence(s: u64, t: u64, gap: &Rational, ns: &[u64]) -> Result<MeanValueReport> {
    if s < 1 || t < s {
        return Err(Error::InvalidArgument(format!("need t >= s >= 1, got s = {s}, t = {t}")));
    }
    if !gap.is_positive() {
        return Err(Error::InvalidArgument("gap must be positive".into()));
    }
    if ns.is_empty() {
        return Err(Error::InvalidArgument("empty N list".into()));
    }
    let (si, ti) = (s as u32, t as u32);
    let sf = Rational::from_integer(factorial(s));
    let tf = Rational::from_integer(factorial(t));
    let single_limit = -(int(s) * int(s - 1)) / sf.clone() * gap;
    let diff = s.abs_diff(t);
    let pair_limit = (int(t + s) - int(diff * diff)) / (sf.clone() * tf.clone()) * gap;
    let pair_scale = (int(t + s) + int(diff * diff)) / (sf.clone() * tf) * gap;
    let single_scale = int(s) * int(s - 1) / sf * gap;
    let one = Rational::one();
    let rows: Vec<MeanValueRow> = ns
        .iter()
        .map(|&n| {
            let x = int(n);
            let y = &x + &one + gap;
            let b = |z: &Rational, k: u32| binomial(z, k);
            let single = b(&(&x + &one), si) + b(&(&y - &one), si) - b(&x, si) - b(&y, si);
            let pair = b(&(&x + &one), ti) * b(&(&y - &one), si) + b(&(&x + &one), si) * b(&(&y - &one), ti)
                - b(&x, ti) * b(&y, si)
                - b(&x, si) * b(&y, ti);
            let sr = &single / pow_signed(&x, s as i64 - 2);
            let pr = &pair / pow_signed(&x, (t + s) as i64 - 2);
            MeanValueRow {
                n,
                single_err: limit_error(&sr, &single_limit, &single_scale),
                pair_err: limit_error(&pr, &pair_limit, &pair_scale),
                single_ratio: rational_to_f64(&sr),
                pair_ratio: rational_to_f64(&pr),
                single,
                pair,
            }
        })
        .collect();
    let last = rows.iter().max_by_key(|r| r.n).expect("nonempty");
    let pass = last.single_err < MEAN_VALUE_TOL && last.pair_err < MEAN_VALUE_TOL;
    Ok(MeanValueReport { s, t, gap: gap.clone(), single_limit, pair_limit, rows, pass })
}

// ---------------------------------------------------------------------------
// the K_{12,7,7} counterexample

#[serde_as]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    /// Bracket around the largest real root of the quintic.
    pub root_lo: String,
    pub root_hi: String,
    pub root: f64,
    pub residual: f64,
    pub precision_digits: usize,
    /// `S_{12,7,7}` at `(alpha, (1-alpha)/2, (1-alpha)/2)`.
    pub s_alpha: String,
    /// `S_{12,7,7}` at the balanced 3-point.
    pub s_balanced: String,
    pub ratio: f64,
    /// Whether `K_{4,8,8}` is almost balanced (it is not).
    pub k488_almost_balanced: bool,
    /// `binom(ell,2) - m sum binom(a_k,2)` for `K_{12,7,7}`.
    #[serde_as(as = "DisplayFromStr")]
    pub k1277_margin: BigInt,
    pub pass: bool,
}

/// Coefficients of `130x^5 + 25x^4 - 90x^3 + 80x^2 - 40x + 7`, highest first.
pub const QUINTIC: [i64; 6] = [130, 25, -90, 80, -40, 7];

/// Isolates the quintic's largest real root to `1e-12`, then compares
/// `S_{12,7,7}` at the root's point with the balanced 3-point in
/// [`BigFloat`] at the current precision.
pub fn quintic_and_k1277() -> Result<CounterexampleReport> {
    let poly = Polynomial::from_integers_desc(&QUINTIC);
    let tol = Rational::new(1.into(), BigInt::from(10u64).pow(12));
    let (lo, hi) = largest_real_root(&poly, &tol)?;
    let mid = (&lo + &hi) / int(2);
    let residual = rational_to_f64(&poly.eval(&mid)).abs();

    let alpha = BigFloat::from_rational(&mid);
    let rest = (BigFloat::one() - alpha.clone()) / BigFloat::from_int(2);
    let alpha_point = LimitPoint::new(vec![alpha, rest.clone(), rest])?;
    let third = BigFloat::from_ratio(1, 3);
    let balanced = LimitPoint::new(vec![third.clone(), third.clone(), third])?;
    let degrees = [12, 7, 7];
    let s_alpha = s_poly(&degrees, &alpha_point)?;
    let s_balanced = s_poly(&degrees, &balanced)?;
    let ratio = (s_alpha.clone() / s_balanced.clone()).to_f64();

    let k488: PatternSpec = "4,8,8".parse()?;
    let k1277: PatternSpec = "12,7,7".parse()?;
    let k1277_margin = necessary_margin(&k1277)?;
    let root = rational_to_f64(&mid);
    let pass = (root - 0.396884).abs() < 1e-6
        && residual < 1e-10
        && s_alpha > s_balanced
        && !k488.is_almost_balanced()
        && k1277_margin.is_positive();
    Ok(CounterexampleReport {
        root_lo: ratio_string(&lo),
        root_hi: ratio_string(&hi),
        root,
        residual,
        precision_digits: BigFloat::precision_digits(),
        s_alpha: s_alpha.to_decimal_string(20),
        s_balanced: s_balanced.to_decimal_string(20),
        ratio,
        k488_almost_balanced: k488.is_almost_balanced(),
        k1277_margin,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn p(s: &str) -> PatternSpec {
        s.parse().unwrap()
    }

    fn g(s: &str) -> MultipartitePartition {
        s.parse().unwrap()
    }

    #[test]
    fn ratio_chain_example() {
        let w = RatioWitness::new(q(1, 1), q(2, 1), 2, 2, 3, 3).unwrap();
        assert_eq!(w.mu_a, q(4, 1));
        assert_eq!(w.omega_a, q(1, 2));
        assert_eq!(w.mu_t, q(18, 1));
        assert_eq!(w.omega_t, q(9, 4));
        assert_eq!(w.psi_st, q(12, 1));
        assert_eq!(w.phi_st, q(51, 16));
        let out = check_ratio_chain(&w);
        assert!(out.first && out.first_equal && out.second);
        assert_eq!(out.omega_a_over_mu_a, q(1, 8));
        assert_eq!(out.phi_over_psi, q(17, 64));
    }

    #[test]
    fn ratio_chain_near_equal_and_guard() {
        let x = q(1, 1);
        let y = q(10001, 10000);
        for b in 2..=7 {
            for t in 2..=b {
                for s in 2..=t {
                    for a in 2..=s {
                        if is_valid_tuple(a, s, t, b) {
                            let out = check_ratio_chain(&RatioWitness::new(x.clone(), y.clone(), a, s, t, b).unwrap());
                            assert!(out.first && out.second, "a={a} s={s} t={t} b={b}");
                        }
                    }
                }
            }
        }
        assert!(RatioWitness::new(q(1, 1), q(2, 1), 2, 3, 5, 5).is_err());
        assert!(RatioWitness::new(q(1, 1), q(1, 1), 2, 2, 2, 2).is_err());
    }

    #[test]
    fn reduction_equality_at_two_and_three() {
        for (x, y) in [(q(1, 3), q(5, 2)), (q(7, 10), q(1, 1))] {
            assert!(reduction_gap(&x, &y, 2).is_zero());
            assert!(reduction_gap(&x, &y, 3).is_zero());
            assert!(reduction_gap(&x, &y, 4).is_positive());
        }
    }

    #[test]
    fn small_sweep_passes() {
        let rep = sweep_ratio_chain(RatioGrid { denom: 4, max_num: 8, b_max: 5, g_steps: 20 }).unwrap();
        assert!(rep.pass, "{:?}", rep.violations);
        assert_eq!(rep.reduction_equal_at, vec![2, 3]);
        assert!(rep.first_equalities.contains(&(2, 3)));
    }

    /// Apex counts on `T_m(mk)`, divided by `k^(ell-1)` and the pattern's
    /// normalizer, approach the h / H profiles.
    #[test]
    fn profiles_are_leading_apex_coefficients() {
        use crate::exactmath::factorial;
        let k = 2000u64;
        let scaled = |f: &PatternSpec, m: u64, q: usize, norm: &Rational| {
            let host = crate::profile::turan_sizes(m as usize, m * k).unwrap();
            let apex: Vec<usize> = (0..q).collect();
            let c = count_with_apex(f, &host, &apex).unwrap();
            rational_to_f64(&(Rational::from_integer(c) / int(k).pow(f.ell() as i32 - 1) * norm))
        };
        for lit in ["2,1", "2,1,1", "2,2,1", "2,1,1,1", "2,2,1,1"] {
            let f = p(lit);
            let (r, ell) = (f.r() as u64, f.ell());
            let rep = check_h_small(r, ell).unwrap();
            let norm = int(2).pow(ell as i32 - r as i32) * factorial(ell - r) * factorial(2 * r - ell);
            let top = rational_to_f64(&Rational::from_integer(rep.values[rep.m as usize - 1].clone()));
            for q in 0..=rep.m as usize {
                let want = rational_to_f64(&Rational::from_integer(rep.values[q].clone()));
                let got = scaled(&f, rep.m, q, &norm);
                assert!((got - want).abs() < 0.01 * top, "{f}, q = {q}: {got} vs h = {want}");
            }
        }
        for lit in ["2,2", "3,2", "2,2,2", "3,3,2"] {
            let f = p(lit);
            let (r, ell) = (f.r() as u64, f.ell());
            let rep = check_H_large(r, ell).unwrap();
            let den: BigInt = f.sizes().iter().map(|&a| factorial(a)).product::<BigInt>() * f.sym();
            let norm = Rational::new(den, BigInt::from(ell));
            let top = rational_to_f64(&Rational::from_integer(rep.values[rep.m as usize - 1].clone()));
            for q in 0..=rep.m as usize {
                let want = rational_to_f64(&Rational::from_integer(rep.values[q].clone()));
                let got = scaled(&f, rep.m, q, &norm);
                assert!((got - want).abs() < 0.01 * top, "{f}, q = {q}: {got} vs H = {want}");
            }
        }
    }

    #[test]
    fn h_and_big_h_examples() {
        let h = check_h_small(3, 4).unwrap();
        assert_eq!(h.values, [0, 0, 16, 36, 48, 40].map(BigInt::from).to_vec());
        assert_eq!(h.argmax, vec![4]);
        assert!(h.pass);
        assert_eq!(check_h_small(2, 3).unwrap().argmax, vec![1]);
        assert_eq!(check_h_small(4, 5).unwrap().argmax, vec![7]);
        assert!(check_h_small(3, 6).is_err());

        let big = check_H_large(2, 4).unwrap();
        assert_eq!(big.values, [0, 1, 0].map(BigInt::from).to_vec());
        assert_eq!(big.argmax, vec![1]);
        let big = check_H_large(3, 6).unwrap();
        assert_eq!(big.values[2], BigInt::from(2));
        assert!(big.pass);
        assert!(check_H_large(2, 5).unwrap().pass);
        assert!(check_H_large(3, 5).is_err());
    }

    #[test]
    fn exactness_conditions() {
        assert!(check_prepare_exact(&p("2,1,1")).unwrap());
        assert!(check_prepare_exact(&p("2,1")).unwrap());
        assert!(check_necessary(&p("12,7,7")).unwrap());
        assert_eq!(necessary_margin(&p("12,7,7")).unwrap(), BigInt::from(1));
        assert!(check_prepare_exact(&p("3,1")).is_err());
    }

    #[test]
    fn stability_examples() {
        let rep = stability_premises(&p("2,1,1"), 60).unwrap();
        assert!(rep.pass());
        let best = rep.apex_counts.iter().max_by_key(|a| a.count.clone()).unwrap();
        assert_eq!(best.q, 4);

        let rep = stability_premises(&p("2,2"), 40).unwrap();
        assert!(rep.s1_pass);
        assert!(rep.pair_deltas.iter().any(|d| matches!(d.pair, FlipPair::SamePartAdded(_)) && d.delta.is_positive()));
        // with a_r >= 2 the apex gains nothing at q = m or q <= r - 2
        for a in &rep.apex_counts {
            if a.q == 2 || a.q == 0 {
                assert!(a.count.is_zero(), "{a:?}");
            }
        }

        let rep = stability_premises(&p("2,1"), 30).unwrap();
        assert!(rep
            .pair_deltas
            .iter()
            .any(|d| matches!(d.pair, FlipPair::CrossPartRemoved(..)) && d.delta.is_positive()));
        assert!(rep.pass());
        assert!(stability_premises(&p("2,1"), 5).is_err());
    }

    #[test]
    fn stability_on_uneven_host() {
        let rep = stability_premises(&p("2,1,1"), 62).unwrap();
        assert_eq!(rep.host, g("13,13,12,12,12"));
        assert!(rep.pass());
        // cross pairs for (13,13), (13,12), (12,12); same-part pairs for 13 and 12
        assert_eq!(rep.pair_deltas.len(), 5);
    }

    #[test]
    fn shift_examples() {
        assert_eq!(shift_comparison(&p("2,2"), &g("12,8")).unwrap(), BigInt::from(132));
        assert_eq!(shift_comparison(&p("2,1"), &g("5,3")).unwrap(), BigInt::from(3));
        assert!(shift_comparison(&p("2,2"), &g("10,10")).is_err());
        let hosts = random_near_balanced(5, 120, 20, 7).unwrap();
        assert!(hosts.iter().all(|h| h.k() == 5 && h.n() == 120 && h.parts()[0] >= h.parts()[4] + 2));
        assert_eq!(hosts, random_near_balanced(5, 120, 20, 7).unwrap());
    }

    #[test]
    fn adjustment_examples() {
        let out = adjustment_check(&p("2,2"), &g("6,2")).unwrap();
        assert_eq!((out.base.clone(), out.shifted.clone(), out.merged.clone()), (15.into(), 30.into(), 0.into()));
        assert!(out.holds);
        let out = adjustment_check(&p("3,3"), &g("7,3")).unwrap();
        assert!(out.holds);
        assert!(out.shifted > out.base);
        assert!(adjustment_check(&p("2,1"), &g("6,2")).is_err());
        assert!(adjustment_check(&p("2,2"), &g("5,4")).is_err());
        assert!(adjustment_check(&p("2,2,2"), &g("6,2")).is_err());
    }

    #[test]
    fn mean_value_examples() {
        let ns = [100, 1000, 10_000];
        let rep = mean_value_convergence(2, 2, &q(1, 1), &ns).unwrap();
        assert_eq!(rep.single_limit, q(-1, 1));
        assert_eq!(rep.pair_limit, q(1, 1));
        assert!(rep.pass);
        let rep = mean_value_convergence(1, 3, &q(1, 1), &ns).unwrap();
        assert!(rep.rows.iter().all(|r| r.single.is_zero()));
        let rep = mean_value_convergence(2, 4, &q(1, 1), &ns).unwrap();
        assert_eq!(rep.pair_limit, q(1, 24));
        assert!(rep.pass);
    }

    #[test]
    fn quintic_and_counterexample_checks() {
        let rep = quintic_and_k1277().unwrap();
        assert!((rep.root - 0.396884).abs() < 1e-6);
        assert!(rep.residual < 1e-10);
        assert!(rep.ratio > 1.001, "{}", rep.ratio);
        assert!(!rep.k488_almost_balanced);
        assert!(rep.pass);
    }
}
