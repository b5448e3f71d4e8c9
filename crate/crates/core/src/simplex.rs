//! Points of the partite limit space, the polynomials `S_d` and `p_F`, the
//! merge/balance moves and a best-improvement symmetrization ascent.

use num_bigint::BigInt;
use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::counting::{class_dp, ClassIndex, HostTerm};
use crate::error::{Error, Result};
use crate::exactmath::{binomial, factorial};
use crate::landscape::{inducibility_clique_free, pattern_m};
use crate::profile::PatternSpec;
use crate::scalar::{BigFloat, Rational, Scalar};

/// Largest support accepted by the polynomial evaluators.
pub const MAX_SUPPORT: usize = 64;

/// Descending positive weights `x_1 >= ... >= x_s` plus residual mass `x_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitPoint<T: Scalar> {
    weights: Vec<T>,
    x0: T,
}

impl<T: Scalar> LimitPoint<T> {
    /// Builds a point from weights in any order; zero weights are dropped and
    /// `x_0 = 1 - sum`. Rejects negative weights and sums above one.
    pub fn new(weights: Vec<T>) -> Result<Self> {
        if weights.iter().any(|w| w.is_negative()) {
            return Err(Error::InvalidArgument("weights must be nonnegative".into()));
        }
        let mut weights: Vec<T> = weights.into_iter().filter(|w| !w.is_zero()).collect();
        sort_desc(&mut weights);
        let sum = weights.iter().fold(T::zero(), |a, b| a + b.clone());
        let x0 = T::one() - sum;
        if x0.is_negative() && (T::EXACT || x0.abs().to_f64() > T::MASS_SLACK) {
            return Err(Error::InvalidArgument(format!("weights sum to more than one (x0 = {x0})")));
        }
        let x0 = if x0.is_negative() { T::zero() } else { x0 };
        Ok(LimitPoint { weights, x0 })
    }

    /// The balanced point with `k` weights `1/k`.
    pub fn balanced(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("balanced point needs k >= 1".into()));
        }
        let w = T::from_ratio(1, k as i64);
        Ok(LimitPoint { weights: vec![w; k], x0: T::zero() })
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn x0(&self) -> &T {
        &self.x0
    }

    pub fn support_size(&self) -> usize {
        self.weights.len()
    }

    /// `sum weights + x_0`; one up to rounding.
    pub fn total_mass(&self) -> T {
        self.weights.iter().fold(self.x0.clone(), |a, b| a + b.clone())
    }

    /// Sup-norm distance to the balanced `k`-point, counting `x_0` as a coordinate.
    pub fn distance_to_balanced(&self, k: usize) -> T {
        let target = T::from_ratio(1, k as i64);
        let len = self.weights.len().max(k);
        let mut d = self.x0.abs();
        for i in 0..len {
            let w = self.weights.get(i).cloned().unwrap_or_else(T::zero);
            let t = if i < k { target.clone() } else { T::zero() };
            let diff = (w - t).abs();
            if diff > d {
                d = diff;
            }
        }
        d
    }

    /// Largest pairwise weight gap.
    pub fn spread(&self) -> T {
        match (self.weights.first(), self.weights.last()) {
            (Some(a), Some(b)) => a.clone() - b.clone(),
            _ => T::zero(),
        }
    }

    pub fn to_f64(&self) -> (Vec<f64>, f64) {
        (self.weights.iter().map(|w| w.to_f64()).collect(), self.x0.to_f64())
    }

    /// Same point in another scalar type, renormalized so the mass is exactly
    /// carried by `x_0`.
    pub fn convert<U: Scalar>(&self, conv: impl Fn(&T) -> U) -> LimitPoint<U> {
        let weights: Vec<U> = self.weights.iter().map(&conv).collect();
        let sum = weights.iter().fold(U::zero(), |a, b| a + b.clone());
        let x0 = U::one() - sum;
        let x0 = if x0.is_negative() { U::zero() } else { x0 };
        LimitPoint { weights, x0 }
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        let s = self.weights.len();
        if i == j || i >= s || j >= s {
            return Err(Error::InvalidArgument(format!(
                "move needs two distinct indices below the support size {s}, got ({i}, {j})"
            )));
        }
        Ok(())
    }

    fn replaced(&self, i: usize, j: usize, a: T, b: T) -> Self {
        let mut weights: Vec<T> =
            self.weights.iter().enumerate().filter(|(k, _)| *k != i && *k != j).map(|(_, w)| w.clone()).collect();
        for v in [a, b] {
            if !v.is_zero() {
                weights.push(v);
            }
        }
        sort_desc(&mut weights);
        LimitPoint { weights, x0: self.x0.clone() }
    }
}

fn sort_desc<T: PartialOrd>(v: &mut [T]) {
    v.sort_by(|a, b| b.partial_cmp(a).expect("weights are comparable"));
}

/// Replaces `(x_i, x_j)` with `(x_i + x_j, 0)`.
pub fn merge_move<T: Scalar>(p: &LimitPoint<T>, i: usize, j: usize) -> Result<LimitPoint<T>> {
    p.check_pair(i, j)?;
    let s = p.weights[i].clone() + p.weights[j].clone();
    Ok(p.replaced(i, j, s, T::zero()))
}

/// Replaces `(x_i, x_j)` with two copies of their mean.
pub fn balance_move<T: Scalar>(p: &LimitPoint<T>, i: usize, j: usize) -> Result<LimitPoint<T>> {
    p.check_pair(i, j)?;
    if p.weights[i] == p.weights[j] {
        return Ok(p.clone());
    }
    let h = (p.weights[i].clone() + p.weights[j].clone()) / T::from_int(2);
    Ok(p.replaced(i, j, h.clone(), h))
}

/// Moves all residual mass onto the largest weight.
pub fn absorb_move<T: Scalar>(p: &LimitPoint<T>) -> Result<LimitPoint<T>> {
    if p.weights.is_empty() {
        return Err(Error::InvalidArgument("absorption needs a nonempty support".into()));
    }
    let mut q = p.clone();
    q.weights[0] = q.weights[0].clone() + q.x0.clone();
    q.x0 = T::zero();
    Ok(q)
}

/// Replaces the residual mass by `k` new equal weights `x_0 / k`.
pub fn release_move<T: Scalar>(p: &LimitPoint<T>, k: usize) -> Result<LimitPoint<T>> {
    if k == 0 || p.support_size() + k > MAX_SUPPORT {
        return Err(Error::InvalidArgument(format!("cannot release residual into {k} parts")));
    }
    if p.x0.is_zero() {
        return Ok(p.clone());
    }
    let piece = p.x0.clone() / T::from_int(k as i64);
    let mut weights = p.weights.clone();
    weights.extend(std::iter::repeat_n(piece, k));
    sort_desc(&mut weights);
    Ok(LimitPoint { weights, x0: T::zero() })
}

/// `S_d(x)`: the sum over ordered tuples of distinct support indices of
/// `prod x_{i_j}^{d_j}`. `S` of the empty sequence is one.
pub fn s_poly<T: Scalar>(degrees: &[u64], p: &LimitPoint<T>) -> Result<T> {
    if p.support_size() > MAX_SUPPORT {
        return Err(Error::Infeasible(format!("support size {} exceeds {MAX_SUPPORT}", p.support_size())));
    }
    if degrees.is_empty() {
        return Ok(T::one());
    }
    let pattern = PatternSpec::new(degrees.to_vec())?;
    let idx = ClassIndex::new(&pattern);
    let hosts = power_hosts(&idx, p.weights());
    Ok(class_dp(&idx, &hosts, true)[idx.full()].clone())
}

fn power_hosts<T: Scalar>(idx: &ClassIndex, weights: &[T]) -> Vec<HostTerm<T>> {
    weights
        .iter()
        .map(|x| HostTerm { weights: idx.classes.iter().map(|c| x.powu(c.size as u32)).collect(), forced: false })
        .collect()
}

/// Pattern-dependent constants for repeated `p_F` evaluation.
#[derive(Debug, Clone)]
pub struct PfEvaluator {
    pattern: PatternSpec,
    idx: ClassIndex,
    /// `ell! / prod a_i!` (equals `kappa_F * sym(F)`).
    scale: Rational,
    /// State index of `F` minus `i` singleton parts, `i = 0..=sc(F)`.
    states: Vec<usize>,
    /// `1 / i!`.
    inv_fact: Vec<Rational>,
}

impl PfEvaluator {
    pub fn new(f: &PatternSpec) -> Self {
        let idx = ClassIndex::new(f);
        let denom: BigInt = f.sizes().iter().map(|&a| factorial(a)).product();
        let scale = Rational::new(factorial(f.ell()), denom);
        let sc = f.sc();
        let single = idx.classes.iter().position(|c| c.size == 1);
        let states = (0..=sc)
            .map(|i| match single {
                Some(c) => idx.full() - i * idx.stride(c),
                None => idx.full(),
            })
            .collect();
        let inv_fact = (0..=sc as u64).map(|i| Rational::new(BigInt::one(), factorial(i))).collect();
        PfEvaluator { pattern: f.clone(), idx, scale, states, inv_fact }
    }

    pub fn pattern(&self) -> &PatternSpec {
        &self.pattern
    }

    /// `p_F(x)` from one unordered class DP: pattern parts of equal size are
    /// placed without order, so `S` of a sub-pattern is the DP entry times the
    /// factorials of its class usages, which folds into `ell!/prod a_i!`.
    pub fn eval<T: Scalar>(&self, p: &LimitPoint<T>) -> Result<T> {
        if p.support_size() > MAX_SUPPORT {
            return Err(Error::Infeasible(format!("support size {} exceeds {MAX_SUPPORT}", p.support_size())));
        }
        let hosts = power_hosts(&self.idx, p.weights());
        let table = class_dp(&self.idx, &hosts, false);
        let mut acc = T::zero();
        let mut x0_pow = T::one();
        for (i, &s) in self.states.iter().enumerate() {
            if i > 0 {
                if p.x0().is_zero() {
                    break;
                }
                x0_pow = x0_pow * p.x0().clone();
            }
            acc = acc + x0_pow.clone() * T::from_rational(&self.inv_fact[i]) * table[s].clone();
        }
        Ok(T::from_rational(&self.scale) * acc)
    }
}

/// `p_F(x) = kappa_F sum_i binom(sc, i) x_0^i S_{a_1..a_{r-i}}(x)`.
pub fn p_f<T: Scalar>(f: &PatternSpec, p: &LimitPoint<T>) -> Result<T> {
    PfEvaluator::new(f).eval(p)
}

/// `p_F` evaluated term by term through [`s_poly`]; slower, used to check
/// [`p_f`].
pub fn p_f_by_terms<T: Scalar>(f: &PatternSpec, p: &LimitPoint<T>) -> Result<T> {
    let sc = f.sc();
    let mut acc = T::zero();
    for i in 0..=sc {
        let mut degrees = f.sizes().to_vec();
        degrees.truncate(f.r() - i);
        let c = binomial(&BigInt::from(sc), i as u32);
        let term = T::from_rational(&Rational::from_integer(c)) * p.x0().powu(i as u32) * s_poly(&degrees, p)?;
        acc = acc + term;
    }
    Ok(T::from_rational(&f.kappa()) * acc)
}

/// Kind of an ascent move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MoveKind {
    Merge,
    Balance,
    Absorb,
    /// Residual mass split into `j` new equal parts.
    Release,
}

/// One applied move: indices refer to the point before the move.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub kind: MoveKind,
    pub i: usize,
    pub j: usize,
    /// `p_F` after the move.
    pub value: f64,
}

/// How an ascent ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    /// No move improves by at least `tol`, and the point is balanced.
    Converged,
    /// No move improves by at least `tol`, but the weights are still spread.
    Plateau,
    /// The move budget ran out.
    MoveLimit,
}

#[derive(Debug, Clone)]
pub struct AscentResult<T: Scalar> {
    pub point: LimitPoint<T>,
    pub value: T,
    pub trace: Vec<TraceStep>,
    pub termination: Termination,
}

pub const MOVE_LIMIT: usize = 1_000_000;

/// Largest number of parts the residual mass is released into in one move.
pub const RELEASE_MAX: usize = 16;

/// Spread above which a stalled ascent is reported as a plateau.
pub const PLATEAU_SPREAD: f64 = 1e-6;

/// Best-improvement ascent over merge and balance moves on all support
/// pairs. While `x_0 > 0` it also tries absorbing `x_0` into the largest
/// weight and releasing it as `1..=RELEASE_MAX` new equal parts (without the
/// latter, patterns with singleton parts can strand mass in `x_0`). Stops
/// when the best improvement is below `tol`.
pub fn symmetrize_ascend<T: Scalar>(
    f: &PatternSpec,
    k_cap: Option<usize>,
    start: LimitPoint<T>,
    tol: &T,
) -> Result<AscentResult<T>> {
    ascend_with(&PfEvaluator::new(f), k_cap, start, tol, MOVE_LIMIT)
}

fn ascend_with<T: Scalar>(
    ev: &PfEvaluator,
    k_cap: Option<usize>,
    start: LimitPoint<T>,
    tol: &T,
    move_limit: usize,
) -> Result<AscentResult<T>> {
    if let Some(k) = k_cap {
        if start.support_size() > k || !start.x0().is_zero() {
            return Err(Error::Precondition(format!(
                "start must lie in the {k}-part simplex (support <= {k}, x0 = 0)"
            )));
        }
    }
    let mut point = start;
    let mut value = ev.eval(&point)?;
    let mut trace = Vec::new();
    loop {
        if trace.len() >= move_limit {
            return Ok(AscentResult { point, value, trace, termination: Termination::MoveLimit });
        }
        let mut best: Option<(LimitPoint<T>, T, MoveKind, usize, usize)> = None;
        let mut consider = |cand: LimitPoint<T>, kind: MoveKind, i: usize, j: usize| -> Result<()> {
            let v = ev.eval(&cand)?;
            if best.as_ref().is_none_or(|b| v > b.1) {
                best = Some((cand, v, kind, i, j));
            }
            Ok(())
        };
        let s = point.support_size();
        for i in 0..s {
            for j in (i + 1)..s {
                consider(merge_move(&point, i, j)?, MoveKind::Merge, i, j)?;
                if point.weights[i] != point.weights[j] {
                    consider(balance_move(&point, i, j)?, MoveKind::Balance, i, j)?;
                }
            }
        }
        if !point.x0().is_zero() {
            if s > 0 {
                consider(absorb_move(&point)?, MoveKind::Absorb, 0, 0)?;
            }
            for k in 1..=RELEASE_MAX.min(MAX_SUPPORT - s) {
                consider(release_move(&point, k)?, MoveKind::Release, 0, k)?;
            }
        }
        match best {
            Some((cand, v, kind, i, j)) if v.clone() - value.clone() >= *tol => {
                trace.push(TraceStep { kind, i, j, value: v.to_f64() });
                point = cand;
                value = v;
            }
            _ => {
                let termination = if point.spread().to_f64() > PLATEAU_SPREAD {
                    Termination::Plateau
                } else {
                    Termination::Converged
                };
                return Ok(AscentResult { point, value, trace, termination });
            }
        }
    }
}

/// Settings for [`certify_opt`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertifyConfig {
    /// Largest allowed support (the host is `K_{k+1}`-free); `None` for no cap.
    pub k_cap: Option<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Minimum improvement for a move to be taken, in the high-precision phase.
    pub improvement_tol: String,
    /// Sup-norm distance to the target point required for PASS.
    pub point_tol: f64,
    /// Value gap to the target value required for PASS.
    pub value_tol: f64,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        CertifyConfig {
            k_cap: None,
            trials: 200,
            seed: 0,
            improvement_tol: "1e-40".into(),
            point_tol: 1e-8,
            value_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TrialOutcome {
    pub trial: usize,
    pub start_support: usize,
    pub start_x0: f64,
    pub final_weights: Vec<f64>,
    pub final_x0: f64,
    pub value: String,
    pub distance: f64,
    pub value_gap: f64,
    pub moves: usize,
    pub termination: Termination,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CertifyReport {
    pub pattern: String,
    pub k_cap: Option<usize>,
    pub target_k: usize,
    /// Exact `kappa_F f(target_k)`.
    pub target_value: String,
    pub precision_digits: usize,
    pub improvement_tol: String,
    pub point_tol: f64,
    pub value_tol: f64,
    pub plateau_count: usize,
    pub trials: Vec<TrialOutcome>,
    pub pass: bool,
}

/// A random start: exponential spacings normalized to the available mass,
/// support between `min_support` and `max_support`, and a residual `x_0`
/// when `with_x0` is set.
fn random_start(rng: &mut ChaCha8Rng, min_support: usize, max_support: usize, with_x0: bool) -> LimitPoint<f64> {
    let s = rng.gen_range(min_support..=max_support);
    let x0 = if with_x0 { rng.gen_range(0.01..0.5) } else { 0.0 };
    let raw: Vec<f64> = (0..s).map(|_| -(1.0 - rng.gen::<f64>()).ln() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    let weights = raw.into_iter().map(|w| w / total * (1.0 - x0)).collect();
    LimitPoint::new(weights).expect("normalized weights")
}

/// Runs the ascent from `trials` seeded random starts and checks that each
/// run ends at the balanced `min(m, k_cap)`-point with value `kappa_F f(.)`.
///
/// Each run first ascends in `f64` (fast, stalls near `1e-8`), then finishes
/// in [`BigFloat`] at the configured precision.
pub fn certify_opt(f: &PatternSpec, cfg: &CertifyConfig) -> Result<CertifyReport> {
    let m = pattern_m(f)? as usize;
    let r = f.r();
    let target_k = cfg.k_cap.map_or(m, |k| k.min(m));
    if let Some(k) = cfg.k_cap {
        if k < r {
            return Err(Error::InvalidArgument(format!("k_cap = {k} below r = {r}")));
        }
    }
    let target_value = inducibility_clique_free(f, target_k as u64)?;
    let target_f = BigFloat::from_rational(&target_value);
    let ev = PfEvaluator::new(f);
    let max_support = cfg.k_cap.unwrap_or((2 * m).max(3 * r));
    let min_support = target_k.min(max_support);
    let tol = BigFloat::parse_decimal(&cfg.improvement_tol)?;

    let outcomes: Vec<Result<TrialOutcome>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(trial as u64);
            // a quarter of the uncapped starts carry residual mass
            let with_x0 = cfg.k_cap.is_none() && trial % 4 == 3;
            let start = random_start(&mut rng, min_support, max_support, with_x0);
            let start_support = start.support_size();
            let start_x0 = *start.x0();
            let rough = ascend_with(&ev, cfg.k_cap, start, &1e-15, MOVE_LIMIT)?;
            let fine_start = rough.point.convert(|w| BigFloat::from_f64_lossy(*w));
            let fine = ascend_with(&ev, cfg.k_cap, fine_start, &tol, MOVE_LIMIT - rough.trace.len())?;
            let distance = fine.point.distance_to_balanced(target_k).to_f64();
            let value_gap = (fine.value.clone() - target_f.clone()).abs().to_f64();
            let (final_weights, final_x0) = fine.point.to_f64();
            let pass = distance <= cfg.point_tol && value_gap <= cfg.value_tol;
            Ok(TrialOutcome {
                trial,
                start_support,
                start_x0,
                final_weights,
                final_x0,
                value: fine.value.to_decimal_string(30),
                distance,
                value_gap,
                moves: rough.trace.len() + fine.trace.len(),
                termination: if rough.termination == Termination::MoveLimit {
                    Termination::MoveLimit
                } else {
                    fine.termination
                },
                pass,
            })
        })
        .collect();
    let trials = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    let pass = trials.iter().all(|t| t.pass);
    let plateau_count = trials.iter().filter(|t| t.termination == Termination::Plateau).count();
    Ok(CertifyReport {
        pattern: f.literal(),
        k_cap: cfg.k_cap,
        target_k,
        target_value: target_value.to_string(),
        precision_digits: BigFloat::precision_digits(),
        improvement_tol: cfg.improvement_tol.clone(),
        point_tol: cfg.point_tol,
        value_tol: cfg.value_tol,
        plateau_count,
        trials,
        pass,
    })
}
