//! Run reports (canonical JSON, flattened CSV) and the named verification
//! suites that fill them.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::counting::MultipartitePartition;
use crate::error::{Error, Result};
use crate::landscape::m_star;
use crate::profile::PatternSpec;
use crate::scalar::{rational_to_f64, BigFloat, Rational};
use crate::verify::{
    adjustment_check, check_H_large, check_h_small, check_necessary, check_prepare_exact, delta_growth,
    mean_value_convergence, quintic_and_k1277, shift_suite, stability_premises, sweep_ratio_chain, RatioGrid,
};

pub const SCHEMA_VERSION: u32 = 1;

/// One exact quantity: lossless `numerator/denominator` plus a decimal view.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactValue {
    pub name: String,
    pub exact: String,
    pub decimal: String,
}

impl ExactValue {
    pub fn rational(name: &str, q: &Rational) -> Self {
        ExactValue {
            name: name.to_string(),
            exact: format!("{}/{}", q.numer(), q.denom()),
            decimal: format!("{:.12e}", rational_to_f64(q)),
        }
    }

    pub fn integer(name: &str, v: &BigInt) -> Self {
        ExactValue { name: name.to_string(), exact: v.to_string(), decimal: v.to_string() }
    }

    /// A rounded quantity (no exact form); `exact` holds the printed digits.
    pub fn approx(name: &str, digits: String) -> Self {
        ExactValue { name: name.to_string(), exact: digits.clone(), decimal: digits }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub parameters: BTreeMap<String, String>,
    pub values: Vec<ExactValue>,
    pub pass: bool,
    /// What failed, for every failing record.
    pub witness: Option<String>,
    /// The full structured result of the check.
    pub detail: serde_json::Value,
}

impl CheckRecord {
    pub fn new(name: &str, pass: bool) -> Self {
        CheckRecord {
            name: name.to_string(),
            parameters: BTreeMap::new(),
            values: Vec::new(),
            pass,
            witness: None,
            detail: serde_json::Value::Null,
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    pub fn value(mut self, v: ExactValue) -> Self {
        self.values.push(v);
        self
    }

    pub fn detail<T: Serialize>(mut self, d: &T) -> Self {
        self.detail = serde_json::to_value(d).unwrap_or(serde_json::Value::Null);
        self
    }

    /// Sets the witness when the record fails.
    pub fn witness_if_failed(mut self, w: impl FnOnce() -> String) -> Self {
        if !self.pass {
            self.witness = Some(w());
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub command: Vec<String>,
    pub seed: Option<u64>,
    pub precision_digits: usize,
    pub checks: Vec<CheckRecord>,
    /// Kept apart from everything else so reruns compare equal without it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

impl RunReport {
    pub fn new(command: Vec<String>, seed: Option<u64>) -> Self {
        RunReport {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            seed,
            precision_digits: BigFloat::precision_digits(),
            checks: Vec::new(),
            wall_time_ms: None,
        }
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Internal(format!("json: {e}")))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(format!("report json: {e}")))
    }

    /// One row per reported value: check, parameters, value name, exact, decimal, pass.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Error::Internal(format!("csv: {e}"));
        w.write_record(["check", "parameters", "value", "exact", "decimal", "pass"]).map_err(err)?;
        for c in &self.checks {
            let params = c.parameters.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";");
            let pass = if c.pass { "PASS" } else { "FAIL" };
            if c.values.is_empty() {
                w.write_record([c.name.as_str(), &params, "", "", "", pass]).map_err(err)?;
            }
            for v in &c.values {
                w.write_record([c.name.as_str(), &params, &v.name, &v.exact, &v.decimal, pass]).map_err(err)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Internal(format!("csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::Internal(format!("csv: {e}")))
    }
}

/// Verification suites runnable by name.
pub const SUITES: [&str; 9] =
    ["ratio", "h", "H", "prepare", "stability", "shift", "adjustment", "meanvalue", "section6"];

/// Runs one suite (or `all`) and returns its records.
pub fn run_suite(name: &str, seed: u64) -> Result<Vec<CheckRecord>> {
    match name {
        "ratio" => ratio_suite(),
        "h" => h_suite(),
        "H" => big_h_suite(),
        "prepare" => prepare_suite(),
        "stability" => stability_suite(),
        "shift" => shift_suite_records(seed),
        "adjustment" => adjustment_suite(),
        "meanvalue" => mean_value_suite(&[100, 1000, 10_000]),
        "section6" => counterexample_suite(),
        "all" => {
            let mut out = Vec::new();
            for s in SUITES {
                out.extend(run_suite(s, seed)?);
            }
            Ok(out)
        }
        other => Err(Error::InvalidArgument(format!("unknown suite {other:?}; expected one of {SUITES:?} or all"))),
    }
}

fn ratio_suite() -> Result<Vec<CheckRecord>> {
    let grid = RatioGrid::default();
    let rep = sweep_ratio_chain(grid)?;
    let rec = CheckRecord::new("ratio_chain_sweep", rep.pass)
        .param("grid", format!("k/{} for k=1..{}", grid.denom, grid.max_num))
        .param("b_max", grid.b_max)
        .value(ExactValue::integer("cells", &rep.cells.into()))
        .value(ExactValue::integer("tuples", &rep.tuples.len().into()))
        .value(ExactValue::integer("violations", &rep.violations.len().into()))
        .witness_if_failed(|| {
            format!(
                "ratio chain: {:?}; reduction: {:?}; midpoint bound: {:?}; g: {:?}; reduction equal at {:?}",
                rep.violations.first(),
                rep.reduction_violations.first(),
                rep.midpoint_violations.first(),
                rep.g_violations.first(),
                rep.reduction_equal_at
            )
        })
        .detail(&rep);
    Ok(vec![rec])
}

fn h_suite() -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    for r in 2..=8u64 {
        for ell in (r + 1)..=(2 * r - 1) {
            let rep = check_h_small(r, ell)?;
            out.push(
                CheckRecord::new("h_argmax", rep.pass)
                    .param("r", r)
                    .param("ell", ell)
                    .value(ExactValue::integer("m", &rep.m.into()))
                    .value(ExactValue::integer("h(m-1)", &rep.values[rep.m as usize - 1]))
                    .witness_if_failed(|| format!("h argmax at {:?}, expected {}", rep.argmax, rep.m - 1))
                    .detail(&rep),
            );
        }
    }
    Ok(out)
}

fn big_h_suite() -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    for r in 2..=8u64 {
        for ell in (2 * r)..=(3 * r) {
            let rep = check_H_large(r, ell)?;
            out.push(
                CheckRecord::new("H_argmax", rep.pass)
                    .param("r", r)
                    .param("ell", ell)
                    .value(ExactValue::integer("m", &rep.m.into()))
                    .value(ExactValue::integer("H(m-1)", &rep.values[rep.m as usize - 1]))
                    .witness_if_failed(|| format!("H argmax at {:?}, expected {}", rep.argmax, rep.m - 1))
                    .detail(&rep),
            );
        }
    }
    Ok(out)
}

/// All patterns with `2 <= r` parts on exactly `ell` vertices.
pub fn patterns_of_order(ell: u64) -> Vec<PatternSpec> {
    fn rec(left: u64, cap: u64, cur: &mut Vec<u64>, out: &mut Vec<PatternSpec>) {
        if left == 0 {
            if cur.len() >= 2 {
                out.push(PatternSpec::new(cur.clone()).expect("positive sizes"));
            }
            return;
        }
        for p in (1..=cap.min(left)).rev() {
            cur.push(p);
            rec(left - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(ell, ell, &mut Vec::new(), &mut out);
    out
}

fn prepare_suite() -> Result<Vec<CheckRecord>> {
    let mut checked = 0u64;
    let mut failures = Vec::new();
    for ell in 3..=16 {
        for f in patterns_of_order(ell) {
            if f.is_complete() || !f.is_almost_balanced() {
                continue;
            }
            checked += 1;
            if !check_prepare_exact(&f)? {
                failures.push(f.to_string());
            }
        }
    }
    let k1277: PatternSpec = "12,7,7".parse()?;
    let necessary = check_necessary(&k1277)?;
    Ok(vec![
        CheckRecord::new("prepare_exact_all_almost_balanced", failures.is_empty())
            .param("ell", "3..=16")
            .value(ExactValue::integer("patterns", &checked.into()))
            .witness_if_failed(|| format!("fails for {failures:?}")),
        CheckRecord::new("necessary_condition", necessary)
            .param("F", &k1277)
            .witness_if_failed(|| format!("{k1277} violates the necessary condition")),
    ])
}

/// Patterns and sizes used by the stability suite.
pub const STABILITY_PATTERNS: [&str; 3] = ["2,1", "2,2", "2,1,1"];

fn stability_suite() -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    for lit in STABILITY_PATTERNS {
        let f: PatternSpec = lit.parse()?;
        let m = m_star(f.r() as u64, f.ell())?;
        let a = stability_premises(&f, 30 * m)?;
        let b = stability_premises(&f, 60 * m)?;
        for rep in [&a, &b] {
            out.push(
                CheckRecord::new("stability_premises", rep.pass())
                    .param("F", &f)
                    .param("n", rep.n)
                    .value(ExactValue::integer(
                        "min_pair_delta",
                        &rep.pair_deltas.iter().map(|d| d.delta.clone()).min().unwrap_or_default(),
                    ))
                    .value(ExactValue::approx("eps_pairs", format!("{:.6e}", rep.eps_pairs)))
                    .value(ExactValue::approx("eps_apex", format!("{:.6e}", rep.eps_apex)))
                    .witness_if_failed(|| {
                        format!("pair deltas {:?}; apex counts {:?}", rep.pair_deltas, rep.apex_counts)
                    })
                    .detail(rep),
            );
        }
        let expected = 2f64.powi(f.ell() as i32 - 2);
        let growth = delta_growth(&a, &b);
        let ok = !growth.is_empty() && growth.iter().all(|(_, g)| (g / expected - 1.0).abs() < 0.1);
        let mut rec = CheckRecord::new("stability_delta_growth", ok).param("F", &f).param("expected", expected);
        for (pair, g) in &growth {
            rec = rec.value(ExactValue::approx(&format!("{pair:?}"), format!("{g:.6}")));
        }
        out.push(rec.witness_if_failed(|| format!("growth ratios {growth:?} vs {expected}")));
    }
    Ok(out)
}

fn shift_suite_records(seed: u64) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    for lit in ["2,2", "2,1,1"] {
        let f: PatternSpec = lit.parse()?;
        let rep = shift_suite(&f, 120, 50, seed)?;
        let min = rep.cases.iter().map(|(_, d)| d.clone()).min().unwrap_or_default();
        out.push(
            CheckRecord::new("shift_positivity", rep.pass)
                .param("F", &f)
                .param("n", 120)
                .param("cases", 50)
                .param("seed", seed)
                .value(ExactValue::integer("min_difference", &min))
                .witness_if_failed(|| {
                    let bad: Vec<String> =
                        rep.cases.iter().filter(|(_, d)| !d.is_positive()).map(|(g, d)| format!("{g}: {d}")).collect();
                    format!("non-positive shifts {bad:?}")
                })
                .detail(&rep),
        );
    }
    Ok(out)
}

fn adjustment_suite() -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    for (r, t) in [(2usize, 2u64), (2, 3), (3, 2)] {
        let f = PatternSpec::balanced(r, t)?;
        let mut checked = 0u64;
        let mut failures = Vec::new();
        for n in 2 * t..=24 {
            for g in partitions_with_min(n, t) {
                let p = g.parts();
                if p.len() < r || p[0] < p[p.len() - 1] + 2 {
                    continue;
                }
                checked += 1;
                if !adjustment_check(&f, &g)?.holds {
                    failures.push(g.to_string());
                }
            }
        }
        out.push(
            CheckRecord::new("adjustment", failures.is_empty())
                .param("F", &f)
                .param("n", "up to 24")
                .value(ExactValue::integer("hosts", &checked.into()))
                .witness_if_failed(|| format!("no improving adjustment for {failures:?}")),
        );
    }
    Ok(out)
}

/// Every partition of `n` whose parts are all at least `min`.
fn partitions_with_min(n: u64, min: u64) -> Vec<MultipartitePartition> {
    fn rec(left: u64, cap: u64, min: u64, cur: &mut Vec<u64>, out: &mut Vec<MultipartitePartition>) {
        if left == 0 {
            out.push(MultipartitePartition::new(cur.clone()).expect("positive parts"));
            return;
        }
        for p in (min..=cap.min(left)).rev() {
            cur.push(p);
            rec(left - p, p, min, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, min.max(1), &mut Vec::new(), &mut out);
    out
}

/// Mean-value expansions for all `1 <= s <= t <= 4` with gap 1.
pub fn mean_value_suite(ns: &[u64]) -> Result<Vec<CheckRecord>> {
    let gap = Rational::from_integer(1.into());
    let mut out = Vec::new();
    for s in 1..=4 {
        for t in s..=4 {
            let rep = mean_value_convergence(s, t, &gap, ns)?;
            let last = rep.rows.last().expect("nonempty");
            out.push(
                CheckRecord::new("mean_value", rep.pass)
                    .param("s", s)
                    .param("t", t)
                    .param("gap", &rep.gap)
                    .value(ExactValue::rational("single_limit", &rep.single_limit))
                    .value(ExactValue::rational("pair_limit", &rep.pair_limit))
                    .value(ExactValue::approx("single_err", format!("{:.3e}", last.single_err)))
                    .value(ExactValue::approx("pair_err", format!("{:.3e}", last.pair_err)))
                    .witness_if_failed(|| {
                        format!("errors at N = {}: {} and {}", last.n, last.single_err, last.pair_err)
                    })
                    .detail(&rep),
            );
        }
    }
    Ok(out)
}

fn counterexample_suite() -> Result<Vec<CheckRecord>> {
    let rep = quintic_and_k1277()?;
    Ok(vec![CheckRecord::new("quintic_k1277", rep.pass)
        .param("precision_digits", rep.precision_digits)
        .value(ExactValue::approx("root", format!("{:.9}", rep.root)))
        .value(ExactValue::approx("S_ratio", format!("{:.9}", rep.ratio)))
        .value(ExactValue::integer("k1277_margin", &rep.k1277_margin))
        .witness_if_failed(|| format!("{rep:?}"))
        .detail(&rep)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_round_trips_and_projects() {
        let mut r = RunReport::new(vec!["verify".into(), "h".into()], Some(3));
        r.checks = run_suite("h", 0).unwrap();
        assert!(r.pass());
        let json = r.to_json().unwrap();
        assert_eq!(RunReport::from_json(&json).unwrap(), r);
        let csv = r.to_csv().unwrap();
        assert!(csv.starts_with("check,parameters,value,exact,decimal,pass"));
        assert_eq!(csv.lines().count(), 1 + 2 * r.checks.len());
        assert!(run_suite("nope", 0).is_err());
    }

    #[test]
    fn exact_values_are_lossless() {
        let q = Rational::new(BigInt::from(-72), BigInt::from(125));
        let v = ExactValue::rational("i", &q);
        assert_eq!(v.exact, "-72/125");
        let (n, d) = v.exact.split_once('/').unwrap();
        assert_eq!(Rational::new(n.parse().unwrap(), d.parse().unwrap()), q);
    }

    #[test]
    fn patterns_of_small_order() {
        let names: Vec<String> = patterns_of_order(4).iter().map(|f| f.literal()).collect();
        assert_eq!(names, ["3,1", "2,2", "2,1,1", "1,1,1,1"]);
    }
}
