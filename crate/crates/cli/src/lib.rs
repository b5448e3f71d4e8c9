//! Command-line surface: argument parsing, report assembly and exit codes.
//!
//! Exit codes: 0 success, 1 a verification failed, 2 usage or input error.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use inducibility::exactmath::binomial_int;
use inducibility::landscape::{inducibility as closed_form, inducibility_clique_free, m_bounds, pattern_m};
use inducibility::oracle::{best_graph_exhaustive, best_partition};
use inducibility::report::{run_suite, CheckRecord, ExactValue, RunReport};
use inducibility::simplex::{certify_opt, CertifyConfig};
use inducibility::{BigFloat, Error, MultipartitePartition, PatternSpec};

/// Environment variable holding the default worker-thread count.
pub const THREADS_ENV: &str = "INDUCIBILITY_THREADS";

#[derive(Debug, Parser)]
#[command(name = "inducibility", version, about = "Exact inducibility of complete multipartite patterns")]
pub struct Cli {
    /// Working precision of high-precision floats, in decimal digits.
    #[arg(long, global = true, default_value_t = BigFloat::DEFAULT_DIGITS)]
    pub precision: usize,

    /// Write the run report to this file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form inducibility i(F), with m, kappa and the window for m.
    Inducibility { pattern: PatternSpec },
    /// Inducibility among K_{k+1}-free hosts.
    Cliquefree { pattern: PatternSpec, k: u64 },
    /// Exact number of induced copies of F in a complete multipartite host.
    Count { pattern: PatternSpec, partition: MultipartitePartition },
    /// Best complete multipartite host on n vertices.
    Search {
        pattern: PatternSpec,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        max_parts: Option<usize>,
    },
    /// Best host among all graphs on n <= 8 vertices.
    Exhaustive {
        pattern: PatternSpec,
        #[arg(long)]
        n: usize,
    },
    /// Seeded ascent over the simplex, certified against the balanced optimum.
    Optimize {
        pattern: PatternSpec,
        #[arg(long)]
        kcap: Option<usize>,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Minimum improvement for a move in the high-precision phase.
        #[arg(long, default_value = "1e-40")]
        tol: String,
    },
    /// Runs a verification suite: ratio, h, H, prepare, stability, shift,
    /// adjustment, meanvalue, section6 or all.
    Verify {
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Runs a suite (default all) and writes the report to --out.
    Report {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Parses `args` (program name first), runs the command and writes the
/// human-readable summary to `out`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    init_threads();
    let command: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli, command, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", explain(&e));
            exit_code(&e)
        }
    }
}

fn init_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Internal(_) => 1,
        _ => 2,
    }
}

/// The error message, extended with the condition the input violated.
fn explain(e: &Error) -> String {
    match e {
        Error::NotAlmostBalanced(_) => {
            format!("{e} (the closed form needs F not complete and binom(a_1 - a_r, 2) < a_r)")
        }
        Error::Internal(_) => format!("{e} (a proven statement failed to hold; please report this)"),
        _ => e.to_string(),
    }
}

fn execute(cli: &Cli, command: Vec<String>, out: &mut dyn Write) -> inducibility::Result<i32> {
    if cli.precision < 16 {
        return Err(Error::InvalidArgument(format!("--precision must be at least 16, got {}", cli.precision)));
    }
    BigFloat::set_precision_digits(cli.precision);
    let start = Instant::now();
    let seed = match &cli.command {
        Command::Optimize { seed, .. } | Command::Verify { seed, .. } | Command::Report { seed, .. } => Some(*seed),
        _ => None,
    };
    let mut report = RunReport::new(command, seed);
    let mut lines = Vec::new();
    match &cli.command {
        Command::Inducibility { pattern } => {
            let i = closed_form(pattern)?;
            let m = pattern_m(pattern)?;
            let b = m_bounds(pattern.r() as u64, pattern.ell())?;
            lines.push(format!("i = {i}, m = {m}"));
            lines.push(format!("kappa = {}", pattern.kappa()));
            lines.push(format!("{} < m < {}", b.lower, b.upper.to_decimal_string(12)));
            report.checks.push(
                CheckRecord::new("inducibility", true)
                    .param("F", pattern)
                    .value(ExactValue::rational("i", &i))
                    .value(ExactValue::integer("m", &m.into()))
                    .value(ExactValue::rational("kappa", &pattern.kappa()))
                    .value(ExactValue::rational("m_lower", &b.lower))
                    .value(ExactValue::approx("m_upper", b.upper.to_decimal_string(30))),
            );
        }
        Command::Cliquefree { pattern, k } => {
            let v = inducibility_clique_free(pattern, *k)?;
            lines.push(format!("i_{} = {v}", k + 1));
            report.checks.push(
                CheckRecord::new("cliquefree", true)
                    .param("F", pattern)
                    .param("k", k)
                    .value(ExactValue::rational("i_k+1", &v)),
            );
        }
        Command::Count { pattern, partition } => {
            let c = inducibility::counting::induced_count(pattern, partition);
            lines.push(format!("I = {c}"));
            report.checks.push(
                CheckRecord::new("count", true)
                    .param("F", pattern)
                    .param("G", partition)
                    .value(ExactValue::integer("I", &c)),
            );
        }
        Command::Search { pattern, n, max_parts } => {
            let s = best_partition(pattern, *n, *max_parts)?;
            let at: Vec<String> = s.argmax.iter().map(|g| g.to_string()).collect();
            lines.push(format!("max {} at {}", s.max, at.join(", ")));
            let density = inducibility::Rational::new(s.max.clone(), binomial_int(*n, pattern.ell()));
            let mut rec = CheckRecord::new("search", true)
                .param("F", pattern)
                .param("n", n)
                .value(ExactValue::integer("max", &s.max))
                .value(ExactValue::rational("density", &density))
                .detail(&s);
            if let Some(k) = max_parts {
                rec = rec.param("max_parts", k);
            }
            report.checks.push(rec);
        }
        Command::Exhaustive { pattern, n } => {
            let s = best_graph_exhaustive(pattern, *n)?;
            let g = &s.witness;
            let edges: Vec<String> = (0..g.n())
                .flat_map(|u| (u + 1..g.n()).filter(move |&v| g.has_edge(u, v)).map(move |v| format!("{u}-{v}")))
                .collect();
            lines.push(format!("max {} on {} vertices, witness edges [{}]", s.max, n, edges.join(" ")));
            report.checks.push(
                CheckRecord::new("exhaustive", true)
                    .param("F", pattern)
                    .param("n", n)
                    .value(ExactValue::integer("max", &s.max))
                    .detail(&edges),
            );
        }
        Command::Optimize { pattern, kcap, trials, seed, tol } => {
            let cfg = CertifyConfig {
                k_cap: *kcap,
                trials: *trials,
                seed: *seed,
                improvement_tol: tol.clone(),
                ..Default::default()
            };
            let rep = certify_opt(pattern, &cfg)?;
            let passed = rep.trials.iter().filter(|t| t.pass).count();
            let worst = rep.trials.iter().map(|t| t.distance).fold(0.0, f64::max);
            lines.push(format!(
                "{} {}: {passed}/{} trials reach the balanced {}-point (worst distance {worst:.2e}), value {}",
                verdict(rep.pass),
                pattern,
                rep.trials.len(),
                rep.target_k,
                rep.target_value
            ));
            report.checks.push(
                CheckRecord::new("optimize", rep.pass)
                    .param("F", pattern)
                    .param("trials", trials)
                    .param("k_cap", kcap.map_or("none".to_string(), |k| k.to_string()))
                    .value(ExactValue::approx("target_value", rep.target_value.clone()))
                    .value(ExactValue::approx("worst_distance", format!("{worst:.3e}")))
                    .witness_if_failed(|| {
                        let bad: Vec<usize> = rep.trials.iter().filter(|t| !t.pass).map(|t| t.trial).collect();
                        format!("trials {bad:?} did not converge")
                    })
                    .detail(&rep),
            );
        }
        Command::Verify { suite, seed } | Command::Report { suite, seed } => {
            report.checks = run_suite(suite, *seed)?;
            for c in &report.checks {
                lines.push(record_line(c));
            }
            let passed = report.checks.iter().filter(|c| c.pass).count();
            lines.push(format!("{} {suite}: {passed}/{} checks", verdict(report.pass()), report.checks.len()));
        }
    }
    report.wall_time_ms = Some(start.elapsed().as_millis() as u64);

    for l in &lines {
        writeln!(out, "{l}").map_err(|e| Error::Internal(format!("write: {e}")))?;
    }
    if let Some(path) = &cli.out {
        let body = match cli.format {
            Format::Json => report.to_json()?,
            Format::Csv => report.to_csv()?,
        };
        std::fs::write(path, body)
            .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())))?;
    } else if matches!(cli.command, Command::Report { .. }) {
        return Err(Error::InvalidArgument("report needs --out <path>".into()));
    }
    Ok(if report.pass() { 0 } else { 1 })
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn record_line(c: &CheckRecord) -> String {
    let params: Vec<String> = c.parameters.iter().map(|(k, v)| format!("{k}={v}")).collect();
    let values: Vec<String> = c.values.iter().map(|v| format!("{}={}", v.name, v.decimal)).collect();
    let mut line = format!("{} {} [{}] {}", verdict(c.pass), c.name, params.join(" "), values.join(" "));
    if let Some(w) = &c.witness {
        line.push_str(&format!("\n  witness: {w}"));
    }
    line
}
