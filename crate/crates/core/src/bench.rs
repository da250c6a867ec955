//! Command-line operations and the benchmark harness.
//!
//! Every `cmd_*` function returns the text meant for standard output, or a
//! [`CliError`] whose [`exit_code`](CliError::exit_code) is 2 for unusable
//! input and 1 for a verification failure.
//!
//! The harness writes one CSV row per (file, size, team size) with the
//! columns
//!
//! ```text
//! set,instance,customers,members,mcw_score,oracle_score,gap_percent,mcw_time,oracle_time,proven_optimal
//! ```
//!
//! Rows whose instance could not be built keep the key columns and leave the
//! score and time columns empty. For rows without a completed exact search
//! the gap is taken against the best solution found and may be negative.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::instance::{
    augment, parse_benchmark, read_coptw, truncate, write_coptw, Instance, Layout, RawInstance,
    DEPOT,
};
use crate::mcw::{solve_with, McwConfig};
use crate::model::{DistanceConvention, Model};
use crate::oracle::{exact_solve, optimality_gap, BoundMode, OracleConfig};
use crate::schedule::check_solution;
use crate::solution::{objective, read_solution, write_solution, Solution};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Verification(_) => 1,
        }
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

/// Reads a benchmark file, guessing the layout from the name when none is
/// given.
pub fn load_benchmark(path: &Path, layout: Option<Layout>) -> Result<RawInstance, CliError> {
    let text = read_text(path)?;
    let layout = layout.unwrap_or_else(|| Layout::guess(path));
    parse_benchmark(&text, layout).map_err(|e| {
        CliError::Input(format!(
            "{}: unrecognized benchmark layout: {e}",
            path.display()
        ))
    })
}

/// Reads a normalized instance file.
pub fn load_instance(path: &Path) -> Result<Instance, CliError> {
    read_coptw(&read_text(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone)]
pub struct AugmentArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    pub seed: u64,
    pub r_max: usize,
    pub customers: Option<usize>,
    pub members: usize,
    pub velocity: f64,
    pub layout: Option<Layout>,
}

pub fn cmd_augment(args: &AugmentArgs) -> Result<String, CliError> {
    let input_err =
        |e: crate::error::InstanceError| CliError::Input(format!("{}: {e}", args.input.display()));
    let mut raw = load_benchmark(&args.input, args.layout)?;
    if let Some(n) = args.customers {
        raw = truncate(&raw, n).map_err(input_err)?;
    }
    let instance = augment(&raw, args.seed, args.r_max)
        .and_then(|i| i.with_team_size(args.members))
        .and_then(|i| i.with_velocity(args.velocity))
        .map_err(input_err)?;
    write_text(&args.output, &write_coptw(&instance))?;
    Ok(format!(
        "wrote {}: {} customers, {} members, requirements drawn from 1..={} with seed {}",
        args.output.display(),
        instance.customers(),
        instance.team_size,
        args.r_max,
        args.seed
    ))
}

#[derive(Debug, Clone)]
pub struct SolveArgs {
    pub instance: PathBuf,
    pub output: Option<PathBuf>,
    pub convention: DistanceConvention,
    pub parallel: bool,
}

pub fn cmd_solve(args: &SolveArgs) -> Result<String, CliError> {
    let model = Model::with_convention(load_instance(&args.instance)?, args.convention);
    let config = McwConfig {
        parallel: args.parallel,
        ..McwConfig::default()
    };
    let result = solve_with(&model, config);
    let report = check_solution(&model, &result.best_solution);
    if !report.feasible() {
        return Err(CliError::Verification(violation_text(&report)));
    }
    let text = write_solution(&result.best_solution, result.best_score);
    let p = result.best_params;
    let mut out = String::new();
    match &args.output {
        Some(path) => {
            write_text(path, &text)?;
            out.push_str(&format!("score: {}\n", result.best_score));
            out.push_str(&format!("solution written to {}\n", path.display()));
        }
        None => out.push_str(&text),
    }
    out.push_str(&format!(
        "weights: lambda={} mu={} vartheta={}\ntime: {:.2} s",
        p.lambda,
        p.mu,
        p.vartheta,
        result.elapsed.as_secs_f64()
    ));
    Ok(out)
}

fn violation_text(report: &crate::schedule::FeasibilityReport) -> String {
    let mut s = String::from("infeasible");
    for v in &report.violations {
        s.push_str(&format!("\n  {v}"));
    }
    s
}

#[derive(Debug, Clone)]
pub struct VerifyArgs {
    pub instance: PathBuf,
    pub solution: PathBuf,
    pub convention: DistanceConvention,
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<String, CliError> {
    let instance = load_instance(&args.instance)?;
    let (solution, claimed) = read_solution(&read_text(&args.solution)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", args.solution.display())))?;
    check_matches(&instance, &solution).map_err(|e| {
        CliError::Input(format!(
            "{} does not belong to {}: {e}",
            args.solution.display(),
            args.instance.display()
        ))
    })?;
    let model = Model::with_convention(instance, args.convention);
    let report = check_solution(&model, &solution);
    let score = objective(&model.instance, &solution);
    let mut problems = Vec::new();
    if !report.feasible() {
        problems.push(violation_text(&report));
    }
    if let Some(c) = claimed {
        if c != score {
            problems.push(format!(
                "claimed score {c} differs from the collected reward {score}"
            ));
        }
    }
    if problems.is_empty() {
        Ok(format!("feasible\nscore: {score}"))
    } else {
        Err(CliError::Verification(problems.join("\n")))
    }
}

/// Team size and vertex range must agree with the instance.
fn check_matches(instance: &Instance, solution: &Solution) -> Result<(), String> {
    if solution.routes.len() != instance.team_size {
        return Err(format!(
            "{} routes for a team of {}",
            solution.routes.len(),
            instance.team_size
        ));
    }
    let n = instance.len();
    if let Some(&v) = solution
        .routes
        .iter()
        .flatten()
        .find(|&&v| v >= n || v == DEPOT)
    {
        return Err(format!(
            "vertex {v} is not a customer (customers are 1..{})",
            n - 1
        ));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct OracleArgs {
    pub instance: PathBuf,
    pub output: Option<PathBuf>,
    pub time_limit: Duration,
    pub node_limit: Option<u64>,
    pub bound: BoundMode,
    pub convention: DistanceConvention,
}

pub fn cmd_oracle(args: &OracleArgs) -> Result<String, CliError> {
    let model = Model::with_convention(load_instance(&args.instance)?, args.convention);
    let started = Instant::now();
    let result = exact_solve(
        &model,
        OracleConfig {
            node_limit: args.node_limit.unwrap_or(u64::MAX),
            time_limit: args.time_limit,
            bound: args.bound,
        },
    );
    let elapsed = started.elapsed();
    let report = check_solution(&model, &result.best_solution);
    if !report.feasible() {
        return Err(CliError::Verification(violation_text(&report)));
    }
    if let Some(path) = &args.output {
        write_text(
            path,
            &write_solution(&result.best_solution, result.best_score),
        )?;
    }
    let status = if result.proven_optimal {
        "proven optimal"
    } else {
        "not proven (limit reached, best found shown)"
    };
    Ok(format!(
        "score: {}\nstatus: {status}\nnodes: {}\ntime: {:.2} s",
        result.best_score,
        result.explored_nodes,
        elapsed.as_secs_f64()
    ))
}

#[derive(Debug, Clone)]
pub struct BenchArgs {
    pub dir: PathBuf,
    pub output: PathBuf,
    /// Customer counts; empty means each file at full size.
    pub sizes: Vec<usize>,
    pub members: Vec<usize>,
    pub seed: u64,
    pub r_max: usize,
    pub time_limit: Duration,
    pub node_limit: Option<u64>,
    pub convention: DistanceConvention,
    pub parallel: bool,
    /// Leave the time columns empty so the CSV only depends on the seed.
    pub omit_times: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub set: String,
    pub instance: String,
    pub customers: usize,
    pub members: usize,
    pub mcw_score: Option<f64>,
    pub oracle_score: Option<f64>,
    pub gap_percent: Option<f64>,
    pub mcw_time: Option<f64>,
    pub oracle_time: Option<f64>,
    pub proven_optimal: bool,
}

pub const CSV_HEADER: [&str; 10] = [
    "set",
    "instance",
    "customers",
    "members",
    "mcw_score",
    "oracle_score",
    "gap_percent",
    "mcw_time",
    "oracle_time",
    "proven_optimal",
];

impl BenchRow {
    fn record(&self, omit_times: bool) -> [String; 10] {
        let opt = |v: Option<f64>, f: fn(f64) -> String| v.map(f).unwrap_or_default();
        let time = |v: Option<f64>| {
            if omit_times {
                String::new()
            } else {
                opt(v, |t| format!("{t:.2}"))
            }
        };
        [
            self.set.clone(),
            self.instance.clone(),
            self.customers.to_string(),
            self.members.to_string(),
            opt(self.mcw_score, |s| s.to_string()),
            opt(self.oracle_score, |s| s.to_string()),
            opt(self.gap_percent, |g| format!("{g:.2}")),
            time(self.mcw_time),
            time(self.oracle_time),
            self.proven_optimal.to_string(),
        ]
    }
}

/// Problem found while producing a row.
#[derive(Debug, Clone, PartialEq)]
pub enum RowIssue {
    /// The instance could not be built; the row has no scores.
    Failed { row: usize, message: String },
    /// A solution failed the checker or the heuristic beat a proven optimum.
    Unsound { row: usize, message: String },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    pub rows: usize,
    pub failed: usize,
    pub proven: usize,
    pub unproven: usize,
    /// Proven rows where the heuristic reached the optimum.
    pub optimal: usize,
    pub mean_gap: Option<f64>,
}

impl Summary {
    pub fn from_rows(rows: &[BenchRow]) -> Summary {
        let mut s = Summary {
            rows: rows.len(),
            ..Summary::default()
        };
        let mut gaps = Vec::new();
        for r in rows {
            if r.mcw_score.is_none() {
                s.failed += 1;
            } else if r.proven_optimal {
                s.proven += 1;
                if let Some(g) = r.gap_percent {
                    gaps.push(g);
                    if g <= 1e-9 {
                        s.optimal += 1;
                    }
                }
            } else {
                s.unproven += 1;
            }
        }
        if !gaps.is_empty() {
            s.mean_gap = Some(gaps.iter().sum::<f64>() / gaps.len() as f64);
        }
        s
    }

    /// Share of proven rows the heuristic solved optimally, in percent.
    pub fn optimal_percent(&self) -> Option<f64> {
        (self.proven > 0).then(|| 100.0 * self.optimal as f64 / self.proven as f64)
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rows: {} (failed: {})", self.rows, self.failed)?;
        writeln!(
            f,
            "proven optimal: {}; unproven: {} (excluded from the gap)",
            self.proven, self.unproven
        )?;
        match self.mean_gap {
            Some(g) => writeln!(f, "mean optimality gap: {g:.2}%")?,
            None => writeln!(f, "mean optimality gap: n/a")?,
        }
        match self.optimal_percent() {
            Some(p) => writeln!(f, "heuristic optimal: {p:.2}% of proven instances")?,
            None => writeln!(f, "heuristic optimal: n/a")?,
        }
        write!(
            f,
            "times are wall-clock seconds on this machine and do not transfer to other hardware"
        )
    }
}

#[derive(Debug, Clone)]
pub struct BenchOutcome {
    pub rows: Vec<BenchRow>,
    pub issues: Vec<RowIssue>,
    pub summary: Summary,
    pub csv: Vec<u8>,
}

/// Groups benchmark files the way result tables do: `c101` belongs to
/// `c100`, `pr03` to `pr01-10`. Other names stand alone.
pub fn set_name(stem: &str) -> String {
    let lower = stem.to_ascii_lowercase();
    let letters: String = lower
        .chars()
        .take_while(|c| c.is_ascii_alphabetic())
        .collect();
    let digits = &lower[letters.len()..];
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return lower;
    }
    match (letters.as_str(), digits.len()) {
        ("pr", 2) => {
            let k: usize = digits.parse().unwrap_or(0);
            let lo = (k.max(1) - 1) / 10 * 10 + 1;
            format!("pr{lo:02}-{:02}", lo + 9)
        }
        (l, 3) if !l.is_empty() => format!("{l}{}00", &digits[..1]),
        _ => lower,
    }
}

/// Per-file seed: the run seed mixed with an FNV-1a hash of the file stem,
/// so files are augmented independently of their position in the run.
pub fn instance_seed(seed: u64, stem: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in stem.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    seed ^ h
}

struct Job<'a> {
    stem: &'a str,
    raw: &'a Result<RawInstance, String>,
    size: Option<usize>,
    members: usize,
}

fn run_job(args: &BenchArgs, job: &Job) -> (BenchRow, Option<RowIssue>) {
    let mut row = BenchRow {
        set: set_name(job.stem),
        instance: job.stem.to_string(),
        customers: job.size.unwrap_or(0),
        members: job.members,
        mcw_score: None,
        oracle_score: None,
        gap_percent: None,
        mcw_time: None,
        oracle_time: None,
        proven_optimal: false,
    };
    let built = job.raw.clone().and_then(|raw| {
        let raw = match job.size {
            Some(n) => truncate(&raw, n).map_err(|e| e.to_string())?,
            None => raw,
        };
        augment(&raw, instance_seed(args.seed, job.stem), args.r_max)
            .and_then(|i| i.with_team_size(job.members))
            .map_err(|e| e.to_string())
    });
    let instance = match built {
        Ok(i) => i,
        Err(message) => return (row, Some(RowIssue::Failed { row: 0, message })),
    };
    row.customers = instance.customers();
    let model = Model::with_convention(instance, args.convention);

    let config = McwConfig {
        parallel: args.parallel,
        ..McwConfig::default()
    };
    let heuristic = solve_with(&model, config);
    row.mcw_score = Some(heuristic.best_score);
    row.mcw_time = Some(heuristic.elapsed.as_secs_f64());

    let started = Instant::now();
    let exact = exact_solve(
        &model,
        OracleConfig {
            node_limit: args.node_limit.unwrap_or(u64::MAX),
            time_limit: args.time_limit,
            bound: BoundMode::ReachabilityFiltered,
        },
    );
    row.oracle_time = Some(started.elapsed().as_secs_f64());
    row.oracle_score = Some(exact.best_score);
    row.proven_optimal = exact.proven_optimal;

    let mut problems = Vec::new();
    for (who, sol) in [
        ("heuristic", &heuristic.best_solution),
        ("exact", &exact.best_solution),
    ] {
        let report = check_solution(&model, sol);
        if !report.feasible() {
            problems.push(format!("{who} solution {}", violation_text(&report)));
        }
    }
    let (h, o) = (heuristic.best_score, exact.best_score);
    if exact.proven_optimal && h > o {
        problems.push(format!(
            "heuristic score {h} exceeds the proven optimum {o}"
        ));
    } else if exact.proven_optimal {
        row.gap_percent = Some(optimality_gap(h, o));
    } else {
        row.gap_percent = Some(if o == 0.0 { 0.0 } else { 100.0 * (o - h) / o });
    }
    let issue = (!problems.is_empty()).then(|| RowIssue::Unsound {
        row: 0,
        message: problems.join("; "),
    });
    (row, issue)
}

/// Benchmark files in `dir`, sorted by name; hidden files are skipped.
fn benchmark_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = fs::read_dir(dir)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", dir.display())))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", dir.display())))?
            .path();
        let hidden = path
            .file_name()
            .map(|n| n.to_string_lossy().starts_with('.'))
            .unwrap_or(true);
        if path.is_file() && !hidden {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Runs every (file, size, team size) combination. Rows come out in input
/// order whatever the degree of parallelism.
pub fn run_bench(args: &BenchArgs) -> Result<BenchOutcome, CliError> {
    if args.members.is_empty() {
        return Err(CliError::Input("no team sizes given".into()));
    }
    let files = benchmark_files(&args.dir)?;
    if files.is_empty() {
        return Err(CliError::Input(format!(
            "{} contains no benchmark files",
            args.dir.display()
        )));
    }
    let loaded: Vec<(String, Result<RawInstance, String>)> = files
        .iter()
        .map(|path| {
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            (stem, load_benchmark(path, None).map_err(|e| e.to_string()))
        })
        .collect();
    let sizes: Vec<Option<usize>> = if args.sizes.is_empty() {
        vec![None]
    } else {
        args.sizes.iter().map(|&n| Some(n)).collect()
    };
    let mut jobs = Vec::new();
    for (stem, raw) in &loaded {
        for &size in &sizes {
            for &members in &args.members {
                jobs.push(Job {
                    stem,
                    raw,
                    size,
                    members,
                });
            }
        }
    }
    let results: Vec<(BenchRow, Option<RowIssue>)> = if args.parallel {
        jobs.par_iter().map(|j| run_job(args, j)).collect()
    } else {
        jobs.iter().map(|j| run_job(args, j)).collect()
    };

    let mut rows = Vec::with_capacity(results.len());
    let mut issues = Vec::new();
    for (k, (row, issue)) in results.into_iter().enumerate() {
        rows.push(row);
        issues.extend(issue.map(|i| match i {
            RowIssue::Failed { message, .. } => RowIssue::Failed { row: k, message },
            RowIssue::Unsound { message, .. } => RowIssue::Unsound { row: k, message },
        }));
    }

    let mut writer = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Input(format!("cannot format CSV: {e}"));
    writer.write_record(CSV_HEADER).map_err(csv_err)?;
    for row in &rows {
        writer
            .write_record(row.record(args.omit_times))
            .map_err(csv_err)?;
    }
    let csv = writer
        .into_inner()
        .map_err(|e| CliError::Input(format!("cannot format CSV: {e}")))?;
    let summary = Summary::from_rows(&rows);
    Ok(BenchOutcome {
        rows,
        issues,
        summary,
        csv,
    })
}

pub fn cmd_bench(args: &BenchArgs) -> Result<String, CliError> {
    let outcome = run_bench(args)?;
    fs::write(&args.output, &outcome.csv)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", args.output.display())))?;
    let mut text = outcome.summary.to_string();
    let mut unsound = false;
    for issue in &outcome.issues {
        let (row, kind, message) = match issue {
            RowIssue::Failed { row, message } => (row, "failed", message),
            RowIssue::Unsound { row, message } => {
                unsound = true;
                (row, "VERIFICATION FAILURE", message)
            }
        };
        let r = &outcome.rows[*row];
        text.push_str(&format!(
            "\n{kind}: {} n={} P={}: {message}",
            r.instance, r.customers, r.members
        ));
    }
    if unsound {
        Err(CliError::Verification(text))
    } else {
        Ok(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_names() {
        assert_eq!(set_name("c101"), "c100");
        assert_eq!(set_name("RC208"), "rc200");
        assert_eq!(set_name("r112"), "r100");
        assert_eq!(set_name("pr01"), "pr01-10");
        assert_eq!(set_name("pr10"), "pr01-10");
        assert_eq!(set_name("pr11"), "pr11-20");
        assert_eq!(set_name("custom_set"), "custom_set");
    }

    #[test]
    fn seeds_depend_on_name_only() {
        assert_eq!(instance_seed(7, "c101"), instance_seed(7, "c101"));
        assert_ne!(instance_seed(7, "c101"), instance_seed(7, "c102"));
        assert_ne!(instance_seed(7, "c101"), instance_seed(8, "c101"));
    }

    fn row(mcw: Option<f64>, oracle: f64, gap: f64, proven: bool) -> BenchRow {
        BenchRow {
            set: "c100".into(),
            instance: "c101".into(),
            customers: 10,
            members: 3,
            mcw_score: mcw,
            oracle_score: mcw.map(|_| oracle),
            gap_percent: mcw.map(|_| gap),
            mcw_time: Some(0.012),
            oracle_time: Some(1.5),
            proven_optimal: proven,
        }
    }

    #[test]
    fn summary_excludes_unproven_and_failed() {
        let rows = [
            row(Some(100.0), 100.0, 0.0, true),
            row(Some(97.0), 100.0, 3.0, true),
            row(Some(50.0), 80.0, 37.5, false),
            row(None, 0.0, 0.0, false),
        ];
        let s = Summary::from_rows(&rows);
        assert_eq!(
            (s.rows, s.proven, s.unproven, s.failed, s.optimal),
            (4, 2, 1, 1, 1)
        );
        assert!((s.mean_gap.unwrap() - 1.5).abs() < 1e-12);
        assert_eq!(s.optimal_percent(), Some(50.0));
        let text = s.to_string();
        assert!(text.contains("mean optimality gap: 1.50%"));
        assert!(text.contains("heuristic optimal: 50.00%"));
    }

    #[test]
    fn csv_fields() {
        let r = row(Some(97.0), 100.0, 3.0, true);
        assert_eq!(
            r.record(false),
            ["c100", "c101", "10", "3", "97", "100", "3.00", "0.01", "1.50", "true"]
                .map(String::from)
        );
        let blank = r.record(true);
        assert_eq!((blank[7].as_str(), blank[8].as_str()), ("", ""));
        let failed = row(None, 0.0, 0.0, false).record(false);
        assert_eq!(&failed[4..7], ["", "", ""].map(String::from));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Input(String::new()).exit_code(), 2);
        assert_eq!(CliError::Verification(String::new()).exit_code(), 1);
    }
}
