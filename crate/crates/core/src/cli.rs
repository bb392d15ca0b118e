//! Command-line front end: parameter grids in, reports out.
//!
//! Exit codes: 0 when every clause passes, 1 when some clause fails,
//! 2 for usage errors, 3 when a resource cap refuses the computation.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::caps::{Caps, DEFAULT_FIBER_DIM, DEFAULT_NAIVE_DEGREE, DEFAULT_TENSOR_DIM};
use crate::error::{Error, Result};
use crate::filtration::{canonical_filtration, canonical_filtration_report};
use crate::gfp::{binomial, PrimeChar};
use crate::local_algebra::{connection_report, verify_generation};
use crate::report::{Clause, Status, VerificationReport};
use crate::slope::{min_gap_report, mu_pushforward, CurveContext};
use crate::tensor_rep::{dim_bounded_compositions, gl_equivariance_check, rep_subspace_basis, sym_compare};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

/// Exact verification of the canonical filtration of F^*(F_*W) and of the
/// slope bounds for Frobenius direct images on curves.
#[derive(Debug, Parser)]
#[command(name = "frobenius", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the canonical filtration, the connection and the generator recursion on a (p, n, r) grid.
    VerifyFiltration(FiltrationArgs),
    /// Tabulate dim V^[l] for l = 0..n(p-1) and check the representation against Sym.
    RepDims(RepArgs),
    /// Certify the slope gap mu(F_*W) - mu(E) over all admissible rank profiles.
    SlopeCertify(SlopeArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FiltrationArgs {
    /// Characteristics, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [2u64, 3])]
    pub p: Vec<u64>,
    /// Dimensions of the ambient variety.
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2])]
    pub n: Vec<usize>,
    /// Ranks of W.
    #[arg(long, value_delimiter = ',', default_values_t = [1usize])]
    pub r: Vec<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub caps: CapArgs,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RepArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [2u64, 3])]
    pub p: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2])]
    pub n: Vec<usize>,
    /// Seed for the random invertible matrices.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random invertible matrices per (p, n, l).
    #[arg(long, default_value_t = 25)]
    pub samples: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub caps: CapArgs,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SlopeArgs {
    /// Genera of the curve.
    #[arg(long, value_delimiter = ',', default_values_t = [2u64])]
    pub g: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_values_t = [2u64, 3])]
    pub p: Vec<u64>,
    #[arg(long = "rank-w", value_delimiter = ',', default_values_t = [1u64])]
    pub rank_w: Vec<u64>,
    /// Ranks of the subsheaf E; every value in 1..=p*rank_w when omitted.
    #[arg(long = "rank-e", value_delimiter = ',')]
    pub rank_e: Vec<u64>,
    #[arg(long = "deg-w", value_delimiter = ',', default_values_t = [0i64], allow_negative_numbers = true)]
    pub deg_w: Vec<i64>,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CapArgs {
    /// Largest fiber dimension r*p^n.
    #[arg(long, env = "FROBENIUS_MAX_FIBER_DIM", default_value_t = DEFAULT_FIBER_DIM,
          value_parser = positive)]
    pub max_fiber_dim: usize,
    /// Largest tensor dimension n^l.
    #[arg(long, default_value_t = DEFAULT_TENSOR_DIM,
          value_parser = positive)]
    pub max_tensor_dim: usize,
    /// Largest degree for literal symmetrization over all permutations.
    #[arg(long, default_value_t = DEFAULT_NAIVE_DEGREE,
          value_parser = positive)]
    pub max_naive_degree: usize,
    /// Left-degree truncation D for the bimodule; defaults to 2pn.
    #[arg(long, value_parser = positive)]
    pub truncation: Option<usize>,
}

fn positive(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(x) => Ok(x),
        Err(e) => Err(e.to_string()),
    }
}

impl CapArgs {
    pub fn caps(&self) -> Caps {
        Caps {
            fiber_dim: self.max_fiber_dim,
            tensor_dim: self.max_tensor_dim,
            naive_degree: self.max_naive_degree,
            truncation: self.truncation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the output here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// One clause at one grid point.
#[derive(Debug, Clone, Serialize)]
pub struct ReportEntry {
    pub point: Value,
    #[serde(flatten)]
    pub clause: Clause,
}

/// A rectangular table; rendered as CSV or aligned text.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub status: Status,
    pub grid_points: usize,
    pub clauses: usize,
    pub passed: usize,
    pub failed: usize,
    pub not_applicable: usize,
    pub points: Vec<Value>,
    pub table: Table,
}

#[derive(Debug, Clone, Serialize)]
pub struct Document {
    pub command: String,
    pub config: Value,
    pub reports: Vec<ReportEntry>,
    pub summary: Summary,
}

impl Document {
    pub fn exit_code(&self) -> i32 {
        match self.summary.status {
            Status::Fail => EXIT_FAIL,
            _ => EXIT_PASS,
        }
    }
}

pub fn exit_code_for(err: &Error) -> i32 {
    if err.is_usage() {
        EXIT_USAGE
    } else if err.is_resource() || matches!(err, Error::Overflow(_)) {
        EXIT_RESOURCE
    } else {
        EXIT_FAIL
    }
}

fn primes(list: &[u64]) -> Result<Vec<PrimeChar>> {
    if list.is_empty() {
        return Err(Error::usage("--p needs at least one value"));
    }
    list.iter().map(|&p| PrimeChar::new(p)).collect()
}

fn non_empty<T>(name: &str, list: &[T]) -> Result<()> {
    if list.is_empty() {
        return Err(Error::usage(format!("--{name} needs at least one value")));
    }
    Ok(())
}

/// One grid point's outcome: its coordinates, report, and table rows.
struct PointResult {
    point: Value,
    report: VerificationReport,
    rows: Vec<Vec<Value>>,
}

/// Evaluate grid points in parallel; results and the first error come back in grid order.
fn evaluate<P, F>(points: Vec<P>, f: F) -> Result<Vec<PointResult>>
where
    P: Sync,
    F: Fn(&P) -> Result<PointResult> + Sync + Send,
{
    points.par_iter().map(f).collect::<Vec<_>>().into_iter().collect()
}

fn assemble(command: &str, config: Value, columns: &[&str], results: Vec<PointResult>) -> Document {
    let mut reports = Vec::new();
    let mut points = Vec::new();
    let mut table = Table {
        columns: columns.iter().map(|c| c.to_string()).collect(),
        rows: Vec::new(),
    };
    let mut overall = VerificationReport::new();
    for result in results {
        let mut point = result.point.clone();
        point["status"] = json!(result.report.status());
        points.push(point);
        for clause in &result.report.clauses {
            reports.push(ReportEntry {
                point: result.point.clone(),
                clause: clause.clone(),
            });
        }
        table.rows.extend(result.rows);
        overall.extend(result.report);
    }
    let count = |s: Status| overall.clauses.iter().filter(|c| c.status == s).count();
    let summary = Summary {
        status: overall.status(),
        grid_points: points.len(),
        clauses: overall.clauses.len(),
        passed: count(Status::Pass),
        failed: count(Status::Fail),
        not_applicable: count(Status::NotApplicable),
        points,
        table,
    };
    Document {
        command: command.to_string(),
        config,
        reports,
        summary,
    }
}

pub fn cmd_verify_filtration(args: &FiltrationArgs) -> Result<Document> {
    let ps = primes(&args.p)?;
    non_empty("n", &args.n)?;
    non_empty("r", &args.r)?;
    let caps = args.caps.caps();
    let mut grid = Vec::new();
    for &p in &ps {
        for &n in &args.n {
            for &r in &args.r {
                grid.push((p, n, r));
            }
        }
    }
    let results = evaluate(grid, |&(p, n, r)| {
        let mut report = canonical_filtration_report(p, n, r, &caps)?;
        report.extend(connection_report(p, n, &caps)?);
        let truncation = caps.truncation_for(p.get(), n);
        report.extend(verify_generation(p, n, truncation, &caps)?);
        let filt = canonical_filtration(p, n, r, &caps)?;
        let row = vec![
            json!(p),
            json!(n),
            json!(r),
            json!(filt.graded_dims().iter().map(usize::to_string).collect::<Vec<_>>().join(" ")),
            json!(report.status()),
        ];
        Ok(PointResult {
            point: json!({"p": p, "n": n, "r": r}),
            report,
            rows: vec![row],
        })
    })?;
    Ok(assemble(
        "verify-filtration",
        serde_json::to_value(args).expect("serializable"),
        &["p", "n", "r", "graded_dims", "status"],
        results,
    ))
}

pub fn cmd_rep_dims(args: &RepArgs) -> Result<Document> {
    let ps = primes(&args.p)?;
    non_empty("n", &args.n)?;
    let caps = args.caps.caps();
    let mut grid = Vec::new();
    for &p in &ps {
        for &n in &args.n {
            if n == 0 {
                return Err(Error::usage("n must be at least 1"));
            }
            for degree in 0..=n * (p.as_usize() - 1) {
                grid.push((p, n, degree));
            }
        }
    }
    let results = evaluate(grid, |&(p, n, degree)| {
        let dim = dim_bounded_compositions(p, n, degree)?;
        let sym_dim = binomial((n + degree - 1) as u64, degree as u64)?;
        let mut report = VerificationReport::new();
        let reference = "dim V^[l] = #{K : |K| = l, 0 <= k_i <= p-1}";
        if caps.check_tensor(n, degree).is_ok() {
            let basis = rep_subspace_basis(p, n, degree, &caps)?;
            report.push(Clause::from_witness(
                "rep-dimension",
                reference,
                (basis.dim() as u128 != dim).then(|| json!({"rank": basis.dim(), "count": dim})),
            ));
            if degree > 0 && degree < p.as_usize() {
                report.extend(sym_compare(p, n, degree, &caps)?);
            }
            report.extend(gl_equivariance_check(p, n, degree, args.samples, args.seed, &caps)?);
        } else {
            report.push(Clause::not_applicable(
                "rep-dimension",
                reference,
                format!("n^l = {n}^{degree} exceeds the tensor cap {}", caps.tensor_dim),
            ));
        }
        Ok(PointResult {
            point: json!({"p": p, "n": n, "l": degree}),
            rows: vec![vec![
                json!(p),
                json!(n),
                json!(degree),
                json!(dim as u64),
                json!(sym_dim as u64),
                json!(dim == sym_dim),
            ]],
            report,
        })
    })?;
    Ok(assemble(
        "rep-dims",
        serde_json::to_value(args).expect("serializable"),
        &["p", "n", "l", "dim", "sym_dim", "equal_flag"],
        results,
    ))
}

pub fn cmd_slope_certify(args: &SlopeArgs) -> Result<Document> {
    let ps = primes(&args.p)?;
    non_empty("g", &args.g)?;
    non_empty("rank-w", &args.rank_w)?;
    non_empty("deg-w", &args.deg_w)?;
    let mut grid = Vec::new();
    for &g in &args.g {
        for &p in &ps {
            for &rank_w in &args.rank_w {
                for &deg_w in &args.deg_w {
                    let ctx = CurveContext::new(g, p, rank_w, deg_w)?;
                    let ranks: Vec<u64> = if args.rank_e.is_empty() {
                        (1..=p.get() as u64 * rank_w).collect()
                    } else {
                        args.rank_e.clone()
                    };
                    for rank_e in ranks {
                        grid.push((ctx, rank_e));
                    }
                }
            }
        }
    }
    let results = evaluate(grid, |&(ctx, rank_e)| {
        let min = min_gap_report(&ctx, rank_e)?;
        let stability = if ctx.stability_applies() {
            "asserted"
        } else {
            "not applicable (g<2)"
        };
        let c = &min.minimum;
        Ok(PointResult {
            point: json!({"g": ctx.g, "p": ctx.p, "rank_w": ctx.rank_w, "deg_w": ctx.deg_w, "rank_e": rank_e}),
            rows: vec![vec![
                json!(ctx.g),
                json!(ctx.p),
                json!(ctx.rank_w),
                json!(ctx.deg_w),
                json!(rank_e),
                json!(mu_pushforward(&ctx)),
                json!(min.profiles_checked),
                json!(c.profile.to_string()),
                json!(c.weighted_sum),
                json!(c.gap_lower_bound),
                json!(c.equality_flag),
                json!(c.strict),
                json!(c.forces_pushforward),
                json!(stability),
            ]],
            report: min.report,
        })
    })?;
    Ok(assemble(
        "slope-certify",
        serde_json::to_value(args).expect("serializable"),
        &[
            "g",
            "p",
            "rank_w",
            "deg_w",
            "rank_e",
            "mu_pushforward",
            "profiles",
            "min_profile",
            "weighted_sum",
            "min_bound",
            "equality_flag",
            "strict",
            "forces_pushforward",
            "stability",
        ],
        results,
    ))
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn render_json(doc: &Document) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("serializable");
    s.push('\n');
    s
}

pub fn render_csv(doc: &Document) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::usage(format!("csv output: {e}"));
    writer.write_record(&doc.summary.table.columns).map_err(io)?;
    for row in &doc.summary.table.rows {
        writer.write_record(row.iter().map(cell)).map_err(io)?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::usage(format!("csv output: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv of utf-8 cells"))
}

pub fn render_text(doc: &Document) -> String {
    let table = &doc.summary.table;
    let cells: Vec<Vec<String>> = table.rows.iter().map(|r| r.iter().map(cell).collect()).collect();
    let widths: Vec<usize> = (0..table.columns.len())
        .map(|j| cells.iter().map(|r| r[j].len()).chain([table.columns[j].len()]).max().unwrap_or(0))
        .collect();
    let line = |row: &[String]| {
        row.iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut out = String::new();
    out.push_str(&line(&table.columns));
    out.push('\n');
    for row in &cells {
        out.push_str(&line(row));
        out.push('\n');
    }
    let mut failures: BTreeMap<String, Vec<&ReportEntry>> = BTreeMap::new();
    for entry in doc.reports.iter().filter(|e| e.clause.status == Status::Fail) {
        failures.entry(entry.point.to_string()).or_default().push(entry);
    }
    for (point, entries) in failures {
        out.push_str(&format!("\nfailures at {point}:\n"));
        for e in entries {
            out.push_str(&format!("  {} [{}]\n", e.clause.clause, e.clause.reference));
            if let Some(w) = &e.clause.witness {
                out.push_str(&format!("    witness: {w}\n"));
            }
        }
    }
    let s = &doc.summary;
    out.push_str(&format!(
        "\n{}: {} grid points, {} clauses, {} passed, {} failed, {} not applicable: {}\n",
        doc.command,
        s.grid_points,
        s.clauses,
        s.passed,
        s.failed,
        s.not_applicable,
        match s.status {
            Status::Fail => "FAIL",
            _ => "PASS",
        }
    ));
    out
}

pub fn render(doc: &Document, format: Format) -> Result<String> {
    match format {
        Format::Text => Ok(render_text(doc)),
        Format::Json => Ok(render_json(doc)),
        Format::Csv => render_csv(doc),
    }
}

/// Run a parsed command; returns the rendered output and exit code.
pub fn execute(cli: &Cli) -> Result<(String, i32)> {
    let (doc, output) = match &cli.command {
        Command::VerifyFiltration(a) => (cmd_verify_filtration(a)?, &a.output),
        Command::RepDims(a) => (cmd_rep_dims(a)?, &a.output),
        Command::SlopeCertify(a) => (cmd_slope_certify(a)?, &a.output),
    };
    Ok((render(&doc, output.format)?, doc.exit_code()))
}

fn output_path(cli: &Cli) -> Option<&PathBuf> {
    match &cli.command {
        Command::VerifyFiltration(a) => a.output.out.as_ref(),
        Command::RepDims(a) => a.output.out.as_ref(),
        Command::SlopeCertify(a) => a.output.out.as_ref(),
    }
}

/// Entry point used by the binary: parse, run, write, and return the exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    match execute(&cli) {
        Ok((text, code)) => {
            let written = match output_path(&cli) {
                Some(path) => std::fs::write(path, text.as_bytes()),
                None => std::io::stdout().lock().write_all(text.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("error: cannot write output: {e}");
                return EXIT_USAGE;
            }
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("frobenius").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn verify_filtration_grid() {
        let cli = parse(&["verify-filtration", "--p", "2,3", "--n", "1,2", "--r", "1,2", "--format", "json"]);
        let Command::VerifyFiltration(a) = &cli.command else { unreachable!() };
        let doc = cmd_verify_filtration(a).unwrap();
        assert_eq!(doc.summary.grid_points, 8);
        assert_eq!(doc.exit_code(), EXIT_PASS);
    }

    #[test]
    fn not_prime_is_usage() {
        let cli = parse(&["verify-filtration", "--p", "4"]);
        let err = execute(&cli).unwrap_err();
        assert_eq!(err.to_string(), "4 is not prime");
        assert_eq!(exit_code_for(&err), EXIT_USAGE);
    }

    #[test]
    fn cap_refusal() {
        let cli = parse(&["verify-filtration", "--p", "7", "--n", "3"]);
        assert_eq!(exit_code_for(&execute(&cli).unwrap_err()), EXIT_RESOURCE);
    }

    #[test]
    fn rep_dims_tables() {
        let dims = |p: &str, n: &str| {
            let cli = parse(&["rep-dims", "--p", p, "--n", n, "--samples", "3"]);
            let Command::RepDims(a) = &cli.command else { unreachable!() };
            let doc = cmd_rep_dims(a).unwrap();
            assert_eq!(doc.exit_code(), EXIT_PASS);
            doc.summary.table.rows.iter().map(|r| r[3].as_u64().unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(dims("3", "2"), vec![1, 2, 3, 2, 1]);
        assert_eq!(dims("5", "1"), vec![1, 1, 1, 1, 1]);
        assert_eq!(dims("2", "1"), vec![1, 1]);
    }

    #[test]
    fn slope_minima() {
        let cli = parse(&["slope-certify", "--g", "2", "--p", "3", "--rank-w", "1", "--format", "csv"]);
        let Command::SlopeCertify(a) = &cli.command else { unreachable!() };
        let doc = cmd_slope_certify(a).unwrap();
        let minima: Vec<String> = doc.summary.table.rows.iter().map(|r| cell(&r[9])).collect();
        assert_eq!(minima, vec!["2/3", "1/3", "0/1"]);
        assert_eq!(doc.exit_code(), EXIT_PASS);
        let csv = render_csv(&doc).unwrap();
        assert!(csv.starts_with("g,p,rank_w,deg_w,rank_e,"));
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn slope_low_genus() {
        let cli = parse(&["slope-certify", "--g", "1", "--p", "3"]);
        let Command::SlopeCertify(a) = &cli.command else { unreachable!() };
        let doc = cmd_slope_certify(a).unwrap();
        assert!(doc.summary.table.rows.iter().all(|r| r[13] == json!("not applicable (g<2)")));
        assert_eq!(doc.exit_code(), EXIT_PASS);
    }

    #[test]
    fn json_is_deterministic() {
        let run = || {
            let cli = parse(&["rep-dims", "--p", "3", "--n", "2", "--seed", "7", "--format", "json"]);
            execute(&cli).unwrap().0
        };
        assert_eq!(run(), run());
    }
}
