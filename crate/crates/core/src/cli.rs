//! Command-line front end: argument parsing, run configuration and exit codes.
//!
//! Exit status is 0 on success, 2 when a solve (or any β of a sweep) fails to
//! converge, and 1 for usage, configuration and I/O errors. Every non-zero
//! exit writes one line `itm: <code>: <message>` to stderr.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::continuation::{
    find_beta_min, sweep_beta, sweep_beta_adaptive, BetaMinEstimate, BetaMinSettings,
    ContinuationPath,
};
use crate::existence::{linear_grid, log_grid, scan_gamma, ScanError, ScanReport};
use crate::itm::{solve, ItmError, ItmSolution, RootCriteria, Termination};
use crate::ode::Tolerances;
use crate::problems::{preset, ProblemSpec};
use crate::report;
use crate::scaling::Sign;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "itm",
    version,
    about = "Iterative transformation method for third-order BVPs on [0, inf)"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Secant iteration on Gamma(h*) and the rescaled solution.
    Solve(SolveArgs),
    /// Sample Gamma over a grid of h* and look for sign changes.
    Scan(ScanArgs),
    /// Falkner-Skan continuation in beta.
    Sweep(SweepArgs),
    /// Bisection for the smallest beta with a Falkner-Skan solution.
    BetaMin(BetaMinArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProblemName {
    Sakiadis,
    FalknerSkan,
    Blasius,
}

impl ProblemName {
    fn preset_name(self) -> &'static str {
        match self {
            ProblemName::Sakiadis => "sakiadis",
            ProblemName::FalknerSkan => "falkner-skan",
            ProblemName::Blasius => "blasius",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
    Pretty,
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    #[arg(long, value_enum)]
    pub problem: ProblemName,
    /// Pressure-gradient parameter (falkner-skan only).
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub beta: f64,
    /// Sign of the missing initial condition: +1 or -1.
    #[arg(long, allow_hyphen_values = true, default_value = "+1")]
    pub sign: Sign,
    /// Truncated boundary (default: 10 for sakiadis, 20 otherwise).
    #[arg(long)]
    pub eta_inf: Option<f64>,
}

#[derive(Debug, Args)]
pub struct IntegratorArgs {
    #[arg(long, default_value_t = 1e-6)]
    pub rtol: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub atol: f64,
}

#[derive(Debug, Args)]
pub struct SecantArgs {
    /// First initial iterate h*_0.
    #[arg(long)]
    pub h0: Option<f64>,
    /// Second initial iterate h*_1.
    #[arg(long)]
    pub h1: Option<f64>,
    /// |Gamma| tolerance (default 1e-9 for sakiadis, 1e-6 otherwise).
    #[arg(long)]
    pub tol_gamma: Option<f64>,
    #[arg(long, default_value_t = 1e-6)]
    pub tol_rel: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol_abs: f64,
    #[arg(long, default_value_t = 50)]
    pub max_iters: usize,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub secant: SecantArgs,
    #[command(flatten)]
    pub integrator: IntegratorArgs,
    #[command(flatten)]
    pub out: OutputArgs,
    /// Also write the rescaled profile (x,u,du,d2u) as CSV to this file.
    #[arg(long)]
    pub profile: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// h* grid as lo:hi:count, with a trailing L for log spacing.
    #[arg(long)]
    pub grid: String,
    #[command(flatten)]
    pub integrator: IntegratorArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Only falkner-skan has a beta to continue in.
    #[arg(long, value_enum, default_value_t = ProblemName::FalknerSkan)]
    pub problem: ProblemName,
    /// Branch: +1 or -1.
    #[arg(long, allow_hyphen_values = true, default_value = "+1")]
    pub sign: Sign,
    /// beta values as start:end:step or a comma-separated list.
    #[arg(long, allow_hyphen_values = true)]
    pub betas: String,
    /// Halve the step near trouble (start:end:step form only).
    #[arg(long)]
    pub adaptive: bool,
    #[command(flatten)]
    pub secant: SecantArgs,
    #[command(flatten)]
    pub integrator: IntegratorArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BetaMinArgs {
    /// Only falkner-skan has a beta to continue in.
    #[arg(long, value_enum, default_value_t = ProblemName::FalknerSkan)]
    pub problem: ProblemName,
    #[arg(long, allow_hyphen_values = true, default_value = "+1")]
    pub sign: Sign,
    /// Initial beta bracket lo:hi; the solve must fail at lo and converge at hi.
    #[arg(long, allow_hyphen_values = true, default_value = "-0.25:-0.15")]
    pub bracket: String,
    #[arg(long, default_value_t = 5e-4)]
    pub width_tol: f64,
    #[command(flatten)]
    pub secant: SecantArgs,
    #[command(flatten)]
    pub integrator: IntegratorArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// Failure of a CLI run, carrying the exit code and a short reason code.
#[derive(Debug)]
pub struct CliError {
    pub exit_code: i32,
    pub code: &'static str,
    pub message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        CliError {
            exit_code: EXIT_FAILURE,
            code: "invalid-config",
            message: message.into(),
        }
    }

    fn evaluation(message: impl Into<String>) -> Self {
        CliError {
            exit_code: EXIT_FAILURE,
            code: "evaluation-error",
            message: message.into(),
        }
    }

    fn io(path: &str, e: io::Error) -> Self {
        CliError {
            exit_code: EXIT_FAILURE,
            code: "io-error",
            message: format!("{path}: {e}"),
        }
    }

    fn not_converged(termination: Termination, message: impl Into<String>) -> Self {
        CliError {
            exit_code: EXIT_NOT_CONVERGED,
            code: termination.reason_code(),
            message: message.into(),
        }
    }
}

/// Splits a `a:b[:c...]` token into exactly `n` finite numbers.
fn parse_fields(token: &str, n: usize, what: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::config(format!("malformed {what} '{token}'"));
    let fields: Vec<&str> = token.split(':').collect();
    if fields.len() != n {
        return Err(bad());
    }
    fields
        .iter()
        .map(|f| {
            f.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(bad)
        })
        .collect()
}

/// Parses `lo:hi:count` or `lo:hi:countL` into grid points.
pub fn parse_grid(token: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::config(format!("malformed grid '{token}'"));
    let (body, log) = match token.strip_suffix(['L', 'l']) {
        Some(b) => (b, true),
        None => (token, false),
    };
    let fields: Vec<&str> = body.split(':').collect();
    if fields.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = fields[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = fields[1].trim().parse().map_err(|_| bad())?;
    let count: usize = fields[2].trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo && count >= 2) {
        return Err(bad());
    }
    Ok(if log {
        log_grid(lo, hi, count)
    } else {
        linear_grid(lo, hi, count)
    })
}

/// β specification: an arithmetic range or an explicit list.
#[derive(Debug, Clone, PartialEq)]
pub enum BetaSpec {
    Range { start: f64, end: f64, step: f64 },
    List(Vec<f64>),
}

impl BetaSpec {
    pub fn parse(token: &str) -> Result<Self, CliError> {
        if token.contains(':') {
            let v = parse_fields(token, 3, "beta range")?;
            let (start, end, step) = (v[0], v[1], v[2]);
            if step == 0.0 || (end - start) * step < 0.0 {
                return Err(CliError::config(format!(
                    "malformed beta range '{token}': step does not move from start to end"
                )));
            }
            Ok(BetaSpec::Range { start, end, step })
        } else {
            let values: Option<Vec<f64>> = token
                .split(',')
                .map(|f| f.trim().parse::<f64>().ok().filter(|x| x.is_finite()))
                .collect();
            match values {
                Some(v) if !v.is_empty() => Ok(BetaSpec::List(v)),
                _ => Err(CliError::config(format!("malformed beta list '{token}'"))),
            }
        }
    }

    /// The β values in sweep order. A range includes `end` when it lies on
    /// the lattice (up to rounding).
    pub fn values(&self) -> Vec<f64> {
        match self {
            BetaSpec::List(v) => v.clone(),
            BetaSpec::Range { start, end, step } => {
                let n = ((end - start) / step + 1e-9).floor() as usize;
                (0..=n).map(|k| start + k as f64 * step).collect()
            }
        }
    }
}

fn tolerances(a: &IntegratorArgs) -> Result<Tolerances, CliError> {
    let tol = Tolerances {
        rel_tol: a.rtol,
        abs_tol: a.atol,
        ..Tolerances::default()
    };
    tol.validate()
        .map_err(|e| CliError::config(e.to_string()))?;
    Ok(tol)
}

fn criteria(a: &SecantArgs, default_tol_gamma: f64) -> Result<RootCriteria, CliError> {
    let crit = RootCriteria {
        tol_gamma: a.tol_gamma.unwrap_or(default_tol_gamma),
        tol_rel: a.tol_rel,
        tol_abs: a.tol_abs,
        max_iters: a.max_iters,
    };
    crit.validate()
        .map_err(|e| CliError::config(e.to_string()))?;
    Ok(crit)
}

/// Default initial iterates when none are given on the command line.
pub fn default_iterates(problem: ProblemName, sign: Sign) -> (f64, f64) {
    match (problem, sign) {
        (ProblemName::Sakiadis, _) => (2.5, 3.5),
        (_, Sign::Plus) => (1.0, 5.0),
        (_, Sign::Minus) => (15.0, 25.0),
    }
}

fn iterates(a: &SecantArgs, default: (f64, f64)) -> Result<(f64, f64), CliError> {
    let (h0, h1) = (a.h0.unwrap_or(default.0), a.h1.unwrap_or(default.1));
    if !(h0 > 0.0 && h1 > 0.0 && h0 != h1 && h0.is_finite() && h1.is_finite()) {
        return Err(CliError::config(format!(
            "initial iterates must be distinct and positive, got {h0}, {h1}"
        )));
    }
    Ok((h0, h1))
}

fn build_problem(a: &ProblemArgs) -> Result<ProblemSpec, CliError> {
    if a.problem != ProblemName::FalknerSkan && a.beta != 0.0 {
        return Err(CliError::config("--beta applies to falkner-skan only"));
    }
    if !a.beta.is_finite() {
        return Err(CliError::config("--beta must be finite"));
    }
    let p = preset(a.problem.preset_name(), a.beta, a.sign)
        .map_err(|e| CliError::config(e.to_string()))?;
    match a.eta_inf {
        Some(x) => p
            .with_truncated_boundary(x)
            .map_err(|e| CliError::config(e.to_string())),
        None => Ok(p),
    }
}

/// Result of a successful (or reportable) run.
#[derive(Debug, Clone, PartialEq)]
pub enum RunReport {
    Solve(ItmSolution),
    Scan(ScanReport),
    Sweep(ContinuationPath),
    BetaMin(BetaMinEstimate),
}

impl RunReport {
    /// Exit status implied by the report contents.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunReport::Solve(s) if !s.converged => EXIT_NOT_CONVERGED,
            RunReport::Sweep(p) if !p.all_converged() => EXIT_NOT_CONVERGED,
            _ => EXIT_OK,
        }
    }

    fn write<W: Write>(&self, w: W, format: Format) -> io::Result<()> {
        match (self, format) {
            (RunReport::Solve(s), Format::Csv) => report::write_trace_csv(w, s),
            (RunReport::Solve(s), Format::Json) => report::write_json(w, s),
            (RunReport::Solve(s), Format::Pretty) => report::write_solution_pretty(w, s),
            (RunReport::Scan(r), Format::Csv) => report::write_scan_csv(w, r),
            (RunReport::Scan(r), Format::Json) => report::write_json(w, r),
            (RunReport::Scan(r), Format::Pretty) => report::write_scan_pretty(w, r),
            (RunReport::Sweep(p), Format::Csv) => report::write_sweep_csv(w, p),
            (RunReport::Sweep(p), Format::Json) => report::write_json(w, p),
            (RunReport::Sweep(p), Format::Pretty) => report::write_sweep_pretty(w, p),
            (RunReport::BetaMin(e), Format::Csv) => report::write_beta_min_csv(w, e),
            (RunReport::BetaMin(e), Format::Json) => report::write_json(w, e),
            (RunReport::BetaMin(e), Format::Pretty) => report::write_beta_min_pretty(w, e),
        }
    }
}

fn run_solve(a: &SolveArgs) -> Result<RunReport, CliError> {
    let p = build_problem(&a.problem)?;
    let default_gamma = if a.problem.problem == ProblemName::Sakiadis {
        1e-9
    } else {
        1e-6
    };
    let crit = criteria(&a.secant, default_gamma)?;
    let tol = tolerances(&a.integrator)?;
    let (h0, h1) = iterates(
        &a.secant,
        default_iterates(a.problem.problem, a.problem.sign),
    )?;
    match solve(&p, h0, h1, &crit, &tol) {
        Ok(sol) => Ok(RunReport::Solve(sol)),
        Err(e) => match ItmSolution::from_failure(&p, &e) {
            Some(sol) => Ok(RunReport::Solve(sol)),
            None => Err(match e {
                ItmError::InvalidIterates { .. } | ItmError::InvalidCriteria(_) => {
                    CliError::config(e.to_string())
                }
                // No valid iterate to report.
                ItmError::DegenerateSecant { .. } => {
                    CliError::not_converged(Termination::DegenerateSecant, e.to_string())
                }
                ItmError::EvaluationFailed { .. } => {
                    CliError::not_converged(Termination::EvaluationFailed, e.to_string())
                }
                _ => CliError::evaluation(e.to_string()),
            }),
        },
    }
}

fn run_scan(a: &ScanArgs) -> Result<RunReport, CliError> {
    let p = build_problem(&a.problem)?;
    let grid = parse_grid(&a.grid)?;
    let tol = tolerances(&a.integrator)?;
    scan_gamma(&p, &grid, &tol)
        .map(RunReport::Scan)
        .map_err(|e| match e {
            ScanError::Evaluation(_) => CliError::evaluation(e.to_string()),
            _ => CliError::config(e.to_string()),
        })
}

fn require_falkner_skan(p: ProblemName) -> Result<(), CliError> {
    match p {
        ProblemName::FalknerSkan => Ok(()),
        other => Err(CliError::config(format!(
            "{} has no beta parameter",
            other.preset_name()
        ))),
    }
}

fn run_sweep(a: &SweepArgs) -> Result<RunReport, CliError> {
    require_falkner_skan(a.problem)?;
    let spec = BetaSpec::parse(&a.betas)?;
    let crit = criteria(&a.secant, 1e-6)?;
    let tol = tolerances(&a.integrator)?;
    let seeds = iterates(
        &a.secant,
        default_iterates(ProblemName::FalknerSkan, a.sign),
    )?;
    let path = match (&spec, a.adaptive) {
        (BetaSpec::Range { start, end, step }, true) => {
            sweep_beta_adaptive(*start, *end, step.abs(), a.sign, seeds, &crit, &tol)
        }
        (BetaSpec::List(_), true) => {
            return Err(CliError::config("--adaptive needs a start:end:step range"))
        }
        (_, false) => sweep_beta(&spec.values(), a.sign, seeds, &crit, &tol),
    };
    path.map(RunReport::Sweep).map_err(|e| CliError {
        exit_code: EXIT_NOT_CONVERGED,
        code: "sweep-seed-failure",
        message: e.to_string(),
    })
}

fn run_beta_min(a: &BetaMinArgs) -> Result<RunReport, CliError> {
    require_falkner_skan(a.problem)?;
    let v = parse_fields(&a.bracket, 2, "bracket")?;
    let crit = criteria(&a.secant, 1e-6)?;
    let tol = tolerances(&a.integrator)?;
    let seed_iterates = iterates(
        &a.secant,
        default_iterates(ProblemName::FalknerSkan, a.sign),
    )?;
    let settings = BetaMinSettings {
        branch: a.sign,
        seed_iterates,
        crit,
        tol,
    };
    find_beta_min(&settings, (v[0], v[1]), a.width_tol)
        .map(RunReport::BetaMin)
        .map_err(|e| CliError::config(e.to_string()))
}

/// Executes a parsed command line without writing any output.
pub fn execute(cli: &Cli) -> Result<RunReport, CliError> {
    match &cli.command {
        Command::Solve(a) => run_solve(a),
        Command::Scan(a) => run_scan(a),
        Command::Sweep(a) => run_sweep(a),
        Command::BetaMin(a) => run_beta_min(a),
    }
}

fn output_args(cli: &Cli) -> &OutputArgs {
    match &cli.command {
        Command::Solve(a) => &a.out,
        Command::Scan(a) => &a.out,
        Command::Sweep(a) => &a.out,
        Command::BetaMin(a) => &a.out,
    }
}

fn emit(cli: &Cli, rep: &RunReport, stdout: &mut dyn Write) -> Result<(), CliError> {
    let out = output_args(cli);
    match &out.output {
        Some(path) => {
            let name = path.display().to_string();
            let file = File::create(path).map_err(|e| CliError::io(&name, e))?;
            let mut w = BufWriter::new(file);
            rep.write(&mut w, out.format)
                .map_err(|e| CliError::io(&name, e))?;
            w.flush().map_err(|e| CliError::io(&name, e))
        }
        None => rep
            .write(stdout, out.format)
            .map_err(|e| CliError::io("stdout", e)),
    }?;
    if let (Command::Solve(a), RunReport::Solve(sol)) = (&cli.command, rep) {
        if let Some(path) = &a.profile {
            let name = path.display().to_string();
            let file = File::create(path).map_err(|e| CliError::io(&name, e))?;
            report::write_profile_csv(BufWriter::new(file), &sol.profile)
                .map_err(|e| CliError::io(&name, e))?;
        }
    }
    Ok(())
}

fn failure_line(rep: &RunReport) -> Option<CliError> {
    match rep {
        RunReport::Solve(s) if !s.converged => Some(CliError::not_converged(
            s.termination,
            format!(
                "{} did not converge after {} iterations",
                s.problem,
                s.iteration_count()
            ),
        )),
        RunReport::Sweep(p) if !p.all_converged() => {
            let failed: Vec<String> = p
                .entries
                .iter()
                .filter(|e| !e.converged)
                .map(|e| e.beta.to_string())
                .collect();
            let first = p
                .entries
                .iter()
                .find(|e| !e.converged)
                .map(|e| e.termination);
            Some(CliError::not_converged(
                first.unwrap_or(Termination::EvaluationFailed),
                format!("no convergence at beta = {}", failed.join(", ")),
            ))
        }
        _ => None,
    }
}

fn report_error(stderr: &mut dyn Write, e: &CliError) -> i32 {
    let _ = writeln!(stderr, "itm: {}: {}", e.code, e.message);
    e.exit_code
}

/// Full CLI entry point: parses `args`, runs, writes the report and returns
/// the process exit status.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if !e.use_stderr() {
                let _ = write!(stdout, "{text}");
                return EXIT_OK;
            }
            let _ = write!(stderr, "{text}");
            let first = text
                .lines()
                .next()
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            return report_error(
                stderr,
                &CliError {
                    exit_code: EXIT_FAILURE,
                    code: "usage",
                    message: first.into(),
                },
            );
        }
    };
    let rep = match execute(&cli) {
        Ok(rep) => rep,
        Err(e) => return report_error(stderr, &e),
    };
    if let Err(e) = emit(&cli, &rep, stdout) {
        return report_error(stderr, &e);
    }
    match failure_line(&rep) {
        Some(e) => report_error(stderr, &e),
        None => EXIT_OK,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_ranges() {
        let v = BetaSpec::parse("-0.025:-0.1:-0.025").unwrap().values();
        assert_eq!(v.len(), 4);
        assert!((v[3] + 0.1).abs() < 1e-15);
        assert_eq!(
            BetaSpec::parse("0,0.5,1").unwrap().values(),
            vec![0.0, 0.5, 1.0]
        );
        for bad in ["0:1:-0.1", "0:1", "a:b:c", "0:1:0", "", "0,,1"] {
            let e = BetaSpec::parse(bad).unwrap_err();
            assert_eq!(e.exit_code, EXIT_FAILURE);
            assert!(e.message.contains(&format!("'{bad}'")), "{}", e.message);
        }
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("1:5:5").unwrap(), vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        let g = parse_grid("1:100:3L").unwrap();
        assert!((g[1] - 10.0).abs() < 1e-12);
        for bad in ["1:5", "0:5:5", "5:1:5", "1:5:1", "1:x:5"] {
            assert!(parse_grid(bad).unwrap_err().message.contains(bad));
        }
    }

    #[test]
    fn help_exits_zero() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(
            main_with_args(["itm", "--help"], &mut out, &mut err),
            EXIT_OK
        );
        assert!(String::from_utf8(out).unwrap().contains("solve"));
    }

    #[test]
    fn unknown_flag_is_a_usage_error() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(
            main_with_args(["itm", "solve", "--bogus"], &mut out, &mut err),
            EXIT_FAILURE
        );
        assert!(String::from_utf8(err)
            .unwrap()
            .lines()
            .any(|l| l.starts_with("itm: usage:")));
    }
}
