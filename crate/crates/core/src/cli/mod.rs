//! `autotherm` command line.
//!
//! Exit codes: 0 success, 1 a physics check or audit failed, 2 bad input.
//! `AUTOTHERM_THREADS` caps the worker pool used by grid commands. Output
//! order never depends on scheduling.

pub mod grid;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::catalysis::{verify, DEFAULT_N_MAX};
use crate::dynamics::Evolution;
use crate::hamiltonian::{builtin_scenario, Builtin, BuiltinOptions, Scenario};
use crate::oracles::{family_closed_forms, relative_time_deviation};
use crate::output::format_float;
use crate::quadrature::QuadratureConfig;
use crate::speed_limits::{qtsl_report, write_sweep_csv, QtslReport};
use crate::thermo::{ledger, write_ledger_csv, ThermoLedger, LEDGER_TOL};
use crate::{Error, Result};

use grid::{cartesian, parse_assignments, parse_axis, parse_values, Axis};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "AUTOTHERM_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "autotherm", version, about = "Catalysis checks, thermodynamic ledgers and speed limits for autonomous quantum models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the catalysis checks on one scenario.
    Verify(VerifyArgs),
    /// Heat, work and entropy ledger over a τ grid.
    Evolve(EvolveArgs),
    /// QTSL quantities over a parameter × τ grid.
    QtslSweep(SweepArgs),
    /// Entropy-inequality audits over a τ grid.
    Bounds(BoundsArgs),
    /// Closed forms against the numerical pipeline.
    OracleCompare(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Report,
    Json,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Scenario TOML file.
    #[arg(long, value_name = "PATH")]
    pub scenario: Option<PathBuf>,
    /// Built-in family (cmaybe, werner_zx, werner_xx) instead of a file.
    #[arg(long, value_name = "NAME", conflicts_with = "scenario")]
    pub builtin: Option<String>,
    /// Family parameter, repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    pub params: Vec<String>,
    /// Add the Zb Zs coupling to built-in families.
    #[arg(long)]
    pub sb_coupling: bool,
}

#[derive(Debug, Args)]
pub struct TauArgs {
    /// Evolution time(s), comma separated.
    #[arg(long, value_name = "T[,T...]", conflicts_with = "tau_grid")]
    pub tau: Option<String>,
    /// Evolution times as start:stop:count.
    #[arg(long, value_name = "START:STOP:COUNT")]
    pub tau_grid: Option<String>,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output file; stdout when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Time of the dynamical checks.
    #[arg(long, default_value = "1.0")]
    pub tau: String,
    /// Largest power in the power-multiplicativity check.
    #[arg(long, default_value_t = DEFAULT_N_MAX)]
    pub n_max: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[command(flatten)]
    pub tau: TauArgs,
    /// Also write the reduced-state trajectory CSV here.
    #[arg(long, value_name = "PATH")]
    pub trajectory: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct QuadArgs {
    /// Schatten order, a number ≥ 1 or `inf`.
    #[arg(long, default_value = "1")]
    pub p: String,
    /// Absolute tolerance on each time-averaged norm.
    #[arg(long)]
    pub quad_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Built-in family to sweep; use --scenario for a fixed file.
    #[arg(long, value_name = "NAME", conflicts_with = "scenario")]
    pub family: Option<String>,
    #[arg(long, value_name = "PATH")]
    pub scenario: Option<PathBuf>,
    /// Swept family parameter, repeatable.
    #[arg(long = "grid", value_name = "NAME=START:STOP:COUNT")]
    pub grids: Vec<String>,
    /// Fixed family parameter, repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    pub params: Vec<String>,
    #[arg(long)]
    pub sb_coupling: bool,
    #[command(flatten)]
    pub tau: TauArgs,
    #[command(flatten)]
    pub quad: QuadArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[command(flatten)]
    pub tau: TauArgs,
    #[command(flatten)]
    pub quad: QuadArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Built-in family.
    #[arg(long, value_name = "NAME")]
    pub family: String,
    #[arg(long = "grid", value_name = "NAME=START:STOP:COUNT")]
    pub grids: Vec<String>,
    #[arg(long = "param", value_name = "NAME=VALUE")]
    pub params: Vec<String>,
    #[command(flatten)]
    pub tau: TauArgs,
    #[arg(long)]
    pub quad_tol: Option<f64>,
    /// Largest accepted absolute deviation on distances and norms.
    #[arg(long, default_value_t = 1e-7)]
    pub tolerance: f64,
    /// Largest accepted relative deviation on T₁*.
    #[arg(long, default_value_t = 1e-6)]
    pub rel_tolerance: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

/// A grid of built-in scenarios: parameter axes crossed with τ values.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub family: String,
    pub fixed: BTreeMap<String, f64>,
    pub axes: Vec<Axis>,
    pub taus: Vec<f64>,
    pub p: f64,
    pub quad: QuadratureConfig,
    pub options: BuiltinOptions,
}

impl SweepSpec {
    /// Parameter values of every grid point, first axis slowest.
    pub fn points(&self) -> Vec<Vec<f64>> {
        cartesian(&self.axes)
    }

    pub fn axis_names(&self) -> Vec<String> {
        self.axes.iter().map(|a| a.name.clone()).collect()
    }

    pub fn builtin_at(&self, point: &[f64]) -> Result<Builtin> {
        let mut params = self.fixed.clone();
        for (axis, &v) in self.axes.iter().zip(point) {
            if params.insert(axis.name.clone(), v).is_some() {
                return Err(Error::Parameter(format!("parameter '{}' is both fixed and swept", axis.name)));
            }
        }
        Builtin::from_name(&self.family, &params)
    }

    fn validate(&self) -> Result<()> {
        if self.taus.is_empty() || self.axes.iter().any(|a| a.values.is_empty()) {
            return Err(Error::Parameter("sweep grids must be non-empty".into()));
        }
        for (i, a) in self.axes.iter().enumerate() {
            if self.axes[..i].iter().any(|b| b.name == a.name) {
                return Err(Error::Parameter(format!("parameter '{}' swept twice", a.name)));
            }
        }
        if let Some(first) = self.points().first() {
            self.builtin_at(first)?;
        }
        Ok(())
    }
}

/// Evaluates `f` on every (point, τ) pair in parallel, keeping grid order.
fn over_grid<T: Send>(
    scenarios: &[(Vec<f64>, Scenario)],
    taus: &[f64],
    f: impl Fn(&[f64], &Evolution, f64) -> Result<T> + Sync,
) -> Result<Vec<(Vec<f64>, T)>> {
    let evolutions: Vec<Evolution> = scenarios.par_iter().map(|(_, s)| Evolution::new(s)).collect::<Result<_>>()?;
    let jobs: Vec<(usize, f64)> = (0..scenarios.len()).flat_map(|i| taus.iter().map(move |&t| (i, t))).collect();
    jobs.par_iter()
        .map(|&(i, t)| Ok((scenarios[i].0.clone(), f(&scenarios[i].0, &evolutions[i], t)?)))
        .collect()
}

/// Runs a QTSL sweep; rows come back in grid order, τ fastest.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<(Vec<f64>, QtslReport)>> {
    spec.validate()?;
    let scenarios = spec
        .points()
        .into_iter()
        .map(|pt| Ok((pt.clone(), builtin_scenario(spec.builtin_at(&pt)?, spec.options)?)))
        .collect::<Result<Vec<_>>>()?;
    let (p, quad) = (spec.p, spec.quad);
    over_grid(&scenarios, &spec.taus, |_, evo, t| qtsl_report(evo, p, t, &quad))
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Contract { .. } | Error::Quadrature { .. } => EXIT_CHECK_FAILED,
        _ => EXIT_INPUT,
    }
}

fn thread_count() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Parameter(format!("{THREADS_ENV} must be a positive integer, got '{v}'"))),
        },
        Err(_) => Ok(None),
    }
}

/// Parses `args` (program name first) and runs the command, returning the
/// exit code. Diagnostics go to `err`; results go to `--out` or `out`.
pub fn run<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let result = thread_count().and_then(|threads| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = threads {
            builder = builder.num_threads(n);
        }
        let pool = builder
            .build()
            .map_err(|e| Error::Parameter(format!("cannot start worker pool: {e}")))?;
        pool.install(|| dispatch(&cli.command, out, err))
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: &Command, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<i32> {
    match cmd {
        Command::Verify(a) => cmd_verify(a, out, err),
        Command::Evolve(a) => cmd_evolve(a, out, err),
        Command::QtslSweep(a) => cmd_qtsl_sweep(a, out, err),
        Command::Bounds(a) => cmd_bounds(a, out, err),
        Command::OracleCompare(a) => cmd_oracle_compare(a, out, err),
    }
}

fn load_scenario(a: &ScenarioArgs) -> Result<Scenario> {
    let options = BuiltinOptions {
        system_bath_coupling: a.sb_coupling,
    };
    match (&a.scenario, &a.builtin) {
        (Some(path), None) => {
            if !a.params.is_empty() || a.sb_coupling {
                return Err(Error::Parameter("--param and --sb-coupling only apply to --builtin".into()));
            }
            Scenario::from_path(path)
        }
        (None, Some(name)) => builtin_scenario(Builtin::from_name(name, &parse_assignments(&a.params)?)?, options),
        _ => Err(Error::Parameter("give exactly one of --scenario or --builtin".into())),
    }
}

fn taus(a: &TauArgs) -> Result<Vec<f64>> {
    let taus = match (&a.tau, &a.tau_grid) {
        (Some(t), None) => parse_values(t)?,
        (None, Some(g)) => parse_values(g)?,
        _ => return Err(Error::Parameter("give one of --tau or --tau-grid".into())),
    };
    if let Some(bad) = taus.iter().find(|t| **t < 0.0) {
        return Err(Error::Parameter(format!("evolution times must be non-negative, got {bad}")));
    }
    Ok(taus)
}

fn positive_taus(a: &TauArgs) -> Result<Vec<f64>> {
    let t = taus(a)?;
    if t.contains(&0.0) {
        return Err(Error::Parameter("time-averaged norms need τ > 0".into()));
    }
    Ok(t)
}

fn parse_p(text: &str) -> Result<f64> {
    let p = match text.trim() {
        "inf" | "infinity" => f64::INFINITY,
        t => grid::parse_number(t)?,
    };
    if !(p >= 1.0) {
        return Err(Error::Parameter(format!("Schatten order must be ≥ 1, got {text}")));
    }
    Ok(p)
}

fn quad_config(tol: Option<f64>) -> Result<QuadratureConfig> {
    match tol {
        Some(t) if !(t > 0.0 && t.is_finite()) => Err(Error::Parameter(format!("--quad-tol must be positive, got {t}"))),
        Some(t) => Ok(QuadratureConfig::with_tol(t)),
        None => Ok(QuadratureConfig::default()),
    }
}

/// Writes `body` to the `--out` file, or to `out`.
fn emit(path: &Option<PathBuf>, out: &mut (dyn Write + Send), body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            body(&mut w)?;
            w.flush()?;
        }
        None => {
            body(out)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn cmd_verify(a: &VerifyArgs, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<i32> {
    let scenario = load_scenario(&a.scenario)?;
    let tau = grid::parse_number(&a.tau)?;
    let report = verify(&scenario, tau, a.n_max)?;
    emit(&a.out.out, out, |w| {
        match a.out.format.unwrap_or(Format::Report) {
            Format::Report => write!(w, "{}", report.to_text())?,
            Format::Json => writeln!(w, "{}", report.to_json())?,
            Format::Csv => report.write_csv(w)?,
        }
        Ok(())
    })?;
    let failures = report.failures();
    if failures.is_empty() {
        Ok(EXIT_OK)
    } else {
        writeln!(err, "failed checks: {}", failures.join(", "))?;
        Ok(EXIT_CHECK_FAILED)
    }
}

fn ledger_problems(l: &ThermoLedger) -> Vec<String> {
    let mut p = Vec::new();
    if !l.energy_conserved() {
        p.push(format!("energy not conserved (‖[H_tot, H_0]‖ = {:.3e})", l.energy_conservation_residual));
    } else if l.first_law_residual > LEDGER_TOL {
        p.push(format!("first law residual {:.3e}", l.first_law_residual));
    }
    if l.second_law_residual > LEDGER_TOL {
        p.push(format!("second law residual {:.3e}", l.second_law_residual));
    }
    if let Some(s) = l.support_failure() {
        p.push(s);
    }
    p
}

fn ledger_text(rows: &[ThermoLedger]) -> String {
    let mut s = String::new();
    for r in rows {
        s += &format!(
            "tau={} Q={} W={} dE={} dS_s={} dS_m={} dS_w={} delta_rel={} gap={} margin={} mi0={}\n",
            format_float(r.tau),
            format_float(r.heat),
            format_float(r.work),
            format_float(r.energy_change),
            format_float(r.entropy_change_system),
            format_float(r.entropy_change_memory),
            format_float(r.entropy_change_work),
            r.delta_rel.map_or("unavailable".to_string(), format_float),
            format_float(r.landauer_gap),
            format_float(r.landauer_margin),
            format_float(r.mutual_information),
        );
        for problem in ledger_problems(r) {
            s += &format!("  ! {problem}\n");
        }
    }
    s
}

fn cmd_evolve(a: &EvolveArgs, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<i32> {
    let scenario = load_scenario(&a.scenario)?;
    let taus = taus(&a.tau)?;
    let evo = Evolution::new(&scenario)?;
    let rows: Vec<ThermoLedger> = taus.par_iter().map(|&t| ledger(&evo, t)).collect::<Result<_>>()?;
    if let Some(path) = &a.trajectory {
        let mut sorted = taus.clone();
        sorted.sort_by(f64::total_cmp);
        let traj = evo.trajectory(&sorted, &crate::tensor::CANONICAL_ORDER)?;
        let mut w = BufWriter::new(File::create(path)?);
        traj.write_csv(&mut w)?;
        w.flush()?;
    }
    emit(&a.out.out, out, |w| {
        match a.out.format.unwrap_or(Format::Csv) {
            Format::Csv => write_ledger_csv(&rows, w)?,
            Format::Report => write!(w, "{}", ledger_text(&rows))?,
            Format::Json => writeln!(w, "{}", serde_json::to_string_pretty(&rows).map_err(json_err)?)?,
        }
        Ok(())
    })?;
    let bad: Vec<_> = rows.iter().filter(|r| !ledger_problems(r).is_empty()).collect();
    if bad.is_empty() {
        return Ok(EXIT_OK);
    }
    for r in &bad {
        writeln!(err, "tau={}: {}", format_float(r.tau), ledger_problems(r).join("; "))?;
    }
    Ok(EXIT_CHECK_FAILED)
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn write_reports(
    names: &[String],
    rows: &[(Vec<f64>, QtslReport)],
    format: Format,
    w: &mut dyn Write,
) -> Result<()> {
    match format {
        Format::Csv => write_sweep_csv(names, rows, w),
        Format::Json => {
            let items: Vec<_> = rows
                .iter()
                .map(|(pt, r)| {
                    let params: BTreeMap<&str, f64> = names.iter().map(String::as_str).zip(pt.iter().copied()).collect();
                    serde_json::json!({ "params": params, "report": r })
                })
                .collect();
            writeln!(w, "{}", serde_json::to_string_pretty(&items).map_err(json_err)?)?;
            Ok(())
        }
        Format::Report => {
            for (pt, r) in rows {
                let params: Vec<String> = names.iter().zip(pt).map(|(n, v)| format!("{n}={}", format_float(*v))).collect();
                let q = &r.qtsl;
                writeln!(
                    w,
                    "{}tau={} t_star={} b_star={} fannes={} landauer={} stein={} stein_bound={}",
                    params.iter().map(|s| s.clone() + " ").collect::<String>(),
                    format_float(q.tau),
                    q.t_star.map_or("undefined".to_string(), format_float),
                    format_float(q.b_star),
                    format_float(r.fannes_margin),
                    format_float(r.dynamical_landauer_margin),
                    format_float(r.hypothesis.stein_exponent),
                    format_float(r.hypothesis.upper_bound),
                )?;
                if r.support_mismatch() {
                    writeln!(w, "  ~ reference state lacks support: exponent infinite, margins undefined")?;
                }
                for f in r.flagged() {
                    writeln!(w, "  ~ {f} margin slightly negative, within tolerance")?;
                }
                for v in r.violations() {
                    writeln!(w, "  ! {v} margin violated")?;
                }
            }
            Ok(())
        }
    }
}

fn audit_exit(rows: &[(Vec<f64>, QtslReport)], err: &mut (dyn Write + Send)) -> Result<i32> {
    let mut code = EXIT_OK;
    for (pt, r) in rows {
        let v = r.violations();
        if !v.is_empty() {
            writeln!(err, "point {pt:?} tau={}: violated {}", format_float(r.qtsl.tau), v.join(", "))?;
            code = EXIT_CHECK_FAILED;
        }
    }
    Ok(code)
}

fn cmd_qtsl_sweep(a: &SweepArgs, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<i32> {
    let p = parse_p(&a.quad.p)?;
    let quad = quad_config(a.quad.quad_tol)?;
    let taus = positive_taus(&a.tau)?;
    let (names, rows) = match (&a.family, &a.scenario) {
        (Some(family), None) => {
            let spec = SweepSpec {
                family: family.clone(),
                fixed: parse_assignments(&a.params)?,
                axes: a.grids.iter().map(|g| parse_axis(g)).collect::<Result<_>>()?,
                taus,
                p,
                quad,
                options: BuiltinOptions {
                    system_bath_coupling: a.sb_coupling,
                },
            };
            (spec.axis_names(), run_sweep(&spec)?)
        }
        (None, Some(path)) => {
            if !a.grids.is_empty() || !a.params.is_empty() || a.sb_coupling {
                return Err(Error::Parameter("--grid, --param and --sb-coupling need --family".into()));
            }
            let s = Scenario::from_path(path)?;
            (Vec::new(), over_grid(&[(Vec::new(), s)], &taus, |_, evo, t| qtsl_report(evo, p, t, &quad))?)
        }
        _ => return Err(Error::Parameter("give one of --family or --scenario".into())),
    };
    emit(&a.out.out, out, |w| write_reports(&names, &rows, a.out.format.unwrap_or(Format::Csv), w))?;
    audit_exit(&rows, err)
}

fn cmd_bounds(a: &BoundsArgs, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<i32> {
    let scenario = load_scenario(&a.scenario)?;
    let p = parse_p(&a.quad.p)?;
    let quad = quad_config(a.quad.quad_tol)?;
    let taus = taus(&a.tau)?;
    let rows = over_grid(&[(Vec::new(), scenario)], &taus, |_, evo, t| qtsl_report(evo, p, t, &quad))?;
    emit(&a.out.out, out, |w| write_reports(&[], &rows, a.out.format.unwrap_or(Format::Report), w))?;
    audit_exit(&rows, err)
}

/// Quantities compared by `oracle-compare`, in column order.
pub const ORACLE_QUANTITIES: [&str; 5] = ["dist_s", "dist_m", "lambda_s", "lambda_m", "t_star"];

/// Smallest T₁* denominator at which the ratio is compared.
pub const ORACLE_NORM_FLOOR: f64 = 1e-6;

/// One grid point of `oracle-compare`: numeric value, closed form and
/// deviation per quantity. The T₁* deviation is relative (see
/// [`relative_time_deviation`]), and NaN where the denominator is below
/// [`ORACLE_NORM_FLOOR`].
#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub tau: f64,
    pub numeric: [f64; 5],
    pub oracle: [f64; 5],
    pub deviation: [f64; 5],
}

pub fn oracle_row(which: &Builtin, evo: &Evolution, tau: f64, quad: &QuadratureConfig) -> Result<OracleRow> {
    let q = crate::speed_limits::qtsl_time(evo, 1.0, tau, quad)?;
    let f = family_closed_forms(which, tau)?;
    let undefined = f64::NAN;
    let numeric = [q.dist_s, q.dist_m, q.lambda_s, q.lambda_m, q.t_star.unwrap_or(undefined)];
    let oracle = [f.dist_s, f.dist_m, f.lambda_s, f.lambda_m, f.qtsl.unwrap_or(undefined)];
    let mut deviation = [0.0; 5];
    for i in 0..4 {
        deviation[i] = (numeric[i] - oracle[i]).abs();
    }
    deviation[4] = if f.norm_sum() > ORACLE_NORM_FLOOR {
        relative_time_deviation(numeric[4], oracle[4])
    } else {
        f64::NAN
    };
    Ok(OracleRow {
        tau,
        numeric,
        oracle,
        deviation,
    })
}

fn cmd_oracle_compare(a: &OracleArgs, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<i32> {
    let quad = quad_config(a.quad_tol)?;
    let taus = positive_taus(&a.tau)?;
    let spec = SweepSpec {
        family: a.family.clone(),
        fixed: parse_assignments(&a.params)?,
        axes: a.grids.iter().map(|g| parse_axis(g)).collect::<Result<_>>()?,
        taus,
        p: 1.0,
        quad,
        options: BuiltinOptions::default(),
    };
    spec.validate()?;
    let scenarios = spec
        .points()
        .into_iter()
        .map(|pt| Ok((pt.clone(), builtin_scenario(spec.builtin_at(&pt)?, spec.options)?)))
        .collect::<Result<Vec<_>>>()?;
    let rows = over_grid(&scenarios, &spec.taus, |pt, evo, t| oracle_row(&spec.builtin_at(pt)?, evo, t, &quad))?;
    let names = spec.axis_names();
    let mut max_abs = 0.0f64;
    let mut max_rel = 0.0f64;
    for (_, r) in &rows {
        for d in &r.deviation[..4] {
            max_abs = max_abs.max(*d);
        }
        if r.deviation[4].is_finite() {
            max_rel = max_rel.max(r.deviation[4]);
        }
    }
    let summary = format!(
        "points={} max_abs_deviation={} max_rel_deviation_t_star={}",
        rows.len(),
        format_float(max_abs),
        format_float(max_rel)
    );
    emit(&a.out.out, out, |w| {
        match a.out.format.unwrap_or(Format::Csv) {
            Format::Csv => {
                let mut cw = csv::Writer::from_writer(w);
                let mut header: Vec<String> = names.clone();
                header.push("tau".into());
                for q in ORACLE_QUANTITIES {
                    header.extend([format!("{q}_numeric"), format!("{q}_oracle"), format!("{q}_deviation")]);
                }
                cw.write_record(&header).map_err(crate::dynamics::csv_err)?;
                for (pt, r) in &rows {
                    let mut rec: Vec<String> = pt.iter().map(|&v| format_float(v)).collect();
                    rec.push(format_float(r.tau));
                    for i in 0..5 {
                        rec.extend([format_float(r.numeric[i]), format_float(r.oracle[i]), format_float(r.deviation[i])]);
                    }
                    cw.write_record(&rec).map_err(crate::dynamics::csv_err)?;
                }
                cw.flush()?;
            }
            _ => writeln!(w, "{summary}")?,
        }
        Ok(())
    })?;
    writeln!(err, "{summary}")?;
    if max_abs > a.tolerance || max_rel > a.rel_tolerance || rows.iter().any(|(_, r)| r.deviation.iter().any(|d| d.is_infinite())) {
        writeln!(
            err,
            "deviation exceeds tolerance (abs {}, rel {})",
            format_float(a.tolerance),
            format_float(a.rel_tolerance)
        )?;
        return Ok(EXIT_CHECK_FAILED);
    }
    Ok(EXIT_OK)
}
