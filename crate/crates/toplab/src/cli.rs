//! Command-line front end: `simulate`, `verify`, `ensemble`. Flat flag set,
//! JSON config files, CSV output with full float precision. Everything is
//! deterministic for a fixed config and seed.

use crate::dde::{integrate_dde, DelaySpec, DelayedSystem};
use crate::fractional::{integrate_fractional, FractionalOrder, MixedOrderSystem};
use crate::ode::{euler_top_field, integrate, pendulum_field, GridSpec};
use crate::phase::{PendulumParams, Trajectory};
use crate::stochastic::{
    ensemble, euler_top_sde_a, euler_top_sde_b, integrate_sde, pendulum_sde, EnsembleStats, Scheme,
    SdeSpec, WienerPath,
};
use crate::verify::{run_all, run_suite, CheckResult};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::io::{self, Write};
use std::path::PathBuf;
use thiserror::Error;

const SYSTEM_HELP: &str = "Systems:
  euler-top          rigid-body top, classical RK4
  pendulum           plane pendulum, classical RK4
  euler-top-dde-z    top with delayed arguments in the x3 equation
  euler-top-dde-x    top with delayed arguments in the x1 equation
  pendulum-dde-h     pendulum with delayed restoring force (H-family level)
  pendulum-dde-k     pendulum with delayed restoring force (K-family level)
  euler-top-frac-z   top with fractional order on the x3 equation
  euler-top-frac-x   top with fractional order on the x1 equation
  pendulum-frac-h    fractional-order pendulum (H-family level)
  pendulum-frac-k    fractional-order pendulum (K-family level)
  euler-top-sde-a    top with linear plus additive noise
  euler-top-sde-b    top with square-root noise on every component
  pendulum-sde       pendulum with square-root noise";

#[derive(Debug, Parser)]
#[command(
    name = "toplab",
    version,
    about = "Integrators and verification suites for the rigid-body top, the pendulum, and their delayed, fractional, and stochastic variants",
    after_help = SYSTEM_HELP
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate one system and emit a CSV trajectory
    Simulate(RunArgs),
    /// Run verification suites and emit a JSON report
    Verify {
        /// Suite name, or "all"
        #[arg(default_value = "all")]
        suite: String,
        /// Report destination (default: standard output)
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Integrate many stochastic paths and emit per-node statistics as CSV
    Ensemble(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemId {
    EulerTop,
    Pendulum,
    EulerTopDdeZ,
    EulerTopDdeX,
    PendulumDdeH,
    PendulumDdeK,
    EulerTopFracZ,
    EulerTopFracX,
    PendulumFracH,
    PendulumFracK,
    EulerTopSdeA,
    EulerTopSdeB,
    PendulumSde,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Family {
    Classical,
    Delayed,
    Fractional,
    Stochastic,
}

impl SystemId {
    pub const ALL: [SystemId; 13] = [
        SystemId::EulerTop,
        SystemId::Pendulum,
        SystemId::EulerTopDdeZ,
        SystemId::EulerTopDdeX,
        SystemId::PendulumDdeH,
        SystemId::PendulumDdeK,
        SystemId::EulerTopFracZ,
        SystemId::EulerTopFracX,
        SystemId::PendulumFracH,
        SystemId::PendulumFracK,
        SystemId::EulerTopSdeA,
        SystemId::EulerTopSdeB,
        SystemId::PendulumSde,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SystemId::EulerTop => "euler-top",
            SystemId::Pendulum => "pendulum",
            SystemId::EulerTopDdeZ => "euler-top-dde-z",
            SystemId::EulerTopDdeX => "euler-top-dde-x",
            SystemId::PendulumDdeH => "pendulum-dde-h",
            SystemId::PendulumDdeK => "pendulum-dde-k",
            SystemId::EulerTopFracZ => "euler-top-frac-z",
            SystemId::EulerTopFracX => "euler-top-frac-x",
            SystemId::PendulumFracH => "pendulum-frac-h",
            SystemId::PendulumFracK => "pendulum-frac-k",
            SystemId::EulerTopSdeA => "euler-top-sde-a",
            SystemId::EulerTopSdeB => "euler-top-sde-b",
            SystemId::PendulumSde => "pendulum-sde",
        }
    }

    fn family(self) -> Family {
        match self {
            SystemId::EulerTop | SystemId::Pendulum => Family::Classical,
            SystemId::EulerTopDdeZ
            | SystemId::EulerTopDdeX
            | SystemId::PendulumDdeH
            | SystemId::PendulumDdeK => Family::Delayed,
            SystemId::EulerTopFracZ
            | SystemId::EulerTopFracX
            | SystemId::PendulumFracH
            | SystemId::PendulumFracK => Family::Fractional,
            SystemId::EulerTopSdeA | SystemId::EulerTopSdeB | SystemId::PendulumSde => {
                Family::Stochastic
            }
        }
    }

    /// Pendulum-family systems take `--theta0/--omega0/--level`; the rest
    /// take `--ic`.
    fn is_pendulum(self) -> bool {
        matches!(
            self,
            SystemId::Pendulum
                | SystemId::PendulumDdeH
                | SystemId::PendulumDdeK
                | SystemId::PendulumFracH
                | SystemId::PendulumFracK
                | SystemId::PendulumSde
        )
    }

    fn is_stochastic(self) -> bool {
        self.family() == Family::Stochastic
    }

    fn dim(self) -> usize {
        if self.is_pendulum() {
            2
        } else {
            3
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterpretationChoice {
    Ito,
    Strat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeChoice {
    Em,
    Milstein,
    Heun,
}

/// One run, fully described. JSON config files deserialize into exactly
/// this shape; unknown keys are rejected by name.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub system: Option<SystemId>,
    pub ic: Option<Vec<f64>>,
    pub theta0: Option<f64>,
    pub omega0: Option<f64>,
    pub level: Option<f64>,
    pub t0: Option<f64>,
    pub t1: Option<f64>,
    pub dt: Option<f64>,
    pub tau: Option<f64>,
    pub alpha: Option<f64>,
    pub interpretation: Option<InterpretationChoice>,
    pub scheme: Option<SchemeChoice>,
    pub seed: Option<u64>,
    pub paths: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// System to integrate (see the list under --help)
    #[arg(long, value_enum)]
    system: Option<SystemId>,
    /// Initial state, comma-separated (top-family systems)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    ic: Option<Vec<f64>>,
    /// Initial angle in radians (pendulum-family systems)
    #[arg(long, allow_hyphen_values = true)]
    theta0: Option<f64>,
    /// Initial angular velocity (pendulum family; default 0)
    #[arg(long, allow_hyphen_values = true)]
    omega0: Option<f64>,
    /// Level constant: the pendulum stiffness is 2·level
    #[arg(long)]
    level: Option<f64>,
    /// Grid start (default 0)
    #[arg(long, allow_hyphen_values = true)]
    t0: Option<f64>,
    /// Grid end (default 10)
    #[arg(long)]
    t1: Option<f64>,
    /// Grid step (default 1e-3)
    #[arg(long)]
    dt: Option<f64>,
    /// Delay (delayed systems; requires dt <= tau/4)
    #[arg(long)]
    tau: Option<f64>,
    /// Fractional order in (0, 1] (fractional systems)
    #[arg(long)]
    alpha: Option<f64>,
    /// Noise reading for stochastic systems (default ito)
    #[arg(long, value_enum)]
    interpretation: Option<InterpretationChoice>,
    /// Integration scheme for stochastic systems (default em)
    #[arg(long, value_enum)]
    scheme: Option<SchemeChoice>,
    /// Master seed for stochastic systems (default 0)
    #[arg(long)]
    seed: Option<u64>,
    /// Number of ensemble paths (ensemble only; at least 2)
    #[arg(long)]
    paths: Option<usize>,
    /// JSON config file; command-line flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output destination (default: standard output)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("missing required field `{field}` for system `{system}`")]
    Missing {
        field: &'static str,
        system: &'static str,
    },
    #[error("field `{field}` does not apply to system `{system}`")]
    Extraneous {
        field: &'static str,
        system: &'static str,
    },
    #[error("invalid value for field `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("missing required field `system`")]
    NoSystem,
    #[error("cannot read config file `{path}`: {reason}")]
    ConfigRead { path: String, reason: String },
    #[error("bad config file `{path}`: {reason}")]
    ConfigParse { path: String, reason: String },
    #[error("{0}")]
    Usage(String),
    #[error("run failed: {0}")]
    Run(String),
    #[error("{0}")]
    UnknownSuite(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    /// 2 for configuration and usage problems, 1 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Run(_) | CliError::Io(_) => 1,
            _ => 2,
        }
    }
}

/// Parse `argv`, run, and return the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints its own help/version/usage text
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Simulate(args) => {
            let cfg = merge(&args)?;
            let tr = simulate_trajectory(&cfg)?;
            let mut out = open_output(&args.output)?;
            write_trajectory_csv(&mut out, &tr)?;
            out.flush()?;
            Ok(0)
        }
        Command::Ensemble(args) => {
            let cfg = merge(&args)?;
            let stats = run_ensemble(&cfg)?;
            let mut out = open_output(&args.output)?;
            write_ensemble_csv(&mut out, &stats)?;
            out.flush()?;
            Ok(0)
        }
        Command::Verify { suite, output } => {
            let results: Vec<CheckResult> = if suite == "all" {
                run_all()
            } else {
                run_suite(&suite).map_err(|e| CliError::UnknownSuite(e.to_string()))?
            };
            let mut out = open_output(&output)?;
            serde_json::to_writer_pretty(&mut out, &results).map_err(io::Error::other)?;
            writeln!(out)?;
            out.flush()?;
            Ok(if results.iter().all(|r| r.pass) { 0 } else { 1 })
        }
    }
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(io::BufWriter::new(io::stdout())),
    })
}

/// Flags override config-file fields, which override built-in defaults.
fn merge(args: &RunArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::ConfigRead {
                path: path.display().to_string(),
                reason: e.to_string(),
            })?;
            serde_json::from_str::<RunConfig>(&text).map_err(|e| CliError::ConfigParse {
                path: path.display().to_string(),
                reason: e.to_string(),
            })?
        }
        None => RunConfig::default(),
    };
    macro_rules! blend {
        ($($field:ident),+) => {
            $(if args.$field.is_some() {
                cfg.$field = args.$field.clone();
            })+
        };
    }
    blend!(
        system,
        ic,
        theta0,
        omega0,
        level,
        t0,
        t1,
        dt,
        tau,
        alpha,
        interpretation,
        scheme,
        seed,
        paths
    );
    Ok(cfg)
}

struct FieldRule {
    field: &'static str,
    given: bool,
    applies: bool,
    required: bool,
}

/// Reject fields foreign to the selected system; demand the ones it needs.
fn check_fields(cfg: &RunConfig, system: SystemId, ensemble_mode: bool) -> Result<(), CliError> {
    let fam = system.family();
    let pendulum = system.is_pendulum();
    let stochastic = system.is_stochastic();
    let rules = [
        FieldRule {
            field: "ic",
            given: cfg.ic.is_some(),
            applies: !pendulum,
            required: true,
        },
        FieldRule {
            field: "theta0",
            given: cfg.theta0.is_some(),
            applies: pendulum,
            required: true,
        },
        FieldRule {
            field: "omega0",
            given: cfg.omega0.is_some(),
            applies: pendulum,
            required: false,
        },
        FieldRule {
            field: "level",
            given: cfg.level.is_some(),
            applies: pendulum,
            required: true,
        },
        FieldRule {
            field: "tau",
            given: cfg.tau.is_some(),
            applies: fam == Family::Delayed,
            required: true,
        },
        FieldRule {
            field: "alpha",
            given: cfg.alpha.is_some(),
            applies: fam == Family::Fractional,
            required: true,
        },
        FieldRule {
            field: "interpretation",
            given: cfg.interpretation.is_some(),
            applies: stochastic,
            required: false,
        },
        FieldRule {
            field: "scheme",
            given: cfg.scheme.is_some(),
            applies: stochastic,
            required: false,
        },
        FieldRule {
            field: "seed",
            given: cfg.seed.is_some(),
            applies: stochastic,
            required: false,
        },
        FieldRule {
            field: "paths",
            given: cfg.paths.is_some(),
            applies: stochastic && ensemble_mode,
            required: true,
        },
    ];
    for rule in rules {
        if rule.given && !rule.applies {
            return Err(CliError::Extraneous {
                field: rule.field,
                system: system.as_str(),
            });
        }
        if !rule.given && rule.applies && rule.required {
            return Err(CliError::Missing {
                field: rule.field,
                system: system.as_str(),
            });
        }
    }
    Ok(())
}

struct Resolved {
    system: SystemId,
    grid: GridSpec,
    ic: Vec<f64>,
    level: f64,
    tau: f64,
    alpha: f64,
    interpretation: InterpretationChoice,
    scheme: SchemeChoice,
    seed: u64,
    paths: usize,
}

fn resolve(cfg: &RunConfig, ensemble_mode: bool) -> Result<Resolved, CliError> {
    let system = cfg.system.ok_or(CliError::NoSystem)?;
    if ensemble_mode && !system.is_stochastic() {
        return Err(CliError::Usage(format!(
            "ensemble requires a stochastic system; `{}` is deterministic",
            system.as_str()
        )));
    }
    check_fields(cfg, system, ensemble_mode)?;

    let t0 = cfg.t0.unwrap_or(0.0);
    let t1 = cfg.t1.unwrap_or(10.0);
    let dt = cfg.dt.unwrap_or(1e-3);
    let grid = GridSpec::new(t0, t1, dt).map_err(|e| CliError::Invalid {
        field: "dt",
        reason: e.to_string(),
    })?;

    let ic = if system.is_pendulum() {
        vec![cfg.theta0.expect("checked"), cfg.omega0.unwrap_or(0.0)]
    } else {
        let ic = cfg.ic.clone().expect("checked");
        if ic.len() != system.dim() {
            return Err(CliError::Invalid {
                field: "ic",
                reason: format!("expected {} components, got {}", system.dim(), ic.len()),
            });
        }
        ic
    };

    let scheme = cfg.scheme.unwrap_or(SchemeChoice::Em);
    let interpretation = cfg.interpretation.unwrap_or(InterpretationChoice::Ito);
    if system.is_stochastic() {
        match (scheme, interpretation) {
            (SchemeChoice::Em | SchemeChoice::Milstein, InterpretationChoice::Strat) => {
                return Err(CliError::Invalid {
                    field: "scheme",
                    reason: "em and milstein integrate the ito reading; \
                             pass --interpretation ito or switch to --scheme heun"
                        .into(),
                })
            }
            (SchemeChoice::Heun, InterpretationChoice::Ito) => {
                return Err(CliError::Invalid {
                    field: "scheme",
                    reason: "heun integrates the stratonovich reading; \
                             pass --interpretation strat"
                        .into(),
                })
            }
            _ => {}
        }
    }

    let paths = cfg.paths.unwrap_or(0);
    if ensemble_mode && paths < 2 {
        return Err(CliError::Invalid {
            field: "paths",
            reason: format!("ensemble statistics need at least 2 paths, got {paths}"),
        });
    }

    Ok(Resolved {
        system,
        grid,
        ic,
        level: cfg.level.unwrap_or(0.0),
        tau: cfg.tau.unwrap_or(0.0),
        alpha: cfg.alpha.unwrap_or(1.0),
        interpretation,
        scheme,
        seed: cfg.seed.unwrap_or(0),
        paths,
    })
}

fn run_err(e: impl std::fmt::Display) -> CliError {
    CliError::Run(e.to_string())
}

fn sde_spec(r: &Resolved) -> Result<SdeSpec, CliError> {
    let spec = match r.system {
        SystemId::EulerTopSdeA => euler_top_sde_a(),
        SystemId::EulerTopSdeB => euler_top_sde_b(),
        SystemId::PendulumSde => pendulum_sde(r.level).map_err(run_err)?,
        _ => unreachable!("gated by caller"),
    };
    Ok(match r.interpretation {
        InterpretationChoice::Ito => spec,
        InterpretationChoice::Strat => spec.to_stratonovich(),
    })
}

fn scheme_of(choice: SchemeChoice) -> Scheme {
    match choice {
        SchemeChoice::Em => Scheme::EulerMaruyama,
        SchemeChoice::Milstein => Scheme::Milstein,
        SchemeChoice::Heun => Scheme::StratonovichHeun,
    }
}

/// Run the simulation a merged [`RunConfig`] describes. This is the
/// programmatic face of `toplab simulate`; the C bindings call it too.
pub fn simulate_trajectory(cfg: &RunConfig) -> Result<Trajectory, CliError> {
    let r = resolve(cfg, false)?;
    let grid = &r.grid;
    match r.system {
        SystemId::EulerTop => {
            let ic = [r.ic[0], r.ic[1], r.ic[2]];
            integrate(&euler_top_field(), ic, grid).map_err(run_err)
        }
        SystemId::Pendulum => {
            let params = PendulumParams::conservative(r.level).map_err(run_err)?;
            integrate(&pendulum_field(params), [r.ic[0], r.ic[1]], grid).map_err(run_err)
        }
        SystemId::EulerTopDdeZ
        | SystemId::EulerTopDdeX
        | SystemId::PendulumDdeH
        | SystemId::PendulumDdeK => {
            let sys = match r.system {
                SystemId::EulerTopDdeZ => DelayedSystem::EulerTopDelayZ,
                SystemId::EulerTopDdeX => DelayedSystem::EulerTopDelayX,
                SystemId::PendulumDdeH => DelayedSystem::PendulumDelayH { level: r.level },
                _ => DelayedSystem::PendulumDelayK { level: r.level },
            };
            let delay = DelaySpec::new(r.tau).map_err(|e| CliError::Invalid {
                field: "tau",
                reason: e.to_string(),
            })?;
            integrate_dde(&sys, &r.ic, delay, grid).map_err(run_err)
        }
        SystemId::EulerTopFracZ
        | SystemId::EulerTopFracX
        | SystemId::PendulumFracH
        | SystemId::PendulumFracK => {
            let sys = match r.system {
                SystemId::EulerTopFracZ => MixedOrderSystem::EulerTopFracZ,
                SystemId::EulerTopFracX => MixedOrderSystem::EulerTopFracX,
                SystemId::PendulumFracH => MixedOrderSystem::PendulumFracH { level: r.level },
                _ => MixedOrderSystem::PendulumFracK { level: r.level },
            };
            let alpha = FractionalOrder::new(r.alpha).map_err(|e| CliError::Invalid {
                field: "alpha",
                reason: e.to_string(),
            })?;
            integrate_fractional(&sys, &r.ic, alpha, grid).map_err(run_err)
        }
        SystemId::EulerTopSdeA | SystemId::EulerTopSdeB | SystemId::PendulumSde => {
            let spec = sde_spec(&r)?;
            let n = grid.integer_steps().ok_or_else(|| CliError::Invalid {
                field: "dt",
                reason: format!(
                    "stochastic runs need dt to divide t1 - t0; {} / {} is not an integer",
                    grid.t1 - grid.t0,
                    grid.dt
                ),
            })?;
            let dt = (grid.t1 - grid.t0) / n as f64;
            let path = WienerPath::generate(r.seed, grid.t0, dt, spec.dim(), n).map_err(run_err)?;
            integrate_sde(&spec, &r.ic, &path, scheme_of(r.scheme)).map_err(run_err)
        }
    }
}

/// Run the ensemble a merged [`RunConfig`] describes (requires a stochastic
/// system and `paths >= 2`).
pub fn run_ensemble(cfg: &RunConfig) -> Result<EnsembleStats, CliError> {
    let r = resolve(cfg, true)?;
    let spec = sde_spec(&r)?;
    ensemble(&spec, &r.ic, &r.grid, scheme_of(r.scheme), r.seed, r.paths).map_err(run_err)
}

/// `{:.16e}`: 17 significant digits, enough to round-trip any f64 exactly.
fn write_trajectory_csv(w: &mut impl Write, tr: &Trajectory) -> io::Result<()> {
    let header = match tr.dim() {
        3 => "t,x1,x2,x3",
        2 => "t,theta,omega",
        d => return Err(io::Error::other(format!("no CSV header for dimension {d}"))),
    };
    writeln!(w, "{header}")?;
    for i in 0..tr.len() {
        write!(w, "{:.16e}", tr.time(i))?;
        for c in 0..tr.dim() {
            write!(w, ",{:.16e}", tr.state(i)[c])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

fn write_ensemble_csv(w: &mut impl Write, stats: &EnsembleStats) -> io::Result<()> {
    let dim = stats.dim();
    write!(w, "t")?;
    for label in ["mean", "var", "ci"] {
        for c in 1..=dim {
            write!(w, ",{label}_{c}")?;
        }
    }
    writeln!(w)?;
    for node in 0..stats.len() {
        write!(w, "{:.16e}", stats.times()[node])?;
        for c in 0..dim {
            write!(w, ",{:.16e}", stats.mean(node, c))?;
        }
        for c in 0..dim {
            write!(w, ",{:.16e}", stats.variance(node, c))?;
        }
        for c in 0..dim {
            write!(w, ",{:.16e}", stats.ci95_half_width(node, c))?;
        }
        writeln!(w)?;
    }
    Ok(())
}
