//! `thetacert`: theta series, certificate LPs and saturation audits from the
//! command line. Every command prints a JSON report; `--pretty` prints a
//! flattened table instead.

mod commands;
mod config;
mod error;
mod table;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thetacert::audit::Envelope;
use thetacert::lattice::EnumerationOptions;

use crate::config::{CommandKind, LatticeSource, RunConfig, ToleranceOverrides};
use crate::error::{CliError, CliResult, EXIT_CONFIG, EXIT_OK, EXIT_VERIFICATION};

pub const BUDGET_ENV: &str = "THETA_CERT_BUDGET";

#[derive(Debug, Parser)]
#[command(
    name = "thetacert",
    version,
    about = "Theta series, Poisson certificates and saturation audits"
)]
struct Cli {
    /// Read the full run configuration from a JSON file instead of flags.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Print a flattened `path value` table instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,

    /// Write the report to a file instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    output: Option<PathBuf>,

    /// Print the effective configuration as canonical JSON and exit.
    #[arg(long, global = true)]
    print_config: bool,

    /// Enumeration work budget.
    #[arg(long, global = true, env = BUDGET_ENV)]
    budget: Option<u64>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Lattice theta series, Jacobi nullwerte, E4 and the identity suite.
    Theta(ThetaArgs),
    /// Lattice properties, shell counts, four-square representations and rotations.
    Lattice(LatticeArgs),
    /// Build, solve and verify the certificate linear program.
    Lp(LpArgs),
    /// Saturation, graded and sequence audits of certificate files.
    Audit(AuditArgs),
    /// Poisson-summation check of a Gaussian combination on a self-dual lattice.
    Poisson(PoissonArgs),
}

#[derive(Debug, Args)]
struct LatticeChoice {
    /// Built-in lattice such as `Z8`, `D8`, `E8`, `Zn(12)` or `E8+Z4`.
    #[arg(long, conflicts_with = "lattice_file")]
    lattice: Option<String>,

    /// JSON file with a basis or Gram matrix.
    #[arg(long, value_name = "FILE")]
    lattice_file: Option<PathBuf>,
}

impl LatticeChoice {
    fn source(self) -> Option<LatticeSource> {
        self.lattice
            .map(LatticeSource::Spec)
            .or(self.lattice_file.map(LatticeSource::File))
    }
}

#[derive(Debug, Args)]
struct Tolerances {
    #[arg(long, value_name = "TOL")]
    chain_tol: Option<f64>,
    #[arg(long, value_name = "TOL")]
    sign_tol: Option<f64>,
    #[arg(long, value_name = "TOL")]
    tail_tol: Option<f64>,
    #[arg(long, value_name = "TOL")]
    lp_tol: Option<f64>,
    #[arg(long, value_name = "TOL")]
    poisson_tol: Option<f64>,
    #[arg(long, value_name = "TOL")]
    identity_tol: Option<f64>,
}

impl Tolerances {
    fn overrides(self) -> ToleranceOverrides {
        ToleranceOverrides {
            chain: self.chain_tol,
            sign: self.sign_tol,
            tail: self.tail_tol,
            lp: self.lp_tol,
            poisson: self.poisson_tol,
            identity: self.identity_tol,
        }
    }
}

#[derive(Debug, Args)]
struct ThetaArgs {
    #[command(flatten)]
    lattice: LatticeChoice,
    /// Values of t (repeat or comma-separate).
    #[arg(long, value_delimiter = ',')]
    t: Vec<f64>,
    #[arg(long)]
    identity_suite: bool,
    #[arg(long)]
    gap: bool,
    #[arg(long)]
    nullwerte: bool,
    #[arg(long)]
    e4: bool,
    #[arg(long)]
    functional_equation: bool,
    /// Evaluate the secrecy function at y.
    #[arg(long, value_name = "Y")]
    secrecy: Option<f64>,
    #[command(flatten)]
    tolerances: Tolerances,
}

#[derive(Debug, Args)]
struct LatticeArgs {
    #[command(flatten)]
    lattice: LatticeChoice,
    /// Enumerate shells up to this norm.
    #[arg(long, value_name = "M")]
    max_norm: Option<u64>,
    #[arg(long, value_name = "M")]
    four_squares: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    seed: Vec<u64>,
}

#[derive(Debug, Args)]
struct LpArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    t: Vec<f64>,
    /// `default`, a list of widths `a,b,c`, or `geom:lo:hi:count` relative to t.
    #[arg(long = "dict", alias = "dictionary", value_name = "SPEC")]
    dictionary: Option<String>,
    /// Number of constrained shells.
    #[arg(long, value_name = "M_C")]
    shells: Option<u64>,
    /// Verification truncation norm.
    #[arg(long, value_name = "M")]
    max_norm: Option<u64>,
    /// Verify on this lattice instead of Z^n.
    #[command(flatten)]
    lattice: LatticeChoice,
    #[arg(long)]
    coeff_bound: Option<f64>,
    #[arg(long)]
    max_pivots: Option<u64>,
    #[arg(long)]
    audit_e8: bool,
    #[arg(long, value_name = "FILE")]
    certificate_out: Option<PathBuf>,
    #[command(flatten)]
    tolerances: Tolerances,
}

#[derive(Debug, Args)]
struct AuditArgs {
    /// Certificate files (Gaussian combinations or tagged audit functions).
    #[arg(long = "certificate", value_name = "FILE", required = true)]
    certificates: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    t: Vec<f64>,
    /// Audit on this lattice instead of Z^n.
    #[command(flatten)]
    lattice: LatticeChoice,
    #[arg(long, value_name = "M")]
    max_norm: Option<u64>,
    /// Rotation seeds for the radial-invariance check.
    #[arg(long, value_delimiter = ',')]
    seed: Vec<u64>,
    #[arg(long)]
    graded: bool,
    /// Summable dominator `a e^{-alpha m}, b e^{-beta m}` as `a,alpha,b,beta`.
    #[arg(long, value_name = "A,ALPHA,B,BETA", value_parser = parse_envelope)]
    envelope: Option<Envelope>,
    #[arg(long)]
    e8_collapse: bool,
    #[arg(long)]
    allow_test_doubles: bool,
    /// Treat a Violated verdict as the expected outcome.
    #[arg(long)]
    expect_violation: bool,
    #[command(flatten)]
    tolerances: Tolerances,
}

#[derive(Debug, Args)]
struct PoissonArgs {
    #[command(flatten)]
    lattice: LatticeChoice,
    #[arg(long = "certificate", value_name = "FILE")]
    certificates: Vec<PathBuf>,
    /// Check the plain Gaussian exp(-t|x|^2).
    #[arg(long, value_name = "T")]
    gaussian: Option<f64>,
    #[command(flatten)]
    tolerances: Tolerances,
}

fn parse_envelope(text: &str) -> Result<Envelope, String> {
    let values = text
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    match values[..] {
        [a_scale, a_rate, b_scale, b_rate] => Ok(Envelope {
            a_scale,
            a_rate,
            b_scale,
            b_rate,
        }),
        _ => Err(format!("expected four values, got {}", values.len())),
    }
}

fn config_from(command: Command) -> RunConfig {
    match command {
        Command::Theta(a) => RunConfig {
            lattice: a.lattice.source(),
            t: a.t,
            identity_suite: a.identity_suite,
            gap: a.gap,
            nullwerte: a.nullwerte,
            e4: a.e4,
            functional_equation: a.functional_equation,
            secrecy: a.secrecy,
            tolerances: a.tolerances.overrides(),
            ..RunConfig::new(CommandKind::Theta)
        },
        Command::Lattice(a) => RunConfig {
            lattice: a.lattice.source(),
            max_norm: a.max_norm,
            four_squares: a.four_squares,
            seeds: a.seed,
            ..RunConfig::new(CommandKind::Lattice)
        },
        Command::Lp(a) => RunConfig {
            n: a.n,
            t: a.t,
            dictionary: a.dictionary,
            shells: a.shells,
            max_norm: a.max_norm,
            lattice: a.lattice.source(),
            coeff_bound: a.coeff_bound,
            max_pivots: a.max_pivots,
            audit_e8: a.audit_e8,
            certificate_out: a.certificate_out,
            tolerances: a.tolerances.overrides(),
            ..RunConfig::new(CommandKind::Lp)
        },
        Command::Audit(a) => RunConfig {
            certificates: a.certificates,
            t: a.t,
            lattice: a.lattice.source(),
            max_norm: a.max_norm,
            seeds: a.seed,
            graded: a.graded,
            envelope: a.envelope,
            e8_collapse: a.e8_collapse,
            allow_test_doubles: a.allow_test_doubles,
            expect_violation: a.expect_violation,
            tolerances: a.tolerances.overrides(),
            ..RunConfig::new(CommandKind::Audit)
        },
        Command::Poisson(a) => RunConfig {
            lattice: a.lattice.source(),
            certificates: a.certificates,
            gaussian: a.gaussian,
            tolerances: a.tolerances.overrides(),
            ..RunConfig::new(CommandKind::Poisson)
        },
    }
}

fn resolve_config(cli: &mut Cli) -> CliResult<RunConfig> {
    let mut config = match (cli.config.take(), cli.command.take()) {
        (Some(path), None) => {
            let text =
                fs::read_to_string(&path).map_err(|source| CliError::Read { path, source })?;
            RunConfig::from_json(&text)?
        }
        (None, Some(command)) => config_from(command),
        (Some(_), Some(_)) => {
            return Err(CliError::Config(
                "--config replaces the subcommand; give one or the other".into(),
            ))
        }
        (None, None) => {
            return Err(CliError::Config(
                "a subcommand or --config is required".into(),
            ))
        }
    };
    if let Some(output) = cli.output.take() {
        config.output = Some(output);
    }
    config.validate()?;
    Ok(config)
}

fn execute(mut cli: Cli) -> CliResult<i32> {
    let config = resolve_config(&mut cli)?;
    if cli.print_config {
        println!("{}", config.canonical_json());
        return Ok(EXIT_OK);
    }
    let enumeration = EnumerationOptions {
        budget: cli.budget.unwrap_or(thetacert::lattice::DEFAULT_BUDGET),
        ..EnumerationOptions::default()
    };
    let outcome = commands::run(&config, enumeration)?;
    let text = if cli.pretty {
        table::render(&outcome.report)
    } else {
        let mut s = serde_json::to_string_pretty(&outcome.report).expect("reports serialise");
        s.push('\n');
        s
    };
    match &config.output {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Write {
            path: path.clone(),
            source,
        })?,
        None => print!("{text}"),
    }
    Ok(if outcome.verified {
        EXIT_OK
    } else {
        EXIT_VERIFICATION
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let code = match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
