//! Run configuration shared by the command line and `--config` files.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thetacert::audit::Envelope;

use crate::error::{CliError, CliResult};

pub const SCHEMA: &str = "v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    Theta,
    Lattice,
    Lp,
    Audit,
    Poisson,
}

/// Where a lattice comes from: a built-in name such as `E8+Z4` or a JSON
/// file holding a basis or Gram matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeSource {
    Spec(String),
    File(PathBuf),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub chain: Option<f64>,
    pub sign: Option<f64>,
    pub tail: Option<f64>,
    pub lp: Option<f64>,
    pub poisson: Option<f64>,
    pub identity: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub schema: String,
    pub command: CommandKind,
    pub lattice: Option<LatticeSource>,
    pub t: Vec<f64>,
    pub n: Option<usize>,
    pub dictionary: Option<String>,
    /// Truncation norm `M` for enumeration and audits.
    pub max_norm: Option<u64>,
    /// Number of constrained shells `M_c`.
    pub shells: Option<u64>,
    pub tolerances: ToleranceOverrides,
    pub seeds: Vec<u64>,
    pub output: Option<PathBuf>,

    pub identity_suite: bool,
    pub gap: bool,
    pub nullwerte: bool,
    pub e4: bool,
    pub functional_equation: bool,
    pub secrecy: Option<f64>,

    pub four_squares: Option<u64>,

    pub coeff_bound: Option<f64>,
    pub max_pivots: Option<u64>,
    pub audit_e8: bool,
    pub certificate_out: Option<PathBuf>,

    pub certificates: Vec<PathBuf>,
    pub graded: bool,
    pub envelope: Option<Envelope>,
    pub e8_collapse: bool,
    pub allow_test_doubles: bool,
    pub expect_violation: bool,

    pub gaussian: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            schema: SCHEMA.into(),
            command: CommandKind::Theta,
            lattice: None,
            t: Vec::new(),
            n: None,
            dictionary: None,
            max_norm: None,
            shells: None,
            tolerances: ToleranceOverrides::default(),
            seeds: Vec::new(),
            output: None,
            identity_suite: false,
            gap: false,
            nullwerte: false,
            e4: false,
            functional_equation: false,
            secrecy: None,
            four_squares: None,
            coeff_bound: None,
            max_pivots: None,
            audit_e8: false,
            certificate_out: None,
            certificates: Vec::new(),
            graded: false,
            envelope: None,
            e8_collapse: false,
            allow_test_doubles: false,
            expect_violation: false,
            gaussian: None,
        }
    }
}

impl RunConfig {
    pub fn new(command: CommandKind) -> RunConfig {
        RunConfig {
            command,
            ..RunConfig::default()
        }
    }

    pub fn from_json(text: &str) -> CliResult<RunConfig> {
        let config: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    /// Compact JSON with every field present in declaration order.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("run configuration serialises")
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.schema != SCHEMA {
            return Err(CliError::Config(format!(
                "unsupported schema `{}`, expected `{SCHEMA}`",
                self.schema
            )));
        }
        if let Some(t) = self.t.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(CliError::Config(format!("t must be positive, got {t}")));
        }
        let tol = &self.tolerances;
        for (name, value) in [
            ("chain", tol.chain),
            ("sign", tol.sign),
            ("tail", tol.tail),
            ("lp", tol.lp),
            ("poisson", tol.poisson),
            ("identity", tol.identity),
        ] {
            if let Some(v) = value {
                if !(v.is_finite() && v > 0.0) {
                    return Err(CliError::Config(format!(
                        "tolerance `{name}` must be positive, got {v}"
                    )));
                }
            }
        }
        Ok(())
    }
}
