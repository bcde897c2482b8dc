//! Subcommand implementations. Each returns a JSON report and whether the
//! run verified.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value};
use thetacert::audit::{
    chain_audit, e8_collapse_audit, graded_audit, sequence_audit, AuditFunction, AuditOptions,
    GradedPair, SaturationReport, Verdict, RADIAL_INVARIANCE_TOLERANCE,
};
use thetacert::lattice::{
    e8, enumerate_shells_with, four_squares, make_named, random_rotation, zn, EnumerationOptions,
    Lattice, LatticeJson, LatticeSpec,
};
use thetacert::lp::{
    build_lp, solve_lp, theta_zn, verify_solution_with, DictionarySpec, LpStatus,
    DEFAULT_LP_TOLERANCE, DEFAULT_MAX_PIVOTS, DEFAULT_SHELLS,
};
use thetacert::poisson::{poisson_check, GaussianCombo};
use thetacert::theta::{
    eisenstein_e4, functional_equation_residual_with, identity_suite_with, jacobi_theta,
    lattice_theta, secrecy_function_with, ThetaKind, DEFAULT_TAIL_TOLERANCE,
};

use crate::config::{CommandKind, LatticeSource, RunConfig, SCHEMA};
use crate::error::{CliError, CliResult};

pub const IDENTITY_TOLERANCE: f64 = 1e-12;
pub const POISSON_TOLERANCE: f64 = 1e-9;
/// Slack allowed when comparing an LP optimum with the theta lower bounds.
pub const BOUND_SLACK: f64 = 1e-6;
const DEFAULT_DIM: usize = 8;

pub struct Outcome {
    pub report: Value,
    pub verified: bool,
}

fn to_value<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("reports serialise")
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Json {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn load_lattice(source: &LatticeSource) -> CliResult<Lattice> {
    match source {
        LatticeSource::Spec(text) => {
            let spec = LatticeSpec::parse(text)?;
            Ok(make_named(&spec)?.with_name(spec.to_string()))
        }
        LatticeSource::File(path) => {
            let json: LatticeJson = read_json(path)?;
            Ok(Lattice::from_json(&json)?)
        }
    }
}

/// A certificate file holds either a bare Gaussian combination or a tagged
/// audit function.
pub fn load_function(path: &Path) -> CliResult<AuditFunction> {
    let value: Value = read_json(path)?;
    let parsed = if value.get("kind").is_some() {
        serde_json::from_value::<AuditFunction>(value)
    } else {
        serde_json::from_value::<GaussianCombo>(value).map(AuditFunction::Combo)
    };
    parsed.map_err(|e| CliError::Json {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn audit_options(config: &RunConfig, enumeration: EnumerationOptions) -> AuditOptions {
    let defaults = AuditOptions::default();
    let tol = &config.tolerances;
    AuditOptions {
        chain_tol: tol.chain.unwrap_or(defaults.chain_tol),
        sign_tol: tol.sign.unwrap_or(defaults.sign_tol),
        tail_tol: tol.tail.unwrap_or(defaults.tail_tol),
        enumeration,
        allow_test_doubles: config.allow_test_doubles,
        rotation_check_norm: defaults.rotation_check_norm,
        max_norm: config.max_norm,
    }
}

fn require_t(config: &RunConfig) -> CliResult<&[f64]> {
    if config.t.is_empty() {
        Err(CliError::Config(
            "at least one value of --t is required".into(),
        ))
    } else {
        Ok(&config.t)
    }
}

fn require_lattice(config: &RunConfig) -> CliResult<Lattice> {
    match &config.lattice {
        Some(source) => load_lattice(source),
        None => Err(CliError::Config(
            "a lattice is required (--lattice or --lattice-file)".into(),
        )),
    }
}

pub fn run(config: &RunConfig, enumeration: EnumerationOptions) -> CliResult<Outcome> {
    config.validate()?;
    let outcome = match config.command {
        CommandKind::Theta => cmd_theta(config, enumeration)?,
        CommandKind::Lattice => cmd_lattice(config, enumeration)?,
        CommandKind::Lp => cmd_lp(config, enumeration)?,
        CommandKind::Audit => cmd_audit(config, enumeration)?,
        CommandKind::Poisson => cmd_poisson(config, enumeration)?,
    };
    let mut report = Map::new();
    report.insert("schema".into(), json!(SCHEMA));
    report.insert("command".into(), to_value(&config.command));
    report.insert("config".into(), to_value(config));
    report.insert("verified".into(), json!(outcome.verified));
    if let Value::Object(body) = outcome.report {
        report.extend(body);
    }
    Ok(Outcome {
        report: Value::Object(report),
        verified: outcome.verified,
    })
}

fn value_json(v: &thetacert::theta::ThetaValue) -> Value {
    json!({ "value": v.value(), "abs_error": v.abs_error() })
}

pub fn cmd_theta(config: &RunConfig, enumeration: EnumerationOptions) -> CliResult<Outcome> {
    let lattice = config.lattice.as_ref().map(load_lattice).transpose()?;
    let identity_tol = config.tolerances.identity.unwrap_or(IDENTITY_TOLERANCE);
    let tail_tol = config.tolerances.tail.unwrap_or(DEFAULT_TAIL_TOLERANCE);
    let any_flag = config.identity_suite
        || config.gap
        || config.nullwerte
        || config.e4
        || config.functional_equation;
    let t_values: &[f64] = if config.t.is_empty() && config.secrecy.is_some() {
        &[]
    } else {
        require_t(config)?
    };
    let mut verified = true;
    let mut results = Vec::new();
    for &t in t_values {
        let mut entry = Map::new();
        entry.insert("t".into(), json!(t));
        if let Some(lattice) = &lattice {
            let value = lattice_theta(lattice, t, tail_tol, enumeration)?;
            entry.insert(
                "lattice".into(),
                json!({ "label": lattice.label(), "theta": value_json(&value) }),
            );
        }
        if config.nullwerte || (!any_flag && lattice.is_none()) {
            let mut nullwerte = Map::new();
            for (name, kind) in [
                ("theta2", ThetaKind::Two),
                ("theta3", ThetaKind::Three),
                ("theta4", ThetaKind::Four),
            ] {
                nullwerte.insert(name.into(), value_json(&jacobi_theta(kind, t)?));
            }
            entry.insert("nullwerte".into(), Value::Object(nullwerte));
        }
        if config.e4 {
            entry.insert("e4".into(), value_json(&eisenstein_e4(t)?));
        }
        if config.identity_suite || config.gap {
            let report = identity_suite_with(t, enumeration)?;
            if config.identity_suite {
                let max_residual = report.max_residual();
                let passed = max_residual <= identity_tol && report.positivity_margin() > 0.0;
                verified &= passed;
                entry.insert(
                    "identity_suite".into(),
                    json!({
                        "residuals": report.identities,
                        "max_residual": max_residual,
                        "tolerance": identity_tol,
                        "passed": passed,
                    }),
                );
            }
            if config.gap {
                let z8 = report.values["theta_z8"].value();
                let e8_value = report.values["theta_e8"].value();
                let gap = report.values["gap"].value();
                verified &= gap > 0.0;
                entry.insert(
                    "gap".into(),
                    json!({
                        "gap": gap,
                        "theta_z8": z8,
                        "theta_e8": e8_value,
                        "gap_over_theta_z8": gap / z8,
                        "positive": gap > 0.0,
                    }),
                );
            }
        }
        if config.functional_equation {
            let lattice = lattice
                .as_ref()
                .ok_or_else(|| CliError::Config("--functional-equation needs a lattice".into()))?;
            let residual = functional_equation_residual_with(lattice, t, enumeration)?;
            entry.insert("functional_equation_residual".into(), json!(residual));
        }
        results.push(Value::Object(entry));
    }
    let mut report = Map::new();
    report.insert("results".into(), Value::Array(results));
    if let Some(y) = config.secrecy {
        let lattice = lattice.clone().unwrap_or_else(e8);
        let value = secrecy_function_with(&lattice, y, enumeration)?;
        report.insert(
            "secrecy".into(),
            json!({ "lattice": lattice.label(), "y": y, "value": value }),
        );
    }
    Ok(Outcome {
        report: Value::Object(report),
        verified,
    })
}

pub fn cmd_lattice(config: &RunConfig, enumeration: EnumerationOptions) -> CliResult<Outcome> {
    let mut report = Map::new();
    let mut verified = true;
    if let Some(source) = &config.lattice {
        let lattice = load_lattice(source)?;
        report.insert(
            "lattice".into(),
            json!({
                "label": lattice.label(),
                "dim": lattice.dim(),
                "gram_determinant": lattice.gram_determinant().to_string(),
                "integral": lattice.is_integral(),
                "unimodular": lattice.is_unimodular(),
                "even": lattice.is_even(),
                "self_dual": lattice.is_self_dual(),
                "stability": lattice.stability_certificate(),
                "definition": lattice,
            }),
        );
        if let Some(max_norm) = config.max_norm {
            let shells = enumerate_shells_with(&lattice, max_norm, enumeration)?;
            report.insert("shells".into(), to_value(&shells));
            report.insert("cumulative".into(), json!(shells.cumulative(max_norm)));
        }
        let rotations: Vec<Value> = config
            .seeds
            .iter()
            .map(|&seed| {
                let u = random_rotation(lattice.dim(), seed)?;
                Ok(json!({ "seed": seed, "orthogonality_defect": u.orthogonality_defect() }))
            })
            .collect::<CliResult<_>>()?;
        if !rotations.is_empty() {
            report.insert("rotations".into(), Value::Array(rotations));
        }
    } else if config.four_squares.is_none() {
        return Err(CliError::Config(
            "lattice needs --lattice, --lattice-file or --four-squares".into(),
        ));
    }
    if let Some(m) = config.four_squares {
        let rep = four_squares(m);
        let holds = rep.is_some_and(|r| r.iter().map(|x| x * x).sum::<u64>() == m);
        verified &= holds;
        report.insert(
            "four_squares".into(),
            json!({ "m": m, "representation": rep, "sum_identity_holds": holds }),
        );
    }
    Ok(Outcome {
        report: Value::Object(report),
        verified,
    })
}

fn verdict_ok(report: &SaturationReport, expect_violation: bool) -> bool {
    let violated = matches!(report.verdict, Verdict::Violated { .. });
    violated == expect_violation
}

pub fn cmd_lp(config: &RunConfig, enumeration: EnumerationOptions) -> CliResult<Outcome> {
    let n = config.n.unwrap_or(DEFAULT_DIM);
    let dictionary = DictionarySpec::parse(config.dictionary.as_deref().unwrap_or("default"))?;
    let shells = config.shells.unwrap_or(DEFAULT_SHELLS);
    let t_values = require_t(config)?;
    if config.certificate_out.is_some() && t_values.len() != 1 {
        return Err(CliError::Config(
            "--certificate-out needs exactly one t".into(),
        ));
    }
    let options = audit_options(config, enumeration);
    let verify_lattice = match &config.lattice {
        Some(source) => load_lattice(source)?,
        None => zn(n)?,
    };
    let mut verified = true;
    let mut runs = Vec::new();
    for &t in t_values {
        let mut problem = build_lp(n, t, &dictionary, shells)?;
        problem.tolerance = config.tolerances.lp.unwrap_or(DEFAULT_LP_TOLERANCE);
        if let Some(bound) = config.coeff_bound {
            problem.coeff_bound = Some(bound);
        }
        problem.max_pivots = config.max_pivots.unwrap_or(DEFAULT_MAX_PIVOTS);
        let solution = solve_lp(&problem)?;
        let mut run = Map::new();
        run.insert("t".into(), json!(t));
        run.insert(
            "problem".into(),
            json!({
                "dim": n,
                "t": t,
                "dictionary": problem.dictionary,
                "shells": shells,
                "tolerance": problem.tolerance,
                "coeff_bound": problem.coeff_bound,
                "max_pivots": problem.max_pivots,
            }),
        );
        run.insert("solution".into(), to_value(&solution));
        match solution.status {
            LpStatus::Optimal => {
                let report = verify_solution_with(&problem, &solution, &verify_lattice, &options)?;
                let zn_bound = theta_zn(n, t)?.to_f64();
                let mut bounds = Map::new();
                let mut bounds_hold = solution.objective >= zn_bound - BOUND_SLACK;
                bounds.insert("theta_zn".into(), json!(zn_bound));
                if n >= 8 {
                    let lc = thetacert::lattice::e8_plus_zn(n)?;
                    let lc_theta =
                        lattice_theta(&lc, t, DEFAULT_TAIL_TOLERANCE, enumeration)?.value();
                    bounds.insert("theta_e8_sum".into(), json!(lc_theta));
                    bounds_hold &= solution.objective >= lc_theta - BOUND_SLACK;
                }
                bounds.insert("objective".into(), json!(solution.objective));
                bounds.insert("hold".into(), json!(bounds_hold));
                let lp_consistent = report
                    .cross_checks
                    .get("lp_epsilon")
                    .is_some_and(|d| *d <= options.chain_tol);
                let ok = bounds_hold
                    && lp_consistent
                    && report.bookkeeping_holds
                    && report.per_point_bounds_hold
                    && solution.duality_gap <= problem.tolerance
                    && verdict_ok(&report, false);
                verified &= ok;
                run.insert("bounds".into(), Value::Object(bounds));
                run.insert("verification".into(), to_value(&report));
                if config.audit_e8 && n >= 8 {
                    let h = AuditFunction::Combo(solution.combo(&problem)?);
                    let collapse = e8_collapse_audit(&h, n, t, &options)?;
                    run.insert("e8_collapse".into(), to_value(&collapse));
                }
                if let Some(path) = &config.certificate_out {
                    let combo = solution.combo(&problem)?;
                    let text = serde_json::to_string_pretty(&combo).expect("combo serialises");
                    fs::write(path, text).map_err(|source| CliError::Write {
                        path: path.clone(),
                        source,
                    })?;
                }
            }
            LpStatus::Infeasible | LpStatus::Unbounded => {
                verified &= solution.witness.as_ref().is_some_and(|w| w.verified);
            }
            LpStatus::IterLimit => return Err(CliError::PivotLimit(problem.max_pivots)),
        }
        runs.push(Value::Object(run));
    }
    Ok(Outcome {
        report: json!({ "runs": runs }),
        verified,
    })
}

pub fn cmd_audit(config: &RunConfig, enumeration: EnumerationOptions) -> CliResult<Outcome> {
    if config.certificates.is_empty() {
        return Err(CliError::Config(
            "audit needs at least one --certificate".into(),
        ));
    }
    let functions = config
        .certificates
        .iter()
        .map(|p| load_function(p))
        .collect::<CliResult<Vec<_>>>()?;
    let n = functions[0].dim();
    if functions.iter().any(|f| f.dim() != n) {
        return Err(CliError::Config(
            "certificates have different dimensions".into(),
        ));
    }
    let options = audit_options(config, enumeration);
    let t_values = require_t(config)?;
    let mut verified = true;
    let mut runs = Vec::new();
    for &t in t_values {
        let mut run = Map::new();
        run.insert("t".into(), json!(t));
        if config.graded {
            let [AuditFunction::Combo(h_zn), AuditFunction::Combo(h_lc)] = functions.as_slice()
            else {
                return Err(CliError::Config(
                    "--graded needs exactly two Gaussian combinations: h_zn then h_lc".into(),
                ));
            };
            let (h_zn, h_lc) = (h_zn.clone(), h_lc.clone());
            let pair = GradedPair::new(h_zn, h_lc)?;
            let report = graded_audit(&pair, n, t, &options)?;
            verified &= report.passed;
            run.insert("graded".into(), to_value(&report));
        } else if functions.len() > 1 || config.envelope.is_some() {
            let report = sequence_audit(&functions, n, t, config.envelope.as_ref(), &options)?;
            for element in &report.elements {
                verified &= verdict_ok(&element.chain, config.expect_violation);
            }
            run.insert("sequence".into(), to_value(&report));
        } else {
            let h = &functions[0];
            let lattice = match &config.lattice {
                Some(source) => load_lattice(source)?,
                None => zn(n)?,
            };
            let base = chain_audit(h, &lattice, None, t, &options)?;
            verified &= verdict_ok(&base, config.expect_violation);
            let mut rotated = Vec::new();
            let mut max_deviation: f64 = 0.0;
            for &seed in &config.seeds {
                let u = random_rotation(n, seed)?;
                let report = chain_audit(h, &lattice, Some(&u), t, &options)?;
                max_deviation = max_deviation.max(base.max_deviation(&report));
                rotated.push(report);
            }
            run.insert("chain".into(), to_value(&base));
            if !rotated.is_empty() {
                let invariant = max_deviation <= RADIAL_INVARIANCE_TOLERANCE
                    && rotated
                        .iter()
                        .all(|r| r.rotation.is_some_and(|c| c.invariant));
                verified &= invariant;
                run.insert(
                    "rotations".into(),
                    json!({
                        "seeds": config.seeds,
                        "max_deviation": max_deviation,
                        "invariant": invariant,
                        "reports": rotated,
                    }),
                );
            }
            if config.e8_collapse {
                let collapse = e8_collapse_audit(h, n, t, &options)?;
                run.insert("e8_collapse".into(), to_value(&collapse));
            }
        }
        runs.push(Value::Object(run));
    }
    Ok(Outcome {
        report: json!({ "runs": runs }),
        verified,
    })
}

pub fn cmd_poisson(config: &RunConfig, enumeration: EnumerationOptions) -> CliResult<Outcome> {
    let lattice = require_lattice(config)?;
    let tol = config.tolerances.poisson.unwrap_or(POISSON_TOLERANCE);
    let functions: Vec<GaussianCombo> = if let Some(t) = config.gaussian {
        vec![GaussianCombo::gaussian(lattice.dim(), t)?]
    } else if config.certificates.is_empty() {
        return Err(CliError::Config(
            "poisson needs --certificate or --gaussian".into(),
        ));
    } else {
        config
            .certificates
            .iter()
            .map(|p| match load_function(p)? {
                AuditFunction::Combo(h) => Ok(h),
                AuditFunction::TestDouble(_) => Err(CliError::Config(format!(
                    "`{}` is a test double; Poisson checks need a function",
                    p.display()
                ))),
            })
            .collect::<CliResult<_>>()?
    };
    let mut verified = true;
    let mut checks = Vec::new();
    for h in &functions {
        let report = poisson_check(h, &lattice, tol, enumeration)?;
        verified &= report.passed;
        checks.push(json!({ "lattice": lattice.label(), "function": h, "report": report }));
    }
    Ok(Outcome {
        report: json!({ "checks": checks }),
        verified,
    })
}
