//! Acceptance suite: one pass/fail line per criterion, nonzero exit on any
//! failure.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thetacert::audit::{chain_audit, graded_audit, AuditFunction, AuditOptions, GradedPair};
use thetacert::lattice::{
    dn, e8, e8_plus_zn, enumerate_shells, four_squares, random_rotation, zn, EnumerationOptions,
    Lattice,
};
use thetacert::lp::{
    build_lp, solve_lp, verify_solution, DictionarySpec, LpStatus, DEFAULT_SHELLS,
};
use thetacert::poisson::{poisson_check, GaussianCombo};
use thetacert::theta::{
    functional_equation_residual, identity_suite, jacobi_theta, lattice_theta, secrecy_function,
    sigma3, ThetaKind, DEFAULT_TAIL_TOLERANCE,
};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(message())
    }
}

fn within(elapsed: Duration, limit_secs: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_secs, || {
        format!("took {:.2} s, limit {limit_secs} s", elapsed.as_secs_f64())
    })
}

fn shell_counts() -> Check {
    let start = Instant::now();
    let z8 = enumerate_shells(&zn(8).map_err(|e| e.to_string())?, 2).map_err(|e| e.to_string())?;
    let e = enumerate_shells(&e8(), 2).map_err(|e| e.to_string())?;
    within(start.elapsed(), 1.0)?;
    ensure(z8.cumulative(2) == 129, || {
        format!("Z8 cumulative {}", z8.cumulative(2))
    })?;
    ensure(e.cumulative(2) == 241, || {
        format!("E8 cumulative {}", e.cumulative(2))
    })?;
    Ok("Z8 = 129, E8 = 241 through norm 2".into())
}

fn identity_suite_residuals() -> Check {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut min_gap = f64::INFINITY;
    for t in [0.3, 0.5, 1.0, PI, 5.0] {
        let report = identity_suite(t).map_err(|e| e.to_string())?;
        for name in [
            "glaisher",
            "abstruse",
            "z8_minus_e8_gap",
            "e8_equals_e4",
            "multiplicativity",
        ] {
            let r = *report
                .identities
                .get(name)
                .ok_or_else(|| format!("missing identity {name}"))?;
            ensure(r <= 1e-12, || format!("{name} at t = {t}: {r:e}"))?;
            worst = worst.max(r);
        }
        let gap = report.positivity_margin();
        ensure(gap > 0.0, || format!("gap at t = {t} is {gap:e}"))?;
        min_gap = min_gap.min(gap);
    }
    within(start.elapsed(), 1.0)?;
    Ok(format!("max residual {worst:.1e}, min gap {min_gap:.3e}"))
}

fn symmetry_point() -> Check {
    let theta2 = jacobi_theta(ThetaKind::Two, PI)
        .map_err(|e| e.to_string())?
        .value();
    let theta4 = jacobi_theta(ThetaKind::Four, PI)
        .map_err(|e| e.to_string())?
        .value();
    ensure((theta2 - theta4).abs() <= 1e-15, || {
        format!("theta2 {theta2} differs from theta4 {theta4}")
    })?;
    let opts = EnumerationOptions::default();
    let z8 = lattice_theta(
        &zn(8).map_err(|e| e.to_string())?,
        PI,
        DEFAULT_TAIL_TOLERANCE,
        opts,
    )
    .map_err(|e| e.to_string())?
    .value();
    let e = lattice_theta(&e8(), PI, DEFAULT_TAIL_TOLERANCE, opts)
        .map_err(|e| e.to_string())?
        .value();
    let gap_error = (z8 - e - z8 / 4.0).abs();
    ensure(gap_error <= 1e-10, || format!("gap off by {gap_error:e}"))?;
    let secrecy = secrecy_function(&e8(), 1.0).map_err(|e| e.to_string())?;
    let secrecy_error = (secrecy - 4.0 / 3.0).abs();
    ensure(secrecy_error <= 1e-10, || format!("secrecy {secrecy}"))?;
    Ok(format!(
        "gap error {gap_error:.1e}, secrecy error {secrecy_error:.1e}"
    ))
}

fn poisson_and_functional_equation() -> Check {
    let start = Instant::now();
    let mut lattices: Vec<Lattice> = [1, 4, 8, 12]
        .iter()
        .map(|&n| zn(n))
        .collect::<thetacert::Result<_>>()
        .map_err(|e| e.to_string())?;
    lattices.push(e8());
    lattices.push(e8_plus_zn(12).map_err(|e| e.to_string())?);
    let mut worst: f64 = 0.0;
    for lattice in &lattices {
        for t in [0.3, 1.0, PI, 5.0] {
            let fe = functional_equation_residual(lattice, t).map_err(|e| e.to_string())?;
            let h = GaussianCombo::gaussian(lattice.dim(), t).map_err(|e| e.to_string())?;
            let report = poisson_check(&h, lattice, 1e-9, EnumerationOptions::default())
                .map_err(|e| e.to_string())?;
            ensure(fe <= 1e-9 && report.passed, || {
                format!(
                    "{} at t = {t}: functional equation {fe:e}, Poisson {:e}",
                    lattice.label(),
                    report.residual
                )
            })?;
            worst = worst.max(fe).max(report.residual);
        }
    }
    within(start.elapsed(), 10.0)?;
    Ok(format!(
        "{} lattices x 4 t, max residual {worst:.1e}",
        lattices.len()
    ))
}

fn oracle_equivalence() -> Check {
    let max_norm = 10;
    let mut checked = 0;
    for n in 1..=8 {
        for lattice in [zn(n), dn(n)] {
            let lattice = lattice.map_err(|e| e.to_string())?;
            let shells = enumerate_shells(&lattice, max_norm).map_err(|e| e.to_string())?;
            let oracle = common::coefficient_box_counts(&lattice, max_norm);
            ensure(shells.counts() == &oracle[..], || {
                format!("{} disagrees", lattice.label())
            })?;
            checked += 1;
        }
    }
    let shells = enumerate_shells(&e8(), max_norm).map_err(|e| e.to_string())?;
    ensure(
        shells.counts() == &common::e8_ambient_counts(max_norm)[..],
        || "E8 disagrees with the ambient oracle".into(),
    )?;
    for m in [2u64, 4, 6] {
        ensure(shells.count(m) == 240 * sigma3(m / 2), || {
            format!("E8 shell {m} has {} vectors", shells.count(m))
        })?;
    }
    Ok(format!(
        "{} lattices through M = {max_norm}, E8 = 240 sigma3",
        checked + 1
    ))
}

fn lp_bounds() -> Check {
    let n = 8;
    let dictionary = DictionarySpec::parse("default").map_err(|e| e.to_string())?;
    let cube = zn(n).map_err(|e| e.to_string())?;
    let mut summary = Vec::new();
    for t in [0.5, 1.0, 2.0] {
        let start = Instant::now();
        let problem = build_lp(n, t, &dictionary, DEFAULT_SHELLS).map_err(|e| e.to_string())?;
        let solution = solve_lp(&problem).map_err(|e| e.to_string())?;
        within(start.elapsed(), 60.0)?;
        ensure(solution.status == LpStatus::Optimal, || {
            format!("t = {t}: status {:?}", solution.status)
        })?;
        let opts = EnumerationOptions::default();
        let theta_z8 = lattice_theta(&cube, t, DEFAULT_TAIL_TOLERANCE, opts)
            .map_err(|e| e.to_string())?
            .value();
        let theta_e8 = lattice_theta(&e8(), t, DEFAULT_TAIL_TOLERANCE, opts)
            .map_err(|e| e.to_string())?
            .value();
        ensure(solution.objective >= theta_z8 - 1e-6, || {
            format!(
                "t = {t}: objective {} below Theta_Z8 {theta_z8}",
                solution.objective
            )
        })?;
        ensure(solution.objective >= theta_e8 - 1e-6, || {
            format!(
                "t = {t}: objective {} below Theta_E8 {theta_e8}",
                solution.objective
            )
        })?;
        let report = verify_solution(&problem, &solution, &cube).map_err(|e| e.to_string())?;
        let bookkeeping = (report.sum_a + report.sum_b - report.epsilon).abs();
        ensure(bookkeeping <= 1e-8 + report.tails.total, || {
            format!("t = {t}: sum A + B misses epsilon by {bookkeeping:e}")
        })?;
        ensure(
            report.bookkeeping_holds && report.per_point_bounds_hold,
            || format!("t = {t}: per-shell bounds fail"),
        )?;
        ensure(solution.epsilon > 0.0, || {
            format!("t = {t}: epsilon {}", solution.epsilon)
        })?;
        summary.push(format!(
            "t={t}: eps {:.4e} in {:.2} s",
            solution.epsilon,
            start.elapsed().as_secs_f64()
        ));
    }
    Ok(summary.join("; "))
}

fn four_square_transport() -> Check {
    let start = Instant::now();
    for m in 0..=10_000u64 {
        let rep = four_squares(m).ok_or_else(|| format!("no representation for {m}"))?;
        ensure(rep.iter().map(|x| x * x).sum::<u64>() == m, || {
            format!("wrong sum for {m}")
        })?;
    }
    within(start.elapsed(), 5.0)?;
    Ok("0..=10000 all satisfy the sum identity".into())
}

fn audit_determinism() -> Check {
    let t = 1.0;
    let problem = build_lp(
        8,
        t,
        &DictionarySpec::parse("default").map_err(|e| e.to_string())?,
        DEFAULT_SHELLS,
    )
    .map_err(|e| e.to_string())?;
    let solution = solve_lp(&problem).map_err(|e| e.to_string())?;
    let h = AuditFunction::Combo(solution.combo(&problem).map_err(|e| e.to_string())?);
    let opts = AuditOptions::default();
    let lattice = e8();
    let plain = chain_audit(&h, &lattice, None, t, &opts).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for seed in [1u64, 2, 3, 4, 5] {
        let u = random_rotation(8, seed).map_err(|e| e.to_string())?;
        let rotated = chain_audit(&h, &lattice, Some(&u), t, &opts).map_err(|e| e.to_string())?;
        let deviation = plain.max_deviation(&rotated);
        ensure(deviation <= 1e-9, || {
            format!("seed {seed}: deviation {deviation:e}")
        })?;
        worst = worst.max(deviation);
        let again = chain_audit(&h, &lattice, Some(&u), t, &opts).map_err(|e| e.to_string())?;
        let first = serde_json::to_string(&rotated).map_err(|e| e.to_string())?;
        let second = serde_json::to_string(&again).map_err(|e| e.to_string())?;
        ensure(first == second, || {
            format!("seed {seed}: JSON differs between runs")
        })?;
    }
    Ok(format!(
        "5 seeds, max deviation {worst:.1e}, JSON bit-identical"
    ))
}

fn random_combo(rng: &mut ChaCha8Rng, n: usize) -> thetacert::Result<GaussianCombo> {
    let count = rng.random_range(1..=4);
    let pairs: Vec<(f64, f64)> = (0..count)
        .map(|_| (rng.random_range(-2.0..2.0), rng.random_range(0.3..3.0)))
        .collect();
    GaussianCombo::from_pairs(n, &pairs)
}

fn graded_bookkeeping() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let n = rng.random_range(8..=12);
        let t = rng.random_range(0.5..2.0);
        let pair = GradedPair::new(
            random_combo(&mut rng, n).map_err(|e| e.to_string())?,
            random_combo(&mut rng, n).map_err(|e| e.to_string())?,
        )
        .map_err(|e| e.to_string())?;
        let report =
            graded_audit(&pair, n, t, &AuditOptions::default()).map_err(|e| e.to_string())?;
        ensure(report.residual <= 1e-8, || {
            format!("pair {i}: residual {:e}", report.residual)
        })?;
        worst = worst.max(report.residual);
    }
    Ok(format!("20 pairs, max residual {worst:.1e}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("shell counts", shell_counts),
        ("identity suite", identity_suite_residuals),
        ("symmetry point", symmetry_point),
        (
            "Poisson and functional equation",
            poisson_and_functional_equation,
        ),
        ("oracle equivalence", oracle_equivalence),
        ("LP bound properties", lp_bounds),
        ("four-square transport", four_square_transport),
        (
            "audit determinism and rotation invariance",
            audit_determinism,
        ),
        ("graded bookkeeping", graded_bookkeeping),
    ];
    let suite = Instant::now();
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let ms = start.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("criterion {} ({name}): PASS [{ms} ms] {detail}", i + 1),
            Err(reason) => {
                failures += 1;
                println!("criterion {} ({name}): FAIL [{ms} ms] {reason}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {}/{} passed in {:.2} s",
        criteria.len() - failures,
        criteria.len(),
        suite.elapsed().as_secs_f64()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
