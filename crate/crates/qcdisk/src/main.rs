use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qcdisk::bounds::{interior_estimate, lipschitz_pipeline, EstimateParams, PipelineOutcome};
use qcdisk::config::{build_field, build_map, RunConfig};
use qcdisk::field::{ellipticity_audit, growth_audit, CoefficientField};
use qcdisk::kernels::{green_gradient, poisson_gradient_bound, BoundaryTrace, DiskSpec};
use qcdisk::map::MappingSample;
use qcdisk::qc::{
    component_growth_constant, mori_audit, polar_audit, qc_modulus, radial_operator_identity,
    theta_constant,
};
use qcdisk::report::{write_gradient_csv, GradientRow};
use qcdisk::{Error, Result};

const EXIT_CODES: &str = "\
Exit codes:
  0   all audited inequalities hold and the global bound dominates
  2   invalid configuration or I/O failure
  3   ellipticity audit failed
  4   growth inequality audit failed
  5   polar factorization audit failed
  6   distortion (upper/lower) audit failed
  7   operator identity for |w| failed
  8   no feasible lambda for the interior estimate
  9   boundary smallness unreachable (alpha exhausted)
  10  an inequality or the global gradient bound was violated
  11  elliptic solver did not converge";

#[derive(Parser)]
#[command(
    name = "qcdisk",
    about = "Numerical audits of gradient bounds for quasiconformal disk maps",
    after_long_help = EXIT_CODES
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the kernel inequality battery (Green gradients, Poisson bound).
    KernelsCheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the inequality audits for one configured map and field.
    Audit { config: PathBuf },
    /// Compute the interior gradient estimate constants for a config.
    BoundsInterior { config: PathBuf },
    /// Full run: audits, boundary reduction, and the global bound.
    Pipeline { config: PathBuf },
    /// Like `pipeline`, with output paths given on the command line.
    Report {
        config: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.cmd {
        Cmd::KernelsCheck { seed } => kernels_check(seed),
        Cmd::Audit { config } => with_config(&config, |cfg| audit_cmd(cfg)),
        Cmd::BoundsInterior { config } => with_config(&config, |cfg| bounds_interior_cmd(cfg)),
        Cmd::Pipeline { config } => with_config(&config, |cfg| pipeline_cmd(cfg, None, None)),
        Cmd::Report { config, csv, json } => {
            with_config(&config, |cfg| pipeline_cmd(cfg, csv.clone(), json.clone()))
        }
    };
    ExitCode::from(code)
}

fn with_config<F>(path: &Path, f: F) -> u8
where
    F: Fn(&RunConfig) -> u8,
{
    match RunConfig::load(path) {
        Ok(cfg) => f(&cfg),
        Err(e) => {
            eprintln!("config error: {e}");
            2
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::InvalidConfig(_) | Error::Io(_) | Error::Json(_) => 2,
        Error::NoFeasibleLambda(_) => 8,
        Error::AlphaExhausted { .. } => 9,
        Error::SolverDidNotConverge { .. } => 11,
        Error::StageFailed { reason, .. } if reason.contains("feasible lambda") => 8,
        _ => 10,
    }
}

fn random_interior(rng: &mut ChaCha8Rng, r_max: f64) -> Complex64 {
    loop {
        let x = rng.gen_range(-r_max..r_max);
        let y = rng.gen_range(-r_max..r_max);
        if x * x + y * y < r_max * r_max {
            return Complex64::new(x, y);
        }
    }
}

fn kernels_check(seed: u64) -> u8 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let disks = [
        DiskSpec::unit(),
        DiskSpec::new(Complex64::new(1.0, 0.0), 2.0),
        DiskSpec::new(Complex64::new(-0.3, 0.7), 0.4),
    ];
    let mut worst: f64 = f64::INFINITY;
    for disk in &disks {
        for _ in 0..2000 {
            let zeta = disk.center + disk.radius * random_interior(&mut rng, 0.999);
            let omega = disk.center + disk.radius * random_interior(&mut rng, 0.999);
            if (zeta - omega).norm() < 1e-6 {
                continue;
            }
            let g = match green_gradient(disk, zeta, omega) {
                Ok(g) => g,
                Err(_) => continue,
            };
            let d = (zeta - omega).norm();
            let (p1, p2) = g.omega_partials();
            worst = worst
                .min(2.0 / d - g.grad.norm())
                .min(2.0 / (d * d) - p1.norm())
                .min(2.0 / (d * d) - p2.norm());
        }
    }
    println!("green gradient bounds: worst slack {worst:.3e}");
    let mut ok = worst >= -1e-10;

    let mut worst_poisson: f64 = f64::INFINITY;
    for _ in 0..50 {
        let deg = rng.gen_range(1..=8);
        let coeffs: Vec<(f64, f64)> = (0..deg)
            .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let trace = BoundaryTrace::from_fn(DiskSpec::unit(), 1024, |t| {
            let v: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(k, (a, b))| a * ((k + 1) as f64 * t).cos() + b * ((k + 1) as f64 * t).sin())
                .sum();
            Complex64::new(v, 0.0)
        });
        for z_ref in [Complex64::new(0.0, 0.0), trace.mean()] {
            let (lhs, rhs) = poisson_gradient_bound(&trace, z_ref);
            worst_poisson = worst_poisson.min(rhs - lhs);
        }
    }
    println!("poisson gradient bound: worst slack {worst_poisson:.3e}");
    ok &= worst_poisson >= -1e-6;

    if ok {
        println!("kernels-check: PASS");
        0
    } else {
        println!("kernels-check: FAIL");
        10
    }
}

struct AuditOutcome {
    reports: Vec<serde_json::Value>,
    failed_stage: Option<u8>,
}

fn run_audits(cfg: &RunConfig, field: &CoefficientField, map: &MappingSample) -> Result<AuditOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let points = map.scan_points(20, 64, 0.97);
    let mut reports = Vec::new();
    let mut failed: Option<u8> = None;
    let mut record = |name: &str, value: serde_json::Value, pass: bool, code: u8| {
        if !pass && failed.is_none() {
            failed = Some(code);
        }
        // Stage lines go to stderr so stdout stays machine-readable for the
        // pipeline and report subcommands.
        eprintln!(
            "{name}: {} {}",
            if pass { "PASS" } else { "FAIL" },
            value
        );
    };

    let ell = ellipticity_audit(field, &points)?;
    let v = serde_json::to_value(&ell)?;
    record("ellipticity", v.clone(), ell.pass, 3);
    reports.push(serde_json::json!({ "stage": "ellipticity", "report": v }));

    let growth = growth_audit(map, field, &cfg.growth_params(), &points, cfg.tolerances.c_tol);
    let v = serde_json::to_value(&growth)?;
    record("growth", v.clone(), growth.pass, 4);
    reports.push(serde_json::json!({ "stage": "growth", "report": v }));

    let measured_k = map.measure_k(&points).unwrap_or(1.0);
    let k_used = measured_k.max(cfg.declared_k.or(map.declared_k).unwrap_or(1.0));

    let polar = polar_audit(map, k_used, &points, cfg.tolerances.slack.max(1e-6))?;
    let v = serde_json::to_value(&polar)?;
    record("polar", v.clone(), polar.pass, 5);
    reports.push(serde_json::json!({ "stage": "polar", "report": v }));

    let pairs: Vec<(Complex64, Complex64)> = (0..4000)
        .map(|_| {
            (
                random_interior(&mut rng, 0.999),
                random_interior(&mut rng, 0.999),
            )
        })
        .collect();
    let mori_pts: Vec<Complex64> = (0..4000).map(|_| random_interior(&mut rng, 0.999)).collect();
    let mori = mori_audit(map, k_used, &pairs, &mori_pts, cfg.tolerances.slack)?;
    let v = serde_json::json!({
        "upper": serde_json::to_value(&mori.upper)?,
        "lower": mori.lower.as_ref().map(serde_json::to_value).transpose()?,
    });
    record("mori", v.clone(), mori.pass, 6);
    reports.push(serde_json::json!({ "stage": "mori", "report": v }));

    // Operator identity for rho = |w|; grid-backed maps do not support the
    // second differences it needs.
    if !map.is_grid() {
        let h = 1e-3;
        let tol = cfg.tolerances.c_tol * h * h;
        let mut worst = 0.0f64;
        let mut checked = 0usize;
        for &z in points.iter().step_by(37) {
            if z.norm() > 0.9 {
                continue;
            }
            // Both sides carry 1/rho factors, so finite differences lose the
            // h^2 tolerance model close to the zero of w.
            match map.polar_data(z) {
                Ok(d) if d.rho < 0.2 => continue,
                Ok(_) => {}
                Err(Error::NearZeroLocus { .. }) => continue,
                Err(e) => return Err(e),
            }
            match radial_operator_identity(map, field, z, h) {
                Ok((lhs, rhs)) => {
                    worst = worst.max((lhs - rhs).abs());
                    checked += 1;
                }
                Err(Error::NearZeroLocus { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        let pass = worst <= tol && checked > 0;
        let v = serde_json::json!({ "worst_residual": worst, "tolerance": tol, "n": checked });
        record("operator_identity", v.clone(), pass, 7);
        reports.push(serde_json::json!({ "stage": "operator_identity", "report": v }));
    }

    Ok(AuditOutcome {
        reports,
        failed_stage: failed,
    })
}

fn audit_cmd(cfg: &RunConfig) -> u8 {
    let field = build_field(&cfg.field);
    let map = match build_map(&cfg.map, &field) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("map generation failed: {e}");
            return exit_code_for(&e);
        }
    };
    match run_audits(cfg, &field, &map) {
        Ok(out) => {
            if let Some(path) = &cfg.output.json {
                let doc = serde_json::json!({ "stages": out.reports });
                if std::fs::write(path, serde_json::to_string_pretty(&doc).unwrap()).is_err() {
                    return 2;
                }
            }
            out.failed_stage.unwrap_or(0)
        }
        Err(e) => {
            eprintln!("audit failed: {e}");
            exit_code_for(&e)
        }
    }
}

fn bounds_interior_cmd(cfg: &RunConfig) -> u8 {
    let field = build_field(&cfg.field);
    let map = match build_map(&cfg.map, &field) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("map generation failed: {e}");
            return exit_code_for(&e);
        }
    };
    let points = map.scan_points(20, 64, 0.97);
    let measured_k = map.measure_k(&points).unwrap_or(1.0);
    let k_used = measured_k.max(cfg.declared_k.or(map.declared_k).unwrap_or(1.0));
    let k_ratio = (k_used - 1.0) / (k_used + 1.0);
    let b_comp = match component_growth_constant(k_ratio, cfg.growth.b) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("{e}");
            return exit_code_for(&e);
        }
    };
    let params = EstimateParams {
        big_lambda: field.lambda,
        lip: field.lip,
        b: b_comp,
        gamma: cfg.growth.gamma,
    };
    let modulus = |t: f64| qc_modulus(t.clamp(1e-300, 2.0), k_used);
    let mut rows = Vec::new();
    for i in 1..=16 {
        let rho = i as f64 / 16.0;
        match interior_estimate(&params, Complex64::new(0.0, 0.0), rho, &modulus, 1.0) {
            Ok(est) => rows.push(serde_json::to_value(&est).unwrap()),
            Err(e) => {
                eprintln!("interior estimate at rho={rho}: {e}");
                return exit_code_for(&e);
            }
        }
    }
    let doc = serde_json::json!({
        "measured_k": measured_k,
        "k_used": k_used,
        "component_b": b_comp,
        "theta": theta_constant(k_used, field.lambda, cfg.growth.b),
        "estimates": rows,
    });
    println!("{}", serde_json::to_string_pretty(&doc).unwrap());
    if let Some(path) = &cfg.output.json {
        if std::fs::write(path, serde_json::to_string_pretty(&doc).unwrap()).is_err() {
            return 2;
        }
    }
    0
}

fn gradient_rows(map: &MappingSample, outcome: &PipelineOutcome) -> Vec<GradientRow> {
    let points = map.scan_points(16, 48, 0.995);
    points
        .iter()
        .map(|&z| {
            let (g, _) = qcdisk::geometry::mat_norms(&map.grad_at(z));
            let bound = if z.norm() >= outcome.reduction.beta {
                outcome.boundary_bound
            } else {
                outcome.c_global
            };
            GradientRow {
                z_re: z.re,
                z_im: z.im,
                grad_fd: g,
                bound_local: bound,
                slack: bound - g,
            }
        })
        .collect()
}

fn pipeline_cmd(cfg: &RunConfig, csv: Option<PathBuf>, json: Option<PathBuf>) -> u8 {
    let field = build_field(&cfg.field);
    let map = match build_map(&cfg.map, &field) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("map generation failed: {e}");
            return exit_code_for(&e);
        }
    };
    let audits = match run_audits(cfg, &field, &map) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("audit failed: {e}");
            return exit_code_for(&e);
        }
    };

    let outcome = match lipschitz_pipeline(&map, &field, cfg.growth.b, cfg.growth.gamma) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("pipeline failed: {e}");
            return exit_code_for(&e);
        }
    };

    let doc = serde_json::json!({
        "stages": audits.reports,
        "constants": {
            "lambda": outcome.interior.lambda,
            "a0": outcome.interior.a0,
            "b0": outcome.interior.b0,
            "c0": outcome.interior.c0,
            "mu1": outcome.interior.mu1,
            "c0_coef": outcome.interior.c0_coef,
            "c1_coef": outcome.interior.c1_coef,
            "theta": theta_constant(outcome.k_used, field.lambda, cfg.growth.b),
            "b1": outcome.reduction.b1,
            "m": outcome.reduction.m,
            "alpha": outcome.reduction.alpha,
            "beta": outcome.reduction.beta,
        },
        "measured_k": outcome.measured_k,
        "boundary_branch": "empirical",
        "interior_bound": outcome.interior_bound,
        "boundary_bound": outcome.boundary_bound,
        "c_global": outcome.c_global,
        "empirical_max_grad": outcome.empirical_max_grad,
        "pass": outcome.pass && audits.failed_stage.is_none(),
    });
    println!("{}", serde_json::to_string_pretty(&doc).unwrap());

    let json_path = json.or_else(|| cfg.output.json.clone());
    if let Some(path) = json_path {
        if std::fs::write(&path, serde_json::to_string_pretty(&doc).unwrap()).is_err() {
            eprintln!("failed to write {}", path.display());
            return 2;
        }
    }
    let csv_path = csv.or_else(|| cfg.output.csv.clone());
    if let Some(path) = csv_path {
        let rows = gradient_rows(&map, &outcome);
        if write_gradient_csv(&path, &rows).is_err() {
            eprintln!("failed to write {}", path.display());
            return 2;
        }
    }

    if let Some(code) = audits.failed_stage {
        return code;
    }
    if !outcome.pass {
        return 10;
    }
    0
}
