//! Desk-scale acceptance battery. Each test prints one pass/fail line for
//! its criterion before asserting, so `--nocapture` gives a readable
//! scoreboard.

use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qcdisk::bounds::{lipschitz_pipeline, mu_curve, nagumo_precondition};
use qcdisk::field::CoefficientField;
use qcdisk::geometry::Mat2;
use qcdisk::kernels::{green_gradient, poisson_gradient_bound, BoundaryTrace, DiskSpec};
use qcdisk::map::MappingSample;
use qcdisk::qc::{mori_audit, polar_audit, radial_operator_identity};
use qcdisk::solver::{fd_elliptic_solve, SolverOptions};

fn conclude(n: usize, name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {n} ({name}): {} [{detail}]",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {n} ({name}): {detail}");
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

#[test]
fn criterion_01_green_gradient_bounds() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let disks = [
        DiskSpec::unit(),
        DiskSpec::new(Complex64::new(1.0, 0.0), 2.0),
        DiskSpec::new(Complex64::new(-0.3, 0.7), 0.4),
    ];
    let mut worst = f64::INFINITY;
    for disk in &disks {
        let mut done = 0;
        while done < 10_000 {
            let zeta = disk.center + disk.radius * random_interior(&mut rng, 0.9999);
            let omega = disk.center + disk.radius * random_interior(&mut rng, 0.9999);
            let d = (zeta - omega).norm();
            if d < 1e-9 {
                continue;
            }
            let g = green_gradient(disk, zeta, omega).unwrap();
            let (p1, p2) = g.omega_partials();
            worst = worst
                .min(2.0 / d - g.grad.norm())
                .min(2.0 / (d * d) - p1.norm())
                .min(2.0 / (d * d) - p2.norm());
            done += 1;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    conclude(
        1,
        "green gradient bounds",
        worst >= -1e-10 && elapsed < 5.0,
        &format!("worst slack {worst:.3e}, {elapsed:.2}s"),
    );
}

#[test]
fn criterion_02_poisson_gradient_lemma() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = f64::INFINITY;
    for _ in 0..200 {
        let deg = rng.gen_range(1..=8usize);
        let coeffs: Vec<(f64, f64)> = (0..deg)
            .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let trace = BoundaryTrace::from_fn(DiskSpec::unit(), 4096, |t| {
            let v: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(k, (a, b))| {
                    a * ((k + 1) as f64 * t).cos() + b * ((k + 1) as f64 * t).sin()
                })
                .sum();
            Complex64::new(v, 0.0)
        });
        for z_ref in [Complex64::new(0.0, 0.0), trace.mean()] {
            let (lhs, rhs) = poisson_gradient_bound(&trace, z_ref);
            worst = worst.min(rhs - lhs);
        }
    }

    let cosine = BoundaryTrace::from_fn(DiskSpec::unit(), 4096, |t| Complex64::new(t.cos(), 0.0));
    let (_, rhs) = poisson_gradient_bound(&cosine, Complex64::new(0.0, 0.0));
    let four_over_pi = 4.0 / std::f64::consts::PI;
    conclude(
        2,
        "poisson gradient lemma",
        worst >= -1e-6 && (rhs - four_over_pi).abs() <= 1e-6,
        &format!(
            "worst slack {worst:.3e}, cosine rhs {rhs:.7} vs {four_over_pi:.7}"
        ),
    );
}

#[test]
fn criterion_03_radial_operator_identity_order() {
    let field = CoefficientField::identity();
    let maps = [
        MappingSample::analytic(|z| 0.3 * z.exp(), "conformal_exp"),
        MappingSample::radial_stretch(1.5),
        MappingSample::radial_stretch(3.0),
    ];
    let points = [
        Complex64::new(0.35, 0.2),
        Complex64::new(-0.4, 0.25),
        Complex64::new(0.15, -0.5),
        Complex64::new(-0.3, -0.3),
    ];
    let hs = [1e-3, 5e-4];
    let mut max_res = [0.0f64; 2];
    let mut ratios = Vec::new();
    for map in &maps {
        for &z in &points {
            let mut res = [0.0f64; 2];
            for (i, &h) in hs.iter().enumerate() {
                let (lhs, rhs) = radial_operator_identity(map, &field, z, h).unwrap();
                res[i] = (lhs - rhs).abs();
                max_res[i] = max_res[i].max(res[i]);
            }
            if res[1] > 1e-11 {
                ratios.push(res[0] / res[1]);
            }
        }
    }
    ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = ratios[ratios.len() / 2];
    let tol_ok = max_res[0] <= 100.0 * hs[0] * hs[0] && max_res[1] <= 100.0 * hs[1] * hs[1];
    conclude(
        3,
        "operator identity O(h^2)",
        tol_ok && (3.5..=4.5).contains(&median),
        &format!(
            "residuals {:.2e}/{:.2e}, median ratio {median:.2}",
            max_res[0], max_res[1]
        ),
    );
}

fn interior_cloud(n: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_interior(&mut rng, 0.98)).collect()
}

#[test]
fn criterion_04_polar_factorization_inequalities() {
    let start = Instant::now();
    let points = interior_cloud(10_000, 404);

    let mobius = MappingSample::mobius(Complex64::new(0.3, 0.0));
    let rep = polar_audit(&mobius, 1.0, &points, 1e-6).unwrap();
    let mut equality_gap = 0.0f64;
    for &z in points.iter().step_by(7) {
        if let Ok(d) = mobius.polar_data(z) {
            equality_gap = equality_gap.max((d.rho * d.grad_s_norm() - d.grad_rho_norm()).abs());
        }
    }
    let mut ok = rep.pass && equality_gap <= 1e-5;
    let mut detail = format!(
        "mobius slack {:.2e}, equality gap {equality_gap:.2e}",
        rep.min_slack
    );

    for k in [1.5, 2.0, 4.0] {
        let stretch = MappingSample::radial_stretch(k);
        let rep = polar_audit(&stretch, k, &points, 1e-6).unwrap();
        ok &= rep.pass;
        detail.push_str(&format!(", K={k} slack {:.2e}", rep.min_slack));
    }
    let elapsed = start.elapsed().as_secs_f64();
    ok &= elapsed < 10.0;
    conclude(4, "polar factorization", ok, &format!("{detail}, {elapsed:.2}s"));
}

#[test]
fn criterion_05_mori_distortion() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let pairs: Vec<(Complex64, Complex64)> = (0..10_000)
        .map(|_| {
            (
                random_interior(&mut rng, 0.9999),
                random_interior(&mut rng, 0.9999),
            )
        })
        .collect();
    let points: Vec<Complex64> = (0..10_000)
        .map(|_| random_interior(&mut rng, 0.9999))
        .collect();

    let mut maps: Vec<(MappingSample, f64)> = vec![
        (MappingSample::mobius(Complex64::new(0.0, 0.0)), 1.0),
        (MappingSample::mobius(Complex64::new(0.3, 0.0)), 1.0),
        (MappingSample::radial_stretch(1.5), 1.5),
        (MappingSample::radial_stretch(2.0), 2.0),
        (MappingSample::radial_stretch(4.0), 4.0),
    ];
    let mut hqc = MappingSample::harmonic_extension(&[0.2, 0.05]).unwrap();
    hqc.zero = Some(hqc.find_zero().unwrap());
    let scan = hqc.scan_points(30, 120, 0.98);
    let k_meas = hqc.measure_k(&scan).unwrap();
    maps.push((hqc, k_meas));

    let mut ok = true;
    let mut detail = String::new();
    for (map, k) in &maps {
        let audit = mori_audit(map, *k, &pairs, &points, 1e-9).unwrap();
        ok &= audit.pass;
        let lower = audit
            .lower
            .as_ref()
            .map(|r| r.min_slack)
            .unwrap_or(f64::INFINITY);
        detail.push_str(&format!(
            "{} up {:.1e} low {:.1e}; ",
            map.label, audit.upper.min_slack, lower
        ));
    }
    conclude(5, "mori distortion", ok, detail.trim_end());
}

#[test]
fn criterion_06_nagumo_arithmetic() {
    let (v_ok, ok_flag) = nagumo_precondition(1.0, 1.0, 0.04);
    let (v_fail, fail_flag) = nagumo_precondition(1.0, 1.0, 0.05);
    let pass = (v_ok - 0.8149).abs() <= 1e-4
        && ok_flag
        && (v_fail - 1.0186).abs() <= 1e-4
        && !fail_flag;
    conclude(
        6,
        "nagumo precondition",
        pass,
        &format!("{v_ok:.5} (ok), {v_fail:.5} (fail)"),
    );
}

#[test]
fn criterion_07_interior_estimate_end_to_end() {
    use qcdisk::bounds::{interior_estimate, EstimateParams};
    use qcdisk::qc::qc_modulus;

    let start = Instant::now();
    let map = MappingSample::harmonic_extension(&[0.2, 0.05]).unwrap();
    let scan = map.scan_points(30, 120, 0.98);
    let k = map.measure_k(&scan).unwrap();
    let params = EstimateParams {
        big_lambda: 1.0,
        lip: 0.0,
        b: 0.0,
        gamma: 0.0,
    };
    let modulus = |t: f64| qc_modulus(t.clamp(1e-300, 2.0), k);

    let mut ok = true;
    let mut worst_margin = f64::INFINITY;
    let mut tested = 0;
    'outer: for i in 0..5 {
        for j in 0..5 {
            let a = Complex64::new(-0.5 + 0.25 * i as f64, -0.5 + 0.25 * j as f64);
            let rho = 1.0 - a.norm();
            if rho < 0.2 {
                continue;
            }
            tested += 1;
            // Component sup over the ball |zeta - a| <= rho.
            let mut sup_re = 0.0f64;
            let mut sup_im = 0.0f64;
            for ri in 0..=16 {
                let r = rho * ri as f64 / 16.0;
                for tj in 0..64 {
                    let t = 2.0 * std::f64::consts::PI * tj as f64 / 64.0;
                    let w = map.eval(a + Complex64::from_polar(r.min(rho * 0.999999), t));
                    sup_re = sup_re.max(w.re.abs());
                    sup_im = sup_im.max(w.im.abs());
                }
            }
            let g = map.grad_at(a);
            let grads = [
                (g.a11 * g.a11 + g.a12 * g.a12).sqrt(),
                (g.a21 * g.a21 + g.a22 * g.a22).sqrt(),
            ];
            for (grad, sup) in grads.iter().zip([sup_re, sup_im]) {
                let est = interior_estimate(&params, a, rho, &modulus, sup).unwrap();
                let margin = est.gradient_bound - grad;
                worst_margin = worst_margin.min(margin);
                if margin < 0.0 {
                    ok = false;
                    break 'outer;
                }
            }
            if tested == 25 {
                break 'outer;
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    conclude(
        7,
        "interior estimate end-to-end",
        ok && tested > 0 && elapsed < 60.0,
        &format!("{tested} base points, worst margin {worst_margin:.3}, {elapsed:.1}s"),
    );
}

#[test]
fn criterion_08_headline_pipeline() {
    let start = Instant::now();
    let identity_field = CoefficientField::identity();
    let tilt = CoefficientField::tilt(0.1, qcdisk::field::TiltProfile::ReZ);

    let fd_sol = fd_elliptic_solve(
        &tilt,
        |_| Complex64::new(0.0, 0.0),
        |t| Complex64::new(t.cos(), t.sin()),
        32,
        128,
        &SolverOptions::default(),
    )
    .unwrap();
    let mut fd_map = MappingSample::from_solution(Arc::new(fd_sol), "tilt_fd");
    fd_map.zero = Some(fd_map.find_zero().unwrap());

    let runs: Vec<(MappingSample, &CoefficientField, f64, f64)> = vec![
        (MappingSample::mobius(Complex64::new(0.0, 0.0)), &identity_field, 0.0, 0.0),
        (MappingSample::mobius(Complex64::new(0.3, 0.0)), &identity_field, 0.0, 0.0),
        (MappingSample::radial_stretch(2.0), &identity_field, 0.0, 3.0),
        (fd_map, &tilt, 0.0, 0.0),
    ];

    let mut ok = true;
    let mut detail = String::new();
    let mut mobius_grad = 0.0;
    for (i, (map, field, b, gamma)) in runs.iter().enumerate() {
        let out = lipschitz_pipeline(map, field, *b, *gamma).unwrap();
        ok &= out.pass && out.empirical_max_grad <= out.c_global;
        if i == 1 {
            mobius_grad = out.empirical_max_grad;
        }
        detail.push_str(&format!(
            "{}: grad {:.3} <= C {:.3}; ",
            out.label, out.empirical_max_grad, out.c_global
        ));
    }
    let oracle = 1.3 / 0.7;
    ok &= (mobius_grad - oracle).abs() <= 0.01;
    let elapsed = start.elapsed().as_secs_f64();
    ok &= elapsed < 300.0;
    conclude(
        8,
        "headline pipeline",
        ok,
        &format!("{detail}mobius grad {mobius_grad:.4} vs {oracle:.4}, {elapsed:.1}s"),
    );
}

#[test]
fn criterion_09_mu_curve() {
    let n = 120;
    let pts = mu_curve(
        |z| z.norm_sqr(),
        Complex64::new(0.0, 0.0),
        1.0,
        &[0.2, 0.4, 0.6, 0.8],
        n,
        1e-5,
    );
    let tol = 2.0 / n as f64;
    let mut ok = true;
    let mut detail = String::new();
    for pt in &pts {
        let exact = pt.p * pt.p / 2.0;
        ok &= (pt.mu - exact).abs() <= tol;
        detail.push_str(&format!("mu({})={:.4} vs {:.4}; ", pt.p, pt.mu, exact));
    }
    let small = mu_curve(
        |z| z.norm_sqr(),
        Complex64::new(0.0, 0.0),
        1.0,
        &[0.01],
        60,
        1e-6,
    );
    ok &= small[0].mu <= 1e-3;
    conclude(
        9,
        "mu_p curve",
        ok,
        &format!("{detail}mu(0.01)={:.2e}", small[0].mu),
    );
}

#[test]
fn criterion_10_solver_convergence_order() {
    struct Problem {
        field: CoefficientField,
        rhs: fn(Complex64) -> Complex64,
        name: &'static str,
    }
    fn exact(z: Complex64) -> Complex64 {
        Complex64::new(z.re.exp() * z.im.cos(), 0.0)
    }
    let problems = [
        Problem {
            field: CoefficientField::identity(),
            rhs: |_| Complex64::new(0.0, 0.0),
            name: "laplace",
        },
        Problem {
            field: CoefficientField::constant(Mat2::symmetric(1.0, 0.25, 1.0)),
            rhs: |z| Complex64::new(-0.5 * z.re.exp() * z.im.sin(), 0.0),
            name: "constant_offdiag",
        },
        Problem {
            field: CoefficientField::tilt(0.1, qcdisk::field::TiltProfile::ReZ),
            rhs: |z| Complex64::new(0.2 * z.re * z.re.exp() * z.im.cos(), 0.0),
            name: "tilt",
        },
    ];

    let solve_err = |p: &Problem, n_r: usize, n_theta: usize| -> f64 {
        let sol = fd_elliptic_solve(
            &p.field,
            p.rhs,
            |t| exact(Complex64::new(t.cos(), t.sin())),
            n_r,
            n_theta,
            &SolverOptions::default(),
        )
        .unwrap();
        let mut worst = (sol.center - exact(Complex64::new(0.0, 0.0))).norm();
        for i in 1..sol.n_r {
            for j in 0..sol.n_theta {
                worst = worst.max((sol.value(i, j) - exact(sol.node(i, j))).norm());
            }
        }
        worst
    };

    let mut ok = true;
    let mut detail = String::new();
    for p in &problems {
        let coarse = solve_err(p, 16, 64);
        let fine = solve_err(p, 32, 128);
        let ratio = coarse / fine;
        ok &= (3.5..=4.5).contains(&ratio);
        detail.push_str(&format!(
            "{}: {:.2e}/{:.2e} ratio {ratio:.2}; ",
            p.name, coarse, fine
        ));
    }
    conclude(10, "solver O(h^2) order", ok, detail.trim_end());
}
