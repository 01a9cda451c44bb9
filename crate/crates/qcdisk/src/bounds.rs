//! Interior gradient estimate, boundary smallness reduction with the
//! exponential cutoff, and the assembled global Lipschitz bound.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::CoefficientField;
use crate::geometry::scalar_gradient;
use crate::map::MappingSample;
use crate::qc::{component_growth_constant, dilatation, qc_modulus, theta_constant};

/// Constants entering the interior estimate.
#[derive(Debug, Clone, Copy)]
pub struct EstimateParams {
    /// Ellipticity constant Lambda >= 1.
    pub big_lambda: f64,
    /// Lipschitz constant of the coefficient field.
    pub lip: f64,
    /// Quadratic growth coefficient.
    pub b: f64,
    /// Constant growth term.
    pub gamma: f64,
}

fn quadratic_coefficients(
    p: &EstimateParams,
    lambda: f64,
    r_p: f64,
    modulus: &dyn Fn(f64) -> f64,
    m_loc: f64,
) -> (f64, f64, f64) {
    let l2 = p.big_lambda * p.big_lambda;
    let a0 = 16.0 * p.b * l2 * lambda;
    let b0 = 16.0 * l2 * p.lip * lambda * r_p - 1.0 / p.big_lambda.sqrt();
    let c0 = 4.0 * p.gamma * r_p * r_p * lambda + 2.0 * modulus(lambda * r_p).min(m_loc) / lambda;
    (a0, b0, c0)
}

/// Largest feasible lambda on a 1024-point logarithmic grid in
/// (0, 1/(2 sqrt(Lambda))). Feasibility requires the discriminant condition
/// B0^2 > 4 A0 C0 and the coefficient-smallness condition in both of its
/// printed readings (linear and quadratic in lambda).
pub fn select_lambda(
    p: &EstimateParams,
    r_p: f64,
    modulus: &dyn Fn(f64) -> f64,
    m_loc: f64,
) -> Result<f64> {
    let lambda_max = 0.5 / p.big_lambda.sqrt();
    let half_cap = 0.5 / p.big_lambda.sqrt();
    let ratio = 1e-6f64.powf(1.0 / 1024.0);
    let mut lambda = lambda_max;
    for _ in 0..1024 {
        lambda *= ratio;
        let smallness = 16.0 * p.big_lambda * p.big_lambda * p.lip * r_p;
        if smallness * lambda > half_cap || smallness * lambda * lambda > half_cap {
            continue;
        }
        let (a0, b0, c0) = quadratic_coefficients(p, lambda, r_p, modulus, m_loc);
        if b0 < 0.0 && b0 * b0 > 4.0 * a0 * c0 {
            return Ok(lambda);
        }
    }
    Err(Error::NoFeasibleLambda(format!(
        "Lambda={}, LipL={}, B={}, Gamma={}, r_p={}, M={}",
        p.big_lambda, p.lip, p.b, p.gamma, r_p, m_loc
    )))
}

/// Full record of the interior estimate at a base point.
#[derive(Debug, Clone, Serialize)]
pub struct InteriorEstimate {
    pub a: [f64; 2],
    pub rho_a: f64,
    pub lambda: f64,
    pub a0: f64,
    pub b0: f64,
    pub c0: f64,
    /// Stable smaller root of a0 x^2 + b0 x + c0 = 0.
    pub mu1: f64,
    /// Independent upper bound -2 c0 / b0 for mu1.
    pub mu1_cap: f64,
    pub p_bound: f64,
    pub q_bound: f64,
    pub r_bound: f64,
    pub c0_coef: f64,
    pub c1_coef: f64,
    /// c0_coef * sup|u| / rho_a + c1_coef.
    pub gradient_bound: f64,
}

/// Assembles the interior gradient estimate for a scalar solution with
/// modulus of continuity `modulus` and local sup bound `sup_u` at a base
/// point with distance `rho_a` to the boundary.
pub fn interior_estimate(
    p: &EstimateParams,
    a: Complex64,
    rho_a: f64,
    modulus: &dyn Fn(f64) -> f64,
    sup_u: f64,
) -> Result<InteriorEstimate> {
    assert!(rho_a > 0.0);
    let r_p = rho_a;
    let lambda = select_lambda(p, r_p, modulus, sup_u)?;
    let (a0, b0, c0) = quadratic_coefficients(p, lambda, r_p, modulus, sup_u);
    let disc = b0 * b0 - 4.0 * a0 * c0;
    // Smaller quadratic root in the cancellation-free form; exact linear
    // root when a0 = 0.
    let s = 2.0 / (-b0 + disc.sqrt());
    let mu1 = c0 * s;
    let mu1_cap = -2.0 * c0 / b0;

    let c0_coef = 2.0 * s / lambda;
    let c1_coef = s * (4.0 * p.gamma * r_p * r_p * lambda + 2.0 * modulus(lambda * r_p) / lambda)
        / r_p;
    let gradient_bound = c0_coef * sup_u / rho_a + c1_coef;

    let l2 = p.big_lambda * p.big_lambda;
    Ok(InteriorEstimate {
        a: [a.re, a.im],
        rho_a,
        lambda,
        a0,
        b0,
        c0,
        mu1,
        mu1_cap,
        p_bound: 16.0 * l2 * p.b * lambda * mu1 * mu1 / r_p,
        q_bound: 16.0 * l2 * p.lip * lambda * mu1,
        r_bound: 2.0 * modulus(lambda * r_p).min(sup_u) / (lambda * r_p),
        c0_coef,
        c1_coef,
        gradient_bound,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MuPoint {
    pub p: f64,
    pub mu: f64,
    pub argmax: [f64; 2],
}

/// Discrete scan of mu_p = max over the ball |z - a| <= p rho(a) of
/// |grad u(z)| * (p rho(a) - |z - a|).
pub fn mu_curve<F>(u: F, a: Complex64, rho_a: f64, ps: &[f64], n: usize, h: f64) -> Vec<MuPoint>
where
    F: Fn(Complex64) -> f64,
{
    let mut out = Vec::with_capacity(ps.len());
    for &p in ps {
        let cap = p * rho_a;
        let mut mu: f64 = 0.0;
        let mut arg = a;
        for i in 0..=n {
            let r = cap * i as f64 / n as f64;
            let n_t = if i == 0 { 1 } else { 4 * n.min(64) };
            for j in 0..n_t {
                let t = 2.0 * std::f64::consts::PI * j as f64 / n_t as f64;
                let z = a + Complex64::from_polar(r, t);
                let g = scalar_gradient(&u, z, h).norm();
                let v = g * (cap - r);
                if v > mu {
                    mu = v;
                    arg = z;
                }
            }
        }
        out.push(MuPoint {
            p,
            mu,
            argmax: [arg.re, arg.im],
        });
    }
    out
}

/// Smallness value (64/pi) B Gamma M of the boundary precondition; ok
/// when it is below 1.
pub fn nagumo_precondition(b: f64, gamma: f64, m: f64) -> (f64, bool) {
    assert!(b >= 0.0 && gamma >= 0.0 && m >= 0.0);
    let value = 64.0 / std::f64::consts::PI * b * gamma * m;
    (value, value < 1.0)
}

/// Radial exponential bump: 1 at |z| = alpha, vanishing to all orders at
/// |z| = beta, identically 0 beyond. Derivatives are closed-form because
/// finite differences are useless where the profile is exponentially flat.
#[derive(Debug, Clone, Copy)]
pub struct CutoffBump {
    pub alpha: f64,
    pub beta: f64,
}

impl CutoffBump {
    pub fn new(alpha: f64, beta: f64) -> Self {
        assert!(0.0 < alpha && alpha < beta);
        CutoffBump { alpha, beta }
    }

    fn psi(&self, t: f64) -> f64 {
        1.0 / (t - self.beta * self.beta) - 1.0 / (self.alpha * self.alpha - self.beta * self.beta)
    }

    pub fn value(&self, z: Complex64) -> f64 {
        let t = z.norm_sqr();
        if t >= self.beta * self.beta {
            0.0
        } else {
            self.psi(t).exp()
        }
    }

    /// phi_x + i phi_y.
    pub fn grad(&self, z: Complex64) -> Complex64 {
        let t = z.norm_sqr();
        if t >= self.beta * self.beta {
            return Complex64::new(0.0, 0.0);
        }
        let d = t - self.beta * self.beta;
        let dpsi = -1.0 / (d * d);
        2.0 * self.psi(t).exp() * dpsi * z
    }

    /// Sum a^ij D_ij phi at z for the given coefficient matrix.
    pub fn operator(&self, field: &CoefficientField, z: Complex64) -> f64 {
        let t = z.norm_sqr();
        if t >= self.beta * self.beta {
            return 0.0;
        }
        let d = t - self.beta * self.beta;
        let dpsi = -1.0 / (d * d);
        let ddpsi = 2.0 / (d * d * d);
        let phi = self.psi(t).exp();
        let coeff = 4.0 * (dpsi * dpsi + ddpsi);
        let a = field.at(z);
        let d11 = phi * (coeff * z.re * z.re + 2.0 * dpsi);
        let d12 = phi * coeff * z.re * z.im;
        let d22 = phi * (coeff * z.im * z.im + 2.0 * dpsi);
        a.a11 * d11 + 2.0 * a.a12 * d12 + a.a22 * d22
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryReduction {
    pub alpha: f64,
    pub beta: f64,
    pub b1: f64,
    pub gamma1: f64,
    pub m: f64,
    pub bana_value: f64,
    pub nagumo_ok: bool,
    pub boundary_residual: f64,
    /// (alpha, M(alpha)) pairs visited during the bisection.
    pub m_curve: Vec<(f64, f64)>,
}

fn annulus_max<F>(alpha: f64, r_hi: f64, n_r: usize, n_t: usize, mut f: F) -> f64
where
    F: FnMut(Complex64) -> f64,
{
    let mut worst: f64 = 0.0;
    for i in 0..=n_r {
        let r = alpha + (r_hi - alpha) * i as f64 / n_r as f64;
        for j in 0..n_t {
            let t = 2.0 * std::f64::consts::PI * j as f64 / n_t as f64;
            worst = worst.max(f(Complex64::from_polar(r, t)));
        }
    }
    worst
}

/// Builds the cutoff reduction on the annulus alpha <= |z| < 1 for u = |w|:
/// g = 1 + (u - 1) phi, M = max |u - g|, the constant B1, and the smallness
/// value (64/pi) 2 B1 M Lambda. When the smallness test fails, alpha is
/// pushed toward 1 (which shrinks M) until it passes or the margin to the
/// circle is exhausted.
pub fn boundary_reduction(
    w: &MappingSample,
    field: &CoefficientField,
    k: f64,
    b: f64,
    a: Complex64,
    alpha0: Option<f64>,
) -> Result<BoundaryReduction> {
    let floor = (1.0 + a.norm()) / 2.0;
    let mut alpha = alpha0.unwrap_or(0.5f64.max(floor)).max(floor);
    let theta = theta_constant(k, field.lambda, b);
    let b1 = 2.0f64.powf(3.0 * k - 2.0) * ((1.0 + a.norm()) / (1.0 - a.norm())).powf(k) * theta;

    let u = |z: Complex64| w.eval(z).norm();
    let mut m_curve = Vec::new();
    let (m, bana_value) = loop {
        let beta = (alpha + 1.0) / 2.0;
        let bump = CutoffBump::new(alpha, beta);
        let m = annulus_max(alpha, 1.0, 96, 96, |z| {
            ((u(z) - 1.0) * (1.0 - bump.value(z))).abs()
        });
        let bana_value = 64.0 / std::f64::consts::PI * 2.0 * b1 * m * field.lambda;
        m_curve.push((alpha, m));
        if bana_value < 1.0 {
            break (m, bana_value);
        }
        alpha = (alpha + 1.0) / 2.0;
        if alpha > 1.0 - 1e-4 {
            return Err(Error::AlphaExhausted {
                alpha,
                value: bana_value,
                curve: m_curve,
            });
        }
    };
    let beta = (alpha + 1.0) / 2.0;
    let bump = CutoffBump::new(alpha, beta);

    // Contribution of the cutoff terms to L[g]; reported, not closed-form.
    let gamma1 = annulus_max(alpha, beta, 64, 64, |z| {
        let gu = scalar_gradient(&u, z, w.fd_step(z));
        let gp = bump.grad(z);
        let am = field.at(z);
        let cross = am.a11 * gu.re * gp.re
            + am.a12 * (gu.re * gp.im + gu.im * gp.re)
            + am.a22 * gu.im * gp.im;
        ((u(z) - 1.0) * bump.operator(field, z) + 2.0 * cross).abs()
    });

    // u - g must vanish on |z| = alpha (phi = 1) and on the unit circle
    // (self-map boundary values).
    let mut boundary_residual: f64 = 0.0;
    for j in 0..256 {
        let t = 2.0 * std::f64::consts::PI * j as f64 / 256.0;
        let za = Complex64::from_polar(alpha, t);
        let z1 = Complex64::from_polar(1.0, t);
        boundary_residual = boundary_residual
            .max(((u(za) - 1.0) * (1.0 - bump.value(za))).abs())
            .max((u(z1) - 1.0).abs());
    }

    Ok(BoundaryReduction {
        alpha,
        beta,
        b1,
        gamma1,
        m,
        bana_value,
        nagumo_ok: true,
        boundary_residual,
        m_curve,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineOutcome {
    pub label: String,
    pub measured_k: f64,
    pub k_used: f64,
    pub a: [f64; 2],
    pub reduction: BoundaryReduction,
    pub interior: InteriorEstimate,
    pub interior_bound: f64,
    /// 1.05 times the measured boundary-annulus gradient bound K |grad rho|;
    /// empirical branch, no closed-form boundary constant is computed.
    pub boundary_bound: f64,
    pub c_global: f64,
    pub empirical_max_grad: f64,
    pub pass: bool,
}

fn measured_k_over(w: &MappingSample, points: &[Complex64]) -> Result<f64> {
    let mut worst: Option<f64> = None;
    for &z in points {
        if let Ok((_, big_k)) = dilatation(&w.wirtinger_at(z)) {
            worst = Some(worst.map_or(big_k, |x: f64| x.max(big_k)));
        }
    }
    worst.ok_or(Error::EmptySampleSet)
}

/// Global gradient bound for a quasiconformal self-map satisfying the
/// growth inequality: interior branch from the component-wise interior
/// estimate on |z| <= alpha, boundary branch from K |grad rho| on the
/// outer annulus, glued by taking the larger constant.
pub fn lipschitz_pipeline(
    w: &MappingSample,
    field: &CoefficientField,
    b: f64,
    gamma: f64,
) -> Result<PipelineOutcome> {
    let points = w.scan_points(24, 96, 0.995);
    let measured_k = measured_k_over(w, &points).map_err(|e| Error::StageFailed {
        stage: "measure_k",
        reason: e.to_string(),
    })?;
    let k_used = measured_k.max(w.declared_k.unwrap_or(1.0)).max(1.0);
    let k_ratio = (k_used - 1.0) / (k_used + 1.0);
    let a = w.find_zero().map_err(|e| Error::StageFailed {
        stage: "find_zero",
        reason: e.to_string(),
    })?;

    let reduction = boundary_reduction(w, field, k_used, b, a, None)?;

    // Interior branch: each component of w obeys the growth inequality with
    // the component constant; both components share the distortion modulus.
    // The estimate is maximized over the base distances occurring on
    // |z| <= alpha.
    let b_comp = component_growth_constant(k_ratio, b).map_err(|e| Error::StageFailed {
        stage: "component_constant",
        reason: e.to_string(),
    })?;
    let params = EstimateParams {
        big_lambda: field.lambda,
        lip: field.lip,
        b: b_comp,
        gamma,
    };
    let modulus = |t: f64| qc_modulus(t.clamp(1e-300, 2.0), k_used);
    let mut interior_bound: f64 = 0.0;
    let mut interior_rep: Option<InteriorEstimate> = None;
    for i in 0..64 {
        let rho = (1.0 - reduction.alpha) + reduction.alpha * i as f64 / 63.0;
        let est = interior_estimate(&params, Complex64::new(0.0, 0.0), rho, &modulus, 1.0)
            .map_err(|e| Error::StageFailed {
                stage: "interior_estimate",
                reason: e.to_string(),
            })?;
        let total = 2.0 * est.gradient_bound;
        if total >= interior_bound {
            interior_bound = total;
            interior_rep = Some(est);
        }
    }
    let interior = interior_rep.expect("non-empty rho grid");

    // Boundary branch: |grad w| <= K |grad rho| on the outer annulus,
    // measured on a fine polar grid with a 5% safety factor.
    let mut grad_rho_max: f64 = 0.0;
    let n_ann = 128;
    for i in 0..=n_ann {
        let r = reduction.beta + (1.0 - reduction.beta) * i as f64 / n_ann as f64;
        for j in 0..256 {
            let t = 2.0 * std::f64::consts::PI * j as f64 / 256.0;
            let z = Complex64::from_polar(r, t);
            if let Ok(d) = w.polar_data(z) {
                grad_rho_max = grad_rho_max.max(d.grad_rho_norm());
            }
        }
    }
    let boundary_bound = 1.05 * k_used * grad_rho_max;

    let c_global = interior_bound.max(boundary_bound);

    let mut empirical_max_grad: f64 = 0.0;
    let mut consider = |z: Complex64| {
        let (n, _) = crate::geometry::mat_norms(&w.grad_at(z));
        if n > empirical_max_grad {
            empirical_max_grad = n;
        }
    };
    for &z in &points {
        consider(z);
    }
    for j in 0..512 {
        let t = 2.0 * std::f64::consts::PI * j as f64 / 512.0;
        consider(Complex64::from_polar(1.0, t));
    }

    let pass = empirical_max_grad <= c_global;
    Ok(PipelineOutcome {
        label: w.label.clone(),
        measured_k,
        k_used,
        a: [a.re, a.im],
        reduction,
        interior,
        interior_bound,
        boundary_bound,
        c_global,
        empirical_max_grad,
        pass,
    })
}
