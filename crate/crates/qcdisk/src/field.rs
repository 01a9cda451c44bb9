//! Symmetric coefficient fields A(z), the operator L = a^ij D_ij, the
//! quadratic growth inequality, and the diagonalizing change of
//! coordinates.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{hessian, mat_norms, sym_eigen, Mat2};
use crate::map::MappingSample;
use crate::report::VerificationReport;

/// A symmetric matrix field with declared ellipticity constant Lambda >= 1
/// and Lipschitz constant LipL >= 0.
#[derive(Clone)]
pub struct CoefficientField {
    eval: Arc<dyn Fn(Complex64) -> Mat2<f64> + Send + Sync>,
    pub lambda: f64,
    pub lip: f64,
    pub tag: String,
}

impl std::fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CoefficientField")
            .field("lambda", &self.lambda)
            .field("lip", &self.lip)
            .field("tag", &self.tag)
            .finish()
    }
}

/// Smooth scalar profiles used by the tilt family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TiltProfile {
    ReZ,
    AbsSquared,
    SinX,
}

impl TiltProfile {
    fn value(&self, z: Complex64) -> f64 {
        match self {
            TiltProfile::ReZ => z.re,
            TiltProfile::AbsSquared => z.norm_sqr(),
            TiltProfile::SinX => z.re.sin(),
        }
    }

    /// Lipschitz constant of the profile on the closed unit disk.
    fn lipschitz(&self) -> f64 {
        match self {
            TiltProfile::ReZ => 1.0,
            TiltProfile::AbsSquared => 2.0,
            TiltProfile::SinX => 1.0,
        }
    }
}

impl CoefficientField {
    pub fn new<F>(eval: F, lambda: f64, lip: f64, tag: &str) -> Self
    where
        F: Fn(Complex64) -> Mat2<f64> + Send + Sync + 'static,
    {
        assert!(lambda >= 1.0);
        assert!(lip >= 0.0);
        CoefficientField {
            eval: Arc::new(eval),
            lambda,
            lip,
            tag: tag.to_string(),
        }
    }

    pub fn identity() -> Self {
        CoefficientField::new(|_| Mat2::identity(), 1.0, 0.0, "identity")
    }

    /// A constant symmetric positive-definite field; Lambda is derived
    /// from the spectrum.
    pub fn constant(a: Mat2<f64>) -> Self {
        assert!(a.is_symmetric());
        let (l1, l2, _) = sym_eigen(&a);
        assert!(l2 > 0.0, "field must be positive definite");
        let lambda = l1.max(1.0 / l2).max(1.0);
        CoefficientField::new(move |_| a, lambda, 0.0, "constant")
    }

    /// A(z) = I + epsilon * profile(z) * diag(1, -1). The profile is
    /// bounded by 1 on the disk so epsilon < 1 keeps the field elliptic.
    pub fn tilt(epsilon: f64, profile: TiltProfile) -> Self {
        assert!(
            epsilon.abs() < 1.0,
            "tilt amplitude must keep the field elliptic"
        );
        let lambda = ((1.0 + epsilon.abs()).max(1.0 / (1.0 - epsilon.abs()))).max(1.0);
        let lip = epsilon.abs() * profile.lipschitz();
        CoefficientField::new(
            move |z| {
                let s = epsilon * profile.value(z);
                Mat2::symmetric(1.0 + s, 0.0, 1.0 - s)
            },
            lambda,
            lip,
            "tilt",
        )
    }

    pub fn at(&self, z: Complex64) -> Mat2<f64> {
        (self.eval)(z)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GrowthParams {
    /// Coefficient of |grad w|^2 in the growth inequality.
    pub b: f64,
    /// Constant term.
    pub gamma: f64,
}

impl GrowthParams {
    pub fn new(b: f64, gamma: f64) -> Self {
        assert!(b >= 0.0 && gamma >= 0.0);
        GrowthParams { b, gamma }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EllipticityReport {
    pub lambda_emp: f64,
    pub lip_emp: f64,
    pub pass: bool,
}

/// Empirical ellipticity and Lipschitz constants over a sample set,
/// checked against the declared ones.
pub fn ellipticity_audit(
    field: &CoefficientField,
    samples: &[Complex64],
) -> Result<EllipticityReport> {
    if samples.len() < 2 {
        return Err(Error::EmptySampleSet);
    }
    let mats: Vec<Mat2<f64>> = samples.iter().map(|&z| field.at(z)).collect();
    let mut lambda_emp: f64 = 1.0;
    for a in &mats {
        let (l1, l2, _) = sym_eigen(a);
        lambda_emp = lambda_emp.max(l1).max(1.0 / l2);
    }
    let mut lip_emp: f64 = 0.0;
    for i in 0..samples.len() {
        for j in (i + 1)..samples.len() {
            let d = (samples[i] - samples[j]).norm();
            if d < 1e-12 {
                continue;
            }
            let (n, _) = mat_norms(&mats[i].sub(&mats[j]));
            lip_emp = lip_emp.max(n / d);
        }
    }
    let pass =
        lambda_emp <= field.lambda * (1.0 + 1e-9) && lip_emp <= field.lip * (1.0 + 1e-9) + 1e-15;
    Ok(EllipticityReport {
        lambda_emp,
        lip_emp,
        pass,
    })
}

/// L[u] = sum a^ij(z) D_ij u by central second differences (9-point).
pub fn apply_l<F>(u: F, field: &CoefficientField, z: Complex64, h: f64) -> f64
where
    F: Fn(Complex64) -> f64,
{
    let a = field.at(z);
    let hess = hessian(u, z, h);
    a.a11 * hess.a11 + 2.0 * a.a12 * hess.a12 + a.a22 * hess.a22
}

/// L applied to both components of a map; |L[w]| is the Euclidean modulus
/// of the resulting vector.
pub fn apply_l_map(w: &MappingSample, field: &CoefficientField, z: Complex64, h: f64) -> Complex64 {
    if let Some(lw) = w.native_lw(z) {
        return lw;
    }
    let a = field.at(z);
    let hu = hessian(|p| w.eval(p).re, z, h);
    let hv = hessian(|p| w.eval(p).im, z, h);
    Complex64::new(
        a.a11 * hu.a11 + 2.0 * a.a12 * hu.a12 + a.a22 * hu.a22,
        a.a11 * hv.a11 + 2.0 * a.a12 * hv.a12 + a.a22 * hv.a22,
    )
}

/// Checks B |grad w|^2 + Gamma - |L[w]| >= -tol(h) pointwise; the
/// tolerance model is c_tol * h^2 with the step used at each point.
pub fn growth_audit(
    w: &MappingSample,
    field: &CoefficientField,
    params: &GrowthParams,
    samples: &[Complex64],
    c_tol: f64,
) -> VerificationReport {
    let mut slacks = Vec::with_capacity(samples.len());
    let mut tol: f64 = 0.0;
    for &z in samples {
        let h = w.hessian_step(z);
        tol = tol.max(c_tol * h * h);
        let lw = apply_l_map(w, field, z, h);
        let (grad_norm, _) = mat_norms(&w.grad_at(z));
        slacks.push((z, params.b * grad_norm * grad_norm + params.gamma - lw.norm()));
    }
    VerificationReport::from_slacks("growth: |L[w]| <= B|grad w|^2 + Gamma", slacks, tol)
}

/// The linear change of coordinates that turns L at a base point into the
/// Laplacian.
#[derive(Debug, Clone)]
pub struct TransformRecord {
    pub t: Mat2<f64>,
    pub base: Complex64,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl TransformRecord {
    pub fn base_image(&self) -> Complex64 {
        let (x, y) = self.t.apply(self.base.re, self.base.im);
        Complex64::new(x, y)
    }
}

/// T = diag(lambda1^{-1/2}, lambda2^{-1/2}) * R with R from the symmetric
/// eigendecomposition of A(z_p), so that T A(z_p) T^t = I.
pub fn diagonalizing_transform(field: &CoefficientField, z_p: Complex64) -> TransformRecord {
    let a = field.at(z_p);
    let (l1, l2, r) = sym_eigen(&a);
    let t = Mat2::diag(1.0 / l1.sqrt(), 1.0 / l2.sqrt()).mul(&r);
    TransformRecord {
        t,
        base: z_p,
        lambda1: l1,
        lambda2: l2,
    }
}

/// Worst quotient |B(zeta) - I| / |zeta - zeta_p| of the transformed field
/// over zeta samples, against the bound Lambda^{3/2} LipL.
pub fn transformed_field_lipschitz(
    field: &CoefficientField,
    record: &TransformRecord,
    samples: &[Complex64],
) -> (bool, f64) {
    let t_inv = record.t.inverse();
    let zeta_p = record.base_image();
    let mut worst: f64 = 0.0;
    for &zeta in samples {
        let d = (zeta - zeta_p).norm();
        if d < 1e-12 {
            continue;
        }
        let (x, y) = t_inv.apply(zeta.re, zeta.im);
        let a = field.at(Complex64::new(x, y));
        let b = record.t.mul(&a).mul(&record.t.transpose());
        let (n, _) = mat_norms(&b.sub(&Mat2::identity()));
        worst = worst.max(n / d);
    }
    let bound = field.lambda.powf(1.5) * field.lip;
    // The absolute term absorbs roundoff in |B - I| at samples close to
    // the base point.
    (worst <= bound * (1.0 + 1e-9) + 1e-12, worst)
}
