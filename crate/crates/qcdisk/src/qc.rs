//! Quasiconformality measurement, polar-factorization inequalities, the
//! operator identity for rho = |w|, and two-sided distortion bounds for
//! quasiconformal self-maps of the disk.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{apply_l, apply_l_map, CoefficientField};
use crate::geometry::{mat_norms, WirtingerPair};
use crate::map::MappingSample;
use crate::report::VerificationReport;

/// Dilatation data of a sense-preserving nondegenerate differential:
/// k = |dzbar w| / |dw| and K = (1 + k) / (1 - k).
pub fn dilatation(pair: &WirtingerPair) -> Result<(f64, f64)> {
    let dz = pair.dz.norm();
    let dzbar = pair.dzbar.norm();
    if dz <= dzbar {
        return Err(Error::DegenerateJacobian {
            dz_norm: dz,
            dzbar_norm: dzbar,
        });
    }
    let k = dzbar / dz;
    Ok((k, (1.0 + k) / (1.0 - k)))
}

/// Checks the three polar-factorization inequalities of a K-q.c. map
///   rho |grad S| <= K |grad rho|,
///   |grad rho| <= K rho |grad S|,
///   K^{-1} |grad w| <= |grad rho| <= |grad w|
/// over a sample set. Points within the zero-locus exclusion radius are
/// skipped.
pub fn polar_audit(
    sample: &MappingSample,
    k: f64,
    points: &[Complex64],
    tol: f64,
) -> Result<VerificationReport> {
    let mut slacks = Vec::new();
    for &z in points {
        let d = match sample.polar_data(z) {
            Ok(d) => d,
            Err(Error::NearZeroLocus { .. }) => continue,
            Err(e) => return Err(e),
        };
        let grad_rho = d.grad_rho_norm();
        let rho_grad_s = d.rho * d.grad_s_norm();
        let (grad_w, _) = mat_norms(&d.grad_w);
        let s = (k * grad_rho - rho_grad_s)
            .min(k * rho_grad_s - grad_rho)
            .min(grad_rho - grad_w / k)
            .min(grad_w - grad_rho);
        slacks.push((z, s));
    }
    if slacks.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    Ok(VerificationReport::from_slacks(
        "polar factorization: rho|grad S| vs K|grad rho| vs |grad w|",
        slacks,
        tol,
    ))
}

/// Both sides of the identity
///   L[rho] = rho (a11 |p|^2 + 2 a12 <p,q> + a22 |q|^2) + <L[w], S>
/// with p = D_1 S, q = D_2 S, evaluated by finite differences with step h.
pub fn radial_operator_identity(
    sample: &MappingSample,
    field: &CoefficientField,
    z: Complex64,
    h: f64,
) -> Result<(f64, f64)> {
    let d = sample.polar_data(z)?;
    let lhs = apply_l(|p| sample.eval(p).norm(), field, z, h);
    let a = field.at(z);
    let pq = d.p.re * d.q.re + d.p.im * d.q.im;
    let quad = a.a11 * d.p.norm_sqr() + 2.0 * a.a12 * pq + a.a22 * d.q.norm_sqr();
    let lw = apply_l_map(sample, field, z, h);
    let rhs = d.rho * quad + (lw.re * d.s.re + lw.im * d.s.im);
    Ok((lhs, rhs))
}

/// Theta = 2 K Lambda + B K, the constant with which |L[rho]| is bounded
/// by (Theta / rho) |grad rho|^2 + Gamma.
pub fn theta_constant(k: f64, lambda: f64, b: f64) -> f64 {
    assert!(k >= 1.0 && lambda >= 1.0 && b >= 0.0);
    2.0 * k * lambda + b * k
}

/// B (1 + (1+k)^2 / (1-k)^2): the coefficient bounding |L[u]| and |L[v]|
/// for the components of a map with dilatation ratio k against their own
/// gradients.
pub fn component_growth_constant(k: f64, b: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::KOutOfRange(k));
    }
    let t = (1.0 + k) / (1.0 - k);
    Ok(b * (1.0 + t * t))
}

/// The explicit distortion modulus for K-q.c. self-maps of the disk.
pub fn qc_modulus(t: f64, k: f64) -> f64 {
    assert!(t > 0.0 && t <= 2.0 && k >= 1.0);
    (16.0 * t.powf(1.0 / k)).min(2.0)
}

/// Empirical modulus of continuity: nondecreasing envelope of max
/// |w(z1) - w(z2)| over pairs binned by |z1 - z2|.
pub fn empirical_modulus(
    sample: &MappingSample,
    pairs: &[(Complex64, Complex64)],
    n_bins: usize,
) -> Vec<(f64, f64)> {
    let mut bins = vec![0.0f64; n_bins];
    for &(z1, z2) in pairs {
        let t = (z1 - z2).norm();
        let i = ((t / 2.0 * n_bins as f64) as usize).min(n_bins - 1);
        let d = (sample.eval(z1) - sample.eval(z2)).norm();
        bins[i] = bins[i].max(d);
    }
    let mut out = Vec::with_capacity(n_bins);
    let mut running: f64 = 0.0;
    for (i, b) in bins.iter().enumerate() {
        running = running.max(*b);
        out.push((2.0 * (i + 1) as f64 / n_bins as f64, running));
    }
    out
}

#[derive(Debug, Clone)]
pub struct MoriAudit {
    pub upper: VerificationReport,
    pub lower: Option<VerificationReport>,
    pub pass: bool,
}

/// Distortion audit: |w(z1) - w(z2)| <= 16 |z1 - z2|^{1/K} over pairs, and
/// when the zero a of w is known, 4^{1-K} |(a-z)/(1 - conj(a) z)|^K <= |w(z)|
/// over points.
pub fn mori_audit(
    sample: &MappingSample,
    k: f64,
    pairs: &[(Complex64, Complex64)],
    points: &[Complex64],
    tol: f64,
) -> Result<MoriAudit> {
    if pairs.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    let upper_slacks = pairs.iter().map(|&(z1, z2)| {
        let s = 16.0 * (z1 - z2).norm().powf(1.0 / k) - (sample.eval(z1) - sample.eval(z2)).norm();
        (z1, s)
    });
    let upper = VerificationReport::from_slacks(
        "distortion upper: |w(z1)-w(z2)| <= 16|z1-z2|^(1/K)",
        upper_slacks,
        tol,
    );

    let lower = match sample.zero {
        None => None,
        Some(a) => {
            let c = 4.0f64.powf(1.0 - k);
            let slacks = points.iter().map(|&z| {
                let pseudo = ((a - z) / (1.0 - a.conj() * z)).norm();
                (z, sample.eval(z).norm() - c * pseudo.powf(k))
            });
            Some(VerificationReport::from_slacks(
                "distortion lower: 4^(1-K) d(a,z)^K <= |w(z)|",
                slacks,
                tol,
            ))
        }
    };
    let pass = upper.pass && lower.as_ref().map_or(true, |r| r.pass);
    Ok(MoriAudit { upper, lower, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::wirtinger;
    use approx::assert_abs_diff_eq;

    fn ring_points(n: usize, radii: &[f64]) -> Vec<Complex64> {
        let mut pts = Vec::new();
        for &r in radii {
            for j in 0..n {
                let t = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
                pts.push(Complex64::from_polar(r, t));
            }
        }
        pts
    }

    #[test]
    fn dilatation_examples() {
        let (k, big_k) = dilatation(&WirtingerPair::new(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ))
        .unwrap();
        assert_eq!((k, big_k), (0.0, 1.0));

        let (k, big_k) = dilatation(&WirtingerPair::new(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.5, 0.0),
        ))
        .unwrap();
        assert_abs_diff_eq!(k, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(big_k, 3.0, epsilon = 1e-15);

        // Radial stretch with K = 2: measured K matches to 1e-6.
        let m = MappingSample::radial_stretch(2.0);
        let pair = wirtinger(|z| m.eval(z), Complex64::new(0.5, 0.0), 1e-5);
        let (_, big_k) = dilatation(&pair).unwrap();
        assert_abs_diff_eq!(big_k, 2.0, epsilon = 1e-6);

        assert!(dilatation(&WirtingerPair::new(
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0)
        ))
        .is_err());
    }

    #[test]
    fn polar_audit_identity_and_stretch() {
        let pts = ring_points(48, &[0.2, 0.45, 0.7, 0.9]);
        let m = MappingSample::mobius(Complex64::new(0.0, 0.0));
        let rep = polar_audit(&m, 1.0, &pts, 1e-6).unwrap();
        assert!(rep.pass, "min slack {}", rep.min_slack);
        // 1-q.c. case: rho |grad S| = |grad rho| up to FD error.
        assert!(rep.min_slack.abs() < 1e-5);

        let m = MappingSample::radial_stretch(2.0);
        let rep = polar_audit(&m, 2.0, &pts, 1e-6).unwrap();
        assert!(rep.pass, "min slack {}", rep.min_slack);
    }

    #[test]
    fn radial_identity_against_polar_laplacian() {
        // w = z, A = I: L[rho] = 1/|z| and the assembled right side agrees.
        let m = MappingSample::mobius(Complex64::new(0.0, 0.0));
        let field = CoefficientField::identity();
        let z = Complex64::new(0.4, 0.3);
        let (lhs, rhs) = radial_operator_identity(&m, &field, z, 1e-3).unwrap();
        let exact = 1.0 / z.norm();
        assert_abs_diff_eq!(lhs, exact, epsilon = 1e-5);
        assert_abs_diff_eq!(rhs, exact, epsilon = 1e-5);
    }

    #[test]
    fn radial_identity_on_conformal_square() {
        let m = MappingSample::analytic(|z| 0.5 * z * z, "half_square");
        let field = CoefficientField::identity();
        let z = Complex64::new(0.5, -0.35);
        let (lhs, rhs) = radial_operator_identity(&m, &field, z, 1e-3).unwrap();
        assert!((lhs - rhs).abs() < 1e-4, "lhs {lhs} rhs {rhs}");
    }

    #[test]
    fn constants() {
        assert_eq!(theta_constant(1.0, 1.0, 0.0), 2.0);
        assert_eq!(theta_constant(2.0, 1.0, 0.0), 4.0);
        assert_abs_diff_eq!(theta_constant(3.0, 2.0, 0.5), 13.5, epsilon = 1e-15);

        assert_abs_diff_eq!(component_growth_constant(0.0, 1.5).unwrap(), 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            component_growth_constant(1.0 / 3.0, 1.0).unwrap(),
            5.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(component_growth_constant(0.5, 1.0).unwrap(), 10.0, epsilon = 1e-12);
        assert!(component_growth_constant(1.0, 1.0).is_err());
    }

    #[test]
    fn modulus_shapes() {
        assert_abs_diff_eq!(qc_modulus(0.01, 1.0), 0.16, epsilon = 1e-15);
        assert_abs_diff_eq!(qc_modulus(1e-6, 2.0), 0.016, epsilon = 1e-12);
        assert_eq!(qc_modulus(1.0, 4.0), 2.0);
    }

    #[test]
    fn mori_on_identity_and_stretch() {
        let pts = ring_points(32, &[0.15, 0.5, 0.85]);
        let pairs: Vec<(Complex64, Complex64)> = pts
            .iter()
            .zip(pts.iter().rev())
            .map(|(&a, &b)| (a, b))
            .collect();
        let m = MappingSample::mobius(Complex64::new(0.0, 0.0));
        let audit = mori_audit(&m, 1.0, &pairs, &pts, 1e-9).unwrap();
        assert!(audit.pass);
        // Identity at K = 1: lower bound is |z| <= |z|, slack 0 at argmin.
        assert!(audit.lower.unwrap().min_slack.abs() < 1e-12);

        let m = MappingSample::radial_stretch(2.0);
        let audit = mori_audit(&m, 2.0, &pairs, &pts, 1e-9).unwrap();
        assert!(audit.pass);
    }
}
