//! Poisson kernel, harmonic extension by circle quadrature, and the Green
//! function gradient bounds for a translated and scaled disk.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{self, mat_norms};

/// A disk {zeta : |zeta - center| <= radius}. The normalizing map
/// phi(zeta) = (zeta - center) / radius carries it onto the unit disk.
#[derive(Debug, Clone, Copy)]
pub struct DiskSpec {
    pub center: Complex64,
    pub radius: f64,
}

impl DiskSpec {
    pub fn unit() -> Self {
        DiskSpec {
            center: Complex64::new(0.0, 0.0),
            radius: 1.0,
        }
    }

    pub fn new(center: Complex64, radius: f64) -> Self {
        assert!(radius > 0.0, "disk radius must be positive");
        DiskSpec { center, radius }
    }

    pub fn to_unit(&self, zeta: Complex64) -> Complex64 {
        (zeta - self.center) / self.radius
    }

    pub fn point_at(&self, theta: f64) -> Complex64 {
        self.center + self.radius * Complex64::new(theta.cos(), theta.sin())
    }
}

/// Uniformly spaced samples of a function on a circle, at angles
/// theta_j = 2 pi j / n.
#[derive(Debug, Clone)]
pub struct BoundaryTrace {
    pub disk: DiskSpec,
    samples: Vec<Complex64>,
}

impl BoundaryTrace {
    pub fn new(disk: DiskSpec, samples: Vec<Complex64>) -> Self {
        assert!(samples.len() >= 16 && samples.len() % 2 == 0);
        assert!(samples.iter().all(|v| v.re.is_finite() && v.im.is_finite()));
        BoundaryTrace { disk, samples }
    }

    pub fn from_fn<F>(disk: DiskSpec, n: usize, f: F) -> Self
    where
        F: Fn(f64) -> Complex64,
    {
        let samples = (0..n)
            .map(|j| f(2.0 * std::f64::consts::PI * j as f64 / n as f64))
            .collect();
        BoundaryTrace::new(disk, samples)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// Mean of the samples (trapezoid rule for the probability measure on
    /// a uniform periodic partition).
    pub fn mean(&self) -> Complex64 {
        self.samples.iter().sum::<Complex64>() / self.samples.len() as f64
    }
}

/// Poisson kernel of the unit disk, P(z, eta) = (1 - |z|^2) / |z - eta|^2,
/// normalized so that its integral against the probability measure on the
/// circle is 1.
pub fn poisson_kernel(z: Complex64, eta: Complex64) -> Result<f64> {
    if z.norm() >= 1.0 {
        return Err(Error::ZOutsideDisk(z));
    }
    if (eta.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::EtaOffCircle(eta));
    }
    Ok((1.0 - z.norm_sqr()) / (z - eta).norm_sqr())
}

/// Poisson integral of a boundary trace evaluated at an interior point of
/// the trace's disk, by the composite trapezoid rule on the uniform circle
/// partition. Reliable for |z - center| <= 0.99 * radius.
pub fn harmonic_extension(trace: &BoundaryTrace, z: Complex64) -> Result<Complex64> {
    let zeta = trace.disk.to_unit(z);
    if zeta.norm() > 0.99 {
        return Err(Error::ZTooCloseToCircle(z));
    }
    let n = trace.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, v) in trace.samples().iter().enumerate() {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
        let eta = Complex64::new(theta.cos(), theta.sin());
        acc += ((1.0 - zeta.norm_sqr()) / (zeta - eta).norm_sqr()) * v;
    }
    Ok(acc / n as f64)
}

/// Gradient data of the Green function of a disk.
///
/// `grad` is the zeta-gradient as the complex number G_x + i G_y; the two
/// mixed fields are its Wirtinger derivatives in omega, already transported
/// through the normalizing map.
#[derive(Debug, Clone, Copy)]
pub struct GreenGradient {
    pub grad: Complex64,
    pub mixed_dw: Complex64,
    pub mixed_dwbar: Complex64,
}

impl GreenGradient {
    /// The two coordinate partials d/d omega_1 and d/d omega_2 of the
    /// zeta-gradient field.
    pub fn omega_partials(&self) -> (Complex64, Complex64) {
        let i = Complex64::new(0.0, 1.0);
        (
            self.mixed_dw + self.mixed_dwbar,
            i * (self.mixed_dw - self.mixed_dwbar),
        )
    }
}

/// Gradient of the Green function of `disk` with respect to the first
/// argument, together with its omega-derivatives.
///
/// Satisfies |grad| <= 2 / |zeta - omega| and each coordinate partial in
/// omega is bounded by 2 / |zeta - omega|^2.
pub fn green_gradient(disk: &DiskSpec, zeta: Complex64, omega: Complex64) -> Result<GreenGradient> {
    let z = disk.to_unit(zeta);
    let w = disk.to_unit(omega);
    if (z - w).norm() < 1e-14 {
        return Err(Error::CoincidentPoints(zeta));
    }
    if z.norm() >= 1.0 {
        return Err(Error::ZOutsideDisk(zeta));
    }
    if w.norm() >= 1.0 {
        return Err(Error::ZOutsideDisk(omega));
    }
    let r = disk.radius;
    // grad_z h(z,w) = (1 - |w|^2) / ((zbar - wbar)(w zbar - 1)); the disk
    // version picks up one factor 1/R, the omega-derivatives a second.
    let grad = (1.0 - w.norm_sqr()) / ((z.conj() - w.conj()) * (w * z.conj() - 1.0)) / r;
    let one = Complex64::new(1.0, 0.0);
    let mixed_dw = -(one / (one - w * z.conj()).powi(2)) / (r * r);
    let mixed_dwbar = -(one / (w.conj() - z.conj()).powi(2)) / (r * r);
    Ok(GreenGradient {
        grad,
        mixed_dw,
        mixed_dwbar,
    })
}

/// Both sides of the Poisson-integral gradient estimate: the gradient of
/// the harmonic extension at the disk center against (2 / rho) times the
/// mean boundary deviation from `z_ref`.
///
/// Contract: lhs <= rhs + 1e-6 for any trace and any reference value.
pub fn poisson_gradient_bound(trace: &BoundaryTrace, z_ref: Complex64) -> (f64, f64) {
    let rho = trace.disk.radius;
    let center = trace.disk.center;
    let h = 1e-6 * rho;
    let ext = |z: Complex64| harmonic_extension(trace, z).expect("center stencil is interior");
    let grad = geometry::grad_matrix(ext, center, h);
    let (lhs, _) = mat_norms(&grad);
    // (2/rho^2) * integral over the circle of |Y - Z| with normalized arc
    // length collapses to (2/rho) * mean over the uniform partition.
    let mean: f64 = trace
        .samples()
        .iter()
        .map(|v| (v - z_ref).norm())
        .sum::<f64>()
        / trace.len() as f64;
    (lhs, 2.0 / rho * mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn poisson_kernel_values() {
        let eta = Complex64::new(1.0, 0.0);
        assert_abs_diff_eq!(
            poisson_kernel(Complex64::new(0.0, 0.0), eta).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            poisson_kernel(Complex64::new(0.5, 0.0), eta).unwrap(),
            3.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            poisson_kernel(Complex64::new(0.5, 0.0), -eta).unwrap(),
            1.0 / 3.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn poisson_kernel_rejects_bad_points() {
        let eta = Complex64::new(1.0, 0.0);
        assert!(poisson_kernel(Complex64::new(1.1, 0.0), eta).is_err());
        assert!(poisson_kernel(Complex64::new(0.0, 0.0), Complex64::new(0.9, 0.0)).is_err());
    }

    #[test]
    fn harmonic_extension_constant_and_mean_value() {
        let c = Complex64::new(0.7, -0.2);
        let trace = BoundaryTrace::from_fn(DiskSpec::unit(), 128, |_| c);
        for z in [Complex64::new(0.0, 0.0), Complex64::new(0.4, 0.3)] {
            let v = harmonic_extension(&trace, z).unwrap();
            assert_abs_diff_eq!((v - c).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn harmonic_extension_of_re_is_re() {
        // Dense-quadrature oracle: the harmonic extension of Re(eta) is Re(z).
        let trace =
            BoundaryTrace::from_fn(DiskSpec::unit(), 4096, |t| Complex64::new(t.cos(), 0.0));
        let v0 = harmonic_extension(&trace, Complex64::new(0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(v0.norm(), 0.0, epsilon = 1e-12);
        let v = harmonic_extension(&trace, Complex64::new(0.3, 0.0)).unwrap();
        assert_abs_diff_eq!(v.re, 0.3, epsilon = 1e-10);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn green_gradient_unit_disk_origin() {
        let g = green_gradient(
            &DiskSpec::unit(),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.5, 0.0),
        )
        .unwrap();
        // (1 - 0.25) / ((-0.5)(-1)) = 1.5, and the bound 2/0.5 = 4 holds.
        assert_abs_diff_eq!(g.grad.norm(), 1.5, epsilon = 1e-14);
        assert!(g.grad.norm() <= 4.0);
    }

    #[test]
    fn green_gradient_at_origin_closed_form() {
        // At z = 0 the gradient magnitude is (1 - |w|^2)/|w|.
        for &(re, im) in &[(0.3, 0.1), (-0.2, 0.6), (0.0, 0.45)] {
            let w = Complex64::new(re, im);
            let g = green_gradient(&DiskSpec::unit(), Complex64::new(0.0, 0.0), w).unwrap();
            assert_abs_diff_eq!(
                g.grad.norm(),
                (1.0 - w.norm_sqr()) / w.norm(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn green_gradient_scaling() {
        // Scaled disk center 1, radius 2: gradient at (1, 2) is half the
        // unit-disk gradient at (0, 0.5).
        let disk = DiskSpec::new(Complex64::new(1.0, 0.0), 2.0);
        let g = green_gradient(&disk, Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)).unwrap();
        let g0 = green_gradient(
            &DiskSpec::unit(),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.5, 0.0),
        )
        .unwrap();
        assert_abs_diff_eq!((g.grad - 0.5 * g0.grad).norm(), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn green_gradient_rejects_coincident() {
        let z = Complex64::new(0.2, 0.2);
        assert!(green_gradient(&DiskSpec::unit(), z, z).is_err());
    }

    #[test]
    fn poisson_gradient_bound_constant_trace() {
        let c = Complex64::new(0.4, 0.0);
        let trace = BoundaryTrace::from_fn(DiskSpec::unit(), 256, |_| c);
        let (lhs, rhs) = poisson_gradient_bound(&trace, c);
        assert_abs_diff_eq!(lhs, 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(rhs, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn poisson_gradient_bound_cosine_trace() {
        // Trace Re(eta): lhs = |grad Re(z)| = 1, rhs = 2 * mean |cos| = 4/pi.
        let trace =
            BoundaryTrace::from_fn(DiskSpec::unit(), 4096, |t| Complex64::new(t.cos(), 0.0));
        let (lhs, rhs) = poisson_gradient_bound(&trace, Complex64::new(0.0, 0.0));
        assert_abs_diff_eq!(lhs, 1.0, epsilon = 1e-4);
        assert_abs_diff_eq!(rhs, 4.0 / std::f64::consts::PI, epsilon = 1e-6);
        assert!(lhs <= rhs + 1e-6);

        // Same by symmetry for Im(eta).
        let trace =
            BoundaryTrace::from_fn(DiskSpec::unit(), 4096, |t| Complex64::new(t.sin(), 0.0));
        let (lhs, rhs) = poisson_gradient_bound(&trace, Complex64::new(0.0, 0.0));
        assert_abs_diff_eq!(lhs, 1.0, epsilon = 1e-4);
        assert_abs_diff_eq!(rhs, 4.0 / std::f64::consts::PI, epsilon = 1e-6);
    }

    #[test]
    fn mean_value_on_concentric_circles() {
        // Discrete mean-value property to quadrature tolerance 10*(2pi/n)^2.
        let trace = BoundaryTrace::from_fn(DiskSpec::unit(), 512, |t| {
            Complex64::new((2.0 * t).cos() + 0.3 * t.sin(), (3.0 * t).sin())
        });
        let n_inner = 512;
        let tol = 10.0 * (2.0 * std::f64::consts::PI / 512.0).powi(2);
        let center_val = harmonic_extension(&trace, Complex64::new(0.0, 0.0)).unwrap();
        for &r in &[0.2, 0.5, 0.8] {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..n_inner {
                let t = 2.0 * std::f64::consts::PI * j as f64 / n_inner as f64;
                acc += harmonic_extension(&trace, r * Complex64::new(t.cos(), t.sin())).unwrap();
            }
            acc /= n_inner as f64;
            assert!((acc - center_val).norm() < tol);
        }
    }
}
