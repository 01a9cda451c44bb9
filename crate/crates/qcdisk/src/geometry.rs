//! Planar matrix norms, symmetric 2x2 eigendecomposition and Wirtinger
//! calculus. Everything here is a pure function on value data.

use num_complex::Complex;
use num_traits::{Float, FromPrimitive};

/// A real 2x2 matrix. Used for coefficient matrices, map gradients and
/// coordinate transforms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2<T> {
    pub a11: T,
    pub a12: T,
    pub a21: T,
    pub a22: T,
}

impl<T: Float + FromPrimitive> Mat2<T> {
    pub fn new(a11: T, a12: T, a21: T, a22: T) -> Self {
        Mat2 { a11, a12, a21, a22 }
    }

    pub fn identity() -> Self {
        Mat2::new(T::one(), T::zero(), T::zero(), T::one())
    }

    pub fn diag(d1: T, d2: T) -> Self {
        Mat2::new(d1, T::zero(), T::zero(), d2)
    }

    pub fn symmetric(a11: T, a12: T, a22: T) -> Self {
        Mat2::new(a11, a12, a12, a22)
    }

    pub fn is_symmetric(&self) -> bool {
        self.a12 == self.a21
    }

    pub fn transpose(&self) -> Self {
        Mat2::new(self.a11, self.a21, self.a12, self.a22)
    }

    pub fn mul(&self, other: &Self) -> Self {
        Mat2::new(
            self.a11 * other.a11 + self.a12 * other.a21,
            self.a11 * other.a12 + self.a12 * other.a22,
            self.a21 * other.a11 + self.a22 * other.a21,
            self.a21 * other.a12 + self.a22 * other.a22,
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        Mat2::new(
            self.a11 - other.a11,
            self.a12 - other.a12,
            self.a21 - other.a21,
            self.a22 - other.a22,
        )
    }

    pub fn scale(&self, s: T) -> Self {
        Mat2::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }

    pub fn apply(&self, x: T, y: T) -> (T, T) {
        (self.a11 * x + self.a12 * y, self.a21 * x + self.a22 * y)
    }

    pub fn det(&self) -> T {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn inverse(&self) -> Self {
        let d = self.det();
        Mat2::new(self.a22 / d, -self.a12 / d, -self.a21 / d, self.a11 / d)
    }

    pub fn max_abs(&self) -> T {
        self.a11
            .abs()
            .max(self.a12.abs())
            .max(self.a21.abs())
            .max(self.a22.abs())
    }
}

/// Operator norm |A| = max |Az| and minimal stretch l(A) = min |Az| over
/// unit vectors z, via the closed-form singular values of a 2x2 matrix.
///
/// For the gradient matrix of a planar map these equal |dw|+|dzbar w| and
/// ||dw|-|dzbar w|| respectively.
pub fn mat_norms<T: Float + FromPrimitive>(a: &Mat2<T>) -> (T, T) {
    let half = T::from_f64(0.5).unwrap();
    let e = (a.a11 + a.a22) * half;
    let f = (a.a11 - a.a22) * half;
    let g = (a.a21 + a.a12) * half;
    let h = (a.a21 - a.a12) * half;
    let q = (e * e + h * h).sqrt();
    let r = (f * f + g * g).sqrt();
    (q + r, (q - r).abs())
}

/// Eigendecomposition of a symmetric 2x2 matrix.
///
/// Returns `(lambda1, lambda2, r)` with `lambda1 >= lambda2` and a rotation
/// `r` whose rows are the corresponding eigenvectors, so that
/// `r^t * diag(lambda1, lambda2) * r` reconstructs the input. For repeated
/// eigenvalues (relative gap below 1e-12) the rotation is the identity.
pub fn sym_eigen<T: Float + FromPrimitive>(a: &Mat2<T>) -> (T, T, Mat2<T>) {
    debug_assert!(a.is_symmetric());
    let half = T::from_f64(0.5).unwrap();
    let mean = (a.a11 + a.a22) * half;
    let diff = (a.a11 - a.a22) * half;
    let disc = (diff * diff + a.a12 * a.a12).sqrt();
    let l1 = mean + disc;
    let l2 = mean - disc;

    let tie = T::from_f64(1e-12).unwrap() * (l1.abs() + l2.abs() + T::one());
    if (l1 - l2).abs() < tie {
        return (l1, l2, Mat2::identity());
    }

    // Eigenvector for l1: pick the better-conditioned column of A - l2*I.
    let (mut c, mut s) = if (a.a11 - l2).abs() >= (a.a22 - l2).abs() {
        (a.a11 - l2, a.a12)
    } else {
        (a.a12, a.a22 - l2)
    };
    let n = (c * c + s * s).sqrt();
    c = c / n;
    s = s / n;
    // Rows of the rotation are the eigenvectors; det = +1.
    (l1, l2, Mat2::new(c, s, -s, c))
}

/// The complex derivatives (dw, dzbar w) of a planar map at a point.
#[derive(Debug, Clone, Copy)]
pub struct WirtingerPair {
    pub dz: Complex<f64>,
    pub dzbar: Complex<f64>,
}

impl WirtingerPair {
    pub fn new(dz: Complex<f64>, dzbar: Complex<f64>) -> Self {
        WirtingerPair { dz, dzbar }
    }

    /// |grad w| = |dw| + |dzbar w|.
    pub fn norm(&self) -> f64 {
        self.dz.norm() + self.dzbar.norm()
    }

    /// l(grad w) = ||dw| - |dzbar w||.
    pub fn min_stretch(&self) -> f64 {
        (self.dz.norm() - self.dzbar.norm()).abs()
    }

    /// The gradient matrix (u_x u_y; v_x v_y) reconstructed from the pair.
    pub fn grad_matrix(&self) -> Mat2<f64> {
        let wx = self.dz + self.dzbar;
        let wy = (self.dz - self.dzbar) * Complex::new(0.0, 1.0);
        Mat2::new(wx.re, wy.re, wx.im, wy.im)
    }
}

/// Default finite-difference step: 1e-4 times the distance to the domain
/// boundary, clamped to [1e-7, 1e-3].
pub fn default_step(dist_to_boundary: f64) -> f64 {
    (1e-4 * dist_to_boundary).clamp(1e-7, 1e-3)
}

/// Central finite-difference Wirtinger derivatives of a complex-valued map.
pub fn wirtinger<F>(f: F, z: Complex<f64>, h: f64) -> WirtingerPair
where
    F: Fn(Complex<f64>) -> Complex<f64>,
{
    let ex = Complex::new(h, 0.0);
    let ey = Complex::new(0.0, h);
    let wx = (f(z + ex) - f(z - ex)) / (2.0 * h);
    let wy = (f(z + ey) - f(z - ey)) / (2.0 * h);
    let i = Complex::new(0.0, 1.0);
    WirtingerPair::new((wx - i * wy) * 0.5, (wx + i * wy) * 0.5)
}

/// Gradient matrix (u_x u_y; v_x v_y) of a complex-valued map by central
/// differences.
pub fn grad_matrix<F>(f: F, z: Complex<f64>, h: f64) -> Mat2<f64>
where
    F: Fn(Complex<f64>) -> Complex<f64>,
{
    let ex = Complex::new(h, 0.0);
    let ey = Complex::new(0.0, h);
    let wx = (f(z + ex) - f(z - ex)) / (2.0 * h);
    let wy = (f(z + ey) - f(z - ey)) / (2.0 * h);
    Mat2::new(wx.re, wy.re, wx.im, wy.im)
}

/// Gradient of a scalar field as the complex number g_x + i g_y.
pub fn scalar_gradient<F>(f: F, z: Complex<f64>, h: f64) -> Complex<f64>
where
    F: Fn(Complex<f64>) -> f64,
{
    let ex = Complex::new(h, 0.0);
    let ey = Complex::new(0.0, h);
    Complex::new(
        (f(z + ex) - f(z - ex)) / (2.0 * h),
        (f(z + ey) - f(z - ey)) / (2.0 * h),
    )
}

/// Finite-difference Hessian of a scalar field: 9-point stencil with the
/// cross derivative taken from the four diagonal points.
pub fn hessian<F>(f: F, z: Complex<f64>, h: f64) -> Mat2<f64>
where
    F: Fn(Complex<f64>) -> f64,
{
    let ex = Complex::new(h, 0.0);
    let ey = Complex::new(0.0, h);
    let c = f(z);
    let d11 = (f(z + ex) - 2.0 * c + f(z - ex)) / (h * h);
    let d22 = (f(z + ey) - 2.0 * c + f(z - ey)) / (h * h);
    let d12 = (f(z + ex + ey) - f(z + ex - ey) - f(z - ex + ey) + f(z - ex - ey)) / (4.0 * h * h);
    Mat2::symmetric(d11, d12, d22)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    #[test]
    fn mat_norms_identity() {
        let (n, l) = mat_norms(&Mat2::<f64>::identity());
        assert_abs_diff_eq!(n, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(l, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn mat_norms_diagonal() {
        let (n, l) = mat_norms(&Mat2::diag(2.0, 0.5));
        assert_abs_diff_eq!(n, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(l, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn mat_norms_of_gradient_match_wirtinger() {
        // w(z) = z + 0.5 zbar: dw = 1, dzbar w = 0.5.
        let pair = WirtingerPair::new(Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0));
        let (n, l) = mat_norms(&pair.grad_matrix());
        assert_abs_diff_eq!(n, 1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(l, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn wirtinger_conformal_and_anticonformal() {
        let p = wirtinger(|z| z, Complex64::new(0.3, 0.2), 1e-5);
        assert_abs_diff_eq!(p.dz.re, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(p.dz.im, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(p.dzbar.norm(), 0.0, epsilon = 1e-9);

        let p = wirtinger(|z| z.conj(), Complex64::new(0.3, 0.2), 1e-5);
        assert_abs_diff_eq!(p.dz.norm(), 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(p.dzbar.re, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn wirtinger_radial_stretch() {
        // w(z) = z|z|: at z = 0.5 hand differentiation gives dw = 0.75,
        // dzbar w = 0.25.
        let p = wirtinger(|z| z * z.norm(), Complex64::new(0.5, 0.0), 1e-4);
        assert_abs_diff_eq!(p.dz.re, 0.75, epsilon = 1e-7);
        assert_abs_diff_eq!(p.dzbar.re, 0.25, epsilon = 1e-7);
    }

    #[test]
    fn sym_eigen_identity_and_diag() {
        let (l1, l2, r) = sym_eigen(&Mat2::<f64>::identity());
        assert_eq!((l1, l2), (1.0, 1.0));
        assert_eq!(r, Mat2::identity());

        let (l1, l2, r) = sym_eigen(&Mat2::diag(4.0, 1.0));
        assert_abs_diff_eq!(l1, 4.0, epsilon = 1e-14);
        assert_abs_diff_eq!(l2, 1.0, epsilon = 1e-14);
        assert_eq!(r, Mat2::identity());
    }

    #[test]
    fn sym_eigen_quarter_turn() {
        // [[2,1],[1,2]]: characteristic polynomial x^2 - 4x + 3, roots 3, 1.
        let a = Mat2::symmetric(2.0, 1.0, 2.0);
        let (l1, l2, r) = sym_eigen(&a);
        assert_abs_diff_eq!(l1, 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(l2, 1.0, epsilon = 1e-14);
        let q = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(r.a11.abs(), q, epsilon = 1e-14);
        assert_abs_diff_eq!(r.a12.abs(), q, epsilon = 1e-14);
        // Reconstruction.
        let d = Mat2::diag(l1, l2);
        let back = r.transpose().mul(&d).mul(&r);
        assert!(back.sub(&a).max_abs() < 1e-12);
    }

    #[test]
    fn wirtinger_reconstructs_partials() {
        let f = |z: Complex64| z * z + 0.3 * z.conj();
        let z = Complex64::new(0.2, -0.1);
        let h = 1e-5;
        let p = wirtinger(f, z, h);
        let g = grad_matrix(f, z, h);
        let m = p.grad_matrix();
        assert!(g.sub(&m).max_abs() < 1e-9);
    }
}
