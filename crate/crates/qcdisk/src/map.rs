//! Sampled self-maps of the closed unit disk: closed-form generators,
//! trigonometric-series harmonic extensions of circle homeomorphisms, and
//! wrappers around finite-difference solver output.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{self, default_step, Mat2, WirtingerPair};
use crate::solver::PolarSolution;

enum Backing {
    Analytic(Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>),
    /// w(z) = sum pos[m] z^m + sum neg[m] conj(z)^(m+1); entire in (z, zbar)
    /// so derivatives of any order are exact.
    Fourier {
        pos: Vec<Complex64>,
        neg: Vec<Complex64>,
    },
    Grid(Arc<PolarSolution>),
}

/// A self-map of the closed unit disk with enough structure to evaluate
/// values, first derivatives, and (for grid-backed maps) the discrete
/// elliptic operator.
pub struct MappingSample {
    backing: Backing,
    /// Dilatation bound known by construction, if any.
    pub declared_k: Option<f64>,
    /// Point a with w(a) = 0, if known.
    pub zero: Option<Complex64>,
    pub label: String,
}

impl std::fmt::Debug for MappingSample {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MappingSample")
            .field("label", &self.label)
            .field("declared_k", &self.declared_k)
            .field("zero", &self.zero)
            .finish()
    }
}

impl MappingSample {
    pub fn analytic<F>(f: F, label: &str) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        MappingSample {
            backing: Backing::Analytic(Arc::new(f)),
            declared_k: None,
            zero: None,
            label: label.to_string(),
        }
    }

    /// The disk automorphism z -> (z - a) / (1 - conj(a) z).
    pub fn mobius(a: Complex64) -> Self {
        assert!(a.norm() < 1.0);
        let mut m = MappingSample::analytic(move |z| (z - a) / (1.0 - a.conj() * z), "mobius");
        m.declared_k = Some(1.0);
        m.zero = Some(a);
        m
    }

    /// The radial stretch z |z|^(K-1), a K-quasiconformal self-map.
    pub fn radial_stretch(k: f64) -> Self {
        assert!(k >= 1.0);
        let mut m = MappingSample::analytic(
            move |z| {
                let r = z.norm();
                if r == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    z * r.powf(k - 1.0)
                }
            },
            "radial_stretch",
        );
        m.declared_k = Some(k);
        m.zero = Some(Complex64::new(0.0, 0.0));
        m
    }

    /// Harmonic extension of the circle homeomorphism e^{i gamma(theta)},
    /// gamma(theta) = theta + sum_k c[k-1] sin(k theta). The coefficients
    /// must satisfy sum k|c_k| < 1 so that gamma is increasing.
    ///
    /// The extension is evaluated through its trigonometric series, which
    /// stays accurate up to the boundary where direct Poisson quadrature
    /// degrades.
    pub fn harmonic_extension(c: &[f64]) -> Result<Self> {
        let tilt: f64 = c.iter().enumerate().map(|(i, ck)| (i + 1) as f64 * ck.abs()).sum();
        if tilt >= 1.0 {
            return Err(Error::NonMonotoneBoundary);
        }
        let n = 1024usize;
        let gamma = |t: f64| -> f64 {
            t + c
                .iter()
                .enumerate()
                .map(|(i, ck)| ck * ((i + 1) as f64 * t).sin())
                .sum::<f64>()
        };
        let samples: Vec<Complex64> = (0..n)
            .map(|j| {
                let t = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
                Complex64::new(0.0, gamma(t)).exp()
            })
            .collect();
        // DFT: c_m = (1/n) sum_j samples[j] e^{-i m theta_j}, truncated where
        // the tail drops below 1e-14.
        let coeff = |m: i64| -> Complex64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, s) in samples.iter().enumerate() {
                let t = 2.0 * std::f64::consts::PI * j as f64 * m as f64 / n as f64;
                acc += s * Complex64::new(0.0, -t).exp();
            }
            acc / n as f64
        };
        let half = (n / 2) as i64;
        let mut pos = Vec::new();
        for m in 0..half {
            pos.push(coeff(m));
        }
        let mut neg = Vec::new();
        for m in 1..half {
            neg.push(coeff(-m));
        }
        while pos.len() > 4 && pos.last().unwrap().norm() < 1e-14 {
            pos.pop();
        }
        while neg.len() > 1 && neg.last().unwrap().norm() < 1e-14 {
            neg.pop();
        }
        Ok(MappingSample {
            backing: Backing::Fourier { pos, neg },
            declared_k: None,
            zero: None,
            label: "harmonic_extension".to_string(),
        })
    }

    pub fn from_solution(sol: Arc<PolarSolution>, label: &str) -> Self {
        MappingSample {
            backing: Backing::Grid(sol),
            declared_k: None,
            zero: None,
            label: label.to_string(),
        }
    }

    pub fn is_grid(&self) -> bool {
        matches!(self.backing, Backing::Grid(_))
    }

    pub fn solution(&self) -> Option<&PolarSolution> {
        match &self.backing {
            Backing::Grid(s) => Some(s),
            _ => None,
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match &self.backing {
            Backing::Analytic(f) => f(z),
            Backing::Fourier { pos, neg } => {
                let mut acc = Complex64::new(0.0, 0.0);
                let mut zp = Complex64::new(1.0, 0.0);
                for c in pos {
                    acc += c * zp;
                    zp *= z;
                }
                let zb = z.conj();
                let mut zbp = zb;
                for c in neg {
                    acc += c * zbp;
                    zbp *= zb;
                }
                acc
            }
            Backing::Grid(s) => s.eval(z),
        }
    }

    pub fn boundary_value(&self, theta: f64) -> Complex64 {
        self.eval(Complex64::new(theta.cos(), theta.sin()))
    }

    /// Finite-difference step adapted to the distance from z to the circle.
    pub fn fd_step(&self, z: Complex64) -> f64 {
        match &self.backing {
            // The series is entire, so the stencil may cross the circle.
            Backing::Fourier { .. } => 1e-4,
            Backing::Grid(s) => s.dr,
            Backing::Analytic(_) => default_step((1.0 - z.norm()).max(1e-3)),
        }
    }

    /// Step for second differences. Larger than `fd_step`: dividing twice by
    /// h makes rounding error grow like eps/h^2, so the step must stay well
    /// above the square root of machine precision for the h^2 truncation
    /// model to hold.
    pub fn hessian_step(&self, z: Complex64) -> f64 {
        match &self.backing {
            Backing::Fourier { .. } => 1e-4,
            Backing::Grid(s) => s.dr,
            Backing::Analytic(_) => {
                let dist = (1.0 - z.norm()).max(4e-4);
                (0.25 * dist).clamp(1e-4, 1e-3)
            }
        }
    }

    /// Gradient matrix (u_x u_y; v_x v_y). Exact for series-backed maps,
    /// central differences otherwise; grid maps use the nearest node.
    pub fn grad_at(&self, z: Complex64) -> Mat2<f64> {
        match &self.backing {
            Backing::Analytic(f) => geometry::grad_matrix(|p| f(p), z, self.fd_step(z)),
            Backing::Fourier { .. } => self.wirtinger_at(z).grad_matrix(),
            Backing::Grid(s) => {
                let (i, j) = nearest_node(s, z);
                s.grad_at_node(i, j)
            }
        }
    }

    /// Wirtinger pair (dw, dzbar w).
    pub fn wirtinger_at(&self, z: Complex64) -> WirtingerPair {
        match &self.backing {
            Backing::Fourier { pos, neg } => {
                let mut dz = Complex64::new(0.0, 0.0);
                let mut zp = Complex64::new(1.0, 0.0);
                for (m, c) in pos.iter().enumerate().skip(1) {
                    dz += c * m as f64 * zp;
                    zp *= z;
                }
                let mut dzbar = Complex64::new(0.0, 0.0);
                let zb = z.conj();
                let mut zbp = Complex64::new(1.0, 0.0);
                for (m, c) in neg.iter().enumerate() {
                    dzbar += c * (m + 1) as f64 * zbp;
                    zbp *= zb;
                }
                WirtingerPair::new(dz, dzbar)
            }
            _ => {
                let g = self.grad_at(z);
                let wx = Complex64::new(g.a11, g.a21);
                let wy = Complex64::new(g.a12, g.a22);
                let i = Complex64::new(0.0, 1.0);
                WirtingerPair::new((wx - i * wy) * 0.5, (wx + i * wy) * 0.5)
            }
        }
    }

    /// The discrete elliptic operator value where the map carries one
    /// natively (grid maps, interior nodes only).
    pub fn native_lw(&self, z: Complex64) -> Option<Complex64> {
        match &self.backing {
            Backing::Grid(s) => {
                let (i, j) = nearest_node(s, z);
                if i >= s.n_r {
                    None
                } else {
                    Some(s.lw_at(i, j))
                }
            }
            _ => None,
        }
    }

    /// Deterministic interior sample points: a polar grid for closed-form
    /// maps, the native interior nodes for grid maps.
    pub fn scan_points(&self, n_r: usize, n_theta: usize, r_max: f64) -> Vec<Complex64> {
        if let Backing::Grid(s) = &self.backing {
            let mut pts = Vec::new();
            for i in 1..s.n_r {
                let r = i as f64 * s.dr;
                if r > r_max {
                    break;
                }
                for j in 0..s.n_theta {
                    pts.push(s.node(i, j));
                }
            }
            return pts;
        }
        let mut pts = Vec::with_capacity(n_r * n_theta);
        for i in 1..=n_r {
            let r = r_max * i as f64 / (n_r + 1) as f64;
            for j in 0..n_theta {
                let t = 2.0 * std::f64::consts::PI * (j as f64 + 0.5 * (i % 2) as f64)
                    / n_theta as f64;
                pts.push(Complex64::new(r * t.cos(), r * t.sin()));
            }
        }
        pts
    }

    /// Polar factorization data at a point: rho = |w|, S = w / rho, the
    /// gradient of rho as rho_x + i rho_y, and the columns p = D_1 S,
    /// q = D_2 S. First derivatives of w are enough: the chain rule gives
    /// D_j S_i = (D_j w_i - S_i D_j rho) / rho.
    pub fn polar_data(&self, z: Complex64) -> Result<PolarData> {
        let w = self.eval(z);
        let rho = w.norm();
        if rho <= 0.05 {
            return Err(Error::NearZeroLocus {
                z,
                rho,
                min: 0.05,
            });
        }
        let s = w / rho;
        let g = self.grad_at(z);
        let rho_x = (w.re * g.a11 + w.im * g.a21) / rho;
        let rho_y = (w.re * g.a12 + w.im * g.a22) / rho;
        let p = Complex64::new((g.a11 - s.re * rho_x) / rho, (g.a21 - s.im * rho_x) / rho);
        let q = Complex64::new((g.a12 - s.re * rho_y) / rho, (g.a22 - s.im * rho_y) / rho);
        Ok(PolarData {
            rho,
            s,
            grad_rho: Complex64::new(rho_x, rho_y),
            p,
            q,
            grad_w: g,
        })
    }

    /// Largest measured dilatation quotient over a point set.
    pub fn measure_k(&self, points: &[Complex64]) -> Result<f64> {
        let mut worst: f64 = 1.0;
        for &z in points {
            let pair = self.wirtinger_at(z);
            let (_, big_k) = crate::qc::dilatation(&pair)?;
            worst = worst.max(big_k);
        }
        Ok(worst)
    }

    /// The point a with w(a) = 0, located by damped Newton iteration when
    /// not known by construction.
    pub fn find_zero(&self) -> Result<Complex64> {
        if let Some(a) = self.zero {
            return Ok(a);
        }
        let mut z = match &self.backing {
            Backing::Grid(s) => {
                let mut best = Complex64::new(0.0, 0.0);
                let mut best_v = s.center.norm();
                for i in 1..s.n_r {
                    for j in 0..s.n_theta {
                        let v = s.value(i, j).norm();
                        if v < best_v {
                            best_v = v;
                            best = s.node(i, j);
                        }
                    }
                }
                best
            }
            _ => Complex64::new(0.0, 0.0),
        };
        for _ in 0..60 {
            let w = self.eval(z);
            if w.norm() < 1e-11 {
                return Ok(z);
            }
            let g = self.grad_at(z);
            let det = g.det();
            if det.abs() < 1e-14 {
                break;
            }
            let inv = g.inverse();
            let (dx, dy) = inv.apply(w.re, w.im);
            let mut step = Complex64::new(dx, dy);
            // Keep the iterate inside the disk.
            while (z - step).norm() >= 0.999 {
                step *= 0.5;
            }
            z -= step;
        }
        let w = self.eval(z);
        // Grid-backed maps only resolve the zero to grid accuracy.
        let tol = if self.is_grid() {
            self.solution().map(|s| s.dr).unwrap_or(1e-2)
        } else {
            1e-9
        };
        if w.norm() < tol {
            Ok(z)
        } else {
            Err(Error::MissingNormalizationPoint)
        }
    }
}

/// Polar factorization quantities at one point.
#[derive(Debug, Clone, Copy)]
pub struct PolarData {
    pub rho: f64,
    pub s: Complex64,
    /// rho_x + i rho_y.
    pub grad_rho: Complex64,
    /// p = D_1 S as a vector in C ~ R^2.
    pub p: Complex64,
    /// q = D_2 S.
    pub q: Complex64,
    pub grad_w: Mat2<f64>,
}

impl PolarData {
    pub fn grad_rho_norm(&self) -> f64 {
        self.grad_rho.norm()
    }

    /// |grad S| as the operator norm of the matrix with columns p, q.
    pub fn grad_s_norm(&self) -> f64 {
        let m = Mat2::new(self.p.re, self.q.re, self.p.im, self.q.im);
        crate::geometry::mat_norms(&m).0
    }
}

fn nearest_node(s: &PolarSolution, z: Complex64) -> (usize, usize) {
    let r = z.norm().min(1.0);
    let i = (r / s.dr).round() as usize;
    if i == 0 {
        return (0, 0);
    }
    let mut t = z.im.atan2(z.re);
    if t < 0.0 {
        t += 2.0 * std::f64::consts::PI;
    }
    let j = ((t / s.dtheta).round() as usize) % s.n_theta;
    (i.min(s.n_r), j)
}
