//! Finite-difference solver for L[w] = g on the unit disk with Dirichlet
//! boundary data, on a polar grid with SOR relaxation.
//!
//! The operator a11 D11 + 2 a12 D12 + a22 D22 is expressed in polar
//! derivatives as
//!
//!   L[u] = alpha u_rr + beta u_rtheta + gamma u_thetatheta
//!          + gamma r u_r - (beta / r) u_theta
//!
//! with alpha, beta, gamma depending on the coefficient matrix and the
//! angle. Radial nodes sit at r_i = i / n_r; the grid carries a single
//! center unknown treated with a Cartesian stencil, which is why n_theta
//! must be divisible by 8.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::CoefficientField;
use crate::geometry::Mat2;

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub tolerance: f64,
    pub max_sweeps: usize,
    pub omega: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-8,
            max_sweeps: 400_000,
            omega: None,
        }
    }
}

/// A grid function on the closed unit disk produced by the solver.
pub struct PolarSolution {
    pub n_r: usize,
    pub n_theta: usize,
    pub dr: f64,
    pub dtheta: f64,
    /// Value at the origin.
    pub center: Complex64,
    /// Values at r_i = i*dr for i = 1..=n_r, row-major over theta; the last
    /// ring holds the Dirichlet boundary data.
    pub values: Vec<Complex64>,
    /// Discrete operator applied to the converged solution at interior
    /// nodes (same layout, last ring zeroed) plus the center slot.
    pub lw_center: Complex64,
    pub lw: Vec<Complex64>,
    pub residual: f64,
    pub sweeps: usize,
}

impl PolarSolution {
    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        (i - 1) * self.n_theta + (j % self.n_theta)
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> Complex64 {
        if i == 0 {
            self.center
        } else {
            self.values[self.idx(i, j)]
        }
    }

    pub fn node(&self, i: usize, j: usize) -> Complex64 {
        let r = i as f64 * self.dr;
        let t = j as f64 * self.dtheta;
        Complex64::new(r * t.cos(), r * t.sin())
    }

    /// Discrete L[w] at an interior node (1 <= i <= n_r - 1) or the center.
    pub fn lw_at(&self, i: usize, j: usize) -> Complex64 {
        if i == 0 {
            self.lw_center
        } else {
            self.lw[self.idx(i, j)]
        }
    }

    /// Bilinear interpolation in (r, theta).
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let r = z.norm().min(1.0);
        let mut t = z.im.atan2(z.re);
        if t < 0.0 {
            t += 2.0 * std::f64::consts::PI;
        }
        let fi = (r / self.dr).min(self.n_r as f64 - 1e-12);
        let i0 = fi.floor() as usize;
        let fr = fi - i0 as f64;
        let fj = t / self.dtheta;
        let j0 = (fj.floor() as usize) % self.n_theta;
        let ft = fj - fj.floor();
        let v00 = self.value(i0, j0);
        let v01 = self.value(i0, j0 + 1);
        let v10 = self.value(i0 + 1, j0);
        let v11 = self.value(i0 + 1, j0 + 1);
        (v00 * (1.0 - ft) + v01 * ft) * (1.0 - fr) + (v10 * (1.0 - ft) + v11 * ft) * fr
    }

    /// Gradient matrix (u_x u_y; v_x v_y) at a grid node by central
    /// differences (one-sided second order on the boundary ring).
    pub fn grad_at_node(&self, i: usize, j: usize) -> Mat2<f64> {
        let (wx, wy);
        if i == 0 {
            let q = self.n_theta / 4;
            wx = (self.value(1, 0) - self.value(1, 2 * q)) / (2.0 * self.dr);
            wy = (self.value(1, q) - self.value(1, 3 * q)) / (2.0 * self.dr);
        } else {
            let r = i as f64 * self.dr;
            let t = j as f64 * self.dtheta;
            let wr = if i == self.n_r {
                (3.0 * self.value(i, j) - 4.0 * self.value(i - 1, j) + self.value(i - 2, j))
                    / (2.0 * self.dr)
            } else {
                (self.value(i + 1, j) - self.value(i - 1, j)) / (2.0 * self.dr)
            };
            let jm = (j + self.n_theta - 1) % self.n_theta;
            let wt = (self.value(i, j + 1) - self.value(i, jm)) / (2.0 * self.dtheta);
            let (c, s) = (t.cos(), t.sin());
            wx = c * wr - s / r * wt;
            wy = s * wr + c / r * wt;
        }
        Mat2::new(wx.re, wy.re, wx.im, wy.im)
    }
}

struct Stencil {
    alpha: f64,
    beta: f64,
    gamma: f64,
    diag: f64,
}

struct Workspace {
    n_theta: usize,
    dr: f64,
    dtheta: f64,
    /// Scale on the theta second difference making it exact on e^{i theta},
    /// so the discrete operator annihilates linear maps for any coefficient
    /// field; dtheta^2 / (2 (1 - cos dtheta)) = 1 + O(dtheta^2).
    scale_tt: f64,
    /// Same for the first theta difference: dtheta / sin dtheta.
    scale_t: f64,
    stencils: Vec<Stencil>,
    center_a: Mat2<f64>,
    center_diag: f64,
}

impl Workspace {
    fn new(field: &CoefficientField, n_r: usize, n_theta: usize) -> Self {
        let dr = 1.0 / n_r as f64;
        let dtheta = 2.0 * std::f64::consts::PI / n_theta as f64;
        let scale_tt = dtheta * dtheta / (2.0 * (1.0 - dtheta.cos()));
        let scale_t = dtheta / dtheta.sin();
        let mut stencils = Vec::with_capacity((n_r - 1) * n_theta);
        for i in 1..n_r {
            let r = i as f64 * dr;
            for j in 0..n_theta {
                let t = j as f64 * dtheta;
                let (c, s) = (t.cos(), t.sin());
                let a = field.at(Complex64::new(r * c, r * s));
                let alpha = a.a11 * c * c + 2.0 * a.a12 * c * s + a.a22 * s * s;
                let beta = 2.0 * (a.a12 * (c * c - s * s) + (a.a22 - a.a11) * c * s) / r;
                let gamma = (a.a11 * s * s - 2.0 * a.a12 * c * s + a.a22 * c * c) / (r * r);
                let diag =
                    -2.0 * alpha / (dr * dr) - 2.0 * gamma * scale_tt / (dtheta * dtheta);
                stencils.push(Stencil {
                    alpha,
                    beta,
                    gamma,
                    diag,
                });
            }
        }
        let center_a = field.at(Complex64::new(0.0, 0.0));
        let center_diag = -2.0 * (center_a.a11 + center_a.a22) / (dr * dr);
        Workspace {
            n_theta,
            dr,
            dtheta,
            scale_tt,
            scale_t,
            stencils,
            center_a,
            center_diag,
        }
    }

    #[inline]
    fn value(&self, u: &[Complex64], center: Complex64, i: usize, j: usize) -> Complex64 {
        if i == 0 {
            center
        } else {
            u[(i - 1) * self.n_theta + j % self.n_theta]
        }
    }

    /// Discrete operator at interior node (i, j), 1 <= i <= n_r - 1.
    fn apply(&self, u: &[Complex64], center: Complex64, i: usize, j: usize) -> Complex64 {
        let st = &self.stencils[(i - 1) * self.n_theta + j];
        let r = i as f64 * self.dr;
        let jm = (j + self.n_theta - 1) % self.n_theta;
        let jp = (j + 1) % self.n_theta;
        let um = self.value(u, center, i - 1, j);
        let up = self.value(u, center, i + 1, j);
        let ul = self.value(u, center, i, jm);
        let ur = self.value(u, center, i, jp);
        let uc = self.value(u, center, i, j);
        let u_rr = (up - 2.0 * uc + um) / (self.dr * self.dr);
        let u_r = (up - um) / (2.0 * self.dr);
        let u_tt = (ur - 2.0 * uc + ul) * self.scale_tt / (self.dtheta * self.dtheta);
        let u_t = (ur - ul) * self.scale_t / (2.0 * self.dtheta);
        let u_rt = (self.value(u, center, i + 1, jp) - self.value(u, center, i + 1, jm)
            - self.value(u, center, i - 1, jp)
            + self.value(u, center, i - 1, jm))
            * self.scale_t
            / (4.0 * self.dr * self.dtheta);
        st.alpha * u_rr
            + st.beta * u_rt
            + st.gamma * u_tt
            + st.gamma * r * u_r
            - st.beta / r * u_t
    }

    /// Cartesian stencil at the origin built from the first ring.
    fn apply_center(&self, u: &[Complex64], center: Complex64) -> Complex64 {
        let q = self.n_theta / 4;
        let o = self.n_theta / 8;
        let d2 = self.dr * self.dr;
        let v = |j: usize| self.value(u, center, 1, j);
        let u_xx = (v(0) - 2.0 * center + v(2 * q)) / d2;
        let u_yy = (v(q) - 2.0 * center + v(3 * q)) / d2;
        let u_xy = (v(o) - v(o + q) + v(o + 2 * q) - v(o + 3 * q)) / (2.0 * d2);
        self.center_a.a11 * u_xx + 2.0 * self.center_a.a12 * u_xy + self.center_a.a22 * u_yy
    }
}

/// Solve L[w] = rhs on the unit disk with Dirichlet data `boundary(theta)`.
///
/// Both components are relaxed together as one complex-valued unknown; the
/// iteration is SOR with automatic damping when the residual grows.
pub fn fd_elliptic_solve<R, B>(
    field: &CoefficientField,
    rhs: R,
    boundary: B,
    n_r: usize,
    n_theta: usize,
    opts: &SolverOptions,
) -> Result<PolarSolution>
where
    R: Fn(Complex64) -> Complex64,
    B: Fn(f64) -> Complex64,
{
    assert!(n_r >= 4, "need at least 4 radial rings");
    assert!(
        n_theta % 8 == 0 && n_theta >= 16,
        "n_theta must be a multiple of 8 and at least 16"
    );
    let ws = Workspace::new(field, n_r, n_theta);
    let dr = ws.dr;
    let dtheta = ws.dtheta;

    // Unknowns: rings i = 1..=n_r-1 plus the center; ring n_r is Dirichlet.
    let mut u = vec![Complex64::new(0.0, 0.0); n_r * n_theta];
    for j in 0..n_theta {
        let g = boundary(j as f64 * dtheta);
        u[(n_r - 1) * n_theta + j] = g;
        // Start from boundary data scaled inward; decent initial guess for
        // near-harmonic problems.
        for i in 1..n_r {
            u[(i - 1) * n_theta + j] = g * (i as f64 * dr);
        }
    }
    let mut center = Complex64::new(0.0, 0.0);

    let mut rhs_grid = vec![Complex64::new(0.0, 0.0); (n_r - 1) * n_theta];
    for i in 1..n_r {
        for j in 0..n_theta {
            let r = i as f64 * dr;
            let t = j as f64 * dtheta;
            rhs_grid[(i - 1) * n_theta + j] = rhs(Complex64::new(r * t.cos(), r * t.sin()));
        }
    }
    let rhs_center = rhs(Complex64::new(0.0, 0.0));

    let mut omega = opts
        .omega
        .unwrap_or_else(|| (2.0 / (1.0 + 4.0 * dr)).clamp(1.0, 1.95));

    let residual_of = |u: &[Complex64], center: Complex64| -> f64 {
        let mut worst: f64 = (ws.apply_center(u, center) - rhs_center).norm();
        for i in 1..n_r {
            for j in 0..n_theta {
                let r = (ws.apply(u, center, i, j) - rhs_grid[(i - 1) * n_theta + j]).norm();
                worst = worst.max(r);
            }
        }
        worst
    };

    let mut last_res = f64::INFINITY;
    let mut sweeps = 0usize;
    loop {
        for _ in 0..64 {
            // Center first, then rings outward.
            let lc = ws.apply_center(&u, center);
            center += omega * (rhs_center - lc) / ws.center_diag;
            for i in 1..n_r {
                for j in 0..n_theta {
                    let k = (i - 1) * n_theta + j;
                    let l = ws.apply(&u, center, i, j);
                    u[k] += omega * (rhs_grid[k] - l) / ws.stencils[k].diag;
                }
            }
            sweeps += 1;
        }
        let res = residual_of(&u, center);
        if res <= opts.tolerance {
            break;
        }
        if !res.is_finite() || res > 10.0 * last_res.max(1.0) {
            // Diverging; damp the relaxation and restart from the guess.
            omega = 1.0 + 0.5 * (omega - 1.0);
            if omega < 1.001 {
                return Err(Error::SolverDidNotConverge {
                    residual: res,
                    iterations: sweeps,
                });
            }
        }
        last_res = res;
        if sweeps >= opts.max_sweeps {
            return Err(Error::SolverDidNotConverge {
                residual: res,
                iterations: sweeps,
            });
        }
    }

    let mut lw = vec![Complex64::new(0.0, 0.0); n_r * n_theta];
    for i in 1..n_r {
        for j in 0..n_theta {
            lw[(i - 1) * n_theta + j] = ws.apply(&u, center, i, j);
        }
    }
    let lw_center = ws.apply_center(&u, center);
    let residual = residual_of(&u, center);

    Ok(PolarSolution {
        n_r,
        n_theta,
        dr,
        dtheta,
        center,
        values: u,
        lw_center,
        lw,
        residual,
        sweeps,
    })
}
