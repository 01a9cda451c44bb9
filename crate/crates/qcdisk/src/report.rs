//! Pass/fail records for inequality audits, serializable to JSON and CSV.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Worst-case slack of one inequality over a sample set. Slack is
/// rhs - lhs; the inequality holds at a point when its slack is
/// nonnegative (up to the tolerance used by the audit).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub inequality: String,
    pub n_samples: usize,
    pub min_slack: f64,
    pub argmin_point: [f64; 2],
    pub pass: bool,
}

impl VerificationReport {
    pub fn from_slacks<I>(inequality: &str, slacks: I, tol: f64) -> Self
    where
        I: IntoIterator<Item = (Complex64, f64)>,
    {
        let mut n = 0usize;
        let mut min_slack = f64::INFINITY;
        let mut argmin = Complex64::new(0.0, 0.0);
        for (z, s) in slacks {
            n += 1;
            if s < min_slack {
                min_slack = s;
                argmin = z;
            }
        }
        if n == 0 {
            min_slack = 0.0;
        }
        VerificationReport {
            inequality: inequality.to_string(),
            n_samples: n,
            min_slack,
            argmin_point: [argmin.re, argmin.im],
            pass: min_slack >= -tol,
        }
    }
}

/// One row of the per-point gradient-versus-bound CSV.
#[derive(Debug, Clone, Serialize)]
pub struct GradientRow {
    pub z_re: f64,
    pub z_im: f64,
    pub grad_fd: f64,
    pub bound_local: f64,
    pub slack: f64,
}

pub fn write_gradient_csv(path: &std::path::Path, rows: &[GradientRow]) -> std::io::Result<()> {
    use std::io::Write;
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "z_re,z_im,grad_fd,bound_local,slack")?;
    for r in rows {
        writeln!(
            f,
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            r.z_re, r.z_im, r.grad_fd, r.bound_local, r.slack
        )?;
    }
    Ok(())
}
