//! JSON run configuration and the builders turning it into live objects.

use std::path::PathBuf;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{CoefficientField, GrowthParams, TiltProfile};
use crate::geometry::Mat2;
use crate::map::MappingSample;
use crate::solver::{fd_elliptic_solve, SolverOptions};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapSpec {
    Mobius {
        a: [f64; 2],
    },
    RadialStretch {
        k: f64,
    },
    /// Harmonic extension of e^{i gamma(theta)} with
    /// gamma(theta) = theta + sum_k c_k sin(k theta).
    HarmonicExtension {
        coefficients: Vec<f64>,
    },
    /// Finite-difference solution of L[w] = 0 with the same boundary
    /// homeomorphism family as the harmonic extension.
    EllipticFd {
        #[serde(default)]
        coefficients: Vec<f64>,
        #[serde(default = "default_n_r")]
        n_r: usize,
        #[serde(default = "default_n_theta")]
        n_theta: usize,
    },
}

fn default_n_r() -> usize {
    32
}

fn default_n_theta() -> usize {
    128
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FieldSpec {
    Identity,
    Constant { a11: f64, a12: f64, a22: f64 },
    Tilt { epsilon: f64, profile: TiltProfile },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthSpec {
    #[serde(default)]
    pub b: f64,
    #[serde(default)]
    pub gamma: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tolerances {
    /// Slack tolerance for exact (non-FD) inequalities.
    #[serde(default = "default_slack")]
    pub slack: f64,
    /// Coefficient of h^2 in the FD tolerance model.
    #[serde(default = "default_c_tol")]
    pub c_tol: f64,
}

fn default_slack() -> f64 {
    1e-9
}

fn default_c_tol() -> f64 {
    100.0
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            slack: default_slack(),
            c_tol: default_c_tol(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct OutputSpec {
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub map: MapSpec,
    pub field: FieldSpec,
    pub growth: GrowthSpec,
    /// Declared dilatation bound; the pipeline uses the larger of this and
    /// the measured value.
    #[serde(default)]
    pub declared_k: Option<f64>,
    #[serde(default = "default_quadrature_n")]
    pub quadrature_n: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_quadrature_n() -> usize {
    512
}

impl RunConfig {
    pub fn load(path: &std::path::Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.growth.b < 0.0 || self.growth.gamma < 0.0 {
            return Err(Error::InvalidConfig(
                "growth coefficients must be nonnegative".into(),
            ));
        }
        if self.tolerances.slack <= 0.0 || self.tolerances.c_tol <= 0.0 {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        match &self.map {
            MapSpec::Mobius { a } => {
                if a[0] * a[0] + a[1] * a[1] >= 1.0 {
                    return Err(Error::InvalidConfig("mobius parameter outside disk".into()));
                }
            }
            MapSpec::RadialStretch { k } => {
                if *k < 1.0 {
                    return Err(Error::InvalidConfig("stretch exponent must be >= 1".into()));
                }
            }
            MapSpec::EllipticFd { n_r, n_theta, .. } => {
                if *n_r < 4 || n_theta % 8 != 0 || *n_theta < 16 {
                    return Err(Error::InvalidConfig(
                        "solver grid needs n_r >= 4 and n_theta a multiple of 8, >= 16".into(),
                    ));
                }
            }
            MapSpec::HarmonicExtension { .. } => {}
        }
        match &self.field {
            FieldSpec::Tilt { epsilon, .. } => {
                if epsilon.abs() >= 1.0 {
                    return Err(Error::InvalidConfig(
                        "tilt amplitude must be below 1".into(),
                    ));
                }
            }
            FieldSpec::Constant { a11, a12, a22 } => {
                if *a11 <= 0.0 || a11 * a22 - a12 * a12 <= 0.0 {
                    return Err(Error::InvalidConfig(
                        "constant field must be positive definite".into(),
                    ));
                }
            }
            FieldSpec::Identity => {}
        }
        Ok(())
    }

    pub fn growth_params(&self) -> GrowthParams {
        GrowthParams::new(self.growth.b, self.growth.gamma)
    }
}

pub fn build_field(spec: &FieldSpec) -> CoefficientField {
    match spec {
        FieldSpec::Identity => CoefficientField::identity(),
        FieldSpec::Constant { a11, a12, a22 } => {
            CoefficientField::constant(Mat2::symmetric(*a11, *a12, *a22))
        }
        FieldSpec::Tilt { epsilon, profile } => CoefficientField::tilt(*epsilon, *profile),
    }
}

pub fn build_map(spec: &MapSpec, field: &CoefficientField) -> Result<MappingSample> {
    match spec {
        MapSpec::Mobius { a } => Ok(MappingSample::mobius(Complex64::new(a[0], a[1]))),
        MapSpec::RadialStretch { k } => Ok(MappingSample::radial_stretch(*k)),
        MapSpec::HarmonicExtension { coefficients } => {
            MappingSample::harmonic_extension(coefficients)
        }
        MapSpec::EllipticFd {
            coefficients,
            n_r,
            n_theta,
        } => {
            let tilt: f64 = coefficients
                .iter()
                .enumerate()
                .map(|(i, c)| (i + 1) as f64 * c.abs())
                .sum();
            if tilt >= 1.0 {
                return Err(Error::NonMonotoneBoundary);
            }
            let c = coefficients.clone();
            let boundary = move |t: f64| {
                let gamma = t + c
                    .iter()
                    .enumerate()
                    .map(|(i, ck)| ck * ((i + 1) as f64 * t).sin())
                    .sum::<f64>();
                Complex64::new(0.0, gamma).exp()
            };
            let sol = fd_elliptic_solve(
                field,
                |_| Complex64::new(0.0, 0.0),
                boundary,
                *n_r,
                *n_theta,
                &SolverOptions::default(),
            )?;
            Ok(MappingSample::from_solution(Arc::new(sol), "elliptic_fd"))
        }
    }
}
