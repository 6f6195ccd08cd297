//! TOML run configuration.
//!
//! ```toml
//! [domain]
//! kind = "ball"
//! center = [0.0, 0.0]
//! radius = 2.0
//!
//! [weight]
//! kind = "product"
//! factors = [{ kind = "sphere", center = [0.0, 0.0], radius = 1.0, power = 0.5 }]
//!
//! [nonlinearity]
//! kind = "logistic"
//! gamma = 10.0
//! s_star = 1.0
//!
//! [grid]
//! resolution = 129
//! ```
//!
//! Unknown keys are rejected.

use std::path::{Path, PathBuf};

use multibump_core::energy::NonlinearitySpec;
use multibump_core::energy::SolverOptions;
use multibump_core::grid::DomainSpec;
use multibump_core::multibump::EnumerationOptions;
use multibump_core::spectral::EigenOptions;
use multibump_core::verify::VerifyTolerances;
use multibump_core::weights::{
    AdmissibilityOptions, PowerFactor, RadialPiece, RootPower, WeightSpec, DEFAULT_EPS_ZERO, DEFAULT_GROWTH_LIMIT,
};
use serde::{Deserialize, Serialize};

use crate::expr::Expression;
use crate::{AppError, Result};

/// Smallest accepted resolution (nodes per axis).
pub const MIN_RESOLUTION: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainConfig,
    pub weight: WeightConfig,
    pub nonlinearity: NonlinearityConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub enumeration: EnumerationConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DomainConfig {
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Annulus {
        center: Vec<f64>,
        inner: f64,
        outer: f64,
    },
    /// `{ level < 0 }` inside the box; `level` is an expression in `x1 .. xN`.
    Implicit {
        lower: Vec<f64>,
        upper: Vec<f64>,
        level: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WeightConfig {
    Constant {
        value: f64,
    },
    RadialPiecewise {
        center: Vec<f64>,
        pieces: Vec<PieceConfig>,
    },
    Product {
        #[serde(default = "one")]
        scale: f64,
        factors: Vec<FactorConfig>,
    },
    Expression {
        value: String,
        /// Signed expression vanishing exactly on the zero set.
        #[serde(default)]
        zero_level: Option<String>,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceConfig {
    pub r_max: f64,
    #[serde(default = "one")]
    pub coeff: f64,
    #[serde(default)]
    pub factors: Vec<RootPowerConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootPowerConfig {
    pub root: f64,
    pub power: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FactorConfig {
    Sphere { center: Vec<f64>, radius: f64, power: f64 },
    Plane { normal: Vec<f64>, offset: f64, power: f64 },
    Point { center: Vec<f64>, power: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NonlinearityConfig {
    Logistic {
        gamma: f64,
        s_star: f64,
        #[serde(default)]
        beta_star: Option<f64>,
    },
    Expression {
        /// Expression in `s`.
        f: String,
        gamma: f64,
        s_star: f64,
        beta_star: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub resolution: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToleranceConfig {
    pub eps_zero: f64,
    pub growth_limit: f64,
    pub residual: Option<f64>,
    pub bound: Option<f64>,
    pub tol_grad: Option<f64>,
    pub eigen_rel_tol: f64,
    pub max_iter: usize,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            eps_zero: DEFAULT_EPS_ZERO,
            growth_limit: DEFAULT_GROWTH_LIMIT,
            residual: None,
            bound: None,
            tol_grad: None,
            eigen_rel_tol: EigenOptions::default().rel_tol,
            max_iter: SolverOptions::default().max_iter,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldExport {
    /// One CSV per bump and per multi-bump solution.
    All,
    /// One CSV per single bump.
    Bumps,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub fields: FieldExport,
    pub vtk: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out"), fields: FieldExport::All, vtk: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnumerationConfig {
    pub max_chi: usize,
}

impl Default for EnumerationConfig {
    fn default() -> Self {
        EnumerationConfig { max_chi: EnumerationOptions::default().max_chi }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(AppError::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::parse(text, Path::new("<inline>"))
    }

    fn parse(text: &str, path: &Path) -> Result<Self> {
        let config: RunConfig = toml::from_str(text)
            .map_err(|e| AppError::ConfigSyntax { path: path.to_path_buf(), message: e.to_string() })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn dim(&self) -> usize {
        match &self.domain {
            DomainConfig::Box { lower, .. } | DomainConfig::Implicit { lower, .. } => lower.len(),
            DomainConfig::Ball { center, .. } | DomainConfig::Annulus { center, .. } => center.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.resolution < MIN_RESOLUTION {
            return Err(AppError::Config(format!(
                "grid.resolution must be at least {MIN_RESOLUTION}, got {}",
                self.grid.resolution
            )));
        }
        let t = &self.tolerances;
        positive("tolerances.eps_zero", t.eps_zero)?;
        positive("tolerances.growth_limit", t.growth_limit)?;
        positive("tolerances.eigen_rel_tol", t.eigen_rel_tol)?;
        for (name, v) in [("residual", t.residual), ("bound", t.bound), ("tol_grad", t.tol_grad)] {
            if let Some(v) = v {
                positive(&format!("tolerances.{name}"), v)?;
            }
        }
        if t.max_iter == 0 {
            return Err(AppError::Config("tolerances.max_iter must be positive".into()));
        }
        let dim = self.dim();
        let check = |what: &str, v: &[f64]| {
            if v.len() == dim {
                Ok(())
            } else {
                Err(AppError::Config(format!("{what} has {} coordinates, the domain has {dim}", v.len())))
            }
        };
        match &self.weight {
            WeightConfig::RadialPiecewise { center, pieces } => {
                check("weight.center", center)?;
                if pieces.is_empty() {
                    return Err(AppError::Config("weight.pieces is empty".into()));
                }
                if pieces.windows(2).any(|w| w[0].r_max >= w[1].r_max) {
                    return Err(AppError::Config("weight.pieces must have increasing r_max".into()));
                }
            }
            WeightConfig::Product { factors, .. } => {
                for f in factors {
                    match f {
                        FactorConfig::Sphere { center, .. } | FactorConfig::Point { center, .. } => {
                            check("weight factor center", center)?
                        }
                        FactorConfig::Plane { normal, .. } => check("weight factor normal", normal)?,
                    }
                }
            }
            WeightConfig::Constant { .. } | WeightConfig::Expression { .. } => {}
        }
        self.domain()?.validate()?;
        self.weight()?;
        self.nonlinearity()?;
        Ok(())
    }

    pub fn domain(&self) -> Result<DomainSpec> {
        Ok(match &self.domain {
            DomainConfig::Box { lower, upper } => DomainSpec::Box { lower: lower.clone(), upper: upper.clone() },
            DomainConfig::Ball { center, radius } => DomainSpec::Ball { center: center.clone(), radius: *radius },
            DomainConfig::Annulus { center, inner, outer } => {
                DomainSpec::Annulus { center: center.clone(), inner: *inner, outer: *outer }
            }
            DomainConfig::Implicit { lower, upper, level } => {
                let expr = Expression::spatial(level, lower.len())?;
                DomainSpec::Implicit {
                    lower: lower.clone(),
                    upper: upper.clone(),
                    level: expr.into_spatial_fn(),
                    description: level.clone(),
                }
            }
        })
    }

    pub fn weight(&self) -> Result<WeightSpec> {
        let dim = self.dim();
        Ok(match &self.weight {
            WeightConfig::Constant { value } => WeightSpec::Constant { value: *value },
            WeightConfig::RadialPiecewise { center, pieces } => WeightSpec::RadialPiecewise {
                center: center.clone(),
                pieces: pieces
                    .iter()
                    .map(|p| RadialPiece {
                        r_max: p.r_max,
                        coeff: p.coeff,
                        factors: p.factors.iter().map(|f| RootPower { root: f.root, power: f.power }).collect(),
                    })
                    .collect(),
            },
            WeightConfig::Product { scale, factors } => WeightSpec::ProductOfPowers {
                scale: *scale,
                factors: factors
                    .iter()
                    .map(|f| match f {
                        FactorConfig::Sphere { center, radius, power } => {
                            PowerFactor::Sphere { center: center.clone(), radius: *radius, power: *power }
                        }
                        FactorConfig::Plane { normal, offset, power } => {
                            PowerFactor::Plane { normal: normal.clone(), offset: *offset, power: *power }
                        }
                        FactorConfig::Point { center, power } => {
                            PowerFactor::Point { center: center.clone(), power: *power }
                        }
                    })
                    .collect(),
            },
            WeightConfig::Expression { value, zero_level } => {
                let v = Expression::spatial(value, dim)?;
                let z = zero_level.as_deref().map(|z| Expression::spatial(z, dim)).transpose()?;
                WeightSpec::Custom {
                    value: v.into_spatial_fn(),
                    zero_level: z.map(Expression::into_spatial_fn),
                    reference: match zero_level {
                        Some(z) => format!("a(x) = {value}, zero level {z}"),
                        None => format!("a(x) = {value}"),
                    },
                }
            }
        })
    }

    pub fn nonlinearity(&self) -> Result<NonlinearitySpec> {
        Ok(match &self.nonlinearity {
            NonlinearityConfig::Logistic { gamma, s_star, beta_star } => {
                let mut spec = NonlinearitySpec::logistic(*gamma, *s_star);
                if let Some(b) = beta_star {
                    spec.beta_star = *b;
                }
                spec
            }
            NonlinearityConfig::Expression { f, gamma, s_star, beta_star } => {
                let expr = Expression::scalar(f)?;
                NonlinearitySpec::custom(expr.into_scalar_fn(), f.clone(), *gamma, *s_star, *beta_star)
            }
        })
    }

    pub fn admissibility_options(&self) -> AdmissibilityOptions {
        AdmissibilityOptions {
            eps_zero: self.tolerances.eps_zero,
            growth_limit: self.tolerances.growth_limit,
            ..AdmissibilityOptions::default()
        }
    }

    pub fn eigen_options(&self) -> EigenOptions {
        EigenOptions { rel_tol: self.tolerances.eigen_rel_tol, ..EigenOptions::default() }
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            tol_grad: self.tolerances.tol_grad,
            max_iter: self.tolerances.max_iter,
            ..SolverOptions::default()
        }
    }

    pub fn verify_tolerances(&self) -> VerifyTolerances {
        VerifyTolerances { residual: self.tolerances.residual, bound: self.tolerances.bound, zero_trace: 0.0 }
    }

    pub fn enumeration_options(&self) -> EnumerationOptions {
        EnumerationOptions { max_chi: self.enumeration.max_chi }
    }
}
