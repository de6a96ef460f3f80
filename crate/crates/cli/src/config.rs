//! Experiment configuration files.

use std::path::{Path, PathBuf};

use finphase_core::{MultiPoly, SurfaceSpec};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Either explicit values or a generated grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Values(Vec<f64>),
    /// `points` values; uniform on `(0, max]` or geometric on `[min, max]`.
    Generated {
        #[serde(default)]
        min: Option<f64>,
        #[serde(default)]
        max: Option<f64>,
        points: usize,
        #[serde(default)]
        geometric: bool,
    },
}

impl GridSpec {
    /// Resolves the grid; `default_max` fills a missing upper end.
    pub fn resolve(&self, default_max: f64) -> CliResult<Vec<f64>> {
        let out = match self {
            GridSpec::Values(v) => v.clone(),
            GridSpec::Generated { min, max, points, geometric } => {
                let hi = max.unwrap_or(default_max);
                let m = *points;
                if *geometric {
                    let lo = min.ok_or_else(|| CliError::Config("geometric grid needs `min`".into()))?;
                    if !(lo > 0.0 && hi > lo) || m < 2 {
                        return Err(CliError::Config(format!("bad geometric grid [{lo}, {hi}] with {m} points")));
                    }
                    (0..m).map(|i| lo * (hi / lo).powf(i as f64 / (m - 1) as f64)).collect()
                } else {
                    let lo = min.unwrap_or(0.0);
                    (1..=m).map(|i| lo + (hi - lo) * i as f64 / m as f64).collect()
                }
            }
        };
        if out.is_empty() {
            return Err(CliError::Config("grid is empty".into()));
        }
        if out.iter().any(|x| !x.is_finite()) || out.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Config("grid values must be finite and strictly increasing".into()));
        }
        Ok(out)
    }
}

/// Unit vectors, or `"grid:k"`: the pole `e_n` followed by `k - 1`
/// directions tilted by `tilt` radians at evenly spaced azimuths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Directions {
    List(Vec<Vec<f64>>),
    Grid(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffConfig {
    pub c: f64,
    #[serde(default = "default_plateau")]
    pub plateau: f64,
}

fn default_plateau() -> f64 {
    1.0 / 3.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VolumeExpect {
    pub is_polynomial: Option<bool>,
    pub degree: Option<u32>,
    /// Coefficients of `t, t^2, ...`.
    pub coeffs: Option<Vec<f64>>,
    #[serde(default = "default_coeff_rtol")]
    pub coeff_rtol: f64,
    pub exponent: Option<f64>,
    #[serde(default = "default_exponent_tol")]
    pub exponent_tol: f64,
}

fn default_coeff_rtol() -> f64 {
    1e-4
}

fn default_exponent_tol() -> f64 {
    0.02
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VolumeConfig {
    /// Cap height; the largest `t`.
    pub c: f64,
    pub t_grid: GridSpec,
    #[serde(default = "default_max_degree")]
    pub max_degree: u32,
    pub mc_samples: Option<usize>,
    pub expect: Option<VolumeExpect>,
}

fn default_max_degree() -> u32 {
    4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpansionConfig {
    pub cutoff: CutoffConfig,
    pub lambda_grid: GridSpec,
    #[serde(default = "default_k_list")]
    pub k_list: Vec<u32>,
    #[serde(default = "default_k_max")]
    pub k_max: u32,
    /// Expected verdict of the finite-expansion test.
    #[serde(default = "default_true")]
    pub expect_finite: bool,
}

fn default_true() -> bool {
    true
}

fn default_k_list() -> Vec<u32> {
    vec![0]
}

fn default_k_max() -> u32 {
    4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillateConfig {
    pub cutoff: CutoffConfig,
    #[serde(default = "default_stokes_lambdas")]
    pub stokes_lambdas: Vec<f64>,
    #[serde(default = "default_stokes_tol")]
    pub stokes_tol: f64,
    pub decay_grid: Option<GridSpec>,
    #[serde(default = "default_decay_slope")]
    pub decay_max_slope: f64,
    pub expansion: Option<ExpansionConfig>,
}

fn default_stokes_lambdas() -> Vec<f64> {
    vec![10.0, 40.0, 160.0]
}

fn default_stokes_tol() -> f64 {
    1e-5
}

fn default_decay_slope() -> f64 {
    -5.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeadingRow {
    pub m: u32,
    pub alpha: u32,
    pub n: usize,
    pub n0: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaRow {
    pub h: MultiPoly,
    pub m: u32,
    pub alpha: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomDelta {
    pub count: usize,
    pub dim: usize,
    pub degrees: Vec<u32>,
    pub alphas: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorseRow {
    pub surface: SurfaceSpec,
    /// Taylor degree for the lemma slope check; omitted skips it.
    pub m: Option<u32>,
    #[serde(default = "default_morse_samples")]
    pub samples: usize,
}

fn default_morse_samples() -> usize {
    1000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmasConfig {
    #[serde(default)]
    pub leading: Vec<LeadingRow>,
    #[serde(default)]
    pub delta: Vec<DeltaRow>,
    pub random_delta: Option<RandomDelta>,
    /// `(s_max, d_max)` for the radial Laplacian constant table.
    pub radial_constants: Option<(u32, usize)>,
    #[serde(default)]
    pub morse: Vec<MorseRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub surface: Option<SurfaceSpec>,
    pub directions: Option<Directions>,
    /// Tilt of the generated direction grids, in radians.
    #[serde(default = "default_tilt")]
    pub grid_tilt: f64,
    pub volume: Option<VolumeConfig>,
    pub oscillate: Option<OscillateConfig>,
    pub lemmas: Option<LemmasConfig>,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
}

fn default_tilt() -> f64 {
    0.1
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> CliResult<()> {
        let needs_surface = self.volume.is_some() || self.oscillate.is_some();
        if needs_surface && self.surface.is_none() {
            return Err(CliError::Config("`surface` is required for volume and oscillate suites".into()));
        }
        if let Some(v) = &self.volume {
            if !(v.c > 0.0) {
                return Err(CliError::Config(format!("volume cap height must be positive, got {}", v.c)));
            }
            v.t_grid.resolve(v.c)?;
        }
        if let Some(o) = &self.oscillate {
            if !(o.cutoff.c > 0.0) {
                return Err(CliError::Config(format!("cap height must be positive, got {}", o.cutoff.c)));
            }
            if o.stokes_lambdas.is_empty() {
                return Err(CliError::Config("stokes_lambdas is empty".into()));
            }
            if let Some(g) = &o.decay_grid {
                g.resolve(160.0)?;
            }
            if let Some(e) = &o.expansion {
                e.lambda_grid.resolve(160.0)?;
                if e.k_list.is_empty() {
                    return Err(CliError::Config("k_list is empty".into()));
                }
            }
        }
        if !(self.grid_tilt > 0.0 && self.grid_tilt < std::f64::consts::FRAC_PI_2) {
            return Err(CliError::Config("grid_tilt must lie in (0, pi/2)".into()));
        }
        Ok(())
    }

    /// Normalized directions for an ambient dimension `n`.
    pub fn resolve_directions(&self, n: usize) -> CliResult<Vec<Vec<f64>>> {
        let mut pole = vec![0.0; n];
        pole[n - 1] = 1.0;
        let raw = match &self.directions {
            None => vec![pole],
            Some(Directions::List(v)) => v.clone(),
            Some(Directions::Grid(s)) => {
                let k: usize = s
                    .strip_prefix("grid:")
                    .and_then(|t| t.parse().ok())
                    .filter(|&k| k >= 1)
                    .ok_or_else(|| CliError::Config(format!("bad direction grid `{s}`, expected grid:k")))?;
                let (st, ct) = self.grid_tilt.sin_cos();
                let mut out = vec![pole];
                for j in 1..k {
                    let mut v = vec![0.0; n];
                    v[n - 1] = ct;
                    if n == 2 {
                        v[0] = if j % 2 == 1 { st } else { -st };
                    } else {
                        let phi = 2.0 * std::f64::consts::PI * (j - 1) as f64 / (k - 1) as f64;
                        v[0] = st * phi.cos();
                        v[1] = st * phi.sin();
                    }
                    out.push(v);
                }
                out
            }
        };
        if raw.is_empty() {
            return Err(CliError::Config("direction list is empty".into()));
        }
        raw.into_iter()
            .map(|v| {
                if v.len() != n {
                    return Err(CliError::Config(format!("direction {v:?} must have {n} components")));
                }
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if !(norm > 0.0 && norm.is_finite()) {
                    return Err(CliError::Config(format!("direction {v:?} cannot be normalized")));
                }
                Ok(v.iter().map(|x| x / norm).collect())
            })
            .collect()
    }
}
