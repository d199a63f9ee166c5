//! Run configuration: one JSON file, every field optional, plus flag overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use zerocorr_core::correlations::SumTruncation;
use zerocorr_core::density::{WindowConfig, DEFAULT_N_MAX};

use crate::error::{CliError, CliResult};

pub const DEFAULT_SEED: u64 = 0x5eed_2c0d_e1a7_10e5;
pub const DEFAULT_BUDGET: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WindowSection {
    pub e: f64,
    pub delta_e: f64,
    pub p_star: u64,
    pub n_max: u32,
}

impl Default for WindowSection {
    fn default() -> Self {
        WindowSection { e: 1e6, delta_e: 1e4, p_star: 1000, n_max: DEFAULT_N_MAX }
    }
}

impl WindowSection {
    pub fn to_config(&self) -> CliResult<WindowConfig> {
        Ok(WindowConfig::new(self.e, self.delta_e, self.p_star, self.n_max)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TruncationSection {
    pub prime_cutoff: u64,
    pub tail_bound_target: f64,
}

impl Default for TruncationSection {
    fn default() -> Self {
        let d = SumTruncation::default();
        TruncationSection { prime_cutoff: d.prime_cutoff, tail_bound_target: d.tail_bound_target }
    }
}

impl TruncationSection {
    pub fn to_truncation(&self) -> CliResult<SumTruncation> {
        Ok(SumTruncation::new(self.prime_cutoff, self.tail_bound_target)?)
    }
}

/// Either explicit `values` or an arithmetic range `start, start+step, …, ≤ stop`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Grid {
    pub values: Option<Vec<f64>>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub step: Option<f64>,
}

impl Grid {
    pub fn range(start: f64, stop: f64, step: f64) -> Self {
        Grid { values: None, start: Some(start), stop: Some(stop), step: Some(step) }
    }

    pub fn points(&self) -> CliResult<Vec<f64>> {
        let pts = match (&self.values, self.start, self.stop, self.step) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(a), Some(b), Some(h)) => {
                if !(h > 0.0) || !(b >= a) || !a.is_finite() || !b.is_finite() {
                    return Err(CliError::config("grid needs finite start ≤ stop and a positive step"));
                }
                // tolerate rounding in (stop − start)/step
                let n = ((b - a) / h + 1e-9).floor() as usize + 1;
                if n > 10_000_000 {
                    return Err(CliError::config("grid has too many points"));
                }
                (0..n).map(|k| a + h * k as f64).collect()
            }
            _ => return Err(CliError::config("grid needs either `values` or `start`, `stop` and `step`")),
        };
        if pts.is_empty() {
            return Err(CliError::config("grid is empty"));
        }
        if pts.iter().any(|x| !x.is_finite()) {
            return Err(CliError::config("grid values must be finite"));
        }
        Ok(pts)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Grid2d {
    pub e12: Grid,
    pub e23: Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    #[default]
    Quadrature,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    /// The finite prime set the oracle averages over.
    pub primes: Vec<u64>,
    pub method: OracleMethod,
    /// Quadrature nodes per prime for the correlation checks.
    pub nodes: u32,
    pub r2_offsets: Vec<f64>,
    pub r3_triples: Vec<[f64; 3]>,
    /// Random single-prime configurations for each closed-form check.
    pub closed_form_samples: usize,
    pub closed_form_nodes: u32,
    /// Absolute tolerance of every quadrature comparison.
    pub tolerance: f64,
    /// Imaginary parts of `s` for the Euler-product limit check.
    pub zeta_s: Vec<f64>,
    pub zeta_p_star: u64,
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection {
            primes: vec![2, 3],
            method: OracleMethod::Quadrature,
            nodes: 128,
            r2_offsets: vec![0.2, 0.4, 0.8],
            r3_triples: vec![[0.15, -0.25, 0.6], [0.0, 0.3, -0.5]],
            closed_form_samples: 20,
            closed_form_nodes: 2048,
            tolerance: 1e-8,
            zeta_s: vec![0.05],
            zeta_p_star: 100_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OffsetUnits {
    /// Multiples of the mean spacing `1/d̄(E)` at the window centre.
    #[default]
    Spacings,
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub center: f64,
    pub width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Bins {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Default for Bins {
    fn default() -> Self {
        Bins { lo: -3.0, hi: 3.0, count: 120 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmpiricalSection {
    pub zeros: Option<PathBuf>,
    /// Defaults to the span of the whole dataset.
    pub window: Option<WindowSpec>,
    pub units: OffsetUnits,
    pub bins: Bins,
    /// Range of positive offsets entering χ².
    pub chi_range: [f64; 2],
    /// Optional `(e₁₂, e₂₃)` grid for the three-point histogram.
    pub triples: Option<Bins>,
}

impl Default for EmpiricalSection {
    fn default() -> Self {
        EmpiricalSection {
            zeros: None,
            window: None,
            units: OffsetUnits::Spacings,
            bins: Bins::default(),
            chi_range: [0.1, 3.0],
            triples: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub window: WindowSection,
    pub truncation: TruncationSection,
    pub grid: Option<Grid>,
    pub grid2d: Option<Grid2d>,
    pub verify: VerifySection,
    pub empirical: EmpiricalSection,
    pub seed: u64,
    pub budget: u64,
    pub out: Option<String>,
    pub format: Format,
    pub threads: Option<usize>,
    pub prime_cache: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            window: WindowSection::default(),
            truncation: TruncationSection::default(),
            grid: None,
            grid2d: None,
            verify: VerifySection::default(),
            empirical: EmpiricalSection::default(),
            seed: DEFAULT_SEED,
            budget: DEFAULT_BUDGET,
            out: None,
            format: Format::Csv,
            threads: None,
            prime_cache: None,
        }
    }
}

impl RunConfig {
    /// Parse and check the window and truncation sections.
    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::config(format!("config: {e}")))?;
        cfg.window.to_config()?;
        cfg.truncation.to_truncation()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| CliError::File { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }
}
