//! TOML experiment configurations. Unknown keys are rejected everywhere so a
//! typo cannot silently change an experiment.

use dicke_lindblad::ModelParams;
use serde::Deserialize;

fn default_drive_t() -> f64 {
    1.0
}

fn default_sector() -> String {
    "even".into()
}

fn default_bins() -> usize {
    40
}

fn default_max_s() -> f64 {
    3.0
}

fn default_ensemble() -> usize {
    20
}

/// Shared `[model]` table.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelTable {
    pub omega: f64,
    pub omega0: f64,
    pub kappa: f64,
    pub n_atoms: usize,
    pub n_max: usize,
    #[serde(default)]
    pub g1: f64,
    #[serde(default)]
    pub g2: f64,
    #[serde(default)]
    pub drive_amp: f64,
    #[serde(default = "default_drive_t")]
    pub drive_t: f64,
}

impl ModelTable {
    pub fn params(&self) -> ModelParams {
        ModelParams {
            omega: self.omega,
            omega0: self.omega0,
            g1: self.g1,
            g2: self.g2,
            kappa: self.kappa,
            n_atoms: self.n_atoms,
            n_max: self.n_max,
            drive_amp: self.drive_amp,
            drive_t: self.drive_t,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub model: ModelTable,
    pub spectrum: SpectrumTable,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumTable {
    pub g1: Vec<f64>,
    pub g2: Vec<f64>,
    #[serde(default = "default_sector")]
    pub sector: String,
    pub budget_bytes: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapScalingConfig {
    pub model: ModelTable,
    pub gap_scaling: GapScalingTable,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapScalingTable {
    pub g1: f64,
    pub g2: Vec<f64>,
    pub n_atoms: Vec<usize>,
    #[serde(default = "default_sector")]
    pub sector: String,
    pub budget_bytes: Option<usize>,
    /// Injection mode: fit externally supplied gap series instead of
    /// diagonalizing anything.
    #[serde(default)]
    pub synthetic: Vec<SyntheticSeries>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSeries {
    pub g2: f64,
    pub n: Vec<usize>,
    pub gap: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrMapConfig {
    pub model: ModelTable,
    pub pr_map: PrMapTable,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrMapTable {
    #[serde(default)]
    pub g1: Vec<f64>,
    #[serde(default)]
    pub g2: Vec<f64>,
    /// Explicit (g1, g2) pairs; when present the g1 × g2 product grid is
    /// ignored (useful for diagonal cuts).
    pub pairs: Option<Vec<[f64; 2]>>,
    pub budget_bytes: Option<usize>,
}

impl PrMapTable {
    pub fn grid(&self) -> Vec<(f64, f64)> {
        match &self.pairs {
            Some(p) => p.iter().map(|&[a, b]| (a, b)).collect(),
            None => self
                .g1
                .iter()
                .flat_map(|&a| self.g2.iter().map(move |&b| (a, b)))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpacingConfig {
    pub model: ModelTable,
    pub spacing: SpacingTable,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpacingTable {
    pub pairs: Vec<[f64; 2]>,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_max_s")]
    pub max_s: f64,
    #[serde(default = "default_sector")]
    pub sector: String,
    pub budget_bytes: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsConfigFile {
    pub model: ModelTable,
    pub dynamics: DynamicsTable,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsTable {
    /// Counter-rotating coupling grid; defaults to the model value alone.
    pub g2: Option<Vec<f64>>,
    pub omega_d: Vec<f64>,
    pub kappa: Vec<f64>,
    pub max_level: u32,
    #[serde(default = "default_ensemble")]
    pub ensemble: usize,
    #[serde(default)]
    pub record_levels: Vec<u32>,
    #[serde(default)]
    pub mixed_ensemble: bool,
    pub budget_bytes: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriticalLineConfig {
    pub model: ModelTable,
    pub critical_line: CriticalLineTable,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriticalLineTable {
    /// Explicit g1 samples; alternative to the range form.
    pub g1: Option<Vec<f64>>,
    pub g1_start: Option<f64>,
    pub g1_stop: Option<f64>,
    pub g1_count: Option<usize>,
}

impl CriticalLineTable {
    pub fn samples(&self) -> Result<Vec<f64>, String> {
        match (&self.g1, self.g1_start, self.g1_stop, self.g1_count) {
            (Some(list), None, None, None) => {
                if list.is_empty() {
                    return Err("g1 list must be nonempty".into());
                }
                Ok(list.clone())
            }
            (None, Some(a), Some(b), Some(k)) => {
                if k < 2 || !(a.is_finite() && b.is_finite()) || b <= a {
                    return Err("g1 range needs finite start < stop and count >= 2".into());
                }
                let step = (b - a) / (k - 1) as f64;
                Ok((0..k).map(|i| a + step * i as f64).collect())
            }
            _ => Err("specify either a g1 list or the full g1_start/g1_stop/g1_count range".into()),
        }
    }
}

/// Read and parse a TOML config file into any of the typed configs.
pub fn load<T: serde::de::DeserializeOwned>(path: &std::path::Path) -> Result<T, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("config {}: {e}", path.display()))
}
