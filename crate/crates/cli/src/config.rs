//! Experiment configuration files.

use std::path::Path;

use serde::{Deserialize, Serialize};
use spectral_lift::linalg::{c64, CMatrix};
use spectral_lift::models::homogeneous::SubgroupSpec;

use crate::error::CliError;

/// A matrix entry: a real number or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(self) -> spectral_lift::C64 {
        match self {
            Entry::Real(x) => c64(x, 0.0),
            Entry::Complex([re, im]) => c64(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MatrixSpec {
    Diag(Vec<Entry>),
    Rows(Vec<Vec<Entry>>),
}

impl MatrixSpec {
    pub fn to_matrix(&self, field: &str) -> Result<CMatrix, CliError> {
        match self {
            MatrixSpec::Diag(d) => {
                if d.is_empty() {
                    return Err(CliError::config(field, "diagonal is empty"));
                }
                let v: Vec<_> = d.iter().map(|e| e.value()).collect();
                Ok(spectral_lift::linalg::diag(&v))
            }
            MatrixSpec::Rows(rows) => {
                let n = rows.len();
                if n == 0 || rows.iter().any(|r| r.len() != n) {
                    return Err(CliError::config(field, "matrix must be square and non-empty"));
                }
                Ok(CMatrix::from_fn(n, n, |r, c| rows[r][c].value()))
            }
        }
    }
}

/// The represented base algebra B acting on H_B.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BaseSpec {
    /// ℂ^m acting diagonally.
    Diagonal(usize),
    /// Named generators on a common space.
    Generators(Vec<NamedMatrix>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedMatrix {
    pub name: String,
    pub matrix: MatrixSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum AutomorphismSpec {
    Permutation(Vec<usize>),
    Unitary(MatrixSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossedProductConfig {
    pub base: BaseSpec,
    pub automorphism: AutomorphismSpec,
    pub d_b: MatrixSpec,
    /// Use ℤ_n instead of ℤ; windows are then ignored.
    #[serde(default)]
    pub cyclic_order: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ThetaSpec {
    /// Full skew-symmetric 4×4 matrix.
    Matrix([[f64; 4]; 4]),
    /// θ₁₃ = θ₁₄ = θ₂₃ = θ₂₄ = t, all else zero.
    Mixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumTorusConfig {
    pub theta: ThetaSpec,
    /// Fourier box of the base; defaults to the window.
    #[serde(default)]
    pub base_radius: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum LieGroupSpec {
    Torus(usize),
    Su2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomogeneousConfig {
    pub group: LieGroupSpec,
    pub subgroup: SubgroupSpec,
    /// Quadrature resolution (SU(2) only).
    #[serde(default)]
    pub quadrature: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum AbelianGroupSpec {
    Torus(usize),
    Cyclic(u32),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CocycleEntry {
    pub sigma: Vec<i64>,
    pub tau: Vec<i64>,
    pub matrix: MatrixSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomFactorConfig {
    pub group: AbelianGroupSpec,
    pub base: BaseSpec,
    pub d_b: MatrixSpec,
    /// One unitary per torus coordinate (one for a cyclic group); γ_σ is
    /// conjugation by the corresponding product of powers.
    pub unitaries: Vec<MatrixSpec>,
    /// Cocycle values; missing pairs default to γ_{στ}(1).
    #[serde(default)]
    pub cocycles: Vec<CocycleEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExampleConfig {
    CrossedProduct(CrossedProductConfig),
    QuantumTorus(QuantumTorusConfig),
    Homogeneous(HomogeneousConfig),
    CustomFactorSystem(CustomFactorConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default)]
    pub csv: Option<String>,
    #[serde(default)]
    pub json: Option<String>,
}

fn default_tolerance() -> f64 {
    1e-10
}

fn default_samples() -> usize {
    20
}

#[derive(Deserialize)]
struct Shared {
    windows: Vec<usize>,
    #[serde(default = "default_tolerance")]
    tolerance: f64,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_samples")]
    samples: usize,
    #[serde(default)]
    output: Option<OutputPaths>,
}

/// Serialized flat: `kind` and the example's fields sit next to the shared keys.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub example: ExampleConfig,
    /// Window sizes N, ascending.
    pub windows: Vec<usize>,
    pub tolerance: f64,
    pub seed: u64,
    /// Random elements per randomized identity check.
    pub samples: usize,
    pub output: Option<OutputPaths>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        // `flatten` swallows unknown keys, so the shared keys are split off
        // first and the example part is parsed with `deny_unknown_fields`.
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::config("config", e.to_string()))?;
        let serde_json::Value::Object(mut map) = value else {
            return Err(CliError::config("config", "expected a JSON object"));
        };
        let mut shared = serde_json::Map::new();
        for key in ["windows", "tolerance", "seed", "samples", "output"] {
            if let Some(v) = map.remove(key) {
                shared.insert(key.to_string(), v);
            }
        }
        if !map.contains_key("kind") {
            return Err(CliError::config("kind", "missing example kind"));
        }
        let example: ExampleConfig = serde_json::from_value(serde_json::Value::Object(map)).map_err(|e| CliError::config("example", e.to_string()))?;
        let shared: Shared = serde_json::from_value(serde_json::Value::Object(shared)).map_err(|e| CliError::config("config", e.to_string()))?;
        let cfg = ExperimentConfig {
            example,
            windows: shared.windows,
            tolerance: shared.tolerance,
            seed: shared.seed,
            samples: shared.samples,
            output: shared.output,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::config("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.windows.is_empty() {
            return Err(CliError::config("windows", "at least one window size is required"));
        }
        if self.windows.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::config("windows", "window sizes must be strictly ascending"));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(CliError::config("tolerance", "must be a positive finite number"));
        }
        match &self.example {
            ExampleConfig::CrossedProduct(c) => {
                if c.cyclic_order == Some(0) {
                    return Err(CliError::config("cyclic_order", "must be at least 1"));
                }
                if c.cyclic_order.is_none() && self.windows.contains(&0) {
                    return Err(CliError::config("windows", "crossed products by Z need N >= 1"));
                }
            }
            ExampleConfig::QuantumTorus(q) => {
                if let ThetaSpec::Matrix(t) = &q.theta {
                    if t.iter().flatten().any(|x| !x.is_finite()) {
                        return Err(CliError::config("theta", "entries must be finite"));
                    }
                }
            }
            ExampleConfig::Homogeneous(h) => {
                if let LieGroupSpec::Torus(0) = h.group {
                    return Err(CliError::config("group", "torus dimension must be positive"));
                }
                if h.group == LieGroupSpec::Su2 && h.quadrature.is_none() {
                    return Err(CliError::config("quadrature", "SU(2) needs a quadrature resolution"));
                }
            }
            ExampleConfig::CustomFactorSystem(c) => {
                let needed = match c.group {
                    AbelianGroupSpec::Torus(d) => d,
                    AbelianGroupSpec::Cyclic(_) => 1,
                };
                if c.unitaries.len() != needed {
                    return Err(CliError::config(
                        "unitaries",
                        format!("expected {needed} matrices, found {}", c.unitaries.len()),
                    ));
                }
                if let AbelianGroupSpec::Cyclic(0) = c.group {
                    return Err(CliError::config("group", "cyclic order must be at least 1"));
                }
            }
        }
        Ok(())
    }

    /// Short name of the example kind.
    pub fn kind(&self) -> &'static str {
        match self.example {
            ExampleConfig::CrossedProduct(_) => "crossed_product",
            ExampleConfig::QuantumTorus(_) => "quantum_torus",
            ExampleConfig::Homogeneous(_) => "homogeneous",
            ExampleConfig::CustomFactorSystem(_) => "custom_factor_system",
        }
    }
}
