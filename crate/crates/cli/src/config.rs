// SPDX-License-Identifier: Apache-2.0

//! Experiment configuration: a TOML file with an `[experiment]` section and
//! one optional section per command. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use mixfbm::analysis::ReferenceScheme;
use mixfbm::noise::SamplerKind;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Convergence,
    Simulate,
    NoiseTest,
    Diagnostics,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: Experiment,
    #[serde(default)]
    pub convergence: Convergence,
    #[serde(default)]
    pub simulate: Simulate,
    #[serde(default, rename = "noise-test")]
    pub noise_test: NoiseTest,
    #[serde(default)]
    pub diagnostics: Diagnostics,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Experiment {
    pub command: Option<Command>,
    pub model: String,
    pub hurst: f64,
    pub horizon: f64,
    pub seed: u64,
    pub sampler: SamplerKind,
    pub output_dir: PathBuf,
}

impl Default for Experiment {
    fn default() -> Self {
        Self {
            command: None,
            model: "trig".into(),
            hurst: 0.6,
            horizon: 1.0,
            seed: 20240601,
            sampler: SamplerKind::Auto,
            output_dir: PathBuf::from("mixfbm-out"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Convergence {
    pub fine_n: usize,
    pub factors: Vec<usize>,
    pub paths: usize,
    pub reference: ReferenceScheme,
}

impl Default for Convergence {
    fn default() -> Self {
        Self {
            fine_n: 1 << 12,
            factors: vec![16, 32, 64, 128],
            paths: 400,
            reference: ReferenceScheme::Lamperti,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Simulate {
    pub steps: usize,
}

impl Default for Simulate {
    fn default() -> Self {
        Self { steps: 1024 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseTest {
    pub steps: usize,
    pub paths: usize,
}

impl Default for NoiseTest {
    fn default() -> Self {
        Self {
            steps: 64,
            paths: 100_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Diagnostics {
    /// Grid sizes of the moment sweep.
    pub steps: Vec<usize>,
    pub paths: usize,
    /// Coefficient `M` of the exponential-moment check.
    pub exp_coefficient: f64,
    pub exp_steps: usize,
    pub exp_paths: usize,
}

impl Default for Diagnostics {
    fn default() -> Self {
        Self {
            steps: (6..=12).map(|e| 1 << e).collect(),
            paths: 10_000,
            exp_coefficient: 1.0,
            exp_steps: 1 << 10,
            exp_paths: 100_000,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Parses TOML text; errors name the offending line and key.
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }
}
