//! TOML run configuration. Every section is optional; each subcommand
//! requires the ones it uses and reports the first missing or invalid field.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use smwave_core::experiments::StudyConfig;
use smwave_core::sm::SmoothedSmSpec;
use smwave_core::{
    ForcingMode, GeneratorSpec, RateExampleConfig, SolverGrid, SolverOptions, WaveProblem,
};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Seed of the single path used by `generate`, `expand` and `solve`.
    #[serde(default)]
    pub seed: u64,
    /// Cells of the measure path.
    #[serde(default = "default_cells")]
    pub n_cells: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<WaveProblem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<SolverGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expand: Option<ExpandSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub study: Option<StudyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<RateSection>,
}

fn default_cells() -> usize {
    512
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpandSection {
    pub max_order: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSection {
    pub mode: ForcingMode,
    #[serde(default, flatten)]
    pub options: SolverOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSection {
    pub spec: SmoothedSmSpec,
    #[serde(flatten)]
    pub table: RateExampleConfig,
    /// Also run a convergence study driven by the smoothed measure; needs
    /// the `problem`, `grid` and `study` sections.
    #[serde(default)]
    pub stochastic: bool,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configurations serialize")
    }

    pub fn require<'a, T>(section: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
        section
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("missing section `{name}`")))
    }

    pub fn generator(&self) -> Result<&GeneratorSpec, CliError> {
        Self::require(&self.generator, "generator")
    }

    pub fn problem(&self) -> Result<&WaveProblem, CliError> {
        Self::require(&self.problem, "problem")
    }

    pub fn grid(&self) -> Result<&SolverGrid, CliError> {
        Self::require(&self.grid, "grid")
    }
}

impl Default for SolveSection {
    fn default() -> Self {
        Self {
            mode: ForcingMode::SmPath,
            options: SolverOptions::default(),
        }
    }
}
