//! Optional JSON config file mirroring the command-line flags.
//!
//! Top level holds the global settings plus one section per subcommand,
//! keyed by the subcommand name; section fields use the long flag names.
//! Command-line values always win over the file.

use serde::Deserialize;

use crate::commands::{
    AugmentArgs, BuildManifestArgs, CorrelateArgs, EvaluateArgs, MixNoiseArgs, ScoreBaselineArgs,
    SimulateArgs, TrainBaselineArgs,
};
use crate::util::{FailCtx, Failure};

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", default, deny_unknown_fields)]
pub struct FileConfig {
    pub root: Option<String>,
    pub workers: Option<usize>,
    pub build_manifest: BuildManifestArgs,
    pub simulate: SimulateArgs,
    pub mix_noise: MixNoiseArgs,
    pub evaluate: EvaluateArgs,
    pub correlate: CorrelateArgs,
    pub augment: AugmentArgs,
    pub train_baseline: TrainBaselineArgs,
    pub score_baseline: ScoreBaselineArgs,
}

pub fn load(path: Option<&str>) -> Result<FileConfig, Failure> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .or_input(&format!("reading config file {path}"))?;
    serde_json::from_str(&text).or_input(&format!("parsing config file {path}"))
}

/// Field-wise fallback: keeps the command-line value when set, otherwise
/// takes the config file's.
pub trait Merge {
    fn or(self, fallback: Self) -> Self;
}
