pub mod augment;
pub mod build_manifest;
pub mod correlate;
pub mod evaluate;
pub mod mix_noise;
pub mod score_baseline;
pub mod simulate;
pub mod train_baseline;

pub use augment::AugmentArgs;
pub use build_manifest::BuildManifestArgs;
pub use correlate::CorrelateArgs;
pub use evaluate::EvaluateArgs;
pub use mix_noise::MixNoiseArgs;
pub use score_baseline::ScoreBaselineArgs;
pub use simulate::SimulateArgs;
pub use train_baseline::TrainBaselineArgs;
