pub mod audio;
pub mod detector;
pub(crate) mod fft;
pub mod manifest;
pub mod metrics;
pub mod noise;
pub mod replay;
pub mod report;
pub mod resample;
pub mod sample;
pub mod seed;
pub mod wav;

pub use sample::Sample;

pub type AudioBuffer = audio::AudioBuffer<f64>;
pub type MixResult = noise::MixResult<f64>;
pub type Rir = replay::Rir<f64>;
pub type RirBank = replay::RirBank<f64>;
pub type DetectorModel = detector::DetectorModel<f64>;
pub type FeatureVector = detector::FeatureVector<f64>;
