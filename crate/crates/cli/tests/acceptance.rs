//! Acceptance suite: ten numbered checks covering the metric oracles, the
//! signal chain, and a desk-scale end-to-end replication of the replay
//! effect. Each test prints one `acceptance N (...): PASS|FAIL` line; run
//! with `-- --nocapture` to see the lines for passing checks too.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use airgap_core::audio::AudioBuffer;
use airgap_core::detector::{
    extract_features, logistic_loss_grad, score, train, FeatureConfig, TrainConfig,
};
use airgap_core::manifest::{
    build_manifest, AudioPool, Label, ALL_ARCHITECTURES, ALL_LANGUAGES,
};
use airgap_core::metrics::{eer_from_scores, pearson};
use airgap_core::noise::{generate_noise, mix_at_snr, NoiseKind, NoiseSpec, SnrTarget};
use airgap_core::replay::{convolve, convolve_fft, convolve_full, simulate_replay, Rir};
use airgap_core::seed::derive_seed;
use airgap_core::{DetectorModel, FeatureVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;

use common::{assert_ok, build_corpus, run, snapshot};

fn verdict(number: u32, name: &str, ok: bool, detail: &str) {
    println!(
        "acceptance {number:2} ({name}): {} [{detail}]",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "acceptance {number} ({name}) failed: {detail}");
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Reference EER: walk every distinct score ascending plus a sentinel past
/// the top, read both error rates off sorted copies, and interpolate where
/// their difference changes sign.
fn reference_eer(spoof: &[f64], bona: &[f64]) -> f64 {
    let mut thresholds: Vec<f64> = spoof.iter().chain(bona).copied().collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    let mut spoof_sorted = spoof.to_vec();
    spoof_sorted.sort_by(f64::total_cmp);
    let mut bona_sorted = bona.to_vec();
    bona_sorted.sort_by(f64::total_cmp);

    let mut points: Vec<(f64, f64)> = thresholds
        .iter()
        .map(|&t| {
            let below_bona = bona_sorted.partition_point(|&s| s < t);
            let far = (bona_sorted.len() - below_bona) as f64 / bona_sorted.len() as f64;
            let frr =
                spoof_sorted.partition_point(|&s| s < t) as f64 / spoof_sorted.len() as f64;
            (far, frr)
        })
        .collect();
    points.push((0.0, 1.0));

    let mut prev = points[0];
    if prev.0 == prev.1 {
        return prev.0;
    }
    for &(far, frr) in &points[1..] {
        if far == frr {
            return far;
        }
        let (prev_d, d) = (prev.0 - prev.1, far - frr);
        if prev_d > 0.0 && d < 0.0 {
            let alpha = prev_d / (prev_d - d);
            return prev.0 + alpha * (far - prev.0);
        }
        prev = (far, frr);
    }
    unreachable!("the rate difference crosses zero by the sentinel")
}

#[test]
fn acceptance_01_eer_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for case in 0..100 {
        let n_spoof = rng.random_range(20..=500);
        let n_bona = rng.random_range(20..=500);
        let shift = rng.random_range(0.0..2.0);
        let quantize = case % 2 == 0;
        let mut draw = |n: usize, offset: f64| -> Vec<f64> {
            (0..n)
                .map(|_| {
                    let v = offset + normal(&mut rng);
                    if quantize {
                        (v * 50.0).round() / 50.0
                    } else {
                        v
                    }
                })
                .collect()
        };
        let spoof = draw(n_spoof, shift);
        let bona = draw(n_bona, 0.0);
        let got = eer_from_scores(&spoof, &bona).eer;
        let want = reference_eer(&spoof, &bona);
        worst = worst.max((got - want).abs());
    }
    let separable = eer_from_scores(&[0.7, 0.8, 0.9], &[0.1, 0.2, 0.3]).eer;
    let swapped = eer_from_scores(&[0.1, 0.2, 0.3], &[0.7, 0.8, 0.9]).eer;
    let elapsed = start.elapsed();
    let ok = worst <= 1e-9
        && separable == 0.0
        && swapped == 1.0
        && elapsed < Duration::from_secs(10);
    verdict(
        1,
        "EER oracle",
        ok,
        &format!("max |diff| {worst:.2e}, separable {separable}, swapped {swapped}, {elapsed:.2?}"),
    );
}

#[test]
fn acceptance_02_convolution_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(1..=512);
        let m = rng.random_range(1..=128);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let h: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let got = convolve_fft(&x, &h);
        let mut want = vec![0.0f64; n + m - 1];
        for (i, &xi) in x.iter().enumerate() {
            for (j, &hj) in h.iter().enumerate() {
                want[i + j] += xi * hj;
            }
        }
        let scale = want.iter().fold(1e-30f64, |a, v| a.max(v.abs()));
        for (g, w) in got.iter().zip(&want) {
            worst = worst.max((g - w).abs() / scale);
        }
    }
    let signal = AudioBuffer::new(
        (0..4_000).map(|i| (0.002 * i as f64).sin() * 0.7).collect(),
        16_000,
    );
    let delta = Rir {
        impulse: AudioBuffer::new(vec![1.0f64], 16_000),
        uid: "delta".into(),
        mic: String::new(),
        speaker: String::new(),
    };
    let identity = convolve(&signal, &delta).unwrap().samples == signal.samples;
    let elapsed = start.elapsed();
    let ok = worst <= 1e-9 && identity && elapsed < Duration::from_secs(5);
    verdict(
        2,
        "convolution oracle",
        ok,
        &format!("max relative error {worst:.2e}, delta identity {identity}, {elapsed:.2?}"),
    );
}

#[test]
fn acceptance_03_snr_fidelity() {
    let start = Instant::now();
    let signal = AudioBuffer::new(
        (0..16_000)
            .map(|i| {
                let t = i as f64 / 16_000.0;
                0.4 * (2.0 * PI * 220.0 * t).sin() + 0.2 * (2.0 * PI * 1_330.0 * t).sin()
            })
            .collect::<Vec<f64>>(),
        16_000,
    );
    let mut worst = 0.0f64;
    for kind in [NoiseKind::Gaussian, NoiseKind::White, NoiseKind::Pink] {
        for seed in 0..30u64 {
            for target in [15.0, 20.0, 30.0, 40.0] {
                let spec = NoiseSpec {
                    kind,
                    seed: derive_seed(303, &[kind.name(), &seed.to_string(), &target.to_string()]),
                    target_snr_db: SnrTarget::Fixed(target),
                };
                let mixed = mix_at_snr(&signal, &spec).unwrap();
                // Re-measure from the mixture: subtract the (rescaled) input
                // to recover the noise addend.
                let c = mixed.post_scale;
                let mut signal_power = 0.0;
                let mut noise_power = 0.0;
                for (y, &s) in mixed.mixture.samples.iter().zip(&signal.samples) {
                    let scaled = c * s;
                    signal_power += scaled * scaled;
                    let n = y - scaled;
                    noise_power += n * n;
                }
                let measured = 10.0 * (signal_power / noise_power).log10();
                worst = worst.max((measured - target).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    let ok = worst <= 0.1 && elapsed < Duration::from_secs(30);
    verdict(
        3,
        "SNR fidelity",
        ok,
        &format!("max |measured - target| {worst:.2e} dB, {elapsed:.2?}"),
    );
}

#[test]
fn acceptance_04_pink_spectrum_slope() {
    let n = 1 << 20;
    let noise = generate_noise::<f64>(NoiseKind::Pink, n, 16_000, 404);
    let mut spectrum: Vec<Complex<f64>> = noise
        .samples
        .iter()
        .map(|&s| Complex::new(s, 0.0))
        .collect();
    rustfft::FftPlanner::new()
        .plan_fft_forward(n)
        .process(&mut spectrum);

    // Log-spaced bins over k = 1..n/2; power within a bin is averaged before
    // taking logs so the chi-square scatter of single periodogram points
    // cancels out.
    let bins = 30usize;
    let lo = 1.0f64.log10();
    let hi = (n as f64 / 2.0).log10();
    let mut power_sum = vec![0.0f64; bins];
    let mut log_k_sum = vec![0.0f64; bins];
    let mut count = vec![0usize; bins];
    for (k, value) in spectrum.iter().enumerate().take(n / 2 + 1).skip(1) {
        let pos = ((k as f64).log10() - lo) / (hi - lo);
        let bin = ((pos * bins as f64) as usize).min(bins - 1);
        power_sum[bin] += value.norm_sqr();
        log_k_sum[bin] += (k as f64).log10();
        count[bin] += 1;
    }
    let points: Vec<(f64, f64)> = (0..bins)
        .filter(|&b| count[b] >= 16)
        .map(|b| {
            let m = count[b] as f64;
            (log_k_sum[b] / m, (power_sum[b] / m).log10())
        })
        .collect();
    let m = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / m;
    let mut num = 0.0;
    let mut den = 0.0;
    for &(x, y) in &points {
        num += (x - mean_x) * (y - mean_y);
        den += (x - mean_x) * (x - mean_x);
    }
    let slope = num / den;
    let ok = (slope + 1.0).abs() <= 0.15;
    verdict(
        4,
        "pink noise spectrum",
        ok,
        &format!("log-log slope {slope:.3} over {} bins", points.len()),
    );
}

#[test]
fn acceptance_05_manifest_arithmetic() {
    let mut bona = AudioPool::new(Label::BonaFide);
    let mut spoof = AudioPool::new(Label::Spoof);
    for language in ALL_LANGUAGES {
        bona.add_cell(
            language,
            None,
            (0..45)
                .map(|i| format!("bona/{language}/clip{i:02}.wav"))
                .collect(),
        )
        .unwrap();
        for architecture in ALL_ARCHITECTURES {
            spoof
                .add_cell(
                    language,
                    Some(architecture),
                    (0..12)
                        .map(|i| format!("spoof/{language}/{architecture}/clip{i:02}.wav"))
                        .collect(),
                )
                .unwrap();
        }
    }
    let uids: Vec<String> = (0..109).map(|i| format!("id_{i}")).collect();
    let manifest = build_manifest(&bona, &spoof, &uids, 10, 7).unwrap();

    let total = manifest.entries.len();
    let mut per_uid_ok = true;
    let mut balance_ok = true;
    for uid in &uids {
        let in_uid: Vec<_> = manifest.entries.iter().filter(|e| &e.uid == uid).collect();
        per_uid_ok &= in_uid.len() == 480;
        let spoofs = in_uid.iter().filter(|e| e.label == Label::Spoof).count();
        balance_ok &= spoofs * 2 == in_uid.len();
    }
    let single = build_manifest(&bona, &spoof, &uids[..1], 1, 7).unwrap();

    let ok = total == 52_320 && per_uid_ok && balance_ok && single.entries.len() == 48;
    verdict(
        5,
        "manifest arithmetic",
        ok,
        &format!(
            "total {total}, 480/uid {per_uid_ok}, 1:1 balance {balance_ok}, single-setup n=1 gives {}",
            single.entries.len()
        ),
    );
}

#[test]
fn acceptance_06_pearson_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst = 0.0f64;
    let mut exact = true;
    for _ in 0..100 {
        let n = rng.random_range(2..=200);
        let x: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|&v| 0.6 * v + 0.8 * normal(&mut rng))
            .collect();
        let got = match pearson(&x, &y) {
            Ok(r) => r,
            // Zero variance can only come from a constant draw; skip it.
            Err(_) => continue,
        };

        let nf = n as f64;
        let ex = x.iter().sum::<f64>() / nf;
        let ey = y.iter().sum::<f64>() / nf;
        let exy = x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() / nf;
        let exx = x.iter().map(|a| a * a).sum::<f64>() / nf;
        let eyy = y.iter().map(|b| b * b).sum::<f64>() / nf;
        let want = (exy - ex * ey) / ((exx - ex * ex) * (eyy - ey * ey)).sqrt();
        worst = worst.max((got - want).abs());

        let neg: Vec<f64> = x.iter().map(|&v| -v).collect();
        exact &= pearson(&neg, &y).unwrap() == -got;
        let doubled: Vec<f64> = x.iter().map(|&v| 4.0 * v).collect();
        exact &= pearson(&doubled, &y).unwrap() == got;
        let affine: Vec<f64> = x.iter().map(|&v| 1.3 * v + 0.7).collect();
        worst = worst.max((pearson(&affine, &y).unwrap() - got).abs());
    }
    let ok = worst <= 1e-9 && exact;
    verdict(
        6,
        "Pearson oracle",
        ok,
        &format!("max |diff| {worst:.2e}, negation and power-of-two scaling exact: {exact}"),
    );
}

#[test]
fn acceptance_07_gradient_check() {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let dims = 12;
    let rows: Vec<Vec<f64>> = (0..40)
        .map(|_| (0..dims).map(|_| normal(&mut rng)).collect())
        .collect();
    let targets: Vec<f64> = (0..rows.len())
        .map(|i| f64::from(u8::from(i % 3 == 0)))
        .collect();

    let step = 1e-5;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let weights: Vec<f64> = (0..dims).map(|_| 0.6 * normal(&mut rng)).collect();
        let bias = 0.6 * normal(&mut rng);
        let (_, grad_w, grad_b) = logistic_loss_grad(&weights, bias, &rows, &targets);
        for i in 0..=dims {
            let loss_at = |delta: f64| -> f64 {
                let mut w = weights.clone();
                let mut b = bias;
                if i < dims {
                    w[i] += delta;
                } else {
                    b += delta;
                }
                logistic_loss_grad(&w, b, &rows, &targets).0
            };
            let numeric = (loss_at(step) - loss_at(-step)) / (2.0 * step);
            let analytic = if i < dims { grad_w[i] } else { grad_b };
            let rel =
                (numeric - analytic).abs() / (numeric.abs() + analytic.abs()).max(1e-6);
            worst = worst.max(rel);
        }
    }
    let ok = worst < 1e-4;
    verdict(
        7,
        "gradient check",
        ok,
        &format!("max relative error {worst:.2e} over 20 points"),
    );
}

// ---- Synthetic end-to-end corpus (checks 8 and 9) ----------------------

const FS: u32 = 16_000;
const CLIP_LEN: usize = 8_000;
const TRAIN_PER_CLASS: usize = 220;
const TEST_PER_CLASS: usize = 100;

/// 129-tap linear-phase FIR with a +8 dB gaussian bump at 3.1 kHz: the fixed
/// spectral artifact that marks the synthetic spoof class.
fn artifact_filter() -> Vec<f64> {
    let taps = 129usize;
    let grid = 512usize;
    let half = (taps / 2) as isize;
    let gain = |f: f64| -> f64 {
        let boost = 10f64.powf(8.0 / 20.0) - 1.0;
        1.0 + boost * (-((f - 3_100.0) / 220.0).powi(2) / 2.0).exp()
    };
    let mut taps_out = vec![0.0f64; taps];
    for (m, tap) in taps_out.iter_mut().enumerate() {
        let lag = (m as isize - half) as f64;
        let mut acc = gain(0.0);
        for k in 1..grid / 2 {
            let f = k as f64 * f64::from(FS) / grid as f64;
            acc += 2.0 * gain(f) * (2.0 * PI * k as f64 * lag / grid as f64).cos();
        }
        acc += gain(f64::from(FS) / 2.0) * (PI * lag).cos();
        let window = 0.5 - 0.5 * (2.0 * PI * m as f64 / (taps - 1) as f64).cos();
        *tap = acc * window / grid as f64;
    }
    taps_out
}

fn make_clip(label: Label, index: usize, artifact: &[f64]) -> AudioBuffer<f64> {
    let seed = derive_seed(8_800, &["clip", label.code(), &index.to_string()]);
    let base = generate_noise::<f64>(NoiseKind::Gaussian, CLIP_LEN, FS, seed);
    // The artifact filter has unit gain away from its bump, so those bands
    // stay distributed exactly like the bona fide class.
    let samples = match label {
        Label::BonaFide => base.samples,
        Label::Spoof => {
            let mut filtered = convolve_full(&base.samples, artifact);
            filtered.truncate(CLIP_LEN);
            filtered
        }
    };
    AudioBuffer::new(samples, FS)
}

/// Synthetic replay channel: a direct path plus an exponentially decaying
/// diffuse tail, shaped by a one-pole lowpass whose corner falls below the
/// artifact band.
fn make_rir(seed: u64) -> Rir<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = 2_400usize;
    let tau: f64 = rng.random_range(300.0..1_200.0);
    let corner: f64 = rng.random_range(1_200.0..2_600.0);
    let mut h = vec![0.0f64; len];
    h[0] = 1.0;
    for (i, slot) in h.iter_mut().enumerate().skip(1) {
        *slot = 0.35 * normal(&mut rng) * (-(i as f64) / tau).exp();
    }
    let alpha = (-2.0 * PI * corner / f64::from(FS)).exp();
    let mut state = 0.0;
    for s in &mut h {
        state = alpha * state + (1.0 - alpha) * *s;
        *s = state;
    }
    let peak = h.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    for s in &mut h {
        *s /= peak;
    }
    Rir {
        impulse: AudioBuffer::new(h, FS),
        uid: format!("rir_{seed}"),
        mic: String::new(),
        speaker: String::new(),
    }
}

struct Corpus {
    train_clips: Vec<AudioBuffer<f64>>,
    train_labels: Vec<Label>,
    test_spoof: Vec<AudioBuffer<f64>>,
    test_bona: Vec<AudioBuffer<f64>>,
}

fn build_synthetic_corpus() -> Corpus {
    let artifact = artifact_filter();
    let mut train_clips = Vec::new();
    let mut train_labels = Vec::new();
    for i in 0..TRAIN_PER_CLASS {
        for label in [Label::BonaFide, Label::Spoof] {
            train_clips.push(make_clip(label, i, &artifact));
            train_labels.push(label);
        }
    }
    let test = |label| -> Vec<AudioBuffer<f64>> {
        (TRAIN_PER_CLASS..TRAIN_PER_CLASS + TEST_PER_CLASS)
            .map(|i| make_clip(label, i, &artifact))
            .collect()
    };
    Corpus {
        train_clips,
        train_labels,
        test_spoof: test(Label::Spoof),
        test_bona: test(Label::BonaFide),
    }
}

fn feature_rows(clips: &[AudioBuffer<f64>], config: &FeatureConfig) -> Vec<FeatureVector> {
    clips
        .iter()
        .map(|c| extract_features(c, config).unwrap())
        .collect()
}

fn fit(clips: &[AudioBuffer<f64>], labels: &[Label], config: &FeatureConfig) -> DetectorModel {
    train(
        &feature_rows(clips, config),
        labels,
        config,
        &TrainConfig::default(),
    )
    .unwrap()
    .model
}

/// Fraction of clips landing on `label`'s side of the 0.5 threshold.
fn class_accuracy(
    model: &DetectorModel,
    clips: &[AudioBuffer<f64>],
    label: Label,
    config: &FeatureConfig,
) -> f64 {
    let hits = clips
        .iter()
        .filter(|c| {
            let s = score(model, &extract_features(*c, config).unwrap()).unwrap();
            match label {
                Label::Spoof => s > 0.5,
                Label::BonaFide => s <= 0.5,
            }
        })
        .count();
    hits as f64 / clips.len() as f64
}

fn replayed(clips: &[AudioBuffer<f64>], rirs: &[Rir<f64>]) -> Vec<AudioBuffer<f64>> {
    clips
        .iter()
        .enumerate()
        .map(|(i, c)| simulate_replay(c, &rirs[i % rirs.len()], None).unwrap().audio)
        .collect()
}

fn test_rirs() -> Vec<Rir<f64>> {
    (0..5).map(|i| make_rir(900 + i)).collect()
}

#[test]
fn acceptance_08_replay_degrades_and_augmentation_recovers() {
    let start = Instant::now();
    let corpus = build_synthetic_corpus();
    let config = FeatureConfig::default();
    let clean_model = fit(&corpus.train_clips, &corpus.train_labels, &config);

    let rirs = test_rirs();
    let spoof_replayed = replayed(&corpus.test_spoof, &rirs);
    let bona_replayed = replayed(&corpus.test_bona, &rirs);

    let clean_spoof = class_accuracy(&clean_model, &corpus.test_spoof, Label::Spoof, &config);
    let clean_bona = class_accuracy(&clean_model, &corpus.test_bona, Label::BonaFide, &config);
    let replay_spoof = class_accuracy(&clean_model, &spoof_replayed, Label::Spoof, &config);
    let replay_bona = class_accuracy(&clean_model, &bona_replayed, Label::BonaFide, &config);
    let drop = clean_spoof - replay_spoof;
    let bona_shift = (clean_bona - replay_bona).abs();

    // Adaptive defender: retrain with half the training clips pushed
    // through held-out replay channels.
    let train_rirs: Vec<Rir<f64>> = (0..12).map(|i| make_rir(700 + i)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(4_242);
    let augmented: Vec<AudioBuffer<f64>> = corpus
        .train_clips
        .iter()
        .map(|c| {
            if rng.random::<f64>() < 0.5 {
                let rir = &train_rirs[rng.random_range(0..train_rirs.len())];
                simulate_replay(c, rir, None).unwrap().audio
            } else {
                c.clone()
            }
        })
        .collect();
    let adapted_model = fit(&augmented, &corpus.train_labels, &config);
    let adapted_spoof = class_accuracy(&adapted_model, &spoof_replayed, Label::Spoof, &config);
    let recovered = (adapted_spoof - replay_spoof) / drop;

    let elapsed = start.elapsed();
    let ok = drop >= 0.10
        && bona_shift < 0.05
        && recovered >= 0.25
        && elapsed < Duration::from_secs(300);
    verdict(
        8,
        "replay effect and adaptive defender",
        ok,
        &format!(
            "spoof {clean_spoof:.2} -> {replay_spoof:.2} under replay (drop {:.0} pts), \
             bona shift {:.1} pts, retrained spoof {adapted_spoof:.2} (recovered {:.0}%), {elapsed:.2?}",
            drop * 100.0,
            bona_shift * 100.0,
            recovered * 100.0
        ),
    );
}

#[test]
fn acceptance_09_noise_is_not_the_replay_effect() {
    let corpus = build_synthetic_corpus();
    let config = FeatureConfig::default();
    let clean_model = fit(&corpus.train_clips, &corpus.train_labels, &config);

    let clean_spoof = class_accuracy(&clean_model, &corpus.test_spoof, Label::Spoof, &config);
    let kinds = [NoiseKind::Gaussian, NoiseKind::White, NoiseKind::Pink];
    let noisy: Vec<AudioBuffer<f64>> = corpus
        .test_spoof
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let spec = NoiseSpec {
                kind: kinds[i % kinds.len()],
                seed: derive_seed(909, &["noisy", &i.to_string()]),
                target_snr_db: SnrTarget::Range { lo: 15.0, hi: 40.0 },
            };
            mix_at_snr(c, &spec).unwrap().mixture
        })
        .collect();
    let noisy_spoof = class_accuracy(&clean_model, &noisy, Label::Spoof, &config);

    let replayed_spoof = replayed(&corpus.test_spoof, &test_rirs());
    let replay_spoof = class_accuracy(&clean_model, &replayed_spoof, Label::Spoof, &config);

    let noise_shift = (clean_spoof - noisy_spoof).abs();
    let replay_shift = clean_spoof - replay_spoof;
    let ok = noise_shift < 0.05 && replay_shift >= 0.10;
    verdict(
        9,
        "noise ablation",
        ok,
        &format!(
            "additive noise moves spoof accuracy {:.1} pts, replay moves it {:.0} pts",
            noise_shift * 100.0,
            replay_shift * 100.0
        ),
    );
}

#[test]
fn acceptance_10_seeded_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    build_corpus(root);

    let mut all_equal = true;
    let mut rerun = |args: &[&str], outputs: &[&str]| {
        let first: Vec<_> = {
            assert_ok(&run(root, args));
            outputs.iter().map(|o| snapshot(&root.join(o))).collect()
        };
        assert_ok(&run(root, args));
        let second: Vec<_> = outputs.iter().map(|o| snapshot(&root.join(o))).collect();
        all_equal &= first == second;
    };

    rerun(
        &[
            "build-manifest",
            "--pools",
            "pools.json",
            "--uids",
            "uids.txt",
            "--n",
            "1",
            "--seed",
            "11",
            "--out",
            "manifest.jsonl",
        ],
        &["manifest.jsonl"],
    );
    rerun(
        &[
            "simulate",
            "--manifest",
            "manifest.jsonl",
            "--rir-dir",
            "rirs",
            "--out",
            "recorded",
            "--seed",
            "3",
            "--noise-kind",
            "pink",
            "--snr",
            "15..40",
        ],
        &["recorded"],
    );
    rerun(
        &[
            "mix-noise",
            "--manifest",
            "manifest.jsonl",
            "--kind",
            "white",
            "--snr",
            "18..36",
            "--seed",
            "5",
            "--out",
            "noisy",
        ],
        &["noisy"],
    );
    rerun(
        &[
            "augment",
            "--manifest",
            "manifest.jsonl",
            "--rir-dir",
            "rirs",
            "--probability",
            "0.6",
            "--seed",
            "9",
            "--out",
            "aug",
            "--out-manifest",
            "augmented.jsonl",
        ],
        &["aug", "augmented.jsonl"],
    );

    verdict(
        10,
        "determinism",
        all_equal,
        "rebuild, replay, noise, and augmentation reruns compared byte for byte",
    );
}
