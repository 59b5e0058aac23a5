//! Shared helpers for the binary tests: subprocess plumbing and a miniature
//! balanced corpus (one setup, one clip per spoof cell).
#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use airgap_core::audio::AudioBuffer;
use airgap_core::manifest::{ALL_ARCHITECTURES, ALL_LANGUAGES};
use airgap_core::wav::{write_wav, WavEncoding};

pub const RATE: u32 = 16_000;

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_airgap")
}

pub fn run(root: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .arg("--root")
        .arg(root)
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr),
    );
}

pub fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

pub fn tone(seed: u64, len: usize) -> AudioBuffer<f64> {
    let hz = 200.0 + (seed % 17) as f64 * 90.0;
    let w = 2.0 * std::f64::consts::PI * hz / f64::from(RATE);
    let samples = (0..len)
        .map(|i| 0.5 * (w * i as f64).sin() + 0.05 * (3.0 * w * i as f64).cos())
        .collect();
    AudioBuffer::new(samples, RATE)
}

/// One setup worth of audio: 4 bona and 4 spoof (one per architecture) per
/// language, enough for `build-manifest --n 1`, plus pools/uids/RIR files.
pub fn build_corpus(root: &Path) {
    let mut cells = Vec::new();
    let mut counter = 0u64;
    for language in ALL_LANGUAGES {
        let bona_dir = root.join(format!("bona/{language}"));
        std::fs::create_dir_all(&bona_dir).unwrap();
        for i in 0..4 {
            counter += 1;
            write_wav(
                bona_dir.join(format!("b{i}.wav")),
                &tone(counter, 3_200),
                WavEncoding::Float32,
            )
            .unwrap();
        }
        cells.push(serde_json::json!({
            "label": "bona fide",
            "language": language.code(),
            "globs": [format!("bona/{language}/*.wav")],
        }));
        for architecture in ALL_ARCHITECTURES {
            let dir = root.join(format!("spoof/{language}/{architecture}"));
            std::fs::create_dir_all(&dir).unwrap();
            counter += 1;
            write_wav(
                dir.join("s0.wav"),
                &tone(counter, 3_200),
                WavEncoding::Float32,
            )
            .unwrap();
            cells.push(serde_json::json!({
                "label": "spoof",
                "language": language.code(),
                "architecture": architecture.code(),
                "globs": [format!("spoof/{language}/{architecture}/*.wav")],
            }));
        }
    }
    std::fs::write(
        root.join("pools.json"),
        serde_json::to_string_pretty(&serde_json::json!({ "cells": cells })).unwrap(),
    )
    .unwrap();
    std::fs::write(root.join("uids.txt"), "id_0\n").unwrap();

    let rir_dir = root.join("rirs/id_0");
    std::fs::create_dir_all(&rir_dir).unwrap();
    write_wav(
        rir_dir.join("RIR.wav"),
        &AudioBuffer::new(vec![1.0f64], RATE),
        WavEncoding::Float32,
    )
    .unwrap();
    std::fs::write(
        rir_dir.join("meta.json"),
        r#"{"mic": "test-mic", "speaker": "test-speaker"}"#,
    )
    .unwrap();
}

/// Sorted (relative path, bytes) pairs for `path`: the file itself, or every
/// file under it when it is a directory.
pub fn snapshot(path: &Path) -> Vec<(String, Vec<u8>)> {
    fn walk(base: &Path, dir: &Path, out: &mut Vec<(String, Vec<u8>)>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(base, &path, out);
            } else {
                let rel = path.strip_prefix(base).unwrap();
                out.push((
                    rel.to_str().unwrap().to_owned(),
                    std::fs::read(&path).unwrap(),
                ));
            }
        }
    }
    let mut out = Vec::new();
    if path.is_file() {
        out.push((String::new(), std::fs::read(path).unwrap()));
    } else if path.is_dir() {
        walk(path, path, &mut out);
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}
