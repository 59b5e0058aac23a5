//! RIFF/WAVE reading and writing.
//!
//! Readable: 16-bit PCM and 32-bit IEEE float, any channel count (downmixed
//! to mono by frame-wise mean), plain or WAVE_FORMAT_EXTENSIBLE headers.
//! Unknown chunks are skipped. Written files are always mono, 16-bit PCM or
//! 32-bit float.

use std::fs;
use std::path::Path;

use crate::audio::{AudioBuffer, AudioError};
use crate::sample::Sample;

const TAG_PCM: u16 = 0x0001;
const TAG_FLOAT: u16 = 0x0003;
const TAG_EXTENSIBLE: u16 = 0xfffe;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WavEncoding {
    Pcm16,
    Float32,
}

fn io_err(path: &Path, source: std::io::Error) -> AudioError {
    AudioError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn format_err(path: &Path, chunk: &'static str, detail: impl Into<String>) -> AudioError {
    AudioError::Format {
        path: path.display().to_string(),
        chunk,
        detail: detail.into(),
    }
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

struct Fmt {
    format_tag: u16,
    channels: u16,
    sample_rate: u32,
    bits_per_sample: u16,
}

fn parse_fmt(path: &Path, chunk: &[u8]) -> Result<Fmt, AudioError> {
    if chunk.len() < 16 {
        return Err(format_err(
            path,
            "fmt ",
            format!("{} bytes, expected at least 16", chunk.len()),
        ));
    }
    let mut format_tag = u16_at(chunk, 0);
    let channels = u16_at(chunk, 2);
    let sample_rate = u32_at(chunk, 4);
    let bits_per_sample = u16_at(chunk, 14);
    if format_tag == TAG_EXTENSIBLE {
        // Sub-format GUID starts at byte 24; its first two bytes are the
        // effective format tag.
        if chunk.len() < 26 {
            return Err(format_err(path, "fmt ", "extensible header truncated"));
        }
        format_tag = u16_at(chunk, 24);
    }
    if channels == 0 {
        return Err(format_err(path, "fmt ", "zero channels"));
    }
    if sample_rate == 0 {
        return Err(format_err(path, "fmt ", "zero sample rate"));
    }
    Ok(Fmt {
        format_tag,
        channels,
        sample_rate,
        bits_per_sample,
    })
}

/// Reads a WAV file as a mono buffer. Multichannel input is downmixed by
/// taking the per-frame mean over channels.
pub fn read_wav<T: Sample>(path: impl AsRef<Path>) -> Result<AudioBuffer<T>, AudioError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;

    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" {
        return Err(format_err(path, "RIFF", "missing RIFF magic"));
    }
    if &bytes[8..12] != b"WAVE" {
        return Err(format_err(path, "WAVE", "missing WAVE form type"));
    }

    let mut fmt: Option<Fmt> = None;
    let mut pos = 12usize;
    while pos + 8 <= bytes.len() {
        let id: [u8; 4] = bytes[pos..pos + 4].try_into().unwrap();
        let size = u32_at(&bytes, pos + 4) as usize;
        let body_start = pos + 8;
        let body_end = body_start + size;
        if body_end > bytes.len() {
            let chunk: &'static str = match &id {
                b"fmt " => "fmt ",
                b"data" => "data",
                _ => "RIFF",
            };
            return Err(format_err(path, chunk, "chunk overruns end of file"));
        }
        let body = &bytes[body_start..body_end];
        match &id {
            b"fmt " => fmt = Some(parse_fmt(path, body)?),
            b"data" => {
                let fmt = fmt
                    .as_ref()
                    .ok_or_else(|| format_err(path, "fmt ", "no fmt chunk before data"))?;
                return decode_data(path, fmt, body);
            }
            _ => {}
        }
        // Chunk bodies are word-aligned; odd sizes carry a pad byte.
        pos = body_end + (size & 1);
    }
    Err(format_err(path, "data", "missing data chunk"))
}

fn decode_data<T: Sample>(path: &Path, fmt: &Fmt, data: &[u8]) -> Result<AudioBuffer<T>, AudioError> {
    let bytes_per_sample = match (fmt.format_tag, fmt.bits_per_sample) {
        (TAG_PCM, 16) => 2,
        (TAG_FLOAT, 32) => 4,
        _ => {
            return Err(AudioError::UnsupportedEncoding {
                path: path.display().to_string(),
                format_tag: fmt.format_tag,
                bits_per_sample: fmt.bits_per_sample,
            })
        }
    };
    let frame_size = bytes_per_sample * fmt.channels as usize;
    if !data.len().is_multiple_of(frame_size) {
        return Err(format_err(
            path,
            "data",
            format!(
                "{} bytes is not a whole number of {}-byte frames",
                data.len(),
                frame_size
            ),
        ));
    }
    let frames = data.len() / frame_size;
    let channels = fmt.channels as usize;
    let inv_channels = 1.0 / channels as f64;
    let mut samples = Vec::with_capacity(frames);
    for f in 0..frames {
        let frame = &data[f * frame_size..(f + 1) * frame_size];
        let mut acc = 0.0f64;
        for c in 0..channels {
            let at = c * bytes_per_sample;
            acc += match bytes_per_sample {
                2 => f64::from(i16::from_le_bytes([frame[at], frame[at + 1]])) / 32768.0,
                _ => f64::from(f32::from_le_bytes([
                    frame[at],
                    frame[at + 1],
                    frame[at + 2],
                    frame[at + 3],
                ])),
            };
        }
        samples.push(T::of(acc * inv_channels));
    }
    Ok(AudioBuffer::new(samples, fmt.sample_rate))
}

/// Writes a mono WAV file. PCM output clamps samples to `[-1, 32767/32768]`
/// before quantizing; float output casts to `f32`.
pub fn write_wav<T: Sample>(
    path: impl AsRef<Path>,
    buffer: &AudioBuffer<T>,
    encoding: WavEncoding,
) -> Result<(), AudioError> {
    let path = path.as_ref();
    let n = buffer.samples.len();
    let (format_tag, bits): (u16, u16) = match encoding {
        WavEncoding::Pcm16 => (TAG_PCM, 16),
        WavEncoding::Float32 => (TAG_FLOAT, 32),
    };
    let bytes_per_sample = usize::from(bits / 8);
    let data_size = n * bytes_per_sample;

    let mut out = Vec::with_capacity(44 + data_size);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_size as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&format_tag.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&buffer.sample_rate.to_le_bytes());
    let byte_rate = buffer.sample_rate * bytes_per_sample as u32;
    out.extend_from_slice(&byte_rate.to_le_bytes());
    out.extend_from_slice(&(bytes_per_sample as u16).to_le_bytes());
    out.extend_from_slice(&bits.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_size as u32).to_le_bytes());
    match encoding {
        WavEncoding::Pcm16 => {
            for &s in &buffer.samples {
                let v = s.to64().clamp(-1.0, 32767.0 / 32768.0);
                let q = (v * 32768.0).round() as i16;
                out.extend_from_slice(&q.to_le_bytes());
            }
        }
        WavEncoding::Float32 => {
            for &s in &buffer.samples {
                out.extend_from_slice(&(s.to64() as f32).to_le_bytes());
            }
        }
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn wav_path(dir: &tempfile::TempDir, name: &str) -> std::path::PathBuf {
        dir.path().join(name)
    }

    #[test]
    fn float32_round_trip_is_exact() {
        let dir = tempdir().unwrap();
        let p = wav_path(&dir, "rt.wav");
        // Values chosen exactly representable in f32.
        let samples: Vec<f64> = (0..1000)
            .map(|i| f64::from(((i * 37) % 2001 - 1000) as f32 / 1000.0f32))
            .collect();
        let buf = AudioBuffer::new(samples, 16_000);
        write_wav(&p, &buf, WavEncoding::Float32).unwrap();
        let back: AudioBuffer<f64> = read_wav(&p).unwrap();
        assert_eq!(back.sample_rate, 16_000);
        assert_eq!(back.samples, buf.samples);
    }

    #[test]
    fn all_zero_pcm16_writes_zero_sample_bytes() {
        let dir = tempdir().unwrap();
        let p = wav_path(&dir, "zero.wav");
        let buf = AudioBuffer::new(vec![0.0f64; 64], 8_000);
        write_wav(&p, &buf, WavEncoding::Pcm16).unwrap();
        let bytes = fs::read(&p).unwrap();
        assert_eq!(bytes.len(), 44 + 128);
        assert!(bytes[44..].iter().all(|&b| b == 0));
    }

    #[test]
    fn pcm16_clamps_out_of_range() {
        let dir = tempdir().unwrap();
        let p = wav_path(&dir, "clip.wav");
        let buf = AudioBuffer::new(vec![2.0f64, -2.0], 8_000);
        write_wav(&p, &buf, WavEncoding::Pcm16).unwrap();
        let bytes = fs::read(&p).unwrap();
        let hi = i16::from_le_bytes([bytes[44], bytes[45]]);
        let lo = i16::from_le_bytes([bytes[46], bytes[47]]);
        assert_eq!(hi, i16::MAX);
        assert_eq!(lo, i16::MIN);
    }

    /// Builds a WAV byte image by hand: `chunks` are (id, body) pairs laid
    /// out after the RIFF/WAVE preamble.
    fn riff(chunks: &[(&[u8; 4], Vec<u8>)]) -> Vec<u8> {
        let mut body = Vec::new();
        for (id, data) in chunks {
            body.extend_from_slice(*id);
            body.extend_from_slice(&(data.len() as u32).to_le_bytes());
            body.extend_from_slice(data);
            if data.len() % 2 == 1 {
                body.push(0);
            }
        }
        let mut out = Vec::new();
        out.extend_from_slice(b"RIFF");
        out.extend_from_slice(&(4 + body.len() as u32).to_le_bytes());
        out.extend_from_slice(b"WAVE");
        out.extend_from_slice(&body);
        out
    }

    fn fmt_chunk(tag: u16, channels: u16, rate: u32, bits: u16) -> Vec<u8> {
        let mut c = Vec::new();
        c.extend_from_slice(&tag.to_le_bytes());
        c.extend_from_slice(&channels.to_le_bytes());
        c.extend_from_slice(&rate.to_le_bytes());
        let block = u32::from(channels) * u32::from(bits / 8);
        c.extend_from_slice(&(rate * block).to_le_bytes());
        c.extend_from_slice(&(block as u16).to_le_bytes());
        c.extend_from_slice(&bits.to_le_bytes());
        c
    }

    #[test]
    fn stereo_pcm_downmixes_by_mean() {
        let dir = tempdir().unwrap();
        let p = wav_path(&dir, "stereo.wav");
        let mut data = Vec::new();
        for (l, r) in [(8192i16, 16384i16), (-8192, 8192)] {
            data.extend_from_slice(&l.to_le_bytes());
            data.extend_from_slice(&r.to_le_bytes());
        }
        let img = riff(&[
            (b"fmt ", fmt_chunk(TAG_PCM, 2, 44_100, 16)),
            (b"LIST", vec![1, 2, 3]),
            (b"data", data),
        ]);
        fs::write(&p, img).unwrap();
        let buf: AudioBuffer<f64> = read_wav(&p).unwrap();
        assert_eq!(buf.sample_rate, 44_100);
        assert_eq!(buf.len(), 2);
        assert!((buf.samples[0] - 0.375).abs() < 1e-12);
        assert!((buf.samples[1] - 0.0).abs() < 1e-12);
    }

    #[test]
    fn extensible_float32_reads() {
        let dir = tempdir().unwrap();
        let p = wav_path(&dir, "ext.wav");
        let mut fmt = fmt_chunk(TAG_EXTENSIBLE, 1, 16_000, 32);
        fmt.extend_from_slice(&22u16.to_le_bytes());
        fmt.extend_from_slice(&32u16.to_le_bytes());
        fmt.extend_from_slice(&0u32.to_le_bytes());
        fmt.extend_from_slice(&TAG_FLOAT.to_le_bytes());
        fmt.extend_from_slice(&[0u8; 14]);
        let mut data = Vec::new();
        data.extend_from_slice(&0.25f32.to_le_bytes());
        let img = riff(&[(b"fmt ", fmt), (b"data", data)]);
        fs::write(&p, img).unwrap();
        let buf: AudioBuffer<f64> = read_wav(&p).unwrap();
        assert_eq!(buf.samples, vec![0.25]);
    }

    #[test]
    fn bad_magic_names_riff_chunk() {
        let dir = tempdir().unwrap();
        let p = wav_path(&dir, "bad.wav");
        fs::write(&p, b"JUNKxxxxxxxxxxxxxxxx").unwrap();
        match read_wav::<f64>(&p) {
            Err(AudioError::Format { chunk, .. }) => assert_eq!(chunk, "RIFF"),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn truncated_data_chunk_names_data() {
        let dir = tempdir().unwrap();
        let p = wav_path(&dir, "trunc.wav");
        let mut img = riff(&[
            (b"fmt ", fmt_chunk(TAG_PCM, 1, 8_000, 16)),
            (b"data", vec![0u8; 64]),
        ]);
        img.truncate(img.len() - 10);
        fs::write(&p, img).unwrap();
        match read_wav::<f64>(&p) {
            Err(AudioError::Format { chunk, .. }) => assert_eq!(chunk, "data"),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn missing_fmt_is_reported() {
        let dir = tempdir().unwrap();
        let p = wav_path(&dir, "nofmt.wav");
        let img = riff(&[(b"data", vec![0u8; 4])]);
        fs::write(&p, img).unwrap();
        match read_wav::<f64>(&p) {
            Err(AudioError::Format { chunk, .. }) => assert_eq!(chunk, "fmt "),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn pcm24_is_unsupported() {
        let dir = tempdir().unwrap();
        let p = wav_path(&dir, "p24.wav");
        let img = riff(&[
            (b"fmt ", fmt_chunk(TAG_PCM, 1, 8_000, 24)),
            (b"data", vec![0u8; 6]),
        ]);
        fs::write(&p, img).unwrap();
        match read_wav::<f64>(&p) {
            Err(AudioError::UnsupportedEncoding {
                format_tag,
                bits_per_sample,
                ..
            }) => {
                assert_eq!(format_tag, TAG_PCM);
                assert_eq!(bits_per_sample, 24);
            }
            other => panic!("expected unsupported encoding, got {other:?}"),
        }
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            read_wav::<f64>("/nonexistent/x.wav"),
            Err(AudioError::Io { .. })
        ));
    }
}
