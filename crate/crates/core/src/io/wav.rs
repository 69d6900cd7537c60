use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WavError {
    #[error(transparent)]
    Wav(#[from] hound::Error),
    #[error("unsupported WAV encoding: {0}")]
    Unsupported(String),
}

/// A decoded track: mono, at the engine rate.
#[derive(Clone, Debug, PartialEq)]
pub struct WavTrack {
    pub samples: Vec<f32>,
    pub native_rate: u32,
}

/// Reads 16-bit PCM or 32-bit float WAV with one or two channels.
/// Stereo is averaged to mono; other rates are resampled to `engine_rate`.
pub fn load_wav(path: impl AsRef<Path>, engine_rate: u32) -> Result<WavTrack, WavError> {
    let reader = WavReader::open(path)?;
    let spec = reader.spec();
    if !(1..=2).contains(&spec.channels) {
        return Err(WavError::Unsupported(format!("{} channels", spec.channels)));
    }
    let interleaved: Vec<f32> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| v as f32 / 32768.0))
            .collect::<Result<_, _>>()?,
        (SampleFormat::Float, 32) => reader.into_samples::<f32>().collect::<Result<_, _>>()?,
        (format, bits) => {
            return Err(WavError::Unsupported(format!(
                "{bits}-bit {}",
                match format {
                    SampleFormat::Int => "integer PCM",
                    SampleFormat::Float => "float",
                }
            )))
        }
    };
    let mono = if spec.channels == 2 {
        interleaved
            .chunks_exact(2)
            .map(|f| (f[0] + f[1]) * 0.5)
            .collect()
    } else {
        interleaved
    };
    let samples = if spec.sample_rate == engine_rate {
        mono
    } else {
        resample_linear(&mono, spec.sample_rate, engine_rate)
    };
    Ok(WavTrack {
        samples,
        native_rate: spec.sample_rate,
    })
}

/// Linear-interpolation resampler; output length is `ceil(len * to / from)`.
pub fn resample_linear(input: &[f32], from: u32, to: u32) -> Vec<f32> {
    if input.is_empty() {
        return Vec::new();
    }
    let out_len = (input.len() as u64 * to as u64).div_ceil(from as u64) as usize;
    let step = from as f64 / to as f64;
    let last = input.len() - 1;
    (0..out_len)
        .map(|i| {
            let pos = i as f64 * step;
            let i0 = (pos.floor() as usize).min(last);
            let i1 = (i0 + 1).min(last);
            let frac = (pos - i0 as f64) as f32;
            input[i0] + (input[i1] - input[i0]) * frac
        })
        .collect()
}

/// Writes mono 32-bit float WAV. Samples are stored as given, unclamped.
pub fn save_wav(samples: &[f32], path: impl AsRef<Path>, sample_rate: u32) -> Result<(), WavError> {
    let spec = WavSpec {
        channels: 1,
        sample_rate,
        bits_per_sample: 32,
        sample_format: SampleFormat::Float,
    };
    let mut writer = WavWriter::create(path, spec)?;
    for &s in samples {
        writer.write_sample(s)?;
    }
    writer.finalize()?;
    Ok(())
}
