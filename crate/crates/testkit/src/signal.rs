use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniform full-scale noise in [-1, 1].
pub fn noise(seed: u64, len: usize) -> Vec<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.random_range(-1.0f32..=1.0)).collect()
}

pub fn sine(freq: f64, amplitude: f64, sample_rate: u32, len: usize) -> Vec<f32> {
    (0..len)
        .map(|i| (amplitude * (TAU * freq * i as f64 / sample_rate as f64).sin()) as f32)
        .collect()
}

pub fn constant(value: f32, len: usize) -> Vec<f32> {
    vec![value; len]
}
