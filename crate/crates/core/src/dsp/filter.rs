use std::f64::consts::PI;

use super::effect::{EffectError, EffectKind, EffectSpec};

/// Longest delay a delay line can hold, in seconds.
pub const MAX_DELAY_SECONDS: f64 = 2.0;

const PHASER_STAGES: usize = 4;
const PHASER_CENTER_HZ: f64 = 1000.0;
/// Sweep half-width in octaves at full depth: 250 Hz to 4 kHz around the center.
const PHASER_OCTAVES: f64 = 2.0;

/// Runtime state of one effect instance.
///
/// Output depends only on the spec, the input samples and the state carried
/// from previous calls, so splitting a signal into blocks of any size gives
/// bit-identical results.
#[derive(Clone, Debug)]
pub struct FilterState {
    sample_rate: f64,
    processor: Processor,
    faulted: bool,
}

#[derive(Clone, Debug)]
enum Processor {
    Gain,
    Delay(DelayLine),
    Phaser(Phaser),
    LowPass { y: f64 },
}

impl FilterState {
    pub fn new(kind: EffectKind, sample_rate: u32) -> Self {
        let sample_rate = sample_rate as f64;
        Self {
            sample_rate,
            processor: Processor::new(kind, sample_rate),
            faulted: false,
        }
    }

    pub fn kind(&self) -> EffectKind {
        match self.processor {
            Processor::Gain => EffectKind::Gain,
            Processor::Delay(_) => EffectKind::Delay,
            Processor::Phaser(_) => EffectKind::Phaser,
            Processor::LowPass { .. } => EffectKind::LowPass,
        }
    }

    /// Runs `spec` over `input`, writing `output` (same length).
    ///
    /// A spec of a different kind resets the state. An invalid spec passes
    /// the block through untouched; the error is returned on the first such
    /// block only and re-armed once a valid spec is seen again.
    pub fn process(
        &mut self,
        spec: &EffectSpec,
        input: &[f32],
        output: &mut [f32],
    ) -> Option<EffectError> {
        assert_eq!(input.len(), output.len(), "block length mismatch");
        if spec.kind() != self.kind() {
            self.processor = Processor::new(spec.kind(), self.sample_rate);
        }
        if let Err(err) = spec.validate() {
            output.copy_from_slice(input);
            let first = !self.faulted;
            self.faulted = true;
            return first.then_some(err);
        }
        self.faulted = false;

        let rate = self.sample_rate;
        match (&mut self.processor, *spec) {
            (Processor::Gain, EffectSpec::Gain { g }) => {
                let g = g as f32;
                for (y, x) in output.iter_mut().zip(input) {
                    *y = g * x;
                }
            }
            (Processor::Delay(line), EffectSpec::Delay { time, feedback }) => {
                line.run(time, feedback, rate, input, output);
            }
            (Processor::Phaser(phaser), EffectSpec::Phaser { rate: lfo, depth }) => {
                phaser.run(lfo, depth, rate, input, output);
            }
            (Processor::LowPass { y }, EffectSpec::LowPass { cutoff }) => {
                let alpha = 1.0 - (-2.0 * PI * cutoff / rate).exp();
                for (out, x) in output.iter_mut().zip(input) {
                    *y += alpha * (*x as f64 - *y);
                    *out = *y as f32;
                }
            }
            _ => unreachable!("processor kind matches spec kind"),
        }
        None
    }
}

impl Processor {
    fn new(kind: EffectKind, sample_rate: f64) -> Self {
        match kind {
            EffectKind::Gain => Processor::Gain,
            EffectKind::Delay => Processor::Delay(DelayLine::new(sample_rate)),
            EffectKind::Phaser => Processor::Phaser(Phaser::default()),
            EffectKind::LowPass => Processor::LowPass { y: 0.0 },
        }
    }
}

/// Feedback comb `y[n] = x[n-D] + fb * y[n-D]`, stored as the single
/// sequence `s[n] = x[n] + fb * y[n]` so that `y[n] = s[n-D]`.
#[derive(Clone, Debug)]
struct DelayLine {
    buf: Vec<f32>,
    write: usize,
}

impl DelayLine {
    fn new(sample_rate: f64) -> Self {
        let max = (MAX_DELAY_SECONDS * sample_rate).round() as usize;
        Self {
            buf: vec![0.0; max + 1],
            write: 0,
        }
    }

    fn run(&mut self, time: f64, feedback: f64, rate: f64, input: &[f32], output: &mut [f32]) {
        let len = self.buf.len();
        let delay = ((time * rate).round() as usize).min(len - 1);
        let fb = feedback as f32;
        for (out, &x) in output.iter_mut().zip(input) {
            let y = if delay == 0 {
                x
            } else {
                self.buf[(self.write + len - delay) % len]
            };
            self.buf[self.write] = if delay == 0 { x } else { x + fb * y };
            self.write = (self.write + 1) % len;
            *out = y;
        }
    }
}

#[derive(Clone, Debug, Default)]
struct Phaser {
    phase: f64,
    x1: [f64; PHASER_STAGES],
    y1: [f64; PHASER_STAGES],
}

impl Phaser {
    fn run(&mut self, lfo_rate: f64, depth: f64, rate: f64, input: &[f32], output: &mut [f32]) {
        let max_freq = 0.45 * rate;
        let step = lfo_rate / rate;
        for (out, &x) in output.iter_mut().zip(input) {
            let lfo = (2.0 * PI * self.phase).sin();
            let freq = (PHASER_CENTER_HZ * (PHASER_OCTAVES * depth * lfo).exp2()).min(max_freq);
            let t = (PI * freq / rate).tan();
            let a = (t - 1.0) / (t + 1.0);

            let dry = x as f64;
            let mut v = dry;
            for (x1, y1) in self.x1.iter_mut().zip(self.y1.iter_mut()) {
                let y = a * v + *x1 - a * *y1;
                *x1 = v;
                *y1 = y;
                v = y;
            }
            *out = (0.5 * dry + 0.5 * v) as f32;

            self.phase += step;
            if self.phase >= 1.0 {
                self.phase -= 1.0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const RATE: u32 = 44100;

    fn noise(n: usize, seed: u64) -> Vec<f32> {
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (0..n)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 40) as f32 / (1u64 << 24) as f32) * 2.0 - 1.0
            })
            .collect()
    }

    fn run(spec: EffectSpec, input: &[f32]) -> Vec<f32> {
        let mut state = FilterState::new(spec.kind(), RATE);
        let mut out = vec![0.0; input.len()];
        assert!(state.process(&spec, input, &mut out).is_none());
        out
    }

    #[test]
    fn unity_gain_is_identity() {
        let x = noise(512, 1);
        assert_eq!(run(EffectSpec::Gain { g: 1.0 }, &x), x);
    }

    #[test]
    fn zero_delay_is_identity() {
        let x = noise(512, 2);
        let spec = EffectSpec::Delay {
            time: 0.0,
            feedback: 0.0,
        };
        assert_eq!(run(spec, &x), x);
    }

    #[test]
    fn delay_impulse_response() {
        // 10 samples of delay with feedback 0.5: echoes at 10, 20, 30 with halving gain
        let spec = EffectSpec::Delay {
            time: 10.0 / RATE as f64,
            feedback: 0.5,
        };
        let mut x = vec![0.0; 40];
        x[0] = 1.0;
        let y = run(spec, &x);
        for (n, v) in y.iter().enumerate() {
            let expected = match n {
                10 => 1.0,
                20 => 0.5,
                30 => 0.25,
                _ => 0.0,
            };
            assert_eq!(*v, expected, "sample {n}");
        }
    }

    #[test]
    fn delay_time_is_clamped_to_capacity() {
        let mut state = FilterState::new(EffectKind::Delay, 100);
        let spec = EffectSpec::Delay {
            time: 2.0,
            feedback: 0.0,
        };
        let mut x = vec![0.0; 250];
        x[0] = 1.0;
        let mut y = vec![0.0; 250];
        state.process(&spec, &x, &mut y);
        assert_eq!(y.iter().position(|v| *v == 1.0), Some(200));
    }

    #[test]
    fn low_pass_dc_step_matches_closed_form() {
        let cutoff = 1000.0;
        let alpha = 1.0 - (-2.0 * PI * cutoff / RATE as f64).exp();
        let x = vec![0.5f32; 4096];
        let y = run(EffectSpec::LowPass { cutoff }, &x);
        for (n, v) in y.iter().enumerate() {
            let expected = 0.5 * (1.0 - (1.0 - alpha).powi(n as i32 + 1));
            assert!((*v as f64 - expected).abs() < 1e-6, "n={n}: {v} vs {expected}");
        }
        assert!((y[4095] - 0.5).abs() < 1e-4);
    }

    #[test]
    fn out_of_range_passes_through_and_flags_once() {
        let mut state = FilterState::new(EffectKind::Gain, RATE);
        let bad = EffectSpec::Gain { g: 9.0 };
        let x = noise(64, 3);
        let mut y = vec![0.0; 64];
        assert!(matches!(
            state.process(&bad, &x, &mut y),
            Some(EffectError::OutOfRange { name: "g", .. })
        ));
        assert_eq!(y, x);
        assert!(state.process(&bad, &x, &mut y).is_none());
        assert!(state.process(&EffectSpec::Gain { g: 1.0 }, &x, &mut y).is_none());
        assert!(state.process(&bad, &x, &mut y).is_some());
    }

    #[test]
    fn kind_change_resets_state() {
        let mut state = FilterState::new(EffectKind::LowPass, RATE);
        let x = vec![1.0f32; 128];
        let mut y = vec![0.0; 128];
        state.process(&EffectSpec::LowPass { cutoff: 100.0 }, &x, &mut y);
        state.process(&EffectSpec::Gain { g: 1.0 }, &x, &mut y);
        assert_eq!(state.kind(), EffectKind::Gain);
        state.process(&EffectSpec::LowPass { cutoff: 100.0 }, &x, &mut y);
        assert_eq!(y, run(EffectSpec::LowPass { cutoff: 100.0 }, &x));
    }

    #[test]
    fn phaser_without_depth_is_shift_invariant() {
        let spec = EffectSpec::Phaser {
            rate: 3.0,
            depth: 0.0,
        };
        let x = noise(2048, 4);
        let shift = 333;
        let mut shifted = vec![0.0; shift];
        shifted.extend_from_slice(&x);
        let y = run(spec, &x);
        let ys = run(spec, &shifted);
        for n in 0..x.len() {
            assert!((ys[n + shift] - y[n]).abs() < 1e-6, "n={n}");
        }
    }

    #[test]
    fn phaser_with_depth_is_not_shift_invariant() {
        let spec = EffectSpec::Phaser {
            rate: 3.0,
            depth: 1.0,
        };
        let x = noise(8192, 5);
        let shift = 4000;
        let mut shifted = vec![0.0; shift];
        shifted.extend_from_slice(&x);
        let y = run(spec, &x);
        let ys = run(spec, &shifted);
        let max_diff = (0..x.len())
            .map(|n| (ys[n + shift] - y[n]).abs())
            .fold(0.0f32, f32::max);
        assert!(max_diff > 1e-3);
    }
}
