//! Property checks shared by the crate test suites and the acceptance run.
//!
//! Each check returns an [`Outcome`] with a one-line summary of what was
//! measured, so a caller can print it or assert on it.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sonospace_core::dsp::{EffectKind, EffectSpec, FilterState};
use sonospace_core::engine::{render_offline, Automation, EngineConfig, TrackStore};
use sonospace_core::geometry::{side, Barrier, Vec2};
use sonospace_core::io::{load_wav, parse_scene, save_wav, scene_to_json};
use sonospace_core::param::{barrier_intensity, parameterize, Propagation};
use sonospace_core::protocol::{decode_audio_frame, encode_audio_frame, ControlMessage, ServerEnvelope, AUDIO_HEADER_BYTES};
use sonospace_core::scene::{BarrierWeighting, Emitter, Material, Receptor, SceneMutation, SceneParts, Wall};
use sonospace_core::Scene;

use crate::compare::snapshot_mismatch;
use crate::fuzz::{random_control, random_server};
use crate::oracle;
use crate::scenes::{barrier_scene, decorated_scene, random_scene, single_barrier_scene, SceneLimits};
use crate::signal::{constant, noise};

#[derive(Clone, Debug)]
pub struct Outcome {
    pub passed: bool,
    pub detail: String,
}

impl Outcome {
    pub fn pass(detail: impl Into<String>) -> Self {
        Self {
            passed: true,
            detail: detail.into(),
        }
    }

    pub fn fail(detail: impl Into<String>) -> Self {
        Self {
            passed: false,
            detail: detail.into(),
        }
    }

    /// Panics with the detail unless the check passed.
    pub fn assert(&self) {
        assert!(self.passed, "{}", self.detail);
    }
}

pub const ORACLE_TOLERANCE: f64 = 1e-9;

/// Engine parameterization against the brute-force oracle on `count` random scenes.
pub fn oracle_equivalence(count: u64, seed: u64, budget: Duration) -> Outcome {
    let started = Instant::now();
    let mut barriers = 0;
    for i in 0..count {
        let scene = random_scene(seed + i, SceneLimits::default());
        barriers = barriers.max(scene.barrier_count());
        let got = parameterize(&scene);
        let want = oracle::parameterize(&scene);
        if let Some(diff) = snapshot_mismatch(&got, &want, ORACLE_TOLERANCE) {
            return Outcome::fail(format!("scene seed {}: {diff}", seed + i));
        }
    }
    let elapsed = started.elapsed();
    let detail = format!(
        "{count} scenes (up to {barriers} barriers) within {ORACLE_TOLERANCE:e} in {:.2} s, budget {:.0} s",
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
    if elapsed < budget {
        Outcome::pass(detail)
    } else {
        Outcome::fail(detail)
    }
}

/// Coefficient of determination of the least-squares line through `points`.
pub fn affine_r_squared(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if syy == 0.0 {
        return 1.0;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    1.0 - ss_res / syy
}

fn median_time(scene: &Scene, runs: usize) -> Duration {
    let mut times: Vec<Duration> = (0..runs)
        .map(|_| {
            let started = Instant::now();
            std::hint::black_box(parameterize(std::hint::black_box(scene)));
            started.elapsed()
        })
        .collect();
    times.sort();
    times[runs / 2]
}

/// Parameterization time over barrier counts fits a line, and the largest
/// count stays under `largest_budget` for its single emitter.
pub fn linear_time(sizes: &[usize], min_r_squared: f64, largest_budget: Duration) -> Outcome {
    let mut points = Vec::new();
    let mut report = Vec::new();
    let mut largest = Duration::ZERO;
    for &n in sizes {
        let scene = barrier_scene(n);
        // Warm caches, then take the median of several runs.
        median_time(&scene, 3);
        let runs = if n >= 100_000 { 9 } else { 21 };
        let t = median_time(&scene, runs);
        points.push((n as f64, t.as_secs_f64()));
        report.push(format!("{n}: {:.3} ms", t.as_secs_f64() * 1e3));
        largest = t;
    }
    let r2 = affine_r_squared(&points);
    let detail = format!(
        "R^2 = {r2:.5} (min {min_r_squared}); {}; largest {:.3} ms per emitter (budget {} ms)",
        report.join(", "),
        largest.as_secs_f64() * 1e3,
        largest_budget.as_millis()
    );
    if r2 > min_r_squared && largest < largest_budget {
        Outcome::pass(detail)
    } else {
        Outcome::fail(detail)
    }
}

/// A random barrier inside the room, 0.05 to 1 long.
fn random_barrier(rng: &mut impl Rng) -> Barrier {
    let p0 = Vec2::new(rng.random_range(2.0..8.0), rng.random_range(2.0..8.0));
    let heading = rng.random_range(0.0..2.0 * PI);
    let len = rng.random_range(0.05..1.0);
    let p1 = Vec2::new(p0.x + len * heading.cos(), p0.y + len * heading.sin());
    Barrier::new(p0, p1, "m".into(), "w".into())
}

/// The point at `radius` from the barrier midpoint whose line to the
/// midpoint meets the barrier at `angle`, on the positive (`side > 0`) or
/// negative side.
fn place(b: &Barrier, angle: f64, radius: f64, side: f64) -> Vec2 {
    let d = b.direction() * (1.0 / b.length);
    let n = Vec2::new(-d.y, d.x) * side;
    b.midpoint + (d * angle.cos() + n * angle.sin()) * radius
}

fn one_barrier_scene(b: &Barrier, emitter: Vec2, receptor: Vec2) -> Scene {
    Scene::new(SceneParts {
        emitters: vec![Emitter::new("e", emitter, "t")],
        receptor: Receptor { pos: receptor },
        walls: vec![Wall::new("w", "m", vec![b.p0, b.p1])],
        materials: vec![Material::new(
            "m",
            EffectSpec::Gain { g: 1.0 },
            EffectSpec::Gain { g: 1.0 },
        )],
        max_segment_length: b.length * 2.0,
        c: 0.5,
        d: 1.0,
        ..SceneParts::default()
    })
    .expect("valid configuration")
}

#[derive(Clone, Copy, Debug)]
struct Placement {
    angle: f64,
    far: f64,
    near: f64,
}

fn random_placement(rng: &mut impl Rng) -> Placement {
    let far = rng.random_range(0.5..5.0);
    Placement {
        angle: rng.random_range(0.1..=FRAC_PI_2),
        far,
        near: far * rng.random_range(0.1..0.9),
    }
}

/// Wet fraction removed from the dry path, `(rMix + tMix) * d`; the dry
/// signal is scaled by one minus this.
fn wet_share(scene: &Scene) -> f64 {
    let m = &parameterize(scene).per_emitter[0];
    (m.r_mix + m.t_mix) * scene.d()
}

/// The barrier-distance rules, each on `configs` random configurations:
/// - alongside a barrier, moving either node closer raises rMix;
/// - across a barrier, moving either node closer lowers the dry share and
///   raises tMix.
///
/// Every configuration moves the emitter and the receptor in turn, radially
/// toward the barrier midpoint at a fixed incidence angle and never inside
/// the minimum distance.
pub fn distance_monotonicity(configs: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = [0usize; 3];
    for i in 0..configs {
        let b = random_barrier(&mut rng);
        let fixed = random_placement(&mut rng);
        let moving = random_placement(&mut rng);
        for across in [false, true] {
            let fixed_side = 1.0;
            let moving_side = if across { -1.0 } else { 1.0 };
            let anchor = place(&b, fixed.angle, fixed.far, fixed_side);
            for emitter_moves in [true, false] {
                let at = |radius: f64| {
                    let p = place(&b, moving.angle, radius, moving_side);
                    if emitter_moves {
                        one_barrier_scene(&b, p, anchor)
                    } else {
                        one_barrier_scene(&b, anchor, p)
                    }
                };
                let (far, near) = (at(moving.far), at(moving.near));
                let (pf, pn) = (&parameterize(&far).per_emitter[0], &parameterize(&near).per_emitter[0]);
                let who = if emitter_moves { "emitter" } else { "receptor" };
                if !across {
                    if pn.r_mix <= pf.r_mix {
                        return Outcome::fail(format!("1a config {i} ({who}): rMix {} -> {}", pf.r_mix, pn.r_mix));
                    }
                    checked[0] += 1;
                } else {
                    if wet_share(&near) <= wet_share(&far) {
                        return Outcome::fail(format!(
                            "2a config {i} ({who}): dry share 1 - {} -> 1 - {}",
                            wet_share(&far),
                            wet_share(&near)
                        ));
                    }
                    checked[1] += 1;
                    if pn.t_mix <= pf.t_mix {
                        return Outcome::fail(format!("2b config {i} ({who}): tMix {} -> {}", pf.t_mix, pn.t_mix));
                    }
                    checked[2] += 1;
                }
            }
        }
    }
    Outcome::pass(format!(
        "{configs} configurations; reflected rises (1a) {} moves, dry falls (2a) {} moves, transmitted rises (2b) {} moves",
        checked[0], checked[1], checked[2]
    ))
}

/// At fixed distance, a steeper incidence angle never lowers a barrier's
/// ti, for either node and either path.
pub fn angle_monotonicity(configs: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = 0;
    for i in 0..configs {
        let b = random_barrier(&mut rng);
        let anchor = place(&b, rng.random_range(0.1..FRAC_PI_2), rng.random_range(0.2..5.0), 1.0);
        let radius = rng.random_range(0.2..5.0);
        let mut angles: Vec<f64> = (0..8).map(|_| rng.random_range(0.01..=FRAC_PI_2)).collect();
        angles.push(FRAC_PI_2);
        angles.sort_by(f64::total_cmp);
        for side in [1.0, -1.0] {
            for emitter_moves in [true, false] {
                let ti: Vec<f64> = angles
                    .iter()
                    .map(|&a| {
                        let p = place(&b, a, radius, side);
                        let (e, r) = if emitter_moves { (p, anchor) } else { (anchor, p) };
                        barrier_intensity(&b, e, r, BarrierWeighting::Unit).ti
                    })
                    .collect();
                // Rounding in the placement itself allows a few ulps of slack.
                if let Some(w) = ti.windows(2).find(|w| w[1] < w[0] * (1.0 - 1e-12)) {
                    return Outcome::fail(format!("config {i}: ti fell from {} to {} at a steeper angle", w[0], w[1]));
                }
                pairs += ti.len() - 1;
            }
        }
    }
    Outcome::pass(format!("{configs} configurations, {pairs} ordered angle pairs"))
}

/// Path classes against the oracle's normal-vector side test, exactly,
/// including nodes placed on the barrier's supporting line.
pub fn side_classification(configs: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = [0usize; 3];
    for i in 0..configs {
        let b = random_barrier(&mut rng);
        let rb = oracle::RefBarrier {
            p0: b.p0,
            p1: b.p1,
            material: "m".into(),
        };
        let node = |rng: &mut ChaCha8Rng| match rng.random_range(0..4) {
            0 => b.p0.lerp(b.p1, rng.random_range(-2.0..3.0)),
            1 => b.midpoint,
            _ => Vec2::new(rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)),
        };
        for _ in 0..10 {
            let (e, r) = (node(&mut rng), node(&mut rng));
            let got = barrier_intensity(&b, e, r, BarrierWeighting::Unit).path;
            let (se, sr) = (oracle::side(&rb, e), oracle::side(&rb, r));
            let want = if se == 0 || sr == 0 {
                Propagation::Colinear
            } else if se == sr {
                Propagation::Reflection
            } else {
                Propagation::Transmission
            };
            if got != want {
                return Outcome::fail(format!(
                    "config {i}: {got:?} != {want:?} (engine sides {:?}/{:?})",
                    side(&b, e),
                    side(&b, r)
                ));
            }
            counts[match want {
                Propagation::Reflection => 0,
                Propagation::Transmission => 1,
                Propagation::Colinear => 2,
            }] += 1;
        }
    }
    Outcome::pass(format!(
        "{configs} configurations: {} reflection, {} transmission, {} colinear, all matching",
        counts[0], counts[1], counts[2]
    ))
}

/// rMix + tMix < 1, material shares sum to 0 or 1, dMix >= 0 and finite.
pub fn mix_bounds(count: u64, seed: u64) -> Outcome {
    let mut checked = 0;
    for i in 0..count {
        let scene = random_scene(seed + i, SceneLimits::default());
        for m in parameterize(&scene).per_emitter {
            if !(m.r_mix + m.t_mix < 1.0) {
                return Outcome::fail(format!("seed {}: rMix + tMix = {}", seed + i, m.r_mix + m.t_mix));
            }
            if !(m.d_mix >= 0.0 && m.d_mix.is_finite()) {
                return Outcome::fail(format!("seed {}: dMix = {}", seed + i, m.d_mix));
            }
            for (total, sum, what) in [
                (m.r_total, m.materials.iter().map(|x| x.r_mix).sum::<f64>(), "r"),
                (m.t_total, m.materials.iter().map(|x| x.t_mix).sum::<f64>(), "t"),
            ] {
                let ok = if total > 0.0 { (sum - 1.0).abs() <= 1e-12 } else { sum == 0.0 };
                if !ok {
                    return Outcome::fail(format!("seed {}: sum of material {what}Mix = {sum} with total {total}", seed + i));
                }
            }
            checked += 1;
        }
    }
    Outcome::pass(format!("{count} scenes, {checked} emitters"))
}

/// The single-barrier scene gives dMix = rMix = 0.5, tMix = 0 and material
/// rMix = 1 exactly, and the oracle agrees exactly.
pub fn hand_scene() -> Outcome {
    let scene = single_barrier_scene();
    let got = parameterize(&scene);
    let m = &got.per_emitter[0];
    let values = (m.d_mix, m.r_mix, m.t_mix, m.materials[0].r_mix);
    let oracle_agrees = snapshot_mismatch(&got, &oracle::parameterize(&scene), 0.0).is_none();
    let detail = format!(
        "dMix {}, rMix {}, tMix {}, material rMix {}; oracle exact: {oracle_agrees}",
        values.0, values.1, values.2, values.3
    );
    if values == (0.5, 0.5, 0.0, 1.0) && oracle_agrees {
        Outcome::pass(detail)
    } else {
        Outcome::fail(detail)
    }
}

/// Constant 0.4 through the single-barrier scene's Gain reflection renders
/// 0.4 on every sample.
pub fn constant_input(seconds: f64) -> Outcome {
    let config = EngineConfig::default();
    let samples = (seconds * config.sample_rate as f64) as usize;
    let mut tracks = TrackStore::new();
    tracks.insert("t1".into(), Arc::from(constant(0.4, samples + config.block_size)));
    let render = render_offline(&single_barrier_scene(), tracks, config, seconds, &Automation::default())
        .expect("render");
    let worst = render
        .samples
        .iter()
        .map(|s| (*s as f64 - 0.4).abs())
        .fold(0.0, f64::max);
    let detail = format!("{} samples, max |y - 0.4| = {worst:e} (tolerance 1e-6)", render.samples.len());
    if worst <= 1e-6 {
        Outcome::pass(detail)
    } else {
        Outcome::fail(detail)
    }
}

/// A scene with every effect kind on both paths, two emitters on noise
/// tracks, and an automation that moves nodes and changes constants.
pub fn busy_scene_and_automation(seed: u64, seconds: f64, config: &EngineConfig) -> (Scene, TrackStore, Automation) {
    let scene = Scene::new(SceneParts {
        emitters: vec![
            Emitter::new("a", Vec2::new(2.0, 3.0), "noise"),
            Emitter::new("b", Vec2::new(7.0, 8.0), "tone"),
        ],
        receptor: Receptor {
            pos: Vec2::new(5.0, 5.0),
        },
        walls: vec![
            Wall::new("w1", "brick", vec![Vec2::new(1.0, 6.0), Vec2::new(4.0, 6.5), Vec2::new(6.0, 9.0)]),
            Wall::new("w2", "glass", vec![Vec2::new(6.0, 1.0), Vec2::new(6.5, 4.0)]),
        ],
        materials: vec![
            Material::new(
                "brick",
                EffectSpec::Delay { time: 0.05, feedback: 0.6 },
                EffectSpec::LowPass { cutoff: 300.0 },
            ),
            Material::new(
                "glass",
                EffectSpec::Phaser { rate: 2.0, depth: 0.9 },
                EffectSpec::Gain { g: 0.7 },
            ),
        ],
        ..SceneParts::default()
    })
    .expect("valid scene");
    let mut tracks = TrackStore::new();
    let len = (seconds * config.sample_rate as f64) as usize;
    tracks.insert("noise".into(), Arc::from(noise(seed, len / 2)));
    tracks.insert("tone".into(), Arc::from(crate::signal::sine(330.0, 0.6, config.sample_rate, len / 3)));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blocks = (len / config.block_size) as u64;
    let events = (0..24)
        .map(|_| {
            let block = rng.random_range(0..blocks);
            let m = match rng.random_range(0..4) {
                0 => SceneMutation::MoveEmitter {
                    id: "a".into(),
                    x: rng.random_range(0.0..10.0),
                    y: rng.random_range(0.0..10.0),
                },
                1 => SceneMutation::MoveEmitter {
                    id: "b".into(),
                    x: rng.random_range(0.0..10.0),
                    y: rng.random_range(0.0..10.0),
                },
                2 => SceneMutation::MoveReceptor {
                    x: rng.random_range(0.0..10.0),
                    y: rng.random_range(0.0..10.0),
                },
                _ => SceneMutation::SetConstants {
                    c: Some(rng.random_range(0.1..2.0)),
                    d: Some(rng.random_range(0.0..1.0)),
                },
            };
            (block, m)
        })
        .collect();
    (scene, tracks, Automation::new(events))
}

/// Offline render against the lockstep realtime loop, bit for bit.
pub fn offline_equals_realtime(seed: u64, seconds: f64) -> Outcome {
    let config = EngineConfig::default();
    let (scene, tracks, automation) = busy_scene_and_automation(seed, seconds, &config);
    let offline = render_offline(&scene, tracks.clone(), config, seconds, &automation).expect("render");
    let live = crate::capture::scripted_realtime(scene, tracks, config, seconds, &automation);
    let same = offline.samples.len() == live.len()
        && offline
            .samples
            .iter()
            .zip(&live)
            .all(|(a, b)| a.to_bits() == b.to_bits());
    let detail = format!(
        "{} samples, {} automation events",
        live.len(),
        automation.events().len()
    );
    if same {
        Outcome::pass(detail)
    } else {
        let first = offline.samples.iter().zip(&live).position(|(a, b)| a.to_bits() != b.to_bits());
        Outcome::fail(format!("{detail}; first difference at {first:?}"))
    }
}

/// Every corner of each effect's legal parameter box.
pub fn corner_specs() -> Vec<EffectSpec> {
    let mut specs = Vec::new();
    for kind in [EffectKind::Gain, EffectKind::Delay, EffectKind::Phaser, EffectKind::LowPass] {
        let params = kind.params();
        for mask in 0..(1u32 << params.len()) {
            let mut spec = kind.default_spec();
            for (i, p) in params.iter().enumerate() {
                let v = if mask & (1 << i) == 0 { p.min } else { p.max };
                spec.set(p.name, v).expect("corner is legal");
            }
            specs.push(spec);
        }
    }
    specs
}

/// Peak magnitude an effect may reach on input bounded by 1.
pub fn output_bound(spec: &EffectSpec) -> f64 {
    match *spec {
        EffectSpec::Gain { g } => g,
        EffectSpec::Delay { feedback, .. } => 1.0 / (1.0 - feedback),
        // Four allpass stages with a swept coefficient; half dry, half wet.
        EffectSpec::Phaser { .. } => 4.0,
        EffectSpec::LowPass { .. } => 1.0,
    }
}

/// Full-scale noise through every effect corner for `seconds`.
pub fn dsp_stability(seconds: f64, seed: u64) -> Outcome {
    let rate = 44100;
    let block = 512;
    let input = noise(seed, (seconds * rate as f64) as usize);
    let mut worst_ratio = 0.0f64;
    let specs = corner_specs();
    for spec in &specs {
        let mut state = FilterState::new(spec.kind(), rate);
        let mut out = vec![0.0f32; block];
        let bound = output_bound(spec);
        let mut peak = 0.0f64;
        for chunk in input.chunks(block) {
            let out = &mut out[..chunk.len()];
            if let Some(err) = state.process(spec, chunk, out) {
                return Outcome::fail(format!("{spec:?} faulted: {err}"));
            }
            for y in out.iter() {
                if !y.is_finite() {
                    return Outcome::fail(format!("{spec:?} produced {y}"));
                }
                peak = peak.max(y.abs() as f64);
            }
        }
        if peak > bound {
            return Outcome::fail(format!("{spec:?} peaked at {peak} over bound {bound}"));
        }
        if bound > 0.0 {
            worst_ratio = worst_ratio.max(peak / bound);
        }
    }
    Outcome::pass(format!(
        "{} corner specs x {seconds} s noise, all finite, peak at most {:.3} of its bound",
        specs.len(),
        worst_ratio
    ))
}

fn run_in_blocks(spec: &EffectSpec, input: &[f32], block: usize) -> Vec<f32> {
    let mut state = FilterState::new(spec.kind(), 44100);
    let mut out = vec![0.0; input.len()];
    for (x, y) in input.chunks(block).zip(out.chunks_mut(block)) {
        state.process(spec, x, y);
    }
    out
}

/// Effects and a static-scene render give the same bits with 512- and
/// 1024-sample blocks.
pub fn block_size_independence(seed: u64) -> Outcome {
    let input = noise(seed, 44100 * 2);
    let mut specs = corner_specs();
    specs.extend([EffectKind::Gain, EffectKind::Delay, EffectKind::Phaser, EffectKind::LowPass].map(EffectKind::default_spec));
    for spec in &specs {
        let a = run_in_blocks(spec, &input, 512);
        let b = run_in_blocks(spec, &input, 1024);
        if a.iter().zip(&b).any(|(x, y)| x.to_bits() != y.to_bits()) {
            return Outcome::fail(format!("{spec:?} differs between block sizes"));
        }
    }

    let seconds = 2.0;
    let render = |block_size| {
        let config = EngineConfig {
            block_size,
            ..EngineConfig::default()
        };
        let (scene, tracks, _) = busy_scene_and_automation(seed, seconds, &config);
        render_offline(&scene, tracks, config, seconds, &Automation::default())
            .expect("render")
            .samples
    };
    let (a, b) = (render(512), render(1024));
    if a.len() != b.len() || a.iter().zip(&b).any(|(x, y)| x.to_bits() != y.to_bits()) {
        return Outcome::fail("static scene render differs between 512 and 1024 blocks");
    }
    Outcome::pass(format!(
        "{} effect specs over 2 s of noise and a {seconds} s scene render, bit-identical",
        specs.len()
    ))
}

/// Document write then read gives back the same scene, and the rewritten
/// document is textually identical.
pub fn scene_round_trip(count: u64, seed: u64) -> Outcome {
    for i in 0..count {
        let scene = decorated_scene(seed + i);
        let json = scene_to_json(&scene);
        let back = match parse_scene(&json) {
            Ok(s) => s,
            Err(e) => return Outcome::fail(format!("seed {}: {e}", seed + i)),
        };
        if back.to_parts() != scene.to_parts() {
            return Outcome::fail(format!("seed {}: scene changed on round trip", seed + i));
        }
        if scene_to_json(&back) != json {
            return Outcome::fail(format!("seed {}: document text changed on rewrite", seed + i));
        }
    }
    Outcome::pass(format!("{count} scenes identical after write and read"))
}

/// Float WAV write then read at the engine rate returns identical samples.
pub fn wav_round_trip(seed: u64) -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut special = vec![0.0f32, -0.0, 1.0, -1.0, f32::MIN_POSITIVE, 1e-30, 0.999_999_94];
    special.extend(noise(seed, 1000));
    let cases: Vec<(Vec<f32>, u32)> = vec![
        (Vec::new(), 44100),
        (vec![0.25], 44100),
        (special, 44100),
        (noise(seed + 1, 44100 * 3), 44100),
        (noise(seed + 2, 48000), 48000),
    ];
    for (i, (samples, rate)) in cases.iter().enumerate() {
        let path = dir.path().join(format!("case{i}.wav"));
        if let Err(e) = save_wav(samples, &path, *rate) {
            return Outcome::fail(format!("case {i}: {e}"));
        }
        match load_wav(&path, *rate) {
            Ok(track) => {
                if track.native_rate != *rate
                    || track.samples.len() != samples.len()
                    || track.samples.iter().zip(samples).any(|(a, b)| a.to_bits() != b.to_bits())
                {
                    return Outcome::fail(format!("case {i}: samples changed"));
                }
            }
            Err(e) => return Outcome::fail(format!("case {i}: {e}")),
        }
    }
    Outcome::pass(format!("{} float WAV files bit-exact", cases.len()))
}

/// Random control and server messages survive serialize, parse and
/// reserialize unchanged.
pub fn protocol_round_trip(count: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..count {
        let control = random_control(&mut rng);
        let text = serde_json::to_string(&control).expect("serializes");
        match serde_json::from_str::<ControlMessage>(&text) {
            Ok(back) if back == control && serde_json::to_string(&back).unwrap() == text => {}
            Ok(_) => return Outcome::fail(format!("control message {i} changed: {text}")),
            Err(e) => return Outcome::fail(format!("control message {i}: {e}: {text}")),
        }
        let server = random_server(&mut rng);
        let text = serde_json::to_string(&server).expect("serializes");
        match serde_json::from_str::<ServerEnvelope>(&text) {
            Ok(back) if back == server && serde_json::to_string(&back).unwrap() == text => {}
            Ok(_) => return Outcome::fail(format!("server message {i} changed: {text}")),
            Err(e) => return Outcome::fail(format!("server message {i}: {e}: {text}")),
        }
    }
    Outcome::pass(format!("{count} control and {count} server messages"))
}

/// Audio frames are exactly 8 + 4N bytes, little-endian, and decode back.
pub fn audio_framing(seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in [0usize, 1, 512, 1024, 4096] {
        let samples = noise(rng.random(), n);
        let seq: u32 = rng.random();
        let bytes = encode_audio_frame(seq, &samples);
        if bytes.len() != AUDIO_HEADER_BYTES + 4 * n {
            return Outcome::fail(format!("{n} samples gave {} bytes", bytes.len()));
        }
        let header_ok = bytes[0..4] == seq.to_le_bytes() && bytes[4..8] == (n as u32).to_le_bytes();
        let body_ok = samples
            .iter()
            .enumerate()
            .all(|(i, s)| bytes[8 + 4 * i..12 + 4 * i] == s.to_le_bytes());
        if !header_ok || !body_ok {
            return Outcome::fail(format!("{n} samples: byte layout differs"));
        }
        match decode_audio_frame(&bytes) {
            Ok(frame) if frame.seq == seq && frame.samples == samples => {}
            _ => return Outcome::fail(format!("{n} samples: decode differs")),
        }
    }
    Outcome::pass("frames of 0, 1, 512, 1024, 4096 samples; 512 samples = 2056 bytes")
}
