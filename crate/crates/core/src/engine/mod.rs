//! Block mixer: pulls emitter tracks, runs material effects, weights
//! everything by the current mixes and sums to a mono output.

mod offline;
pub mod realtime;

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use tracing::warn;

use crate::dsp::{EffectSpec, FilterState, MixSource, ParamMap};
use crate::ids::{EmitterId, MaterialId, TrackId};
use crate::param::{EmitterMix, ParamSnapshot};
use crate::scene::{Emitter, Scene};

pub use offline::{render_offline, Automation, OfflineRender, RenderError};

/// Scaled wet mixes below this are not processed until the path has been
/// active at least once.
pub const SKIP_THRESHOLD: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EngineConfig {
    pub sample_rate: u32,
    pub block_size: usize,
    /// Mix smoothing time constant in seconds; 0 disables smoothing.
    pub smoothing_tau: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            sample_rate: 44100,
            block_size: 512,
            smoothing_tau: 0.020,
        }
    }
}

impl EngineConfig {
    pub fn block_duration(&self) -> f64 {
        self.block_size as f64 / self.sample_rate as f64
    }

    /// Block that contains time `t` (seconds).
    pub fn block_at(&self, t: f64) -> u64 {
        (t * self.sample_rate as f64 / self.block_size as f64).floor().max(0.0) as u64
    }
}

/// Decoded tracks at the engine rate, keyed by asset id.
#[derive(Clone, Debug, Default)]
pub struct TrackStore {
    tracks: HashMap<TrackId, Arc<[f32]>>,
}

impl TrackStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: TrackId, samples: Arc<[f32]>) {
        self.tracks.insert(id, samples);
    }

    pub fn get(&self, id: &str) -> Option<&Arc<[f32]>> {
        self.tracks.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.tracks.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.tracks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tracks.is_empty()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportState {
    Stopped,
    #[default]
    Playing,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Transport {
    pub state: TransportState,
    /// Samples since the start; advances one block per rendered block.
    pub position: u64,
}

/// One-pole block-rate smoother.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothedScalar {
    current: f64,
    target: f64,
    coeff: f64,
}

impl SmoothedScalar {
    /// Starts settled at `value`.
    pub fn new(value: f64, tau: f64, block_duration: f64) -> Self {
        let coeff = if tau > 0.0 {
            (-block_duration / tau).exp()
        } else {
            0.0
        };
        Self {
            current: value,
            target: value,
            coeff,
        }
    }

    pub fn set_target(&mut self, target: f64) {
        self.target = target;
    }

    /// Advances one block and returns the new value.
    pub fn step(&mut self) -> f64 {
        self.current = self.target + (self.current - self.target) * self.coeff;
        self.current
    }

    pub fn current(&self) -> f64 {
        self.current
    }

    pub fn target(&self) -> f64 {
        self.target
    }
}

/// Fills `out` with the emitter's track at transport `position`, shifted by
/// the emitter's start offset and scaled by its gain. Looping emitters wrap
/// relative to the shared transport, so restarting the transport realigns
/// every loop.
pub fn emitter_block(
    emitter: &Emitter,
    track: Option<&[f32]>,
    position: u64,
    sample_rate: u32,
    out: &mut [f32],
) {
    let Some(track) = track.filter(|t| !t.is_empty()) else {
        out.fill(0.0);
        return;
    };
    let offset = (emitter.start_offset * sample_rate as f64).round() as u64;
    let gain = emitter.gain as f32;
    let len = track.len() as u64;
    for (i, s) in out.iter_mut().enumerate() {
        let t = position + i as u64;
        *s = if t < offset {
            0.0
        } else {
            let local = t - offset;
            if emitter.looping {
                gain * track[(local % len) as usize]
            } else if local < len {
                gain * track[local as usize]
            } else {
                0.0
            }
        };
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RenderStats {
    pub blocks: u64,
    /// Output samples that had to be clamped into `[-1, 1]` (or were not finite).
    pub clipped_samples: u64,
    /// Effect blocks passed through because of an invalid spec.
    pub effect_faults: u64,
}

struct Voice {
    dry: SmoothedScalar,
    reflect: SmoothedScalar,
    transmit: SmoothedScalar,
    materials: HashMap<MaterialId, MaterialVoice>,
}

struct MaterialVoice {
    r_mix: SmoothedScalar,
    t_mix: SmoothedScalar,
    reflection: Option<FilterState>,
    transmission: Option<FilterState>,
}

/// Audio-side mixer. Owns every filter state; reads scenes and snapshots
/// only by shared reference.
pub struct Renderer {
    config: EngineConfig,
    tracks: Arc<TrackStore>,
    transport: Transport,
    voices: HashMap<EmitterId, Voice>,
    dry: Vec<f32>,
    processed: Vec<f32>,
    stats: RenderStats,
    warned_tracks: HashSet<TrackId>,
    last_revision: Option<u64>,
}

impl Renderer {
    pub fn new(config: EngineConfig, tracks: impl Into<Arc<TrackStore>>) -> Self {
        assert!(config.block_size > 0 && config.sample_rate > 0);
        Self {
            config,
            tracks: tracks.into(),
            transport: Transport::default(),
            voices: HashMap::new(),
            dry: vec![0.0; config.block_size],
            processed: vec![0.0; config.block_size],
            stats: RenderStats::default(),
            warned_tracks: HashSet::new(),
            last_revision: None,
        }
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn transport(&self) -> Transport {
        self.transport
    }

    pub fn transport_mut(&mut self) -> &mut Transport {
        &mut self.transport
    }

    pub fn stats(&self) -> RenderStats {
        self.stats
    }

    pub fn tracks(&self) -> &Arc<TrackStore> {
        &self.tracks
    }

    pub fn set_tracks(&mut self, tracks: Arc<TrackStore>) {
        self.tracks = tracks;
        self.warned_tracks.clear();
    }

    /// Renders one block into `out`:
    /// `sum over emitters of dMix * dry + eff(emitter)`, hard-clamped to `[-1, 1]`.
    /// A stopped transport yields silence and does not advance.
    pub fn render_block(&mut self, scene: &Scene, params: &ParamSnapshot, out: &mut [f32]) {
        assert_eq!(out.len(), self.config.block_size, "block size mismatch");
        debug_assert_eq!(scene.revision(), params.revision, "scene and snapshot revisions differ");
        out.fill(0.0);
        if self.transport.state == TransportState::Stopped {
            return;
        }
        if self.last_revision != Some(scene.revision()) {
            self.prune(scene);
            self.last_revision = Some(scene.revision());
        }

        let Renderer {
            config,
            tracks,
            transport,
            voices,
            dry,
            processed,
            stats,
            warned_tracks,
            ..
        } = self;
        let tau = config.smoothing_tau;
        let block_dur = config.block_duration();

        for (i, emitter) in scene.emitters().iter().enumerate() {
            let Some(mix) = lookup_mix(params, i, emitter) else {
                continue;
            };
            let track = tracks.get(emitter.track.as_str());
            if track.is_none() && warned_tracks.insert(emitter.track.clone()) {
                warn!(emitter = %emitter.id, track = %emitter.track, "missing track, rendering silence");
            }
            emitter_block(emitter, track.map(|t| &t[..]), transport.position, config.sample_rate, dry);

            let voice = voices.entry(emitter.id.clone()).or_insert_with(|| Voice {
                dry: SmoothedScalar::new(mix.d_mix, tau, block_dur),
                reflect: SmoothedScalar::new(mix.r_mix, tau, block_dur),
                transmit: SmoothedScalar::new(mix.t_mix, tau, block_dur),
                materials: HashMap::new(),
            });
            voice.dry.set_target(mix.d_mix);
            voice.reflect.set_target(mix.r_mix);
            voice.transmit.set_target(mix.t_mix);
            let d_gain = voice.dry.step() as f32;
            let r_global = voice.reflect.step();
            let t_global = voice.transmit.step();

            for (o, x) in out.iter_mut().zip(dry.iter()) {
                *o += d_gain * x;
            }

            for (mi, material) in scene.materials().iter().enumerate() {
                let Some(mm) = mix
                    .materials
                    .get(mi)
                    .filter(|m| m.material_id == material.id)
                    .or_else(|| mix.materials.iter().find(|m| m.material_id == material.id))
                else {
                    continue;
                };
                let mv = voice.materials.entry(material.id.clone()).or_insert_with(|| MaterialVoice {
                    r_mix: SmoothedScalar::new(mm.r_mix, tau, block_dur),
                    t_mix: SmoothedScalar::new(mm.t_mix, tau, block_dur),
                    reflection: None,
                    transmission: None,
                });
                mv.r_mix.set_target(mm.r_mix);
                mv.t_mix.set_target(mm.t_mix);
                let r_material = mv.r_mix.step();
                let t_material = mv.t_mix.step();

                let paths = [
                    (&material.reflection, &mut mv.reflection, r_global, r_material),
                    (&material.transmission, &mut mv.transmission, t_global, t_material),
                ];
                for (spec, state, global, share) in paths {
                    let scale = global * share;
                    if state.is_none() && scale < SKIP_THRESHOLD {
                        continue;
                    }
                    let spec = mapped_spec(spec, material.param_map.as_ref(), global, share);
                    let state = state.get_or_insert_with(|| FilterState::new(spec.kind(), config.sample_rate));
                    if let Some(err) = state.process(&spec, dry, processed) {
                        warn!(material = %material.id, "{err}; passing audio through");
                        stats.effect_faults += 1;
                    }
                    let scale = scale as f32;
                    for (o, y) in out.iter_mut().zip(processed.iter()) {
                        *o += scale * y;
                    }
                }
            }
        }

        for s in out.iter_mut() {
            if !s.is_finite() {
                *s = 0.0;
                stats.clipped_samples += 1;
            } else if s.abs() > 1.0 {
                *s = s.clamp(-1.0, 1.0);
                stats.clipped_samples += 1;
            }
        }
        transport.position += config.block_size as u64;
        stats.blocks += 1;
    }

    /// Drops state for emitters and materials no longer in the scene.
    fn prune(&mut self, scene: &Scene) {
        self.voices.retain(|id, _| scene.emitter(id.as_str()).is_some());
        for voice in self.voices.values_mut() {
            voice.materials.retain(|id, _| scene.material(id.as_str()).is_some());
        }
    }
}

fn lookup_mix<'a>(params: &'a ParamSnapshot, index: usize, emitter: &Emitter) -> Option<&'a EmitterMix> {
    params
        .per_emitter
        .get(index)
        .filter(|m| m.emitter_id == emitter.id)
        .or_else(|| params.emitter(emitter.id.as_str()))
}

fn mapped_spec(spec: &EffectSpec, map: Option<&ParamMap>, global: f64, share: f64) -> EffectSpec {
    match map {
        Some(map) => {
            let value = match map.source {
                MixSource::MaterialMix => share,
                MixSource::GlobalMix => global,
            };
            spec.apply_param_map(map, value)
        }
        None => *spec,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;

    fn emitter() -> Emitter {
        Emitter::new("e", Vec2::new(0.0, 0.0), "t")
    }

    fn ramp(n: usize) -> Vec<f32> {
        (0..n).map(|i| i as f32).collect()
    }

    #[test]
    fn looping_wraps_modulo_track_length() {
        let rate = 100;
        let track = ramp(100);
        let mut e = emitter();
        e.looping = true;
        let mut out = vec![0.0; 4];
        emitter_block(&e, Some(&track), 150, rate, &mut out);
        assert_eq!(out, vec![50.0, 51.0, 52.0, 53.0]);
    }

    #[test]
    fn past_end_is_silent_without_loop() {
        let track = ramp(100);
        let mut out = vec![1.0; 4];
        emitter_block(&emitter(), Some(&track), 150, 100, &mut out);
        assert_eq!(out, vec![0.0; 4]);
    }

    #[test]
    fn start_offset_delays_track() {
        let track = vec![1.0; 100];
        let mut e = emitter();
        e.start_offset = 0.25;
        e.gain = 0.5;
        let mut out = vec![0.0; 30];
        emitter_block(&e, Some(&track), 0, 100, &mut out);
        assert!(out[..25].iter().all(|s| *s == 0.0));
        assert!(out[25..].iter().all(|s| *s == 0.5));
    }

    #[test]
    fn missing_track_is_silent() {
        let mut out = vec![1.0; 8];
        emitter_block(&emitter(), None, 0, 100, &mut out);
        assert_eq!(out, vec![0.0; 8]);
    }

    #[test]
    fn smoother_converges_within_five_tau() {
        let cfg = EngineConfig::default();
        let tau = cfg.smoothing_tau;
        let mut s = SmoothedScalar::new(0.0, tau, cfg.block_duration());
        s.set_target(1.0);
        let blocks = (5.0 * tau / cfg.block_duration()).floor() as usize;
        let mut prev = 0.0;
        for _ in 0..blocks {
            let v = s.step();
            assert!(v > prev && v <= 1.0);
            prev = v;
        }
        assert!((1.0 - s.current()).abs() < 0.01, "{}", s.current());
    }

    #[test]
    fn zero_tau_jumps() {
        let mut s = SmoothedScalar::new(0.0, 0.0, 0.01);
        s.set_target(0.7);
        assert_eq!(s.step(), 0.7);
    }
}
