use std::collections::BTreeSet;
use std::f64::consts::TAU;
use std::str::FromStr;
use std::sync::Arc;

use sonospace_core::engine::{render_offline, Automation, EngineConfig, TrackStore};
use sonospace_core::io::{parse_scene, scene_to_json};
use sonospace_core::scene::DEFAULT_ROOM_SIZE;
use sonospace_core::{parameterize, Scene, SceneMutation};

pub const PREVIEW_SAMPLE_RATE: u32 = 44100;
const MAX_PREVIEW_SECONDS: f64 = 10.0;
const MAX_FIELD_CELLS: usize = 256 * 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldQuantity {
    DryMix,
    ReflectedMix,
    TransmittedMix,
}

impl FromStr for FieldQuantity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "d_mix" => Ok(Self::DryMix),
            "r_mix" => Ok(Self::ReflectedMix),
            "t_mix" => Ok(Self::TransmittedMix),
            other => Err(format!("unknown quantity '{other}'")),
        }
    }
}

fn scene(json: &str) -> Result<Scene, String> {
    parse_scene(json).map_err(|e| e.to_string())
}

pub fn parameterize_json(scene_json: &str) -> Result<String, String> {
    let snapshot = parameterize(&scene(scene_json)?);
    serde_json::to_string(&snapshot).map_err(|e| e.to_string())
}

pub fn apply_mutation(scene_json: &str, mutation_json: &str) -> Result<String, String> {
    let mutation: SceneMutation = serde_json::from_str(mutation_json).map_err(|e| e.to_string())?;
    let next = scene(scene_json)?.apply(&mutation).map_err(|e| e.to_string())?;
    Ok(scene_to_json(&next))
}

pub fn mix_field(
    scene_json: &str,
    emitter_index: usize,
    cols: usize,
    rows: usize,
    quantity: FieldQuantity,
) -> Result<Vec<f64>, String> {
    if cols == 0 || rows == 0 || cols * rows > MAX_FIELD_CELLS {
        return Err(format!("grid must have between 1 and {MAX_FIELD_CELLS} cells"));
    }
    let base = scene(scene_json)?;
    let emitter = base
        .emitters()
        .get(emitter_index)
        .ok_or_else(|| format!("no emitter at index {emitter_index}"))?
        .clone();
    // Only the chosen emitter matters, so drop the others once up front.
    let mut parts = base.to_parts();
    parts.emitters = vec![emitter];
    let mut single = Scene::new(parts).map_err(|e| e.to_string())?;

    let (dx, dy) = (DEFAULT_ROOM_SIZE / cols as f64, DEFAULT_ROOM_SIZE / rows as f64);
    let mut field = Vec::with_capacity(cols * rows);
    for row in 0..rows {
        for col in 0..cols {
            let mv = SceneMutation::MoveReceptor {
                x: (col as f64 + 0.5) * dx,
                y: (row as f64 + 0.5) * dy,
            };
            single = single.apply(&mv).map_err(|e| e.to_string())?;
            let mix = &parameterize(&single).per_emitter[0];
            field.push(match quantity {
                FieldQuantity::DryMix => mix.d_mix,
                FieldQuantity::ReflectedMix => mix.r_mix,
                FieldQuantity::TransmittedMix => mix.t_mix,
            });
        }
    }
    Ok(field)
}

/// A plucked harmonic tone per track id, pitched by the id's rank so that
/// emitters are told apart by ear.
fn synthetic_tracks(scene: &Scene, seconds: f64) -> TrackStore {
    let ids: BTreeSet<_> = scene.emitters().iter().map(|e| e.track.clone()).collect();
    let len = (seconds * PREVIEW_SAMPLE_RATE as f64).ceil() as usize;
    let mut store = TrackStore::new();
    for (rank, id) in ids.into_iter().enumerate() {
        let freq = 110.0 * 2f64.powf(rank as f64 * 7.0 / 12.0);
        let period = (PREVIEW_SAMPLE_RATE as f64 * 0.5) as usize;
        let samples: Vec<f32> = (0..len)
            .map(|i| {
                let t = i as f64 / PREVIEW_SAMPLE_RATE as f64;
                let env = (-6.0 * (i % period) as f64 / PREVIEW_SAMPLE_RATE as f64).exp();
                let tone = (TAU * freq * t).sin() + 0.5 * (TAU * 2.0 * freq * t).sin() + 0.25 * (TAU * 3.0 * freq * t).sin();
                (0.3 * env * tone) as f32
            })
            .collect();
        store.insert(id, Arc::from(samples));
    }
    store
}

pub fn render_preview(scene_json: &str, seconds: f64) -> Result<Vec<f32>, String> {
    if !(seconds > 0.0 && seconds <= MAX_PREVIEW_SECONDS) {
        return Err(format!("preview length must be in (0, {MAX_PREVIEW_SECONDS}] seconds"));
    }
    let scene = scene(scene_json)?;
    let tracks = synthetic_tracks(&scene, seconds);
    let config = EngineConfig {
        sample_rate: PREVIEW_SAMPLE_RATE,
        ..EngineConfig::default()
    };
    render_offline(&scene, tracks, config, seconds, &Automation::default())
        .map(|r| r.samples)
        .map_err(|e| e.to_string())
}
