use thiserror::Error;

use super::{EngineConfig, Renderer, TrackStore};
use crate::ids::TrackId;
use crate::param::parameterize;
use crate::scene::{Scene, SceneError, SceneMutation};

/// Mutations scheduled at block indices.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Automation {
    events: Vec<(u64, SceneMutation)>,
}

impl Automation {
    /// Events are ordered by block; same-block events keep their given order.
    pub fn new(mut events: Vec<(u64, SceneMutation)>) -> Self {
        events.sort_by_key(|(block, _)| *block);
        Self { events }
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn events(&self) -> &[(u64, SceneMutation)] {
        &self.events
    }

    /// Mutations to apply before rendering `block`.
    pub fn at(&self, block: u64) -> impl Iterator<Item = &SceneMutation> + '_ {
        let start = self.events.partition_point(|(b, _)| *b < block);
        self.events[start..]
            .iter()
            .take_while(move |(b, _)| *b == block)
            .map(|(_, m)| m)
    }
}

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("missing assets: {}", list(.0))]
    MissingAssets(Vec<TrackId>),
    #[error("duration must be positive and finite, got {0}")]
    InvalidDuration(f64),
    #[error("automation at block {block}: {source}")]
    Automation {
        block: u64,
        #[source]
        source: SceneError,
    },
}

fn list(ids: &[TrackId]) -> String {
    ids.iter().map(|t| t.as_str()).collect::<Vec<_>>().join(", ")
}

#[derive(Clone, Debug)]
pub struct OfflineRender {
    pub samples: Vec<f32>,
    pub stats: super::RenderStats,
    /// How many parameterization passes the render needed.
    pub parameterizations: usize,
    pub final_scene: Scene,
}

/// Renders `duration` seconds of `scene`, applying `automation` at block
/// starts. The scene is re-parameterized only when its revision changes.
pub fn render_offline(
    scene: &Scene,
    tracks: TrackStore,
    config: EngineConfig,
    duration: f64,
    automation: &Automation,
) -> Result<OfflineRender, RenderError> {
    if !(duration.is_finite() && duration > 0.0) {
        return Err(RenderError::InvalidDuration(duration));
    }
    let mut missing: Vec<TrackId> = scene
        .emitters()
        .iter()
        .map(|e| &e.track)
        .chain(automation.events.iter().filter_map(|(_, m)| match m {
            SceneMutation::AddEmitter { emitter } | SceneMutation::UpdateEmitter { emitter } => {
                Some(&emitter.track)
            }
            _ => None,
        }))
        .filter(|t| !tracks.contains(t.as_str()))
        .cloned()
        .collect();
    if !missing.is_empty() {
        missing.sort();
        missing.dedup();
        return Err(RenderError::MissingAssets(missing));
    }

    let total = (duration * config.sample_rate as f64).round() as usize;
    let blocks = total.div_ceil(config.block_size) as u64;
    let mut renderer = Renderer::new(config, tracks);
    let mut scene = scene.clone();
    let mut params = parameterize(&scene);
    let mut parameterizations = 1;
    let mut samples = vec![0.0; blocks as usize * config.block_size];

    for (block, out) in (0..blocks).zip(samples.chunks_exact_mut(config.block_size)) {
        let before = scene.revision();
        for m in automation.at(block) {
            scene = scene
                .apply(m)
                .map_err(|source| RenderError::Automation { block, source })?;
        }
        if scene.revision() != before {
            params = parameterize(&scene);
            parameterizations += 1;
        }
        renderer.render_block(&scene, &params, out);
    }
    samples.truncate(total);
    Ok(OfflineRender {
        samples,
        stats: renderer.stats(),
        parameterizations,
        final_scene: scene,
    })
}
