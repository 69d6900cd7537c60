//! Real-time playback: a control side that edits the scene and publishes
//! immutable snapshots, and an audio loop that renders from whatever
//! snapshot is current when each block starts.
//!
//! The handoff is a single atomic pointer swap. The audio loop never locks,
//! never waits on the control side and owns all filter state.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::mpsc::Receiver;
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use arc_swap::ArcSwap;

use super::{Renderer, TrackStore, TransportState};
use crate::param::{parameterize, ParamSnapshot};
use crate::scene::{Scene, SceneError, SceneMutation};

/// Requested transport state. `generation` increments on every request so
/// the audio loop applies each one exactly once.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TransportCommand {
    pub state: TransportState,
    pub seek: Option<u64>,
    pub generation: u64,
}

/// What the audio loop sees: a scene revision and its parameterization.
#[derive(Debug)]
pub struct Published {
    pub scene: Arc<Scene>,
    pub params: Arc<ParamSnapshot>,
    pub tracks: Arc<TrackStore>,
    pub transport: TransportCommand,
}

#[derive(Clone)]
pub struct SnapshotFeed {
    current: Arc<ArcSwap<Published>>,
}

impl SnapshotFeed {
    pub fn load(&self) -> Arc<Published> {
        self.current.load_full()
    }
}

/// The control context. Applies mutations, parameterizes each new revision
/// once and publishes it.
pub struct Controller {
    scene: Arc<Scene>,
    params: Arc<ParamSnapshot>,
    tracks: Arc<TrackStore>,
    transport: TransportCommand,
    feed: SnapshotFeed,
    parameterizations: u64,
}

impl Controller {
    pub fn new(scene: Scene, tracks: Arc<TrackStore>) -> Self {
        let params = Arc::new(parameterize(&scene));
        let scene = Arc::new(scene);
        let transport = TransportCommand {
            state: TransportState::Playing,
            seek: None,
            generation: 0,
        };
        let feed = SnapshotFeed {
            current: Arc::new(ArcSwap::from_pointee(Published {
                scene: scene.clone(),
                params: params.clone(),
                tracks: tracks.clone(),
                transport,
            })),
        };
        Self {
            scene,
            params,
            tracks,
            transport,
            feed,
            parameterizations: 1,
        }
    }

    pub fn feed(&self) -> SnapshotFeed {
        self.feed.clone()
    }

    pub fn scene(&self) -> &Arc<Scene> {
        &self.scene
    }

    pub fn params(&self) -> &Arc<ParamSnapshot> {
        &self.params
    }

    pub fn transport(&self) -> TransportCommand {
        self.transport
    }

    pub fn parameterizations(&self) -> u64 {
        self.parameterizations
    }

    /// Applies one mutation and publishes the new revision.
    pub fn apply(&mut self, mutation: &SceneMutation) -> Result<u64, SceneError> {
        self.apply_all(std::slice::from_ref(mutation))
    }

    /// Applies mutations in order and publishes once. All or nothing.
    pub fn apply_all(&mut self, mutations: &[SceneMutation]) -> Result<u64, SceneError> {
        if mutations.is_empty() {
            return Ok(self.scene.revision());
        }
        let mut next = (*self.scene).clone();
        for m in mutations {
            next = next.apply(m)?;
        }
        self.install(next);
        Ok(self.scene.revision())
    }

    /// Swaps in a whole new scene, keeping revision numbers increasing.
    pub fn replace_scene(&mut self, scene: Scene) -> u64 {
        let revision = self.scene.revision() + 1;
        self.install(scene.with_revision(revision));
        revision
    }

    pub fn set_tracks(&mut self, tracks: Arc<TrackStore>) {
        self.tracks = tracks;
        self.publish();
    }

    pub fn set_transport(&mut self, state: TransportState, seek: Option<u64>) {
        self.transport = TransportCommand {
            state,
            seek,
            generation: self.transport.generation + 1,
        };
        self.publish();
    }

    fn install(&mut self, scene: Scene) {
        self.params = Arc::new(parameterize(&scene));
        self.parameterizations += 1;
        self.scene = Arc::new(scene);
        self.publish();
    }

    fn publish(&self) {
        self.feed.current.store(Arc::new(Published {
            scene: self.scene.clone(),
            params: self.params.clone(),
            tracks: self.tracks.clone(),
            transport: self.transport,
        }));
    }
}

/// Decides when the next block is due.
pub trait Pacer {
    /// Blocks until the next block should be rendered; `false` ends the loop.
    fn wait_next(&mut self) -> bool;
}

/// Paces blocks against the wall clock.
pub struct WallClockPacer {
    block: Duration,
    start: Instant,
    ticks: u32,
    stop: Arc<AtomicBool>,
}

impl WallClockPacer {
    pub fn new(block: Duration, stop: Arc<AtomicBool>) -> Self {
        Self {
            block,
            start: Instant::now(),
            ticks: 0,
            stop,
        }
    }
}

impl Pacer for WallClockPacer {
    fn wait_next(&mut self) -> bool {
        if self.stop.load(Ordering::Relaxed) {
            return false;
        }
        let due = self.start + self.block * self.ticks;
        let now = Instant::now();
        if due > now {
            thread::sleep(due - now);
        } else if now - due > self.block * 4 {
            // fell far behind; restart the schedule instead of bursting
            self.start = now;
            self.ticks = 0;
        }
        self.ticks += 1;
        !self.stop.load(Ordering::Relaxed)
    }
}

/// Never waits; renders as fast as the loop runs until stopped.
pub struct FreeRunPacer {
    stop: Arc<AtomicBool>,
}

impl FreeRunPacer {
    pub fn new(stop: Arc<AtomicBool>) -> Self {
        Self { stop }
    }
}

impl Pacer for FreeRunPacer {
    fn wait_next(&mut self) -> bool {
        thread::yield_now();
        !self.stop.load(Ordering::Relaxed)
    }
}

/// Renders one block per token received; ends when the sender hangs up.
/// Lets a driver step the audio loop in lockstep with control edits.
pub struct LockstepPacer {
    tokens: Receiver<()>,
}

impl LockstepPacer {
    pub fn new(tokens: Receiver<()>) -> Self {
        Self { tokens }
    }
}

impl Pacer for LockstepPacer {
    fn wait_next(&mut self) -> bool {
        self.tokens.recv().is_ok()
    }
}

/// The sink had no room for a block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SinkFull;

/// Where rendered blocks go. Must not block.
pub trait BlockSink {
    fn write(&mut self, seq: u64, block: &[f32]) -> Result<(), SinkFull>;
}

/// Live counters readable from any thread.
#[derive(Debug, Default)]
pub struct EngineCounters {
    pub blocks: AtomicU64,
    pub dropped: AtomicU64,
    pub clipped_samples: AtomicU64,
}

/// Runs the audio loop until the pacer says stop. Each block renders from
/// the snapshot current at its start; a full sink drops the block and
/// counts it.
pub fn run_realtime(
    feed: &SnapshotFeed,
    renderer: &mut Renderer,
    pacer: &mut impl Pacer,
    sink: &mut impl BlockSink,
    counters: &EngineCounters,
) {
    let mut block = vec![0.0; renderer.config().block_size];
    let mut seq = 0u64;
    let mut generation = None;
    while pacer.wait_next() {
        let snap = feed.load();
        if !Arc::ptr_eq(&snap.tracks, renderer.tracks()) {
            renderer.set_tracks(snap.tracks.clone());
        }
        if generation != Some(snap.transport.generation) {
            generation = Some(snap.transport.generation);
            let transport = renderer.transport_mut();
            transport.state = snap.transport.state;
            if let Some(pos) = snap.transport.seek {
                transport.position = pos;
            }
        }
        if renderer.transport().state == TransportState::Stopped {
            continue;
        }
        renderer.render_block(&snap.scene, &snap.params, &mut block);
        if sink.write(seq, &block).is_err() {
            counters.dropped.fetch_add(1, Ordering::Relaxed);
        }
        seq += 1;
        counters.blocks.store(seq, Ordering::Relaxed);
        counters
            .clipped_samples
            .store(renderer.stats().clipped_samples, Ordering::Relaxed);
    }
}
