//! Scripted capture through the realtime loop.

use std::sync::mpsc;
use std::sync::Arc;
use std::thread;

use sonospace_core::engine::realtime::{
    run_realtime, BlockSink, Controller, EngineCounters, LockstepPacer, SinkFull,
};
use sonospace_core::engine::{Automation, EngineConfig, Renderer, TrackStore};
use sonospace_core::Scene;

struct Forward(mpsc::Sender<Vec<f32>>);

impl BlockSink for Forward {
    fn write(&mut self, _seq: u64, block: &[f32]) -> Result<(), SinkFull> {
        self.0.send(block.to_vec()).map_err(|_| SinkFull)
    }
}

/// Renders `duration` seconds on an audio thread driven one block at a time.
/// The driver applies each block's automation through the controller before
/// releasing that block, the way a live editor would.
pub fn scripted_realtime(
    scene: Scene,
    tracks: TrackStore,
    config: EngineConfig,
    duration: f64,
    automation: &Automation,
) -> Vec<f32> {
    let total = (duration * config.sample_rate as f64).round() as usize;
    let blocks = total.div_ceil(config.block_size) as u64;
    let mut controller = Controller::new(scene, Arc::new(tracks));
    let feed = controller.feed();
    let (token_tx, token_rx) = mpsc::channel();
    let (block_tx, block_rx) = mpsc::channel();

    let audio = thread::spawn(move || {
        let mut renderer = Renderer::new(config, feed.load().tracks.clone());
        let mut pacer = LockstepPacer::new(token_rx);
        let mut sink = Forward(block_tx);
        run_realtime(&feed, &mut renderer, &mut pacer, &mut sink, &EngineCounters::default());
    });

    let mut out = Vec::with_capacity(blocks as usize * config.block_size);
    for block in 0..blocks {
        for m in automation.at(block) {
            controller.apply(m).expect("automation applies");
        }
        token_tx.send(()).expect("audio thread alive");
        out.extend(block_rx.recv().expect("block rendered"));
    }
    drop(token_tx);
    audio.join().expect("audio thread");
    out.truncate(total);
    out
}
