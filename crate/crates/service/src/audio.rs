use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::Duration;

use arc_swap::ArcSwap;
use bytes::Bytes;
use sonospace_core::engine::realtime::{
    run_realtime, BlockSink, EngineCounters, FreeRunPacer, SinkFull, SnapshotFeed, WallClockPacer,
};
use sonospace_core::engine::{EngineConfig, Renderer};
use sonospace_core::protocol::encode_audio_frame;
use tokio::sync::mpsc;

use crate::Pacing;

pub(crate) struct Subscriber {
    id: u64,
    frames: mpsc::Sender<Bytes>,
    pub dropped: AtomicU64,
}

/// Audio listeners. The audio thread only ever loads the list.
#[derive(Default)]
pub(crate) struct Subscribers {
    list: ArcSwap<Vec<Arc<Subscriber>>>,
    next_id: AtomicU64,
}

impl Subscriber {
    pub fn id(&self) -> u64 {
        self.id
    }
}

impl Subscribers {
    pub fn subscribe(&self, capacity: usize) -> (Arc<Subscriber>, mpsc::Receiver<Bytes>) {
        let (frames, rx) = mpsc::channel(capacity.max(1));
        let sub = Arc::new(Subscriber {
            id: self.next_id.fetch_add(1, Ordering::Relaxed),
            frames,
            dropped: AtomicU64::new(0),
        });
        self.list.rcu(|list| {
            let mut next = Vec::clone(list);
            next.push(sub.clone());
            next
        });
        (sub, rx)
    }

    pub fn unsubscribe(&self, id: u64) {
        self.list.rcu(|list| {
            list.iter()
                .filter(|s| s.id != id)
                .cloned()
                .collect::<Vec<_>>()
        });
    }
}

/// Encodes each block once and offers it to every subscriber without
/// waiting; a full client queue drops the frame for that client only.
pub(crate) struct FanOut {
    subscribers: Arc<Subscribers>,
}

impl BlockSink for FanOut {
    fn write(&mut self, seq: u64, block: &[f32]) -> Result<(), SinkFull> {
        let list = self.subscribers.list.load();
        if list.is_empty() {
            return Ok(());
        }
        let frame = Bytes::from(encode_audio_frame(seq as u32, block));
        for sub in list.iter() {
            if let Err(mpsc::error::TrySendError::Full(_)) = sub.frames.try_send(frame.clone()) {
                sub.dropped.fetch_add(1, Ordering::Relaxed);
            }
        }
        Ok(())
    }
}

pub(crate) fn spawn(
    feed: SnapshotFeed,
    engine: EngineConfig,
    pacing: Pacing,
    stop: Arc<AtomicBool>,
    subscribers: Arc<Subscribers>,
    counters: Arc<EngineCounters>,
) -> JoinHandle<()> {
    thread::Builder::new()
        .name("sonospace-audio".into())
        .spawn(move || {
            let mut renderer = Renderer::new(engine, feed.load().tracks.clone());
            let mut sink = FanOut { subscribers };
            match pacing {
                Pacing::RealTime => {
                    let block = Duration::from_secs_f64(engine.block_duration());
                    let mut pacer = WallClockPacer::new(block, stop);
                    run_realtime(&feed, &mut renderer, &mut pacer, &mut sink, &counters);
                }
                Pacing::FreeRun => {
                    let mut pacer = FreeRunPacer::new(stop);
                    run_realtime(&feed, &mut renderer, &mut pacer, &mut sink, &counters);
                }
            }
        })
        .expect("spawn audio thread")
}
