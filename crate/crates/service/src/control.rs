use std::path::PathBuf;
use std::sync::Arc;
use std::thread::{self, JoinHandle};

use sonospace_core::engine::realtime::{Controller, Published};
use sonospace_core::engine::{EngineConfig, TransportState};
use sonospace_core::io::{load_assets, SceneDocument};
use sonospace_core::{Scene, SceneMutation};
use tokio::sync::{mpsc, oneshot, watch};
use tracing::warn;

pub(crate) enum Request {
    LoadScene(Box<SceneDocument>),
    Mutate(SceneMutation),
    SetTransport {
        state: TransportState,
        position: Option<f64>,
    },
    Shutdown,
}

/// Replies with the scene revision after the request, or the reason it was refused.
pub(crate) struct Command {
    pub request: Request,
    pub reply: oneshot::Sender<Result<u64, String>>,
}

/// Runs the control context on its own thread. Every accepted change is
/// published to the audio feed and the `published` watch before the reply
/// goes out.
pub(crate) fn spawn(
    mut controller: Controller,
    mut commands: mpsc::Receiver<Command>,
    published: watch::Sender<Arc<Published>>,
    asset_dir: PathBuf,
    engine: EngineConfig,
) -> JoinHandle<Scene> {
    thread::Builder::new()
        .name("sonospace-control".into())
        .spawn(move || {
            let feed = controller.feed();
            while let Some(Command { request, reply }) = commands.blocking_recv() {
                let result = match request {
                    Request::Shutdown => {
                        let _ = reply.send(Ok(controller.scene().revision()));
                        break;
                    }
                    Request::Mutate(m) => controller.apply(&m).map_err(|e| e.to_string()),
                    Request::LoadScene(doc) => match doc.into_scene() {
                        Ok(scene) => {
                            let (tracks, problems) = load_assets(&scene, &asset_dir, engine.sample_rate);
                            for p in problems {
                                warn!(track = %p.track, "{}", p.reason);
                            }
                            controller.set_tracks(Arc::new(tracks));
                            Ok(controller.replace_scene(scene))
                        }
                        Err(e) => Err(e.to_string()),
                    },
                    Request::SetTransport { state, position } => {
                        let seek = position.map(|s| (s.max(0.0) * engine.sample_rate as f64).round() as u64);
                        controller.set_transport(state, seek);
                        Ok(controller.scene().revision())
                    }
                };
                if result.is_ok() {
                    published.send_replace(feed.load());
                }
                let _ = reply.send(result);
            }
            (**controller.scene()).clone()
        })
        .expect("spawn control thread")
}
