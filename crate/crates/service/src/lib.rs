//! WebSocket front end for the engine.
//!
//! One full-duplex socket per client at `/ws`: JSON text frames for control
//! and server messages, binary frames for the rendered PCM stream. The first
//! client to connect is the editor; later clients are read-only until the
//! editor leaves. Static UI assets are served over plain HTTP on the same
//! port.
//!
//! Three contexts cooperate: a control thread that owns the scene and
//! serializes every edit, an audio thread that renders blocks from the
//! latest published snapshot, and one async task per connection.

mod audio;
mod control;
mod session;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use axum::extract::{State, WebSocketUpgrade};
use axum::response::IntoResponse;
use axum::routing::get;
use axum::Router;
use sonospace_core::engine::realtime::{Controller, EngineCounters, SnapshotFeed};
use sonospace_core::engine::{EngineConfig, TrackStore};
use sonospace_core::Scene;
use thiserror::Error;
use tokio::net::TcpListener;
use tokio::sync::{mpsc, oneshot, watch};
use tower_http::services::ServeDir;
use tracing::info;

use crate::audio::Subscribers;
use crate::control::{Command, Request};

pub const DEFAULT_PORT: u16 = 8765;

/// How the audio thread schedules blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pacing {
    /// One block per block duration of wall-clock time.
    RealTime,
    /// As fast as possible. Useful for load tests.
    FreeRun,
}

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    pub addr: SocketAddr,
    pub engine: EngineConfig,
    pub pacing: Pacing,
    /// Directory served at `/`, if any.
    pub static_dir: Option<PathBuf>,
    /// Base directory for asset paths in scenes loaded over the socket.
    pub asset_dir: PathBuf,
    /// Minimum spacing of snapshot messages per client.
    pub snapshot_interval: Duration,
    pub stats_interval: Duration,
    /// Audio frames buffered per client before frames are dropped.
    pub client_audio_capacity: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            addr: SocketAddr::from(([127, 0, 0, 1], DEFAULT_PORT)),
            engine: EngineConfig::default(),
            pacing: Pacing::RealTime,
            static_dir: None,
            asset_dir: PathBuf::from("."),
            snapshot_interval: Duration::from_millis(50),
            stats_interval: Duration::from_secs(1),
            client_audio_capacity: 16,
        }
    }
}

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        #[source]
        source: std::io::Error,
    },
    #[error("server task failed: {0}")]
    Server(String),
}

pub(crate) struct Shared {
    commands: mpsc::Sender<Command>,
    published: watch::Receiver<Arc<sonospace_core::engine::realtime::Published>>,
    editor_taken: AtomicBool,
    subscribers: Arc<Subscribers>,
    counters: Arc<EngineCounters>,
    shutdown: watch::Receiver<bool>,
    snapshot_interval: Duration,
    stats_interval: Duration,
    client_audio_capacity: usize,
}

/// A running service.
pub struct ServiceHandle {
    addr: SocketAddr,
    feed: SnapshotFeed,
    counters: Arc<EngineCounters>,
    commands: mpsc::Sender<Command>,
    shutdown: watch::Sender<bool>,
    stop_audio: Arc<AtomicBool>,
    server: tokio::task::JoinHandle<std::io::Result<()>>,
    audio: JoinHandle<()>,
    control: JoinHandle<Scene>,
}

impl ServiceHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// The most recently published scene revision.
    pub fn scene(&self) -> Arc<Scene> {
        self.feed.load().scene.clone()
    }

    pub fn counters(&self) -> &EngineCounters {
        &self.counters
    }

    /// Closes every connection, stops the audio and control threads and
    /// returns the final scene.
    pub async fn shutdown(self) -> Result<Scene, ServiceError> {
        let _ = self.shutdown.send(true);
        let served = self.server.await.map_err(|e| ServiceError::Server(e.to_string()))?;
        served.map_err(|e| ServiceError::Server(e.to_string()))?;
        self.stop_audio.store(true, Ordering::Relaxed);
        let (reply, done) = oneshot::channel();
        let _ = self
            .commands
            .send(Command {
                request: Request::Shutdown,
                reply,
            })
            .await;
        let _ = done.await;
        let (audio, control) = (self.audio, self.control);
        tokio::task::spawn_blocking(move || {
            let _ = audio.join();
            control.join()
        })
        .await
        .map_err(|e| ServiceError::Server(e.to_string()))?
        .map_err(|_| ServiceError::Server("control thread panicked".into()))
    }
}

/// Binds `config.addr` and starts serving `scene`.
pub async fn serve(
    config: ServiceConfig,
    scene: Scene,
    tracks: TrackStore,
) -> Result<ServiceHandle, ServiceError> {
    let listener = TcpListener::bind(config.addr)
        .await
        .map_err(|source| ServiceError::Bind {
            addr: config.addr,
            source,
        })?;
    let addr = listener.local_addr().map_err(|source| ServiceError::Bind {
        addr: config.addr,
        source,
    })?;

    let controller = Controller::new(scene, Arc::new(tracks));
    let feed = controller.feed();
    let (published_tx, published_rx) = watch::channel(feed.load());
    let (commands, command_rx) = mpsc::channel(64);
    let control = control::spawn(controller, command_rx, published_tx, config.asset_dir.clone(), config.engine);

    let subscribers = Arc::new(Subscribers::default());
    let counters = Arc::new(EngineCounters::default());
    let stop_audio = Arc::new(AtomicBool::new(false));
    let audio = audio::spawn(
        feed.clone(),
        config.engine,
        config.pacing,
        stop_audio.clone(),
        subscribers.clone(),
        counters.clone(),
    );

    let (shutdown, shutdown_rx) = watch::channel(false);
    let shared = Arc::new(Shared {
        commands: commands.clone(),
        published: published_rx,
        editor_taken: AtomicBool::new(false),
        subscribers,
        counters: counters.clone(),
        shutdown: shutdown_rx.clone(),
        snapshot_interval: config.snapshot_interval,
        stats_interval: config.stats_interval,
        client_audio_capacity: config.client_audio_capacity,
    });

    let app = Router::new().route("/ws", get(upgrade)).with_state(shared);
    let app = match &config.static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app.fallback(|| async { "sonospace service: open a WebSocket at /ws\n" }),
    };

    let mut stop = shutdown_rx;
    let server = tokio::spawn(async move {
        axum::serve(listener, app)
            .with_graceful_shutdown(async move {
                let _ = stop.wait_for(|s| *s).await;
            })
            .await
    });
    info!(%addr, "service listening");

    Ok(ServiceHandle {
        addr,
        feed,
        counters,
        commands,
        shutdown,
        stop_audio,
        server,
        audio,
        control,
    })
}

async fn upgrade(ws: WebSocketUpgrade, State(shared): State<Arc<Shared>>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| session::run(socket, shared))
}
