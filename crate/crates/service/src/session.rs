use std::sync::atomic::Ordering;
use std::sync::Arc;

use axum::extract::ws::{Message, WebSocket};
use futures::stream::SplitSink;
use futures::{SinkExt, StreamExt};
use sonospace_core::engine::realtime::Published;
use sonospace_core::io::SceneDocument;
use sonospace_core::protocol::{ControlMessage, ErrorCode, Role, ServerEnvelope, ServerMessage};
use sonospace_core::SceneMutation;
use tokio::sync::oneshot;
use tokio::time::Instant;
use tracing::{debug, warn};

use crate::control::{Command, Request};
use crate::Shared;

type Tx = SplitSink<WebSocket, Message>;

/// Releases the editor slot when the editing connection ends.
struct EditorSlot<'a>(Option<&'a Shared>);

impl Drop for EditorSlot<'_> {
    fn drop(&mut self) {
        if let Some(shared) = self.0 {
            shared.editor_taken.store(false, Ordering::Release);
        }
    }
}

struct Session {
    role: Role,
    tx: Tx,
    server_seq: u64,
    last_client_seq: Option<u64>,
    greeted: bool,
    snapshot_revision: Option<u64>,
    snapshot_at: Option<Instant>,
    frames_sent: u64,
}

impl Session {
    async fn send(&mut self, message: ServerMessage) -> Result<(), axum::Error> {
        let envelope = ServerEnvelope {
            server_seq: self.server_seq,
            message,
        };
        self.server_seq += 1;
        let text = serde_json::to_string(&envelope).expect("server messages serialize");
        self.tx.send(Message::Text(text.into())).await
    }

    async fn error(&mut self, client_seq: Option<u64>, code: ErrorCode, reason: impl Into<String>) -> Result<(), axum::Error> {
        self.send(ServerMessage::Error {
            client_seq,
            code,
            reason: reason.into(),
        })
        .await
    }

    async fn send_scene_state(&mut self, published: &Published) -> Result<(), axum::Error> {
        self.send(ServerMessage::SceneState {
            revision: published.scene.revision(),
            role: self.role,
            scene: SceneDocument::from_scene(&published.scene),
        })
        .await
    }

    async fn send_snapshot(&mut self, published: &Published) -> Result<(), axum::Error> {
        self.snapshot_revision = Some(published.params.revision);
        self.snapshot_at = Some(Instant::now());
        self.send(ServerMessage::Snapshot {
            snapshot: (*published.params).clone(),
        })
        .await
    }
}

pub(crate) async fn run(socket: WebSocket, shared: Arc<Shared>) {
    let editor = shared
        .editor_taken
        .compare_exchange(false, true, Ordering::AcqRel, Ordering::Acquire)
        .is_ok();
    let _slot = EditorSlot(editor.then_some(&*shared));
    let role = if editor { Role::Editor } else { Role::ReadOnly };
    debug!(?role, "client connected");

    let (tx, mut rx) = socket.split();
    let (subscriber, mut frames) = shared.subscribers.subscribe(shared.client_audio_capacity);
    let mut published = shared.published.clone();
    published.mark_unchanged();
    let mut shutdown = shared.shutdown.clone();
    let mut stats = tokio::time::interval(shared.stats_interval);
    stats.tick().await;

    let mut session = Session {
        role,
        tx,
        server_seq: 0,
        last_client_seq: None,
        greeted: false,
        snapshot_revision: None,
        snapshot_at: None,
        frames_sent: 0,
    };
    // First unsent change. A snapshot goes out one interval after it, so a
    // burst of edits inside the interval costs one message.
    let mut pending_since: Option<Instant> = None;

    loop {
        let next_snapshot = match (pending_since, session.snapshot_at) {
            (Some(since), Some(at)) => since.max(at) + shared.snapshot_interval,
            (Some(since), None) => since + shared.snapshot_interval,
            (None, _) => Instant::now(),
        };
        let step = tokio::select! {
            biased;
            _ = shutdown.changed() => break,
            incoming = rx.next() => match incoming {
                Some(Ok(Message::Text(text))) => handle_text(&mut session, &shared, text.as_str()).await,
                Some(Ok(Message::Binary(_))) => {
                    session.error(None, ErrorCode::Malformed, "binary frames are not accepted from clients").await
                }
                Some(Ok(Message::Close(_))) | None => break,
                Some(Ok(_)) => Ok(()),
                Some(Err(e)) => {
                    debug!("socket error: {e}");
                    break;
                }
            },
            changed = published.changed() => {
                if changed.is_err() {
                    break;
                }
                if session.greeted && pending_since.is_none() {
                    pending_since = Some(Instant::now());
                }
                Ok(())
            }
            _ = tokio::time::sleep_until(next_snapshot), if pending_since.is_some() => {
                pending_since = None;
                let latest = published.borrow_and_update().clone();
                if session.snapshot_revision == Some(latest.params.revision) {
                    Ok(())
                } else if session.role == Role::ReadOnly {
                    match session.send_scene_state(&latest).await {
                        Ok(()) => session.send_snapshot(&latest).await,
                        Err(e) => Err(e),
                    }
                } else {
                    session.send_snapshot(&latest).await
                }
            }
            frame = frames.recv() => match frame {
                Some(bytes) if session.greeted => {
                    session.frames_sent += 1;
                    session.tx.send(Message::Binary(bytes)).await
                }
                Some(_) => Ok(()),
                None => break,
            },
            _ = stats.tick(), if session.greeted => {
                let counters = &shared.counters;
                let message = ServerMessage::Stats {
                    audio_frames_sent: session.frames_sent,
                    audio_frames_dropped: subscriber.dropped.load(Ordering::Relaxed),
                    blocks_rendered: counters.blocks.load(Ordering::Relaxed),
                    clipped_samples: counters.clipped_samples.load(Ordering::Relaxed),
                };
                session.send(message).await
            }
        };
        if let Err(e) = step {
            debug!("send failed, closing: {e}");
            break;
        }
    }

    shared.subscribers.unsubscribe(subscriber.id());
    let _ = session.tx.close().await;
    debug!(?role, "client disconnected");
}

async fn handle_text(session: &mut Session, shared: &Shared, text: &str) -> Result<(), axum::Error> {
    let message: ControlMessage = match serde_json::from_str(text) {
        Ok(m) => m,
        Err(e) => {
            let client_seq = serde_json::from_str::<serde_json::Value>(text)
                .ok()
                .and_then(|v| v.get("client_seq").and_then(|s| s.as_u64()));
            return session.error(client_seq, ErrorCode::Malformed, e.to_string()).await;
        }
    };

    let seq = message.client_seq();
    if let Some(last) = session.last_client_seq {
        if seq <= last {
            return session
                .error(Some(seq), ErrorCode::OutOfOrder, format!("client_seq {seq} does not exceed {last}"))
                .await;
        }
    }
    session.last_client_seq = Some(seq);

    if message.is_edit() && session.role == Role::ReadOnly {
        return session
            .error(Some(seq), ErrorCode::ReadOnly, "read_only")
            .await;
    }

    let request = match message {
        ControlMessage::Hello { .. } => {
            session.greeted = true;
            let latest = shared.published.borrow().clone();
            session
                .send(ServerMessage::Ack {
                    client_seq: seq,
                    revision: latest.scene.revision(),
                })
                .await?;
            session.send_scene_state(&latest).await?;
            return session.send_snapshot(&latest).await;
        }
        ControlMessage::Ping { .. } => {
            let revision = shared.published.borrow().scene.revision();
            return session.send(ServerMessage::Ack { client_seq: seq, revision }).await;
        }
        ControlMessage::LoadScene { scene, .. } => Request::LoadScene(Box::new(scene)),
        ControlMessage::Mutate { mutation, .. } => Request::Mutate(mutation),
        ControlMessage::SetConstants { c, d, .. } => Request::Mutate(SceneMutation::SetConstants { c, d }),
        ControlMessage::SetTransport { state, position, .. } => Request::SetTransport { state, position },
    };
    let reloads = matches!(request, Request::LoadScene(_));

    let (reply, response) = oneshot::channel();
    if shared.commands.send(Command { request, reply }).await.is_err() {
        warn!("control thread is gone");
        return session.error(Some(seq), ErrorCode::Rejected, "service is shutting down").await;
    }
    match response.await {
        Ok(Ok(revision)) => {
            session.send(ServerMessage::Ack { client_seq: seq, revision }).await?;
            if reloads {
                let latest = shared.published.borrow().clone();
                session.send_scene_state(&latest).await?;
            }
            Ok(())
        }
        Ok(Err(reason)) => session.error(Some(seq), ErrorCode::Rejected, reason).await,
        Err(_) => session.error(Some(seq), ErrorCode::Rejected, "service is shutting down").await,
    }
}
