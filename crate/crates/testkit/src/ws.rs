//! Minimal protocol client for service tests.

use std::time::Duration;

use futures::{SinkExt, StreamExt};
use serde_json::Value;
use sonospace_core::protocol::{decode_audio_frame, AudioFrame, ServerEnvelope};
use tokio::net::TcpStream;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{connect_async, MaybeTlsStream, WebSocketStream};

pub const RECV_TIMEOUT: Duration = Duration::from_secs(5);

pub enum Incoming {
    Server(ServerEnvelope),
    Audio(AudioFrame, usize),
}

pub struct WsClient {
    stream: WebSocketStream<MaybeTlsStream<TcpStream>>,
    next_seq: u64,
}

impl WsClient {
    pub async fn connect(addr: std::net::SocketAddr) -> Self {
        let (stream, _) = connect_async(format!("ws://{addr}/ws"))
            .await
            .expect("websocket connect");
        Self {
            stream,
            next_seq: 1,
        }
    }

    /// Sends `message` with the next `client_seq` filled in and returns that seq.
    pub async fn send(&mut self, mut message: Value) -> u64 {
        let seq = self.next_seq;
        self.next_seq += 1;
        message["client_seq"] = seq.into();
        self.send_raw(message.to_string()).await;
        seq
    }

    pub async fn send_raw(&mut self, text: String) {
        self.stream
            .send(Message::Text(text.into()))
            .await
            .expect("websocket send");
    }

    pub async fn send_binary(&mut self, bytes: Vec<u8>) {
        self.stream
            .send(Message::Binary(bytes.into()))
            .await
            .expect("websocket send");
    }

    /// Next text or binary frame, or `None` if nothing arrives within `wait`.
    pub async fn recv_within(&mut self, wait: Duration) -> Option<Incoming> {
        let deadline = tokio::time::Instant::now() + wait;
        loop {
            let frame = tokio::time::timeout_at(deadline, self.stream.next()).await.ok()??;
            match frame.expect("websocket receive") {
                Message::Text(text) => {
                    let envelope = serde_json::from_str(text.as_str()).expect("server message parses");
                    return Some(Incoming::Server(envelope));
                }
                Message::Binary(bytes) => {
                    let frame = decode_audio_frame(&bytes).expect("audio frame decodes");
                    return Some(Incoming::Audio(frame, bytes.len()));
                }
                Message::Close(_) => return None,
                _ => {}
            }
        }
    }

    /// Next server message, skipping audio.
    pub async fn message_within(&mut self, wait: Duration) -> Option<ServerEnvelope> {
        let deadline = tokio::time::Instant::now() + wait;
        loop {
            let left = deadline.saturating_duration_since(tokio::time::Instant::now());
            match self.recv_within(left).await? {
                Incoming::Server(m) => return Some(m),
                Incoming::Audio(..) => {}
            }
        }
    }

    pub async fn message(&mut self) -> ServerEnvelope {
        self.message_within(RECV_TIMEOUT)
            .await
            .expect("server message before timeout")
    }

    /// Next audio frame with its byte length, skipping server messages.
    pub async fn audio(&mut self) -> (AudioFrame, usize) {
        loop {
            match self.recv_within(RECV_TIMEOUT).await.expect("audio before timeout") {
                Incoming::Audio(frame, len) => return (frame, len),
                Incoming::Server(_) => {}
            }
        }
    }

    pub async fn close(mut self) {
        let _ = self.stream.close(None).await;
    }
}
