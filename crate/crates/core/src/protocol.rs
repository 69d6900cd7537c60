//! Wire protocol between the service and its clients.
//!
//! Text frames carry JSON control and server messages. Binary frames carry
//! audio: a little-endian `u32` sequence number, a little-endian `u32`
//! sample count, then that many little-endian `f32` mono samples.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::TransportState;
use crate::io::SceneDocument;
use crate::param::ParamSnapshot;
use crate::scene::SceneMutation;

pub const AUDIO_HEADER_BYTES: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ControlMessage {
    Hello {
        client_seq: u64,
    },
    LoadScene {
        client_seq: u64,
        scene: SceneDocument,
    },
    Mutate {
        client_seq: u64,
        mutation: SceneMutation,
    },
    SetTransport {
        client_seq: u64,
        state: TransportState,
        /// Seek target in seconds.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        position: Option<f64>,
    },
    SetConstants {
        client_seq: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        d: Option<f64>,
    },
    Ping {
        client_seq: u64,
    },
}

impl ControlMessage {
    pub fn client_seq(&self) -> u64 {
        match self {
            ControlMessage::Hello { client_seq }
            | ControlMessage::LoadScene { client_seq, .. }
            | ControlMessage::Mutate { client_seq, .. }
            | ControlMessage::SetTransport { client_seq, .. }
            | ControlMessage::SetConstants { client_seq, .. }
            | ControlMessage::Ping { client_seq } => *client_seq,
        }
    }

    /// Whether the message edits shared state (refused for read-only clients).
    pub fn is_edit(&self) -> bool {
        matches!(
            self,
            ControlMessage::LoadScene { .. }
                | ControlMessage::Mutate { .. }
                | ControlMessage::SetTransport { .. }
                | ControlMessage::SetConstants { .. }
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Editor,
    ReadOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    /// The frame was not a valid control message.
    Malformed,
    /// This connection may not edit.
    ReadOnly,
    /// `client_seq` did not increase.
    OutOfOrder,
    /// The scene refused the change.
    Rejected,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Ack {
        client_seq: u64,
        revision: u64,
    },
    Error {
        /// Absent when the offending frame could not be parsed.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        client_seq: Option<u64>,
        code: ErrorCode,
        reason: String,
    },
    Snapshot {
        snapshot: ParamSnapshot,
    },
    SceneState {
        revision: u64,
        role: Role,
        scene: SceneDocument,
    },
    Stats {
        audio_frames_sent: u64,
        audio_frames_dropped: u64,
        blocks_rendered: u64,
        clipped_samples: u64,
    },
}

/// A server message with its per-connection sequence number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ServerEnvelope {
    pub server_seq: u64,
    #[serde(flatten)]
    pub message: ServerMessage,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AudioFrame {
    pub seq: u32,
    pub samples: Vec<f32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("audio frame shorter than its {AUDIO_HEADER_BYTES}-byte header")]
    Truncated,
    #[error("audio frame declares {declared} samples but carries {actual} bytes of payload")]
    LengthMismatch { declared: u32, actual: usize },
}

pub fn encode_audio_frame(seq: u32, samples: &[f32]) -> Vec<u8> {
    let mut out = Vec::with_capacity(AUDIO_HEADER_BYTES + 4 * samples.len());
    out.extend_from_slice(&seq.to_le_bytes());
    out.extend_from_slice(&(samples.len() as u32).to_le_bytes());
    for s in samples {
        out.extend_from_slice(&s.to_le_bytes());
    }
    out
}

pub fn decode_audio_frame(bytes: &[u8]) -> Result<AudioFrame, FrameError> {
    if bytes.len() < AUDIO_HEADER_BYTES {
        return Err(FrameError::Truncated);
    }
    let seq = u32::from_le_bytes(bytes[0..4].try_into().unwrap());
    let count = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    let payload = &bytes[AUDIO_HEADER_BYTES..];
    if payload.len() != count as usize * 4 {
        return Err(FrameError::LengthMismatch {
            declared: count,
            actual: payload.len(),
        });
    }
    let samples = payload
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
        .collect();
    Ok(AudioFrame { seq, samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_of_512_samples_is_2056_bytes() {
        let bytes = encode_audio_frame(7, &[0.5; 512]);
        assert_eq!(bytes.len(), 8 + 2048);
        assert_eq!(&bytes[0..8], &[7, 0, 0, 0, 0, 2, 0, 0]);
        assert_eq!(&bytes[8..12], &0.5f32.to_le_bytes());
        let frame = decode_audio_frame(&bytes).unwrap();
        assert_eq!(frame.seq, 7);
        assert_eq!(frame.samples.len(), 512);
    }

    #[test]
    fn bad_frames_rejected() {
        assert_eq!(decode_audio_frame(&[1, 2, 3]), Err(FrameError::Truncated));
        let mut bytes = encode_audio_frame(1, &[0.0; 4]);
        bytes.pop();
        assert!(matches!(decode_audio_frame(&bytes), Err(FrameError::LengthMismatch { declared: 4, .. })));
    }

    #[test]
    fn control_json_shape() {
        let msg: ControlMessage = serde_json::from_str(
            r#"{"type":"mutate","client_seq":3,"mutation":{"op":"move_emitter","id":"e1","x":1,"y":2}}"#,
        )
        .unwrap();
        assert_eq!(msg.client_seq(), 3);
        assert!(msg.is_edit());
    }

    #[test]
    fn envelope_flattens() {
        let env = ServerEnvelope {
            server_seq: 9,
            message: ServerMessage::Ack {
                client_seq: 2,
                revision: 5,
            },
        };
        let json = serde_json::to_string(&env).unwrap();
        assert_eq!(json, r#"{"server_seq":9,"type":"ack","client_seq":2,"revision":5}"#);
        assert_eq!(serde_json::from_str::<ServerEnvelope>(&json).unwrap(), env);
    }
}
