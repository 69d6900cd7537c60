//! Random protocol messages.

use rand::Rng;
use sonospace_core::engine::TransportState;
use sonospace_core::io::SceneDocument;
use sonospace_core::protocol::{ControlMessage, ErrorCode, Role, ServerEnvelope, ServerMessage};
use sonospace_core::scene::{Emitter, Material, SceneMutation};
use sonospace_core::{parameterize, Vec2};

use crate::scenes::{decorated_scene, random_effect};

fn coord(rng: &mut impl Rng) -> f64 {
    rng.random_range(-20.0..20.0)
}

fn maybe<R: Rng, T>(rng: &mut R, value: impl FnOnce(&mut R) -> T) -> Option<T> {
    if rng.random_bool(0.5) {
        Some(value(rng))
    } else {
        None
    }
}

fn ident(rng: &mut impl Rng, prefix: &str) -> String {
    let n: u32 = rng.random_range(0..1000);
    match rng.random_range(0..4) {
        0 => format!("{prefix} {n} \u{e9}"),
        1 => format!("{prefix}\"{n}\\"),
        _ => format!("{prefix}{n}"),
    }
}

fn emitter(rng: &mut impl Rng) -> Emitter {
    let mut e = Emitter::new(
        ident(rng, "e"),
        Vec2::new(coord(rng), coord(rng)),
        ident(rng, "t"),
    );
    e.gain = rng.random_range(0.0..3.0);
    e.looping = rng.random_bool(0.5);
    e.start_offset = rng.random_range(0.0..10.0);
    e
}

fn material(rng: &mut impl Rng) -> Material {
    Material::new(ident(rng, "m"), random_effect(rng), random_effect(rng))
}

pub fn random_mutation<R: Rng>(rng: &mut R) -> SceneMutation {
    match rng.random_range(0..14) {
        0 => SceneMutation::AddEmitter { emitter: emitter(rng) },
        1 => SceneMutation::UpdateEmitter { emitter: emitter(rng) },
        2 => SceneMutation::RemoveEmitter { id: ident(rng, "e").into() },
        3 => SceneMutation::MoveEmitter {
            id: ident(rng, "e").into(),
            x: coord(rng),
            y: coord(rng),
        },
        4 => SceneMutation::MoveReceptor { x: coord(rng), y: coord(rng) },
        5 => SceneMutation::AddWall {
            id: maybe(rng, |r| ident(r, "w").into()),
            material_id: ident(rng, "m").into(),
            vertices: (0..rng.random_range(2..6))
                .map(|_| Vec2::new(coord(rng), coord(rng)))
                .collect(),
        },
        6 => SceneMutation::RemoveWall { id: ident(rng, "w").into() },
        7 => SceneMutation::SetWallMaterial {
            id: ident(rng, "w").into(),
            material_id: ident(rng, "m").into(),
        },
        8 => SceneMutation::AddMaterial { material: material(rng) },
        9 => SceneMutation::UpdateMaterial { material: material(rng) },
        10 => SceneMutation::RemoveMaterial { id: ident(rng, "m").into() },
        11 => SceneMutation::SetConstants {
            c: maybe(rng, |r| r.random_range(0.01..5.0)),
            d: maybe(rng, |r| r.random_range(0.0..1.0)),
        },
        12 => SceneMutation::SetMaxSegmentLength {
            value: rng.random_range(0.01..2.0),
        },
        _ => SceneMutation::SetLengthWeighted {
            enabled: rng.random_bool(0.5),
        },
    }
}

fn transport(rng: &mut impl Rng) -> TransportState {
    if rng.random_bool(0.5) {
        TransportState::Playing
    } else {
        TransportState::Stopped
    }
}

pub fn random_control<R: Rng>(rng: &mut R) -> ControlMessage {
    let client_seq = rng.random_range(0..u64::MAX >> 11);
    match rng.random_range(0..6) {
        0 => ControlMessage::Hello { client_seq },
        1 => ControlMessage::LoadScene {
            client_seq,
            scene: SceneDocument::from_scene(&decorated_scene(rng.random())),
        },
        2 => ControlMessage::Mutate {
            client_seq,
            mutation: random_mutation(rng),
        },
        3 => ControlMessage::SetTransport {
            client_seq,
            state: transport(rng),
            position: maybe(rng, |r| r.random_range(0.0..600.0)),
        },
        4 => ControlMessage::SetConstants {
            client_seq,
            c: maybe(rng, |r| r.random_range(0.01..5.0)),
            d: maybe(rng, |r| r.random_range(0.0..1.0)),
        },
        _ => ControlMessage::Ping { client_seq },
    }
}

pub fn random_server<R: Rng>(rng: &mut R) -> ServerEnvelope {
    let codes = [
        ErrorCode::Malformed,
        ErrorCode::ReadOnly,
        ErrorCode::OutOfOrder,
        ErrorCode::Rejected,
    ];
    let message = match rng.random_range(0..5) {
        0 => ServerMessage::Ack {
            client_seq: rng.random_range(0..1 << 40),
            revision: rng.random_range(0..1 << 40),
        },
        1 => ServerMessage::Error {
            client_seq: maybe(rng, |r| r.random_range(0..1 << 40)),
            code: codes[rng.random_range(0..codes.len())],
            reason: ident(rng, "reason: "),
        },
        2 => {
            let scene = decorated_scene(rng.random()).with_revision(rng.random_range(0..1 << 30));
            ServerMessage::Snapshot {
                snapshot: parameterize(&scene),
            }
        }
        3 => {
            let scene = decorated_scene(rng.random());
            ServerMessage::SceneState {
                revision: rng.random_range(0..1 << 30),
                role: if rng.random_bool(0.5) { Role::Editor } else { Role::ReadOnly },
                scene: SceneDocument::from_scene(&scene),
            }
        }
        _ => ServerMessage::Stats {
            audio_frames_sent: rng.random_range(0..1 << 40),
            audio_frames_dropped: rng.random_range(0..1 << 40),
            blocks_rendered: rng.random_range(0..1 << 40),
            clipped_samples: rng.random_range(0..1 << 40),
        },
    };
    ServerEnvelope {
        server_seq: rng.random_range(0..1 << 40),
        message,
    }
}
