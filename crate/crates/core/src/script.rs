//! Trajectory scripts: timed scene edits in CSV, a reproducible stand-in
//! for dragging nodes around by hand.
//!
//! ```text
//! time,op,args...
//! 0.5,move_emitter,drums,3.0,4.0
//! 1.0,move_receptor,5.0,5.0
//! 2.0,set_constant,c,0.8
//! ```

use std::path::Path;

use thiserror::Error;

use crate::engine::{Automation, EngineConfig};
use crate::ids::EmitterId;
use crate::scene::SceneMutation;

#[derive(Clone, Debug, PartialEq)]
pub enum ScriptAction {
    MoveEmitter { id: EmitterId, x: f64, y: f64 },
    MoveReceptor { x: f64, y: f64 },
    SetConstant { constant: Constant, value: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Constant {
    C,
    D,
}

impl ScriptAction {
    pub fn to_mutation(&self) -> SceneMutation {
        match self {
            ScriptAction::MoveEmitter { id, x, y } => SceneMutation::MoveEmitter {
                id: id.clone(),
                x: *x,
                y: *y,
            },
            ScriptAction::MoveReceptor { x, y } => SceneMutation::MoveReceptor { x: *x, y: *y },
            ScriptAction::SetConstant {
                constant: Constant::C,
                value,
            } => SceneMutation::SetConstants {
                c: Some(*value),
                d: None,
            },
            ScriptAction::SetConstant {
                constant: Constant::D,
                value,
            } => SceneMutation::SetConstants {
                c: None,
                d: Some(*value),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScriptRow {
    pub time: f64,
    pub action: ScriptAction,
}

#[derive(Debug, Error)]
pub enum ScriptError {
    #[error("line {line}: {message}")]
    Syntax { line: u64, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrajectoryScript {
    pub rows: Vec<ScriptRow>,
}

impl TrajectoryScript {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, ScriptError> {
        let reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_path(path)?;
        Self::from_reader(reader)
    }

    pub fn parse(text: &str) -> Result<Self, ScriptError> {
        let reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        Self::from_reader(reader)
    }

    fn from_reader<R: std::io::Read>(mut reader: csv::Reader<R>) -> Result<Self, ScriptError> {
        let mut rows: Vec<ScriptRow> = Vec::new();
        for record in reader.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            let err = |message: String| ScriptError::Syntax { line, message };
            let field = |i: usize| record.get(i).ok_or_else(|| err(format!("missing field {}", i + 1)));
            let number = |i: usize| -> Result<f64, ScriptError> {
                let raw = field(i)?;
                raw.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(format!("'{raw}' is not a finite number")))
            };

            let first = field(0)?;
            if rows.is_empty() && first == "time" {
                continue;
            }
            let time = number(0)?;
            if time < 0.0 {
                return Err(err("time must be >= 0".into()));
            }
            if rows.last().is_some_and(|r| r.time > time) {
                return Err(err("times must be non-decreasing".into()));
            }
            let action = match field(1)? {
                "move_emitter" => ScriptAction::MoveEmitter {
                    id: field(2)?.into(),
                    x: number(3)?,
                    y: number(4)?,
                },
                "move_receptor" => ScriptAction::MoveReceptor {
                    x: number(2)?,
                    y: number(3)?,
                },
                "set_constant" => ScriptAction::SetConstant {
                    constant: match field(2)? {
                        "c" => Constant::C,
                        "d" => Constant::D,
                        other => return Err(err(format!("unknown constant '{other}'"))),
                    },
                    value: number(3)?,
                },
                other => return Err(err(format!("unknown op '{other}'"))),
            };
            rows.push(ScriptRow { time, action });
        }
        Ok(Self { rows })
    }

    /// Schedules each row at the block containing its time.
    pub fn to_automation(&self, config: &EngineConfig) -> Automation {
        Automation::new(
            self.rows
                .iter()
                .map(|r| (config.block_at(r.time), r.action.to_mutation()))
                .collect(),
        )
    }
}
