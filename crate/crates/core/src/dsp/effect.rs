use std::collections::BTreeMap;
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EffectKind {
    Gain,
    Delay,
    Phaser,
    LowPass,
}

impl EffectKind {
    pub const ALL: [EffectKind; 4] = [
        EffectKind::Gain,
        EffectKind::Delay,
        EffectKind::Phaser,
        EffectKind::LowPass,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EffectKind::Gain => "gain",
            EffectKind::Delay => "delay",
            EffectKind::Phaser => "phaser",
            EffectKind::LowPass => "low_pass",
        }
    }

    /// The parameter registry for this kind.
    pub fn params(self) -> &'static [ParamInfo] {
        match self {
            EffectKind::Gain => &GAIN_PARAMS,
            EffectKind::Delay => &DELAY_PARAMS,
            EffectKind::Phaser => &PHASER_PARAMS,
            EffectKind::LowPass => &LOW_PASS_PARAMS,
        }
    }

    pub fn param(self, name: &str) -> Option<&'static ParamInfo> {
        self.params().iter().find(|p| p.name == name)
    }

    pub fn default_spec(self) -> EffectSpec {
        let p = self.params();
        match self {
            EffectKind::Gain => EffectSpec::Gain { g: p[0].default },
            EffectKind::Delay => EffectSpec::Delay {
                time: p[0].default,
                feedback: p[1].default,
            },
            EffectKind::Phaser => EffectSpec::Phaser {
                rate: p[0].default,
                depth: p[1].default,
            },
            EffectKind::LowPass => EffectSpec::LowPass {
                cutoff: p[0].default,
            },
        }
    }
}

impl fmt::Display for EffectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A named, ranged effect parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamInfo {
    pub name: &'static str,
    pub unit: &'static str,
    pub min: f64,
    pub max: f64,
    pub default: f64,
}

const fn param(name: &'static str, unit: &'static str, min: f64, max: f64, default: f64) -> ParamInfo {
    ParamInfo {
        name,
        unit,
        min,
        max,
        default,
    }
}

static GAIN_PARAMS: [ParamInfo; 1] = [param("g", "linear", 0.0, 4.0, 1.0)];
static DELAY_PARAMS: [ParamInfo; 2] = [
    param("time", "s", 0.0, 2.0, 0.25),
    param("feedback", "linear", 0.0, 0.95, 0.3),
];
static PHASER_PARAMS: [ParamInfo; 2] = [
    param("rate", "Hz", 0.05, 10.0, 0.5),
    param("depth", "linear", 0.0, 1.0, 0.7),
];
static LOW_PASS_PARAMS: [ParamInfo; 1] = [param("cutoff", "Hz", 20.0, 20000.0, 1000.0)];

#[derive(Clone, Debug, PartialEq, Error)]
pub enum EffectError {
    #[error("unknown parameter '{name}' for {kind} effect")]
    UnknownParam { kind: EffectKind, name: String },
    #[error("{kind}.{name} = {value} is outside [{min}, {max}]")]
    OutOfRange {
        kind: EffectKind,
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
}

/// One effect and its parameter values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EffectSpec {
    Gain { g: f64 },
    Delay { time: f64, feedback: f64 },
    Phaser { rate: f64, depth: f64 },
    LowPass { cutoff: f64 },
}

impl Default for EffectSpec {
    fn default() -> Self {
        EffectSpec::Gain { g: 1.0 }
    }
}

impl EffectSpec {
    pub fn kind(&self) -> EffectKind {
        match self {
            EffectSpec::Gain { .. } => EffectKind::Gain,
            EffectSpec::Delay { .. } => EffectKind::Delay,
            EffectSpec::Phaser { .. } => EffectKind::Phaser,
            EffectSpec::LowPass { .. } => EffectKind::LowPass,
        }
    }

    /// Parameter values in registry order.
    pub fn values(&self) -> Vec<(&'static str, f64)> {
        let names = self.kind().params().iter().map(|p| p.name);
        let values: &[f64] = match self {
            EffectSpec::Gain { g } => &[*g],
            EffectSpec::Delay { time, feedback } => &[*time, *feedback],
            EffectSpec::Phaser { rate, depth } => &[*rate, *depth],
            EffectSpec::LowPass { cutoff } => &[*cutoff],
        };
        names.zip(values.iter().copied()).collect()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values().into_iter().find(|(n, _)| *n == name).map(|(_, v)| v)
    }

    /// Sets a parameter without range checking; see [`EffectSpec::validate`].
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), EffectError> {
        let slot = match (self, name) {
            (EffectSpec::Gain { g }, "g") => g,
            (EffectSpec::Delay { time, .. }, "time") => time,
            (EffectSpec::Delay { feedback, .. }, "feedback") => feedback,
            (EffectSpec::Phaser { rate, .. }, "rate") => rate,
            (EffectSpec::Phaser { depth, .. }, "depth") => depth,
            (EffectSpec::LowPass { cutoff }, "cutoff") => cutoff,
            (spec, _) => {
                return Err(EffectError::UnknownParam {
                    kind: spec.kind(),
                    name: name.to_owned(),
                })
            }
        };
        *slot = value;
        Ok(())
    }

    pub fn validate(&self) -> Result<(), EffectError> {
        let kind = self.kind();
        for (info, (_, value)) in kind.params().iter().zip(self.values()) {
            // NaN fails the range test as well
            if !(value >= info.min && value <= info.max) {
                return Err(EffectError::OutOfRange {
                    kind,
                    name: info.name,
                    value,
                    min: info.min,
                    max: info.max,
                });
            }
        }
        Ok(())
    }

    /// Maps `mix` in `[0, 1]` onto the map's range and writes the result into
    /// the target parameter, clamped to that parameter's legal range.
    /// Returns the spec unchanged when it has no such parameter.
    pub fn apply_param_map(&self, map: &ParamMap, mix: f64) -> EffectSpec {
        let Some(info) = self.kind().param(&map.target) else {
            return *self;
        };
        let [lo, hi] = map.range;
        let value = (lo + mix * (hi - lo)).clamp(info.min, info.max);
        let mut out = *self;
        out.set(info.name, value).expect("registry name");
        out
    }
}

#[derive(Serialize, Deserialize)]
struct EffectSpecRepr {
    kind: EffectKind,
    #[serde(default)]
    params: BTreeMap<String, f64>,
}

impl Serialize for EffectSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        EffectSpecRepr {
            kind: self.kind(),
            params: self
                .values()
                .into_iter()
                .map(|(n, v)| (n.to_owned(), v))
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for EffectSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = EffectSpecRepr::deserialize(deserializer)?;
        let mut spec = repr.kind.default_spec();
        for (name, value) in repr.params {
            spec.set(&name, value).map_err(D::Error::custom)?;
        }
        Ok(spec)
    }
}

/// Which mix drives a mapped effect parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixSource {
    /// The material's share of the path (`m.rMix` or `m.tMix`).
    MaterialMix,
    /// The emitter's global wet level for the path (`rMix` or `tMix`).
    GlobalMix,
}

/// Couples one effect parameter to a spatial mix value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamMap {
    pub target: String,
    pub source: MixSource,
    pub range: [f64; 2],
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn delay_map() -> ParamMap {
        ParamMap {
            target: "time".into(),
            source: MixSource::MaterialMix,
            range: [0.05, 0.5],
        }
    }

    #[test]
    fn param_map_endpoints_and_midpoint() {
        let spec = EffectSpec::Delay {
            time: 0.1,
            feedback: 0.2,
        };
        let map = delay_map();
        assert_eq!(spec.apply_param_map(&map, 0.0).get("time"), Some(0.05));
        assert_eq!(spec.apply_param_map(&map, 1.0).get("time"), Some(0.5));
        assert_relative_eq!(
            spec.apply_param_map(&map, 0.5).get("time").unwrap(),
            0.275,
            epsilon = 1e-12
        );
        // untouched parameter
        assert_eq!(spec.apply_param_map(&map, 0.5).get("feedback"), Some(0.2));
    }

    #[test]
    fn param_map_clamps_to_legal_range() {
        let spec = EffectSpec::Delay {
            time: 0.1,
            feedback: 0.2,
        };
        let map = ParamMap {
            target: "feedback".into(),
            source: MixSource::GlobalMix,
            range: [0.0, 3.0],
        };
        assert_eq!(spec.apply_param_map(&map, 1.0).get("feedback"), Some(0.95));
    }

    #[test]
    fn unknown_param_rejected() {
        let err = serde_json::from_str::<EffectSpec>(r#"{"kind":"gain","params":{"q":1}}"#)
            .unwrap_err();
        assert!(err.to_string().contains("unknown parameter 'q'"), "{err}");
    }

    #[test]
    fn missing_params_take_defaults() {
        let spec: EffectSpec = serde_json::from_str(r#"{"kind":"delay","params":{"time":0.5}}"#).unwrap();
        assert_eq!(
            spec,
            EffectSpec::Delay {
                time: 0.5,
                feedback: 0.3
            }
        );
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(json, r#"{"kind":"delay","params":{"feedback":0.3,"time":0.5}}"#);
    }

    #[test]
    fn validate_ranges() {
        assert!(EffectSpec::LowPass { cutoff: 19.0 }.validate().is_err());
        assert!(EffectSpec::LowPass { cutoff: f64::NAN }.validate().is_err());
        assert!(EffectSpec::Phaser { rate: 10.0, depth: 0.0 }.validate().is_ok());
        for kind in EffectKind::ALL {
            kind.default_spec().validate().unwrap();
        }
    }
}
