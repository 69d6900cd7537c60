//! Effects applied to reflected and transmitted sound.
//!
//! [`EffectSpec`] is the declarative description stored on a material;
//! [`FilterState`] is the runtime processor the renderer keeps for each
//! (emitter, material, path) triple.

mod effect;
mod filter;

pub use effect::{EffectError, EffectKind, EffectSpec, MixSource, ParamInfo, ParamMap};
pub use filter::FilterState;
