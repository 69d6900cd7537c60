//! Spatial soundscape engine.
//!
//! A [`scene::Scene`] of emitters, one receptor and material-bearing walls is
//! reduced by [`param::parameterize`] to per-emitter dry, reflected and
//! transmitted mix scalars. The [`engine`] feeds those scalars and the
//! materials' [`dsp`] effects into a block mixer used both for offline
//! rendering and real-time playback.

pub mod dsp;
pub mod engine;
pub mod geometry;
pub mod ids;
pub mod io;
pub mod param;
pub mod protocol;
pub mod scene;
pub mod script;

pub use geometry::Vec2;
pub use param::{parameterize, ParamSnapshot};
pub use scene::{Scene, SceneError, SceneMutation};
