//! Generative engine for indoor furniture layouts.
//!
//! The pipeline: load (or synthesize) a corpus of human-style rooms, learn
//! occurrence and placement statistics plus multi-object patterns from it,
//! then generate new rooms by ancestral sampling with deterministic
//! cell-based placement. Constraints are honored through parameter edits,
//! injected pending instances, and rejection sampling.

pub mod bench;
pub mod catalog;
pub mod constraints;
pub mod corpus;
pub mod dpmm;
pub mod error;
pub mod export;
pub mod geom;
pub mod markov;
pub mod mining;
pub mod placement;
pub mod sampler;
pub mod scalar;
pub mod scene;
pub mod stats;
pub mod synth;
pub mod validator;

pub use error::CoreError;

/// Concrete scalar used by the pipeline. The geometry and clustering
/// kernels stay generic over [`scalar::Scalar`]; everything downstream of
/// file formats is pinned to `f64`.
pub type Real = f64;

/// Floor-plane vector at pipeline precision.
pub type Vec2 = geom::Vec2<Real>;
/// Oriented rectangle at pipeline precision.
pub type Rect = geom::OrientedRect<Real>;
