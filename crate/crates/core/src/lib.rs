//! Deterministic sensemaking engine.
//!
//! Frames and their sign relations compile into a discrete Bayesian network
//! ([`graphical_model`]); a content-addressable memory of units and shared
//! attributes is settled by bounded relaxation ([`memory_network`]); the
//! [`sensemaking_loop`] couples the two: a cue is clamped into memory, the
//! settled pattern is read out as hard evidence, and the network is queried
//! for a decision. [`oracle`] holds brute-force references used to check
//! both engines.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod frame_semantics;
pub mod graphical_model;
pub mod memory_network;
pub mod oracle;
pub mod sensemaking_loop;

pub use frame_semantics::{CompiledFrames, Frame, FrameError, FrameGraph, RelationKind, SignRelation};
pub use graphical_model::{
    BayesNet, Cpt, Distribution, Evidence, InferenceError, NetworkError, Variable,
};
pub use memory_network::{
    CamError, CamNetwork, Cue, CueValue, DynamicsParams, SettleResult, SynthesizedSign, WeightConfig,
};
pub use sensemaking_loop::{
    Binding, DecisionRule, LoopError, LoopParams, ScenarioSpec, SensemakingDecision,
};
