//! Crate-wide error type.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Anything that can go wrong while building or analysing a diagram.
#[derive(Debug, Error)]
pub enum Error {
    /// Two values belong to different participant universes.
    #[error("participant universe mismatch: {left} vs {right}")]
    UniverseMismatch { left: String, right: String },

    /// A universe failed validation (empty, too large, duplicate names).
    #[error("invalid participant universe: {reason}")]
    InvalidUniverse { reason: String },

    /// A participant name is not a member of the universe.
    #[error("unknown participant {name:?}")]
    UnknownParticipant { name: String },

    /// A theory failed validation (non-prime modulus, bad bounds, ...).
    #[error("invalid theory: {reason}")]
    InvalidTheory { reason: String },

    /// A named monoid element is not declared in the theory.
    #[error("unknown element {name:?}")]
    UnknownElement { name: String },

    /// An arrow does not belong to the theory or is out of range.
    #[error("invalid arrow: {reason}")]
    InvalidArrow { reason: String },

    /// Source/target objects of two arrows do not line up for composition.
    #[error("cannot compose: {reason}")]
    Composition { reason: String },

    /// An arrow was applied to a point outside its domain.
    #[error("cannot evaluate: {reason}")]
    Eval { reason: String },

    /// Two node declarations share an id.
    #[error("duplicate node id {id:?}")]
    DuplicateNodeId { id: String },

    /// An edge references a node id that is not declared.
    #[error("unknown node {id:?}")]
    UnknownNode { id: String },

    /// No edge exists between the given nodes.
    #[error("no edge from {src:?} to {dst:?}")]
    UnknownEdge { src: String, dst: String },

    /// An edge's arrow does not match the objects of its endpoints.
    #[error("type mismatch on edge {src:?} -> {dst:?}: {reason}")]
    TypeMismatch {
        src: String,
        dst: String,
        reason: String,
    },

    /// A second edge between the same ordered node pair.
    #[error("parallel edge {src:?} -> {dst:?}")]
    ParallelEdge { src: String, dst: String },

    /// An edge from a node to itself.
    #[error("self loop on {id:?}")]
    SelfLoop { id: String },

    /// The underlying digraph contains a directed cycle.
    #[error("cycle detected: {}", cycle.join(" -> "))]
    CycleDetected { cycle: Vec<String> },

    /// Path enumeration between two nodes exceeded the cap.
    #[error("more than {cap} paths from {src:?} to {dst:?}")]
    PathExplosion {
        src: String,
        dst: String,
        cap: usize,
    },

    /// Tag growth cannot repair an algebraic inequality.
    #[error("no completion exists: arrows do not commute between {src:?} and {dst:?}")]
    NoIfoAbove { src: String, dst: String },

    /// The operation requires a diagram that already passes the flow check.
    #[error("diagram does not satisfy the flow condition")]
    NotIfo,

    /// The target edge has several maximal parallel paths, so the polygon
    /// to triangulate is not determined.
    #[error("ambiguous polygon for {src:?} -> {dst:?}: maximal paths {}", paths.join(" | "))]
    AmbiguousPolygon {
        src: String,
        dst: String,
        paths: Vec<String>,
    },

    /// The target edge has no parallel path at all.
    #[error("edge {src:?} -> {dst:?} has no parallel path")]
    NoParallelPath { src: String, dst: String },

    /// An enumeration grew past its configured bound.
    #[error("enumeration exceeds bound of {bound}")]
    CountExplosion { bound: u64 },

    /// Generator parameters failed validation.
    #[error("bad parameters: {reason}")]
    BadParams { reason: String },

    /// Two element pools contain a non-commuting pair.
    #[error("pools do not commute: {left:?} and {right:?}")]
    PoolsDoNotCommute { left: String, right: String },

    /// Two diagrams differ in graph shape or arrows where only tags may vary.
    #[error("structural mismatch: {}", details.join("; "))]
    StructuralMismatch { details: Vec<String> },

    /// Input is not valid JSON.
    #[error("syntax error: {source}")]
    Syntax {
        #[source]
        source: serde_json::Error,
    },

    /// Input is valid JSON but not a valid document.
    #[error("schema error at {context}: {reason}")]
    Schema { context: String, reason: String },
}

impl Error {
    pub(crate) fn schema(context: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Schema {
            context: context.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn bad_params(reason: impl Into<String>) -> Self {
        Error::BadParams {
            reason: reason.into(),
        }
    }
}
