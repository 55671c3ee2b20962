//! Algebraic-epistemic diagrams: acyclic diagrams whose edges carry both
//! an algebra arrow and a tag naming the participants informed of it.
//!
//! The crate checks two conditions edge by edge against every parallel
//! path: the composite along the path must equal the edge's arrow, and
//! the participants who know the whole path must be included in the
//! edge's tag. On top of those checks it completes under-informed tags to
//! their least fixpoint, classifies edges into primitive, computation,
//! and announcement events, restricts diagrams to what one participant
//! sees, propagates leaked tags, enumerates triangulation scenarios of a
//! polygon, and counts or lists the valid event orderings.
//!
//! Two arrow theories are built in: modular exponentiation over a prime
//! carrier, and a monoid of square matrices over `Z_n` with named
//! generators. [`protocols`] generates key-exchange and commuting-pool
//! diagrams in those theories, [`io`] round-trips diagrams through a
//! canonical JSON document format and exports Graphviz DOT, and
//! [`corpus`] produces seeded random diagrams that commute by
//! construction.
//!
//! The `parallel` feature (on by default) runs the per-edge checks and
//! completion across worker threads; disable it for strictly sequential
//! builds. Results are identical either way.

pub mod algebra;
pub mod analysis;
pub mod corpus;
pub mod diagram;
pub mod error;
pub mod ifo;
pub mod io;
pub mod lattice;
pub mod protocols;

pub use error::{Error, Result};

pub use algebra::{AlgebraArrow, AlgebraObject, AlgebraTheory, Matrix, ModExpTheory};
pub use analysis::{classify_events, enumerate_orderings, enumerate_scenarios, restrict_view};
pub use diagram::{check_commutes, diagram_leq, Diagram, Edge, EdgeRef, Node};
pub use ifo::{check_ifo, complete_ifo, strict_cycle_check, IfoReport};
pub use lattice::{ParticipantUniverse, Tag};
