//! Exact computations for the open-point game on finite topological spaces.
//!
//! The crate is `no_std` and needs only `alloc`. Points are indices into a
//! 64-bit [`PointSet`]; labels live on [`FiniteSpace`] for I/O layers.
//!
//! - [`space`]: finite topologies, closure, subspaces, the specialization preorder.
//! - [`invariants`]: density, δ, π-weight, weight and tightness.
//! - [`game`]: the solver, exact-length analysis and policy evaluation.
//! - [`strategies`]: π-base, dense-set, product and aggregate strategies.
//! - [`products`]: product spaces and the fan tightness condition.
//! - [`metric`]: the greedy dense-sequence algorithm on pseudometric spaces.
//! - [`enumeration`]: all topologies on a few points, labeled and up to homeomorphism.
//! - [`suite`]: the exhaustive property checks run over enumerated corpora.
#![no_std]

extern crate alloc;

mod combinations;

pub mod enumeration;
pub mod game;
pub mod invariants;
pub mod metric;
pub mod products;
pub mod space;
pub mod strategies;
pub mod suite;

pub use game::{GameError, GameVariant, StrategyTable};
pub use invariants::InvariantReport;
pub use space::{FiniteSpace, PointSet, Preorder, SpaceError};
