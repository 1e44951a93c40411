//! Finite cohomology laboratory over `Z/p^M`.
//!
//! Finite groups act on free `Z/p^M`-modules; bar cochains, cones, Selmer
//! complexes with Greenberg and unramified local conditions, the Bockstein
//! for `R[ε]` coefficients, the height pairing and the derivative class are
//! built explicitly as matrices, and the structural identities between them
//! are checked exactly on seeded instances.

pub mod checks;
pub mod cochain;
pub mod complex;
pub mod generate;
pub mod group;
pub mod matrix;
pub mod module;
pub mod pairing;
pub mod ring;
pub mod selmer;
pub mod suite;

use thiserror::Error;

pub use cochain::ResourceLimits;
pub use generate::{generate_instance, GeneratorConfig};
pub use ring::ChainRing;
pub use selmer::{LocalCondition, Place, SelmerInstance};
pub use suite::{run_suite, SuiteReport};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CohomError {
    #[error("invalid coefficient ring: {0}")]
    InvalidRing(String),
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("invalid module: {0}")]
    InvalidModule(String),
    #[error("invalid complex: {0}")]
    InvalidComplex(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("degree {degree} outside the trusted range {lo}..{hi}")]
    DegreeOutOfRange { degree: i32, lo: i32, hi: i32 },
    #[error("maps do not commute with differentials in degree {degree}")]
    NotChainMap { degree: i32 },
    #[error("resource bound exceeded: |G| = {order}, rank {rank}, degree {degree}")]
    ResourceBound { order: usize, rank: usize, degree: usize },
    #[error("vector is not a cocycle: {0}")]
    NotCocycle(String),
    #[error("no solution: {0}")]
    NotSolvable(String),
    #[error("reciprocity fails: {0}")]
    Reciprocity(String),
    #[error("failed to generate an instance: {0}")]
    Generation(String),
    #[error("serialization: {0}")]
    Serialization(String),
}
