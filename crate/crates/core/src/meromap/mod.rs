//! Rational maps between polydisc charts and projective spaces.
//!
//! A map is stored as a gcd-free tuple of forms of one common degree. Affine
//! sources `C^n` are homogenized with `z0`, so the affine coordinates are
//! `z1..zn` and a meromorphic function `p/q` is the pair `[p : q]`.

mod compiled;
mod family;
mod image;
mod indet;
mod map;
mod point;

use thiserror::Error;

use crate::exactalg::AlgebraError;

pub use compiled::{CompiledMap, LiftJet, TargetPoint};
pub use family::{LiftLimit, MapFamily, MapInstance, ProductMap};
pub use image::{point_image, restrict_to_line, sphere_directions, ProjectiveLine};
pub use indet::{
    indeterminacy_locus, indeterminacy_locus_with, indeterminacy_numeric, indeterminacy_points, IndetConfig, IndetSet,
};
pub use map::{Iteration, RationalMap, Source, DEFAULT_BIT_BUDGET};
pub use point::ProjectivePoint;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("all components are zero")]
    AllZero,
    #[error("component degrees differ: {0} vs {1}")]
    DegreeMismatch(u32, u32),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("coefficient size {bits} bits exceeds budget {budget} at iterate {step}")]
    BudgetExceeded { step: usize, bits: u64, budget: u64 },
    #[error("map is not a self-map of a projective space")]
    NotASelfMap,
    #[error("iterate count must be at least 1")]
    ZeroIterate,
    #[error("indeterminacy loci are computed for surface sources only, got {0}")]
    NotASurfaceSource(map::Source),
    #[error("resultant vanished identically in every chart; is the map reduced?")]
    RootFindingFailed,
    #[error("coefficient expression undefined at n = {n}")]
    ExpressionDomainError { n: i64 },
    #[error("line lies inside the indeterminacy set")]
    LineInsideIndeterminacy,
    #[error("unsupported family: {0}")]
    UnsupportedFamily(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}
