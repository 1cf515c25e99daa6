//! Numerical laboratory for Patterson-Sullivan-Gibbs measures of Fuchsian groups.
//!
//! The crate works in the Poincaré disk (curvature -1) and provides:
//!
//! * [`hyperbolic`]: points, ideal points, isometries, distances, Busemann
//!   functions and the shadow trigonometry of cone and shadow neighbourhoods;
//! * [`group`]: Schottky groups, the genus-2 octagon group and orbit enumeration;
//! * [`potential`]: invariant potentials and their integrals along geodesics;
//! * [`gibbs`]: Poincaré series, critical exponents, atomic Patterson measures
//!   and the Gibbs cocycle;
//! * [`boundary`]: arc queries for cone and shadow sets;
//! * [`flow`]: Liouville sampling, Birkhoff averages and shadow decay slopes;
//! * [`lemmas`]: empirical checks of the structural lemmas behind the decay formula.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod error;
pub mod flow;
pub mod gibbs;
pub mod group;
pub mod hyperbolic;
pub mod lemmas;
pub mod potential;
pub mod stats;

pub use error::{Error, Result};
pub use group::{GeneratorSet, GroupKind, OrbitPoint, OrbitTable, Word};
pub use hyperbolic::{Arc, BoundaryPoint, DiskPoint, Isometry, UnitTangent};

