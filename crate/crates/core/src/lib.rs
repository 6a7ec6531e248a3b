//! Coarse geometry of box spaces at finite scale.
//!
//! The crate builds finite quotients of a handful of concrete residually
//! finite groups (free abelian, Heisenberg, infinite dihedral, lamplighter,
//! `Z^n ⋊ Z`), metrizes them with the quotient word metric, and measures
//! asymptotic-dimension witnesses on the resulting finite metric spaces:
//! covers with a given multiplicity, bound and Lebesgue number, colorings by
//! separated bounded families, lifted covers, and the fibre structure of
//! quotients of group extensions.
//!
//! Everything is exact. Distances are rationals, stored internally as
//! integer multiples of a common unit.

pub mod boxspace;
pub mod covers;
pub mod dimsolve;
pub mod error;
pub mod extension;
pub mod formats;
pub mod groups;
pub mod hirsch;
pub mod limits;
pub mod metric;
pub mod perm;
pub mod quotients;
pub mod scalar;
pub mod separation;

pub use error::{Error, Result};
pub use limits::Limits;
pub use metric::FiniteMetricSpace;
pub use scalar::Scalar;
