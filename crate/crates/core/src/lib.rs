//! Momentum maps, dual pairs and singular solutions for Euler-Poincare
//! equations on automorphism groups of trivial principal bundles.

pub mod basis;
pub mod dualpair;
pub mod error;
pub mod grid;
pub mod io;
pub mod lie;
pub mod momentum;
pub mod peakon;
pub mod phase;
pub mod samples;
pub mod transform;
pub mod yangmills;

pub use basis::{AmbientKind, AmbientManifold, LeftAlgebraElement, RightAlgebraElement};
pub use error::{Error, Result};
pub use grid::{GridDiffeo, SourceKind, SourceManifold};
pub use lie::{AlgebraElement, CoalgebraElement, GroupElement, StructureGroup};
pub use phase::{BaseTangent, ChartLayout, CotangentState};
pub use transform::{LeftTransformer, RightTransformer};
