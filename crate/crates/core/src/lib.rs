//! Exact Demazure-Lusztig operator calculus for simply-laced finite and
//! untwisted affine root systems, with executable checks of the
//! Casselman-Shalika formula, the Weyl-Kac character and denominator
//! identities, and the Gindikin-Karpelevich limit.
//!
//! Everything is exact: coefficients live in `Z[v, v^-1]` with
//! arbitrary-precision integers, and infinite series are truncated by
//! height below a fixed anchor.

pub mod characters;
pub mod error;
pub mod hecke;
pub mod rootdata;
pub mod series;
pub mod suite;
pub mod verify;
pub mod vpoly;
pub mod weyl;

pub use error::{Error, Result};
pub use hecke::{DLKind, StabilizeConfig, Stabilized};
pub use rootdata::{CartanMatrix, Coroot, ExponentList, Family, RootDatum, RootKind, RootSystemSpec};
pub use series::{geometric_inverse, AnchoredSeries, Beta, Witness};
pub use characters::Correction;
pub use verify::{Verdict, VerificationReport};
pub use vpoly::VPoly;
pub use weyl::{LayerCache, WeylElement};

/// Version string printed in report headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
