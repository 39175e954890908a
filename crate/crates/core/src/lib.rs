//! Exact analytics and Monte Carlo simulation of a qubit key distribution
//! protocol built on the tetrahedron measurement.
//!
//! Alice and Bob share noisy singlets, both measure the four-outcome
//! tetrahedron POVM, and turn their anti-correlated letters into key bits
//! by an iterative two-way sifting procedure. The crate covers the dense
//! linear algebra ([`qmath`]), the shared source and its statistics
//! ([`channel`]), the eavesdropper's purification and measurements
//! ([`eve`]), the sifting protocol and its efficiency ([`keygen`]), Eve's
//! information and the resulting secret-key yield ([`security`]), and the
//! experiment runner used by the command-line tool ([`harness`]).

pub mod channel;
pub mod error;
pub mod eve;
pub mod harness;
pub mod keygen;
pub mod qmath;
pub mod roots;
pub mod sampling;
pub mod security;

pub use channel::{JointTable, NoiseParameter, SEPARABLE_NOISE};
pub use error::{Error, Result};
pub use eve::{MuOptimum, PurificationParams};
pub use keygen::{IterationReport, IterationStats, Letter, LetterSequence};
pub use qmath::{BlochVector, DensityOperator, Povm, PureState};
pub use security::{CountVector, YieldReport};
