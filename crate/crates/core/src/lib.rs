//! Finite-window models of countable homogeneous structures, together with
//! the machinery to build a pair of partial automorphisms generating a free
//! group acting without fixed points, and to certify the spectral constants
//! of the resulting free action numerically.
//!
//! The crate is organised around five subsystems:
//!
//! * [`structures`] — growing finite windows of concrete homogeneous
//!   structures (random graph, dense linear order, equivalence-relation
//!   tower, pure set) with quantifier-free types and extension witnesses.
//! * [`closure`] — orbit partitions under pointwise stabilizers and
//!   algebraic-closure certificates via class-size stabilization.
//! * [`neumann`] — constructive set-separation witnesses (moving one finite
//!   set off another by a type-preserving partial map).
//! * [`freepair`] — reduced words, partial automorphisms, the extension step
//!   maintaining image freshness, the back-and-forth builder, fixed-point
//!   enumeration, Schreier balls, and the tower counterexample.
//! * [`spectra`] — adjacency operators of free-group Cayley/Schreier balls,
//!   iterative top-eigenvalue estimation with independent dense cross-checks,
//!   and displacement bounds.
//!
//! [`cli`] ties these into reproducible command runs with text reports and a
//! versioned persistence format for built pairs.

pub mod cli;
pub mod closure;
pub mod error;
pub mod freepair;
pub mod neumann;
pub mod rng;
pub mod spectra;
pub mod structures;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Kesten norm of the generator sum in the left-regular representation of
/// the free group of rank 2: `2 * sqrt(3)`.
pub const KESTEN_NORM_F2: f64 = 3.464_101_615_137_754_4;

/// Lower bound on the summed squared displacement of a unit vector under the
/// two generators: `4 - 2 * sqrt(3)`.
pub const DISPLACEMENT_SUM_BOUND: f64 = 4.0 - KESTEN_NORM_F2;

/// Lower bound on the max-form displacement: `sqrt(2 - sqrt(3))`.
pub const DISPLACEMENT_MAX_BOUND: f64 = 0.517_638_090_205_041_5;
