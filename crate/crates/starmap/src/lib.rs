//! Coded MapReduce execution over a star network, with exact accounting of
//! storage, computation, upload, and download.
//!
//! A cluster of `K` nodes computes one output function each over a shared set
//! of `N` files, exchanging intermediate values (IVs) through a single access
//! point. Files are replicated in batches, nodes XOR the sub-blocks their
//! peers are missing into multicast uplink signals, and the access point
//! chain-codes each multicast group into pairwise XOR blocks before
//! broadcasting. The crate runs this pipeline bit for bit, meters every
//! transmitted bit, and compares the measured loads against the closed-form
//! tradeoff surfaces and the matching lower bounds — all in exact rational
//! arithmetic, so achievability and bounds can be checked with `==` rather
//! than tolerances.
//!
//! Module map:
//! - [`combinatorics`]: subsets of `[1..K]` with colexicographic ranking.
//! - [`bits`]: packed bit vectors (MSB-first) for files, IVs, and signals.
//! - [`scheme`]: job description, batching, placement, and the map phase.
//! - [`signal`]: labeled signals and their wire format.
//! - [`shuffle`]: uplink XOR coding, chain coding at the AP, node decoding.
//! - [`mixture`]: file-group mixtures of base schemes.
//! - [`sim`]: the deterministic execution harness, load reports, traces.
//! - [`geometry`]: tradeoff surfaces, corner points, envelopes, Pareto tests.
//! - [`bounds`]: exclusivity statistics and communication lower bounds.
//! - [`verify`]: the batch verification sweep used by the CLI and tests.
//!
//! The formula-heavy modules ([`geometry`], the plane/envelope evaluators in
//! [`bounds`]) are generic over [`Scalar`] so they can be evaluated with
//! `f64` when an approximation is enough; everything that feeds an equality
//! check uses the exact [`Rat`] instantiation.

pub mod bits;
pub mod bounds;
pub mod combinatorics;
pub mod error;
pub mod geometry;
pub mod mixture;
pub mod render;
pub mod scalar;
pub mod scheme;
pub mod shuffle;
pub mod signal;
pub mod sim;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Exact rational scalar used for all load accounting.
pub type Rat = num_rational::Rational64;

/// Tradeoff surface instantiated over exact rationals.
pub type ExactSurface = geometry::TradeoffSurface<Rat>;

/// Full storage-computation-upload-download quadruple over exact rationals.
pub type ExactQuadruple = geometry::SccQuadruple<Rat>;

/// Convenience constructor for an exact rational. Panics if `denom == 0`.
pub fn rat(numer: i64, denom: i64) -> Rat {
    Rat::new(numer, denom)
}
