//! Exact and high-precision computations for WZNW-model conformal blocks.
//!
//! The crate builds, from a simple Lie algebra and a positive integral level:
//!
//! - Cartan/root data and a Chevalley basis with the invariant form
//!   normalized so the highest root has squared length 2 ([`liealg`]);
//! - finite-dimensional irreducible representations with exact action
//!   matrices, tensor spaces, and invariant subspaces ([`repn`]);
//! - depth-truncated modules for the affine Lie algebra: induced modules,
//!   their irreducible quotients, vertex operator modes, and Virasoro
//!   modes from the Sugawara construction ([`affinevoa`]);
//! - Knizhnik–Zamolodchikov systems, their reduction to Fuchsian ODEs for
//!   four-point blocks, Frobenius series bases at the regular singular
//!   points, and level-truncated fusion rules ([`kz`]);
//! - arbitrary-precision complex arithmetic ([`bigcx`]) and analytic
//!   continuation along paths: connection matrices between local solution
//!   bases, monodromy and braiding, and verification drivers for
//!   convergence, associativity, and multi-point products
//!   ([`continuation`]);
//! - a configuration format and task runner behind the `wznw` CLI
//!   ([`config`], [`runner`]).
//!
//! All algebraic data is exact (arbitrary-precision rationals); analytic
//! data is computed at a configurable decimal precision with explicit
//! error control. Everything is deterministic: the same inputs produce
//! byte-identical outputs.

// Dense index arithmetic over several arrays at once reads better as
// plain range loops than as zipped iterator chains.
#![allow(clippy::needless_range_loop)]

pub mod affinevoa;
pub mod bigcx;
pub mod config;
pub mod continuation;
pub mod error;
pub mod kz;
pub mod liealg;
pub mod rat;
pub mod repn;
pub mod runner;
pub mod sparse;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
