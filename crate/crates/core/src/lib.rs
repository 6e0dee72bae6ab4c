//! LP-decodable multipermutation codes.
//!
//! A multipermutation of the multiset with multiplicity vector `r` is stored
//! as a vector of 1-based symbol indices, and is represented for decoding as
//! an `m x n` binary matrix with unit column sums and row sums `r_i`. Codes
//! are defined by fixed-at-zero and fixed-at-equality constraints on the
//! matrix entries, which makes them decodable by linear programming.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is pure
//! computation; file formats, the CLI and the Monte Carlo harness live in the
//! `multiperm-cli` crate.
//!
//! Module map:
//!
//! - [`perm`]: multiplicity vectors, multipermutations, matrices, distances
//! - [`ranking`]: mixed-radix ranking / unranking bijection
//! - [`codes`]: constraint sets, ST codes, derangement codes, enumeration,
//!   bounded-distance decoding
//! - [`channels`]: AWGN / q-ary symmetric channels, log-likelihood matrices,
//!   quantization, seeded random streams
//! - [`polytope`]: hull membership, convex decomposition, projections
//! - [`decoders`]: factor graph, ADMM, dense simplex, Chebyshev LP,
//!   exhaustive reference decoders
//! - [`ensemble`]: random coding ensemble counts and bounds
//! - [`initvec`]: initial-vector estimation and turbo decoding

#![no_std]

extern crate alloc;

#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod channels;
pub mod codes;
pub mod decoders;
pub mod ensemble;
mod error;
pub mod initvec;
pub mod perm;
pub mod polytope;
pub mod ranking;

pub use error::{Error, Result};
pub use perm::{InitialVector, Multipermutation, MultipermutationMatrix, MultiplicityVector};
