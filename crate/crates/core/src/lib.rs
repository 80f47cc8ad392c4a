//! Divergence operators for pairs of quantum systems.
//!
//! Given a measurement `{E(i)}`, the divergence operator
//! `C = 1/2 Σ_i (E_A(i) ⊗ 1 − 1 ⊗ E_B(i))²` scores how far two systems are
//! from producing identical outcomes. For the isotropic continuous POVM over
//! all pure states of `C^D` it reduces to `((D−1)/(D+1)) P+ + P−`, so every
//! joint state has mean divergence in `[(D−1)/(D+1), 1]`.
//!
//! Modules:
//! - [`hilbert`]: dense operators, tensor products, SWAP and the
//!   symmetric/antisymmetric projectors.
//! - [`haar`]: hyperspherical coordinates, their volume element and two
//!   independent samplers of the isotropic measure.
//! - [`divergence`]: the operator in discrete, Monte Carlo and closed form,
//!   and the remapped variant.
//! - [`scenarios`]: Bell states, beamsplitter correlations, factorization,
//!   random bits and the prediction game.
//!
//! Every random routine takes a `seed` and a `shards` count; results depend on
//! the seed only (see [`shard`]).

#![forbid(unsafe_code)]

pub mod divergence;
pub mod error;
pub mod haar;
pub mod hilbert;
pub mod scenarios;
pub mod shard;

pub use error::{Error, Result};
