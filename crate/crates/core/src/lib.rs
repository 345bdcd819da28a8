//! Coset states over `F_2`, mutually orthogonal subspace permutations, and
//! exact values and bounds for the `(n, k)` coset monogamy game.
//!
//! Module map:
//!
//! - [`gf2`]: vectors, canonical subspaces, duals, cosets, Grassmannian
//!   enumeration and the subspace counting formulas.
//! - [`perms`]: families of mutually orthogonal permutations of the
//!   Grassmannian with a fixed intersection dimension.
//! - [`qstate`]: dense coset states, projectors and operator norms.
//! - [`game`]: strategies, winning probabilities, bounds and the optimum
//!   over unentangled strategies.
//! - [`verify`]: the named verification suite.
//! - [`cli`]: the `coset` command-line front end.

pub mod cli;
pub mod error;
pub mod game;
pub mod gf2;
pub mod perms;
pub mod qstate;
pub mod surd;
pub mod verify;

pub use error::{Error, Result};
