//! Sequential sharing of bipartite Bell nonlocality.
//!
//! One Alice and a chain of Bobs share a two-qubit state. Every Bob but the last
//! measures unsharply, passes the qubit on, and the question is how many of them can
//! each violate a given Bell inequality with Alice.
//!
//! Modules, bottom up:
//! - [`qcore`]: 2x2 / 4x4 complex matrices.
//! - [`states`]: singlet, Schmidt and Werner states.
//! - [`measure`]: unsharp POVMs and Lüders channels.
//! - [`bell`]: the ten built-in functionals and their classical bounds.
//! - [`seqchain`]: per-Bob correlation tables and values.
//! - [`bloch`]: the Pauli-basis fast path used inside the optimiser.
//! - [`optimize`]: multistart Nelder–Mead over settings and sharpness.
//! - [`robustness`]: concurrence and Werner-weight thresholds.

#![allow(clippy::needless_range_loop)]

pub mod bell;
pub mod bloch;
pub mod error;
pub mod measure;
pub mod optimize;
pub mod qcore;
pub mod robustness;
pub mod seqchain;
pub mod states;

pub use error::{Error, Result};
