//! A numerical laboratory for shift-representation operators.
//!
//! The objects of study: matrices K_f = Σ_n (A^n f/β_n) ⊗ e_n that
//! intertwine an operator A with a weighted backward shift, the Hankel
//! symbols ψ(z) = Σ ⟨A^n f, g⟩ z^{−n} they induce, polynomial growth of
//! balanced powers ‖A^n + λA^{−n}‖, and Krylov-style cyclicity probes.
//! Every float verdict is backed where possible by an exact ℚ(i)
//! computation, and every claimed subspace comes with a self-contained,
//! re-checkable witness.

pub mod corpus;
pub mod cyclic;
pub mod error;
pub mod exact;
pub mod growth;
pub mod hankel;
pub mod linalg;
pub mod operator;
pub mod rationality;
pub mod report;
pub mod runner;
pub mod scenario;
pub mod sequence;
pub mod shift_rep;

pub use error::{Error, Result};
