//! Exact divisor statistics of the Mersenne numbers `2^n - 1` and their
//! companions `2^n + 1`.
//!
//! Factorizations are assembled from the cyclotomic pieces `Phi_d(2)`, which
//! are factored once, cached in a [`store::FactorStore`] and shared between
//! every `n` they divide.

pub mod arithmetic;
pub mod cyclotomic;
pub mod error;
pub mod experiments;
pub mod factorization;
pub mod hcn;
pub mod highprec;
pub mod stats;
pub mod render;
pub mod store;

pub use error::{Error, Result};
pub use factorization::{factor, Factorization, FactorPolicy, Natural, Primality, Status};
