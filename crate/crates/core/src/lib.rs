//! Exact-arithmetic engine for comparing public-information oracles in
//! finite games of incomplete information.

pub mod dominance;
pub mod error;
pub mod games;
pub mod harness;
pub mod io;
pub mod lattice;
pub mod lp;
pub mod rational;
pub mod signaling;
pub mod types;

pub use error::{Error, Result};
pub use rational::Rational;
