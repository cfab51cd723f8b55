//! Exact constructible-function calculus on stratified variety models, their
//! towers, and arc spaces.

pub mod rings;
pub mod geom;
pub mod bivariant;
pub mod prosys;
pub mod arcspace;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
