//! Metastability analysis for hard-core dynamics on bipartite graphs.
//!
//! Configurations are independent sets of a bipartite graph with parts U and V.
//! Particles on U carry fugacity `λ` and particles on V carry `λ̄ = λ^{1+α}`.
//! The library enumerates configuration spaces, simulates the discrete-time
//! dynamics, computes electrical quantities exactly, solves the bipartite
//! isoperimetric problem, and derives the critical sizes, gate and sharp
//! crossover asymptotics.

pub mod acceptance;
pub mod configspace;
pub mod dynamics;
pub mod error;
pub mod exponent;
pub mod graph;
pub mod isoperimetry;
pub mod metastability;
pub mod potential;
pub mod stats;

pub use error::{Error, Result};
