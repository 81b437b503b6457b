//! Oscillation model of opinion dynamics on directed social networks.
//!
//! Users sit on the nodes of a weighted digraph and their states obey the
//! second-order system `x'' = -L x`, where `L` is the graph Laplacian. When
//! `L` is symmetrizable the motion is a superposition of real normal modes;
//! adding one-way links with weight `eps` eventually produces complex
//! frequencies and growing oscillations.

pub mod dynamics;
pub mod error;
pub mod graph;
pub mod ingest;
pub mod model;
pub mod random;
pub mod signal;
pub mod spectral;

pub use error::{Error, Result, SymmetrizableViolation};
pub use graph::{LaplacianMatrix, OneWaySplit, SymmetrizableDecomposition, WeightedDigraph};
pub use spectral::{eigendecompose, mode_frequencies, EigenFrequencies, EigenSystem};
