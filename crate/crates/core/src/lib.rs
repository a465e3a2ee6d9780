//! Coupling analysis and class integration test order generation for
//! object-oriented programs.
//!
//! The pipeline: a [`model::ProgramModel`] (loaded from PMIF JSON or lowered
//! from `.minij` source by [`frontend`]) feeds [`cfg`] for call-operation
//! probabilities, [`eord`] for the extended relation diagram, [`coupling`] for
//! stubbing costs and [`orders`] for the ordering strategies.

pub mod cfg;
pub mod cli;
pub mod coupling;
pub mod eord;
pub mod frontend;
pub mod model;
pub mod orders;
