//! Structure-level tasks driven by calculator forces.

pub mod jedi;
pub mod optimize;
pub mod vibrations;
