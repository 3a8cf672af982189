pub mod axioms;
pub mod cli;
pub mod error;
pub mod fixtures;
pub mod series;
pub mod solvers;
pub mod spaces;
pub mod transforms;

pub use error::{Error, Result};
