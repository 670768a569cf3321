pub mod ci_engine;
pub mod cli;
pub mod error;
pub mod lattice;
pub mod majorana;
pub mod pfaffian;
pub mod spin_oracle;
pub mod stabilizer_oracle;
pub mod verify;

pub use error::{Error, Result};
