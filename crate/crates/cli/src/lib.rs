//! File formats, the command-line front end and the randomized bound
//! checker for the `modecollapse` library.

pub mod commands;
pub mod formats;
pub mod reduce;
pub mod svg;
pub mod verify;

pub use commands::{run, EXIT_OK, EXIT_USAGE, EXIT_VERIFY_FAILED};

#[cfg(test)]
mod tests;
