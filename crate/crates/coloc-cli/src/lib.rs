//! Library backing the `coloc` binary: argument types, file formats, the
//! report schema, and the subcommand implementations. Kept as a library so
//! integration tests drive the same code paths as the executable.

pub mod args;
pub mod commands;
pub mod error;
pub mod gridcsv;
pub mod pgm;
pub mod report;
