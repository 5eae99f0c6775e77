//! Program indexification.
//!
//! Operators whose constraints are hard for symbolic execution (string and
//! float library calls) are replaced by finite lookup tables over a *garden*
//! of values grown from the program's own constants. The rewritten program
//! only ever compares indices, so path conditions stay in equality logic.

pub mod lang;
pub mod garden;
pub mod iot;
pub mod rewrite;
pub mod solver;
pub mod symex;
pub mod cli;
pub mod bench;
pub mod error;

pub use error::Error;
