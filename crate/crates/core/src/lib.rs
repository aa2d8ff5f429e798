//! Toolkit for the Steiner point removal lower-bound construction: hard
//! instances on high-girth cubic graphs, candidate solutions and their exact
//! stretch, the path-covering calculus, and a certifier that replays the
//! case analysis on concrete inputs.

pub mod catalog;
pub mod certify;
pub mod cli;
pub mod cover;
pub mod error;
pub mod generate;
pub mod graph;
pub mod instance;
pub mod numeric;
pub mod report;
pub mod solution;

pub use error::{Error, Result};
