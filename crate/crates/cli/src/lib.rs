//! Scenario runner behind the `nls-virial` binary.

pub mod cache;
pub mod error;
pub mod run;
pub mod scenario;

pub use error::Failure;
