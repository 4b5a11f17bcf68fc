pub mod catalog;
pub mod conditions;
pub mod constructor;
pub mod elliptic;
mod error;
pub mod expr;
pub mod grid;
pub mod laxcheck;
pub mod report;
pub mod sample;
pub mod scenario;
pub mod similarity;
pub mod simulator;

pub use error::{Error, Result};
