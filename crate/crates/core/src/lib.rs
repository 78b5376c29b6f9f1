pub mod apportion;
pub mod audit;
pub mod error;
pub mod poisson;
pub mod quota;
pub mod residue;
pub mod rules;
pub mod scalar;
pub mod scenarios;
mod serde_util;
pub mod subset;
