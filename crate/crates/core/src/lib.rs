//! No-free-lunch analysis of exponential Lévy markets under convex
//! investment constraints.

pub mod arbitrage;
pub mod constraints;
pub mod error;
pub mod esscher;
pub mod exec;
pub mod extended;
pub mod levy;
pub mod linalg;
pub mod lowdisc;
pub mod lp;
pub mod numeraire;
pub mod optimize;
pub mod quadrature;
pub mod simulate;
pub mod spec_file;
pub mod serde_ext;

pub use error::{Error, Result};
pub use extended::ExtReal;
