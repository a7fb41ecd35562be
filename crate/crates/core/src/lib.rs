//! Expected L2-discrepancy of stratified samples drawn from equivolume
//! anti-diagonal strips of the unit square.

pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod exactform;
pub mod lowdisc;
pub mod numeric;
pub mod oracle;
pub mod partition;
pub mod qgeometry;

pub use error::{Error, Result};
