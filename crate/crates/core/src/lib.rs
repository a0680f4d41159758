//! Frobenius intertwiners for p-adic q-hypergeometric difference equations.

pub mod error;
pub mod padic;
pub mod qseries;
pub mod qspecial;
pub mod hyperq;
pub mod frobq;
pub mod cohom;
pub mod cyclo;
pub mod cli;

pub use error::{Error, Result};
