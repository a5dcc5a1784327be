//! Anticyclotomic p-adic L-function toolkit.

pub mod abgroup;
pub mod arith;
pub mod cyclo;
pub mod error;
pub mod formats;
pub mod heckechar;
pub mod lvalues;
pub mod nearly_holo;
pub mod numerics;
pub mod padic;
pub mod padic_measure;
pub mod qexp;
pub mod quadfield;
pub mod selftest;

pub use error::{Error, Result};
