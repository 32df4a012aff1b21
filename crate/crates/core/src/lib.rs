//! Verification engine for elliptic units, Eisenstein-Kronecker lattice sums
//! and special values of Hecke L-functions over imaginary quadratic fields.

pub mod arith;
pub mod error;
pub mod field;
pub mod iwasawa;
pub mod kronecker;
pub mod lattice;
pub mod lfun;
pub mod modular;
pub mod robert;
pub mod precision;
pub mod special;
pub mod units;

pub use error::{Error, Result};
