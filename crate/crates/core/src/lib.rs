//! Checks for functional (Orlicz-type) dissipativity and ellipticity of
//! second-order matrix differential operators with complex coefficients.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod dissipativity;
pub mod ellipticity;
pub mod error;
pub mod field;
pub mod instances;
pub mod interp;
pub mod linalg;
pub mod oracle;
pub mod phi;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result};
