//! Finite-level analysis of Iwasawa modules over `Λ = Zp[[T]]`.

pub mod coinvariants;
pub(crate) mod dvr;
pub(crate) mod engine;
pub mod error;
pub mod oracle;
pub mod expand;
pub(crate) mod kernel;
pub mod padic;
pub mod poly;
pub mod predictors;
pub mod presentation;
pub mod structure;

pub use error::{Error, Result};
