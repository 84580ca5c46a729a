pub mod catalog;
pub mod chars;
pub mod cyclo;
pub mod error;
pub mod matrix;
pub mod perm;
pub mod ring;
pub mod solver;
pub mod validation;
pub mod zmodule;

pub use error::{Error, Result};
pub use matrix::IntMatrix;
pub use ring::FusionRing;
pub use zmodule::{BasedModule, CanonicalKey};
