//! Staggered phase-field solver for quasi-static brittle fracture on 2D
//! linear-triangle meshes.

pub mod constitutive;
pub mod error;
pub mod fem;
pub mod linalg;
pub mod meshio;
pub mod output;
pub mod stagger;
pub mod tensors;
pub mod verify;

pub use error::{Error, Result};
