//! Linear triangular finite elements for the displacement and phase-field
//! subproblems.

mod assembly;
mod dirichlet;
mod history;
mod quadrature;
mod reaction;

pub use assembly::{
    assemble_displacement, assemble_phase_field, element_gradients, element_strain,
    element_strains, ElementGeometry,
};
pub use dirichlet::{apply_dirichlet, DirichletSet, DofMap};
pub use history::{project_quadstate, ElementLinearField, QuadHistory};
pub use quadrature::{barycentric, gauss2_unit, QuadratureRule, NQ};
pub use reaction::reaction_force;
