//! Meshes and quadrature rules.

mod gauss;
mod mesh;
mod product;
mod tanh_sinh;

pub use gauss::{gauss_jacobi, legendre, JacobiRule};
pub use mesh::{graded_mesh, GradedMesh};
pub use product::{product_weights, singular_panel_rule, weighted_integral, SingularWeight};
pub use tanh_sinh::{Estimate, TanhSinh};

