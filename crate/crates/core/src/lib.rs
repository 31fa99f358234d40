//! Variable-exponent Abel and Riemann–Liouville integral operators, their
//! approximate inversion into second-kind Volterra equations, and solvers for
//! first-kind Abel equations and fractional Cauchy problems.

pub mod analysis;
pub mod data;
pub mod error;
pub mod exponent;
pub mod funclang;
pub mod inversion;
pub mod kernels;
pub mod operators;
pub mod quadrature;
pub mod solvers;
pub mod specialfn;

pub use analysis::{estimate_order, fit_singularity_exponent, manufactured_forward, ExperimentReport, FitResult, OrderEstimate};
pub use data::{Antiderivative, DataFn, ForwardImage};
pub use error::{Error, FitError, Result};
pub use exponent::{Regime, TwoVarExponent, VariableExponent};
pub use funclang::{parse_expr, Jet2, ScalarFunc};
pub use inversion::{compose_residual, rhs_abel, rhs_fde, Composition};
pub use kernels::{gamma_weight, kernel_k, kernel_l, kernel_m_dt, kernel_rl, KernelEval, KernelMethod, SplitKernel};
pub use operators::{eval_forward, Family, OperatorSpec};
pub use quadrature::{graded_mesh, GradedMesh};
pub use solvers::{solve_abel, solve_fde, solve_vie2, AbelProblem, FdeProblem, GammaMode, SolutionGrid, StartBehavior};
