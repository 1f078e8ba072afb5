//! Polynomial approximation of analytic multigraphs in the fiberwise Hausdorff metric.

pub mod algebra;
pub mod chebyshev;
pub mod converse;
pub mod demos;
pub mod extremal;
pub mod forward;
pub mod roots;
pub mod sets;

pub type Complex = num_complex::Complex64;
