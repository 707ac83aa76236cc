//! Filtered nilpotent Lie groups in Mal'cev coordinates of the second kind.

pub mod group;
pub mod lie;
pub mod spec;
pub mod testfn;

pub use group::{Element, Nilmanifold, ProductManifold};
pub use spec::{Family, NilmanifoldSpec};
pub use testfn::{bump, e, LipschitzTestFunction, TestFn};
