#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod barycentric;
pub mod error;
pub mod extended;
pub mod nodes;
pub mod perturbation;
pub mod bounds;
pub mod experiments;
pub mod cli;
