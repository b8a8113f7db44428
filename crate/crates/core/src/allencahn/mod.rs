//! Multiclass graph Allen–Cahn classifier in a truncated eigenbasis.

mod binary;
mod nonlinearity;
mod simplex;
mod solver;

pub use binary::{binary_allen_cahn_solve, BinaryResult};
pub use nonlinearity::{nonlinearity, well_product};
pub use simplex::{simplex_project, simplex_project_in_place};
pub use solver::{
    allen_cahn_solve, allen_cahn_solve_observed, ginzburg_landau_energy, predict_labels,
    AllenCahnParams, AllenCahnResult, DirichletTerm, LabelData, ScoreMatrix,
};
