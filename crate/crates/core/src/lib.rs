//! Exact workbench for comparing the Takhtajan star product on GL(2) with
//! star products built from Kontsevich-type graphs.
//!
//! The pipeline runs bottom-up: [`exactmath`] supplies rationals, polynomials
//! and truncated series; [`liealg`] and [`poisson`] build the Poisson-Lie
//! structure in two charts; [`takhtajan`] expands the quantum product;
//! [`graphs`], [`bidiff`] and [`kontsevich`] turn graphs into operators and
//! weights; [`solver`] decides the resulting coefficient systems exactly and
//! produces infeasibility certificates; [`cli`] drives it all.

pub mod exactmath;
pub mod liealg;
pub mod poisson;
pub mod takhtajan;
pub mod graphs;
pub mod bidiff;
pub mod reference;
pub mod kontsevich;
pub mod solver;
pub mod cli;
