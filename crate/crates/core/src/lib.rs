//! Reflectionless KdV-hierarchy solutions from Dirichlet data.
//!
//! The crate integrates the angular Dubrovin flows on the torus of Dirichlet
//! data, reconstructs the potential by trace formulas, and checks the
//! identities tying these objects together (zero curvature, higher trace
//! formulas, Weyl matrix evolution, Green's function properties, Craig-type
//! spectral conditions).

pub mod cli;
pub mod dirichlet;
pub mod error;
pub mod numeric;
pub mod qpmodel;
pub mod flows;
pub mod hierarchy;
pub mod integrator;
pub mod moments;
pub mod spectrum;
pub mod weyl;

pub use error::{Error, Result};
