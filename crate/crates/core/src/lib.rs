//! Profit-maximizing pricing, energy allocation and fleet deployment for
//! UAV-provided services.
//!
//! The pipeline has three nested stages. A fleet is assigned to hotspots
//! ([`deployment`]), each UAV group splits its on-site energy between hovering
//! time and service capacity ([`allocation`]), and while hovering it posts
//! dynamic prices to arriving users ([`pricing`]). [`benchmark`] gives the
//! complete-information comparison and [`simulator`] is a Monte-Carlo oracle
//! for every expected-profit table.

pub mod allocation;
pub mod benchmark;
pub mod deployment;
pub mod error;
pub mod pricing;
pub mod series;
pub mod simulator;
pub mod valuations;

pub use error::{Error, Result};
pub use valuations::{check_regularity, ValuationDistribution, ValuationModel};
