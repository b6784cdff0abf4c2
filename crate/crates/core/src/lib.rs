//! Process mining for sparse longitudinal patient records.
//!
//! The pipeline turns clinical rows into an event log ([`transform`]),
//! discovers and checks Petri-net models of treatment paths
//! ([`discovery`], [`conformance`]), compares patient cohorts with
//! rank-based tests ([`stats`]) and mines the choices made at decision
//! places ([`decision`]). [`petri`] also holds the reference model and a
//! simulator for synthetic cohorts.

pub mod model;
pub mod io;
pub mod petri;
pub mod transform;
pub mod discovery;
pub mod conformance;
pub mod stats;
pub mod decision;
