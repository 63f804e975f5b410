//! Concept discovery over an entity link graph, concept tagging of a
//! publication corpus from text and citation structure, and induction of a
//! six-level concept hierarchy from weighted subsumption.
//!
//! The stages run in order: [`discovery`] grows a curated seed set into the
//! concept registry, [`tagging`] scores concept-publication pairs, and
//! [`hierarchy`] turns tagged pairs into a leveled DAG. [`pipeline`] wires
//! them together with file artifacts; [`syngen`] produces corpora with
//! planted ground truth.

pub mod corpus;
pub mod discovery;
pub mod hierarchy;
pub mod pipeline;
pub mod relatedness;
pub mod seeding;
pub mod syngen;
pub mod tagging;
pub mod vectorize;
