pub mod eval;
pub mod extraction;
pub mod fixtures;
pub mod insertion;
pub mod nlu;
pub mod ontology;
pub mod service;
pub mod tree;
