//! Guide chapters, compiled as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/ontology.md")]
pub mod ontology {}

#[doc = include_str!("../../../book/src/dialogue_tree.md")]
pub mod dialogue_tree {}

#[doc = include_str!("../../../book/src/nlu.md")]
pub mod nlu {}

#[doc = include_str!("../../../book/src/extraction.md")]
pub mod extraction {}

#[doc = include_str!("../../../book/src/insertion.md")]
pub mod insertion {}

#[doc = include_str!("../../../book/src/evaluation.md")]
pub mod evaluation {}

#[doc = include_str!("../../../book/src/service.md")]
pub mod service {}

#[doc = include_str!("../../../README.md")]
pub mod readme {}
