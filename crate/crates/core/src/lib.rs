//! Canonical forms and periodic Nielsen classes of reducible surface
//! homeomorphisms, with numerical shadowing experiments.
//!
//! The guide in `book/` walks through the pipeline; its code blocks run as
//! doc tests.

pub mod annulus;
pub mod canon;
pub mod document;
pub mod error;
pub mod graph;
pub mod nielsen;
pub mod render;
pub mod shadow;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/component-graphs.md")]
    mod component_graphs {}
    #[doc = include_str!("../../../book/src/rotation-numbers.md")]
    mod rotation_numbers {}
    #[doc = include_str!("../../../book/src/condensation.md")]
    mod condensation {}
    #[doc = include_str!("../../../book/src/nielsen-classes.md")]
    mod nielsen_classes {}
    #[doc = include_str!("../../../book/src/shadowing.md")]
    mod shadowing {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
