//! Adjustment and condensation rewrites.
//!
//! [`adjust`] puts a graph in adjusted form: pseudo-Anosov boundary circles get
//! their collapse records, annulus interiors are fixed, and finite-order pieces
//! joined by untwisted annuli are merged. [`condense`] then replaces each
//! finite-order component by its minimal model, removes the untwisted annuli
//! around pseudo-Anosov pieces, and lists the periodic orbits that remain.

mod adjust;
mod condense;
mod index;
mod inventory;

pub use adjust::{adjust, AdjustedGraph, AnnulusInterior, CollapseChoices, MergeEvent};
pub use condense::{condense, periodic_inventory, CondensedGraph, IdentificationEvent, Onto};
pub use index::{branch_record_index, branched_lift_index, quotient_euler, sector_index, IndexSpec};
pub use inventory::{Absorbed, Carrier, Census, IndexValue, Inventory, OrbitKind, OrbitRecord};

pub(crate) use inventory::{assemble, renumber};
