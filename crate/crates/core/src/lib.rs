//! A finite-scale laboratory for synthetic guarded domain theory.
//!
//! Everything here is finite and checked by exhaustive computation: posets
//! with compatible well-founded relations, downset frames with the
//! predecessor-induced later modality and Löb induction, W-types with the
//! plump ordering, the topos of trees as demand-driven stage-indexed sets
//! with guarded fixed points, multi-clock presheaves with clock
//! quantification and `force`, and propositional geometric theories with
//! filter and bag model enumeration.

// Relation and table code is written with explicit index loops throughout;
// iterator rewrites obscure the double-indexed math.
#![allow(clippy::needless_range_loop)]

pub mod adequacy;
pub mod clocks;
pub mod enumerate;
pub mod frame;
pub mod gen;
pub mod json;
pub mod order;
pub mod staged;
pub mod suite;
pub mod theory;
pub mod wtypes;

pub use adequacy::check_global_adequacy;
pub use clocks::{
    force, kcat_hom_valid, later_k, next_k, ClockContext, CoStream, ForallK, KMor, MultiPresheaf,
};
pub use frame::{
    check_loeb, check_wellpointed_lex, downset_frame, heyting_implies, later_prop, predecessor,
    BasedFrame, FiniteFrame,
};
pub use order::{
    accessible_set, is_compatible_wf, is_connected, poset_reflection, FinitePoset, FinitePreorder,
    PosetReflection, Relation, WfRelation, WfReport,
};
pub use staged::{check_fix_unique, gfix, later, next, GlobalElement, GuardedStream, StagedMap, StagedSet};
pub use theory::{
    bag_theory, cartesian_simplify, enumerate_bag_models, enumerate_models, filt_theory,
    filters_oracle, ibag_theory, BagTheory, GeometricTheory,
};
pub use wtypes::{build_wtrees, plump_order, plump_poset, Polynomial, WTree};
