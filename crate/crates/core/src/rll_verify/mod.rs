//! Graded RLL relations in Gauss coordinates, reduced by a rewriting engine whose
//! rules are the exchange relations among `k1`, `k2`, `e`, `f` evaluated at sampled
//! spectral points.

pub mod expand;
pub mod ncpoly;
pub mod reduce;
pub mod rules;
pub mod symbols;
pub mod verify;

pub use expand::{expand_components, l_entry, Component, ExpandError, SignPair};
pub use ncpoly::{NCPoly, Word};
pub use reduce::{normal_order, reduce, ReduceError, Reduction, Strategy, STEP_BUDGET};
pub use rules::{instantiate_catalog, Faults, RuleError, RuleSet};
pub use symbols::{Kind, Pm, Symbol, Tag, TagTable};
pub use verify::{
    cross_order_residual, e_total, f_total, verify_components, verify_components_with, verify_ef_relations,
    verify_ef_relations_with, VerifyOptions, EF_RELATIONS,
};
