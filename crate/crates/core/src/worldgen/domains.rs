//! The four built-in planning domains, one per dynamics variant. They differ
//! only in the `unlock` operator's color clause (and the spatial domain,
//! which has no keys or doors at all). Movement is simulated natively by the
//! planner; these operators cover interactions.

use crate::pddl::{parse_domain, DomainAst};

use super::ir::DynamicsVariant;

pub const GENERIC: &str = include_str!("domains/generic.pddl");
pub const COLOR_SAME: &str = include_str!("domains/color_same.pddl");
pub const COLOR_DIFFERENT: &str = include_str!("domains/color_different.pddl");
pub const SPATIAL: &str = include_str!("domains/spatial.pddl");

pub fn domain_source(variant: DynamicsVariant) -> &'static str {
    match variant {
        DynamicsVariant::Generic => GENERIC,
        DynamicsVariant::ColorSame => COLOR_SAME,
        DynamicsVariant::ColorDifferent => COLOR_DIFFERENT,
        DynamicsVariant::Spatial => SPATIAL,
    }
}

/// Parse the built-in domain for a variant. The sources are fixed at build
/// time, so parsing cannot fail.
pub fn domain_for(variant: DynamicsVariant) -> DomainAst {
    parse_domain(domain_source(variant)).expect("built-in domain parses")
}
