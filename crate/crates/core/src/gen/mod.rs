//! Program generators: the bakery protocol, the automata-intersection
//! construction, the lossy-channel reduction, and random small programs for
//! differential testing.

mod bakery;
mod dlcs_reduction;
mod intersection;
pub mod random;

pub use bakery::gen_bakery;
pub use dlcs_reduction::gen_dlcs_reduction;
pub use intersection::gen_intersection;

use thiserror::Error;

use crate::program::{Op, Program, Target};

/// A generated program with its target and the smallest context bound the
/// construction is meant for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenResult {
    pub program: Program,
    pub target: Target,
    pub k_hint: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("automata must share one alphabet")]
    AlphabetMismatch,
    #[error("at least one automaton is needed")]
    NoAutomata,
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("parameter out of range: {0}")]
    BadParameter(String),
}

/// Shorthands for name-based ops.
pub(crate) mod ops {
    use super::Op;
    use crate::program::Relation;

    pub type NOp = Op<String, String>;

    pub fn assign(a: &str, b: &str) -> NOp {
        Op::Assign(a.into(), b.into())
    }
    pub fn new_value(a: &str) -> NOp {
        Op::NewValue(a.into())
    }
    pub fn guard(rel: Relation, a: &str, b: &str) -> NOp {
        Op::Guard(rel, a.into(), b.into())
    }
    pub fn eq(a: &str, b: &str) -> NOp {
        guard(Relation::Eq, a, b)
    }
    pub fn neq(a: &str, b: &str) -> NOp {
        guard(Relation::Neq, a, b)
    }
    pub fn lt(a: &str, b: &str) -> NOp {
        guard(Relation::Lt(0), a, b)
    }
    pub fn read(x: &str, r: &str) -> NOp {
        Op::Read(x.into(), r.into())
    }
    pub fn write(x: &str, r: &str) -> NOp {
        Op::Write(x.into(), r.into())
    }
    pub fn arw(x: &str, a: &str, b: &str) -> NOp {
        Op::Arw(x.into(), a.into(), b.into())
    }
}
