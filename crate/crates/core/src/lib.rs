//! Context-bounded reachability for concurrent programs over the naturals
//! running under TSO.
//!
//! The checker works in two steps. Store buffers are replaced by the
//! buffer-abstract machine of [`ab`], which keeps finitely many extra
//! variables per context and per thread. Natural values are then replaced by
//! the relative order of those variables ([`rel`]). The resulting finite
//! system is searched by [`engine`], and reachable witnesses are replayed
//! with concrete values.
//!
//! [`tso`] executes the concrete semantics within explicit bounds and serves
//! as the reference everything else is tested against.

pub mod ab;
pub mod dfa;
pub mod dlcs;
pub mod dsl;
pub mod engine;
pub mod gen;
pub mod program;
pub mod rel;
pub mod report;
pub mod tso;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/programs.md")]
    mod programs {}
    #[doc = include_str!("../../../book/src/tso.md")]
    mod tso {}
    #[doc = include_str!("../../../book/src/abstraction.md")]
    mod abstraction {}
    #[doc = include_str!("../../../book/src/checking.md")]
    mod checking {}
    #[doc = include_str!("../../../book/src/generators.md")]
    mod generators {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
