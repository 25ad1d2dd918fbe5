//! Reversing Petri nets, their static analyses, and a compiler to coloured
//! Petri nets with a checker for the correspondence between the two.

pub mod analysis;
pub mod cpn;
pub mod dot;
pub mod explore;
pub mod fixtures;
pub mod forward;
pub mod net;
pub mod reversing;
pub mod translate;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/nets.md")]
    mod nets {}
    #[doc = include_str!("../../../book/src/reversing.md")]
    mod reversing {}
    #[doc = include_str!("../../../book/src/analysis.md")]
    mod analysis {}
    #[doc = include_str!("../../../book/src/translation.md")]
    mod translation {}
    #[doc = include_str!("../../../book/src/checking.md")]
    mod checking {}
}
