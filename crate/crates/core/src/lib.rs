//! p-derivations, jet spaces and delta-characters of elliptic curves, at
//! finite `p`-adic precision.
//!
//! The modules build on each other: [`padic`] rings, [`witt`] vectors over
//! them, [`jet`] polynomial rings with the universal p-derivation, [`linalg`]
//! over `Z/p^k`, and [`elliptic`] curves with their formal groups. The guide
//! in `book/` walks through them with examples.

pub mod elliptic;
pub mod jet;
pub mod linalg;
pub mod padic;
pub mod witt;

// Book chapters, so that `cargo test --doc` runs their code blocks. One
// module per chapter keeps failures attributable; `tests/book.rs` checks the
// list against SUMMARY.md.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/padic.md")]
    mod padic {}
    #[doc = include_str!("../../../book/src/witt.md")]
    mod witt {}
    #[doc = include_str!("../../../book/src/jets.md")]
    mod jets {}
    #[doc = include_str!("../../../book/src/linalg.md")]
    mod linalg {}
    #[doc = include_str!("../../../book/src/formal-group.md")]
    mod formal_group {}
    #[doc = include_str!("../../../book/src/characters.md")]
    mod characters {}
    #[doc = include_str!("../../../book/src/precision.md")]
    mod precision {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/tutorial.md")]
    mod tutorial {}
    #[doc = include_str!("../../../book/src/traceability.md")]
    mod traceability {}
}
