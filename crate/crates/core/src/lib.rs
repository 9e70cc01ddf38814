//! Temperley-Lieb algebras three ways: planar diagrams, a convergent string
//! rewriting system on the presented algebra, and a monoidal category of
//! caps and cups rewritten modulo the exchange law, with the oriented
//! generalisation alongside.

pub mod category;
pub mod cli;
pub mod jnf;
pub mod laurent;
pub mod oriented;
pub mod planar;
pub mod rewrite;
pub mod words;
