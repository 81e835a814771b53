//! A small imperative language with pointers, a permission-based alias checker, and a
//! reference interpreter with a runtime alias monitor.

#![allow(clippy::result_large_err)]

pub mod alias;
pub mod corpus;
pub mod fuzz;
pub mod interp;
pub mod parser;
pub mod permission;
pub mod syntax;
pub mod typecheck;
