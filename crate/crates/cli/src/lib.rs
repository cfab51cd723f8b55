//! The `prochern` input language: parsing, canonical rendering, evaluation
//! of queries and checks, and reports.

pub mod ast;
pub mod checks;
pub mod diag;
pub mod eval;
pub mod lexer;
pub mod parser;
pub mod render;
pub mod report;

pub use ast::Document;
pub use diag::{Diagnostic, Pos};
pub use eval::{evaluate, Options};
pub use parser::parse;
pub use render::render;
pub use report::Report;
