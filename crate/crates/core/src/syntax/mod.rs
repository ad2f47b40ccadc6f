//! Frontend for `.eff` programs: lexing, parsing, pretty-printing and
//! resolution against an effect system.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod resolve;
pub mod span;

pub use ast::Program;
pub use parser::parse;
pub use pretty::print_program;
pub use resolve::{resolve, ResolvedProgram};
pub use span::{LineIndex, Span};
