//! Surface syntax: tokenizer, term parser, and printer.

pub(crate) mod lex;
pub(crate) mod parse;
mod print;

pub use lex::ParseError;
pub use parse::parse_term;
pub use print::render_term;
