//! Tokenizer shared by the term grammar and the script grammars.

use num_bigint::BigInt;
use thiserror::Error;

/// Token kinds. Identifiers with a trailing underscore are pattern
/// variables; everything else keeps its surface spelling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Int(BigInt),
    Ident(String),
    PatVar(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Assign,
    /// A standalone `_`: the hole of a linearity template.
    Hole,
}

impl Tok {
    /// Human-readable description used in error messages.
    pub fn describe(&self) -> String {
        match self {
            Tok::Int(n) => format!("number `{n}`"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::PatVar(s) => format!("`{s}_`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Assign => "`:=`".into(),
            Tok::Hole => "`_`".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    /// Byte offset into the source, for error positions.
    pub pos: usize,
}

/// Syntax error with a position resolved to line and column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{msg} at line {line}, column {col}")]
pub struct ParseError {
    pub msg: String,
    pub line: usize,
    pub col: usize,
}

/// Builds a [`ParseError`] pointing at byte offset `pos` of `src`.
pub fn error_at(src: &str, pos: usize, msg: impl Into<String>) -> ParseError {
    let mut line = 1;
    let mut col = 1;
    for (i, c) in src.char_indices() {
        if i >= pos {
            break;
        }
        if c == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    ParseError { msg: msg.into(), line, col }
}

/// Tokenizes `src`. `#` starts a comment running to end of line.
pub fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\r' | '\n' => i += 1,
            '#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = src[start..i]
                    .parse()
                    .expect("digit runs parse as integers");
                toks.push(Token { tok: Tok::Int(n), pos: start });
            }
            'a'..='z' | 'A'..='Z' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                let name = src[start..i].to_string();
                if i < bytes.len() && bytes[i] == b'_' {
                    i += 1;
                    if i < bytes.len()
                        && (bytes[i].is_ascii_alphanumeric()
                            || bytes[i] == b'_')
                    {
                        return Err(error_at(
                            src,
                            i,
                            "`_` may only end an identifier",
                        ));
                    }
                    toks.push(Token { tok: Tok::PatVar(name), pos: start });
                } else {
                    toks.push(Token { tok: Tok::Ident(name), pos: start });
                }
            }
            ':' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    toks.push(Token { tok: Tok::Assign, pos: i });
                    i += 2;
                } else {
                    return Err(error_at(src, i, "expected `:=`"));
                }
            }
            '_' => {
                if bytes
                    .get(i + 1)
                    .is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_')
                {
                    return Err(error_at(
                        src,
                        i,
                        "identifiers may not start with `_`",
                    ));
                }
                toks.push(Token { tok: Tok::Hole, pos: i });
                i += 1;
            }
            _ => {
                let tok = match c {
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '/' => Tok::Slash,
                    '^' => Tok::Caret,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    ',' => Tok::Comma,
                    ';' => Tok::Semi,
                    _ => {
                        return Err(error_at(
                            src,
                            i,
                            format!("unexpected character `{c}`"),
                        ))
                    }
                };
                toks.push(Token { tok, pos: i });
                i += 1;
            }
        }
    }
    Ok(toks)
}
