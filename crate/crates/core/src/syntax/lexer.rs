use std::fmt;

use super::span::Span;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    /// `@name(raw text)`; the text is kept verbatim for the effect parser.
    Annot { name: String, args: String, args_span: Span },
    // keywords
    Fn,
    Exception,
    Let,
    If,
    Else,
    While,
    Perform,
    Throw,
    Break,
    Return,
    Try,
    Catch,
    Finally,
    Switch,
    Case,
    Default,
    True,
    False,
    Unit,
    Bool,
    IntTy,
    // punctuation
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Colon,
    Arrow,
    FatArrow,
    Eq,
    Backslash,
    Subtype,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "identifier `{s}`"),
            Tok::Int(n) => return write!(f, "integer `{n}`"),
            Tok::Annot { name, .. } => return write!(f, "annotation `@{name}`"),
            Tok::Fn => "fn",
            Tok::Exception => "exception",
            Tok::Let => "let",
            Tok::If => "if",
            Tok::Else => "else",
            Tok::While => "while",
            Tok::Perform => "perform",
            Tok::Throw => "throw",
            Tok::Break => "break",
            Tok::Return => "return",
            Tok::Try => "try",
            Tok::Catch => "catch",
            Tok::Finally => "finally",
            Tok::Switch => "switch",
            Tok::Case => "case",
            Tok::Default => "default",
            Tok::True => "true",
            Tok::False => "false",
            Tok::Unit => "unit",
            Tok::Bool => "bool",
            Tok::IntTy => "int",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Arrow => "->",
            Tok::FatArrow => "=>",
            Tok::Eq => "=",
            Tok::Backslash => "\\",
            Tok::Subtype => "<:",
            Tok::Eof => return write!(f, "end of input"),
        };
        write!(f, "`{s}`")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub span: Span,
    pub message: String,
}

fn keyword(s: &str) -> Option<Tok> {
    Some(match s {
        "fn" => Tok::Fn,
        "exception" => Tok::Exception,
        "let" => Tok::Let,
        "if" => Tok::If,
        "else" => Tok::Else,
        "while" => Tok::While,
        "perform" => Tok::Perform,
        "throw" => Tok::Throw,
        "break" => Tok::Break,
        "return" => Tok::Return,
        "try" => Tok::Try,
        "catch" => Tok::Catch,
        "finally" => Tok::Finally,
        "switch" => Tok::Switch,
        "case" => Tok::Case,
        "default" => Tok::Default,
        "true" => Tok::True,
        "false" => Tok::False,
        "unit" => Tok::Unit,
        "bool" => Tok::Bool,
        "int" => Tok::IntTy,
        _ => return None,
    })
}

fn ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Tokenizes the whole input. Lexical errors are collected and the offending
/// characters skipped, so the parser still sees the rest of the file.
pub fn lex(src: &str) -> (Vec<Token>, Vec<LexError>) {
    let mut toks = Vec::new();
    let mut errs = Vec::new();
    let mut i = 0;
    while i < src.len() {
        let c = src[i..].chars().next().expect("in bounds");
        let start = i;
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        if src[i..].starts_with("//") {
            i = src[i..].find('\n').map_or(src.len(), |n| i + n);
            continue;
        }
        let two = |s: &str| src[i..].starts_with(s);
        let (tok, len) = if two("->") {
            (Tok::Arrow, 2)
        } else if two("=>") {
            (Tok::FatArrow, 2)
        } else if two("<:") {
            (Tok::Subtype, 2)
        } else {
            match c {
                '(' => (Tok::LParen, 1),
                ')' => (Tok::RParen, 1),
                '{' => (Tok::LBrace, 1),
                '}' => (Tok::RBrace, 1),
                ',' => (Tok::Comma, 1),
                ';' => (Tok::Semi, 1),
                ':' => (Tok::Colon, 1),
                '=' => (Tok::Eq, 1),
                '\\' => (Tok::Backslash, 1),
                '@' => match lex_annotation(src, i) {
                    Ok((tok, end)) => (tok, end - i),
                    Err(e) => {
                        let skip = e.span.end.max(i + 1);
                        errs.push(e);
                        i = skip;
                        continue;
                    }
                },
                c if c.is_ascii_digit() => {
                    let end = i + src[i..].find(|c: char| !c.is_ascii_digit()).unwrap_or(src.len() - i);
                    match src[i..end].parse::<i64>() {
                        Ok(n) => (Tok::Int(n), end - i),
                        Err(_) => {
                            errs.push(LexError { span: Span::new(i, end), message: "integer literal out of range".into() });
                            i = end;
                            continue;
                        }
                    }
                }
                c if ident_char(c) => {
                    let end = i + src[i..].find(|c: char| !ident_char(c)).unwrap_or(src.len() - i);
                    let word = &src[i..end];
                    (keyword(word).unwrap_or_else(|| Tok::Ident(word.to_string())), end - i)
                }
                c => {
                    errs.push(LexError {
                        span: Span::new(i, i + c.len_utf8()),
                        message: format!("unexpected character `{c}`"),
                    });
                    i += c.len_utf8();
                    continue;
                }
            }
        };
        i = start + len;
        toks.push(Token { tok, span: Span::new(start, i) });
    }
    toks.push(Token { tok: Tok::Eof, span: Span::new(src.len(), src.len()) });
    (toks, errs)
}

/// Lexes `@name(...)` starting at `at`; parentheses nest and double-quoted
/// strings may contain any character.
fn lex_annotation(src: &str, at: usize) -> Result<(Tok, usize), LexError> {
    let name_start = at + 1;
    let name_end = name_start + src[name_start..].find(|c: char| !ident_char(c)).unwrap_or(src.len() - name_start);
    let name = &src[name_start..name_end];
    if name.is_empty() {
        return Err(LexError { span: Span::new(at, at + 1), message: "expected annotation name after `@`".into() });
    }
    if !src[name_end..].starts_with('(') {
        return Err(LexError {
            span: Span::new(at, name_end),
            message: format!("expected `(` after `@{name}`"),
        });
    }
    let open = name_end;
    let mut depth = 0usize;
    let mut in_str = false;
    for (off, c) in src[open..].char_indices() {
        let pos = open + off;
        match c {
            '"' => in_str = !in_str,
            '\n' if in_str => break,
            '(' if !in_str => depth += 1,
            ')' if !in_str => {
                depth -= 1;
                if depth == 0 {
                    let args = src[open + 1..pos].to_string();
                    let args_span = Span::new(open + 1, pos);
                    return Ok((Tok::Annot { name: name.to_string(), args, args_span }, pos + 1));
                }
            }
            _ => {}
        }
    }
    let end = src[open..].find('\n').map_or(src.len(), |n| open + n);
    Err(LexError { span: Span::new(at, end), message: format!("unterminated annotation `@{name}`") })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<Tok> {
        let (t, e) = lex(src);
        assert!(e.is_empty(), "{e:?}");
        t.into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn keywords_and_punctuation() {
        assert_eq!(
            kinds("fn f() -> unit { perform x; } // done"),
            vec![
                Tok::Fn,
                Tok::Ident("f".into()),
                Tok::LParen,
                Tok::RParen,
                Tok::Arrow,
                Tok::Unit,
                Tok::LBrace,
                Tok::Perform,
                Tok::Ident("x".into()),
                Tok::Semi,
                Tok::RBrace,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn annotations_keep_raw_text() {
        let (t, _) = lex("@effect(re\"a(b)*\") @throws(E, A)");
        match &t[0].tok {
            Tok::Annot { name, args, args_span } => {
                assert_eq!(name, "effect");
                assert_eq!(args, "re\"a(b)*\"");
                assert_eq!(*args_span, Span::new(8, 17));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(&t[1].tok, Tok::Annot { name, args, .. } if name == "throws" && args == "E, A"));
    }

    #[test]
    fn errors_are_collected() {
        let (t, e) = lex("fn # f @effect(A");
        assert_eq!(e.len(), 2);
        assert_eq!(t.iter().filter(|t| matches!(t.tok, Tok::Ident(_))).count(), 1);
    }
}
