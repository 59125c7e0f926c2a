//! Tokenizer and raw tree reader for the `name(arg,...)` notation.
//!
//! The reader knows nothing about ranks or variables; callers resolve a
//! [`RawTree`] against an alphabet and report errors at the recorded
//! positions.

use std::fmt;

use thiserror::Error;

/// 1-based line and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl Pos {
    pub fn start() -> Self {
        Pos { line: 1, col: 1 }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("SyntaxError at {pos}: {message}")]
pub struct SyntaxError {
    pub pos: Pos,
    pub message: String,
}

impl SyntaxError {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        SyntaxError {
            pos,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawTree {
    pub name: String,
    pub pos: Pos,
    pub children: Vec<RawTree>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Name(String),
    Open,
    Close,
    Comma,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str, origin: Pos) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            pos: origin,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }

    fn next_tok(&mut self) -> Result<Option<(Tok, Pos)>, SyntaxError> {
        while matches!(self.chars.peek(), Some(c) if c.is_whitespace()) {
            self.bump();
        }
        let start = self.pos;
        let Some(&c) = self.chars.peek() else {
            return Ok(None);
        };
        let tok = match c {
            '(' => {
                self.bump();
                Tok::Open
            }
            ')' => {
                self.bump();
                Tok::Close
            }
            ',' => {
                self.bump();
                Tok::Comma
            }
            '|' | '#' => {
                return Err(SyntaxError::new(start, format!("unexpected `{c}`")));
            }
            _ => {
                let mut name = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || matches!(c, '(' | ')' | ',' | '|' | '#') {
                        break;
                    }
                    if c == '{' {
                        // brace groups may contain commas: `S{2,3}`
                        loop {
                            match self.bump() {
                                Some('}') => {
                                    name.push('}');
                                    break;
                                }
                                Some(c) => name.push(c),
                                None => {
                                    return Err(SyntaxError::new(start, "unclosed `{`"));
                                }
                            }
                        }
                        continue;
                    }
                    name.push(c);
                    self.bump();
                }
                Tok::Name(name)
            }
        };
        Ok(Some((tok, start)))
    }
}

struct Reader<'a> {
    lexer: Lexer<'a>,
    peeked: Option<(Tok, Pos)>,
}

impl<'a> Reader<'a> {
    fn peek(&mut self) -> Result<Option<&(Tok, Pos)>, SyntaxError> {
        if self.peeked.is_none() {
            self.peeked = self.lexer.next_tok()?;
        }
        Ok(self.peeked.as_ref())
    }

    fn next(&mut self) -> Result<Option<(Tok, Pos)>, SyntaxError> {
        if let Some(t) = self.peeked.take() {
            return Ok(Some(t));
        }
        self.lexer.next_tok()
    }

    fn tree(&mut self) -> Result<RawTree, SyntaxError> {
        let (tok, pos) = match self.next()? {
            Some(t) => t,
            None => return Err(SyntaxError::new(self.lexer.pos, "unexpected end of input")),
        };
        let Tok::Name(name) = tok else {
            return Err(SyntaxError::new(pos, "expected a symbol name"));
        };
        let mut children = Vec::new();
        if matches!(self.peek()?, Some((Tok::Open, _))) {
            self.next()?;
            if matches!(self.peek()?, Some((Tok::Close, _))) {
                self.next()?;
            } else {
                loop {
                    children.push(self.tree()?);
                    match self.next()? {
                        Some((Tok::Comma, _)) => continue,
                        Some((Tok::Close, _)) => break,
                        Some((_, p)) => return Err(SyntaxError::new(p, "expected `,` or `)`")),
                        None => return Err(SyntaxError::new(self.lexer.pos, "missing `)`")),
                    }
                }
            }
        }
        Ok(RawTree {
            name,
            pos,
            children,
        })
    }
}

/// Reads exactly one tree from `text`; `origin` is the position of the
/// first character, used when `text` is a slice of a larger file.
pub fn parse_raw(text: &str, origin: Pos) -> Result<RawTree, SyntaxError> {
    let mut reader = Reader {
        lexer: Lexer::new(text, origin),
        peeked: None,
    };
    let tree = reader.tree()?;
    if let Some((_, pos)) = reader.next()? {
        return Err(SyntaxError::new(pos, "trailing input after term"));
    }
    Ok(tree)
}

/// Position of the character at byte offset `offset` in `text`, counting
/// from `origin`.
pub fn advance(origin: Pos, text: &str, offset: usize) -> Pos {
    let mut pos = origin;
    for c in text[..offset].chars() {
        if c == '\n' {
            pos.line += 1;
            pos.col = 1;
        } else {
            pos.col += 1;
        }
    }
    pos
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_nested_terms() {
        let t = parse_raw("cat(cat(a,b), c)", Pos::start()).unwrap();
        assert_eq!(t.name, "cat");
        assert_eq!(t.children.len(), 2);
        assert_eq!(t.children[0].children[1].name, "b");
        assert_eq!(t.children[1].pos, Pos { line: 1, col: 15 });
    }

    #[test]
    fn brace_groups_keep_commas() {
        let t = parse_raw("S{2,0}(f,S{0,0}(a),S{0,0}(b))", Pos::start()).unwrap();
        assert_eq!(t.name, "S{2,0}");
        assert_eq!(t.children.len(), 3);
        assert_eq!(t.children[1].name, "S{0,0}");
    }

    #[test]
    fn reports_positions() {
        let e = parse_raw("f(a,\n  b", Pos::start()).unwrap_err();
        assert_eq!(e.pos.line, 2);
        let e = parse_raw("f(a) g", Pos::start()).unwrap_err();
        assert_eq!(e.pos, Pos { line: 1, col: 6 });
        assert!(parse_raw("", Pos::start()).is_err());
        assert!(parse_raw("f(a,)", Pos::start()).is_err());
        assert!(parse_raw("S{2,0", Pos::start()).is_err());
    }
}
