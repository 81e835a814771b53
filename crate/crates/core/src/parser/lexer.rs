use std::fmt;

use crate::parser::SyntaxError;
use crate::syntax::{Pos, Span};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Keyword {
    Type,
    Is,
    Record,
    End,
    Access,
    Null,
    New,
    True,
    False,
    If,
    Then,
    Else,
    While,
    Loop,
    Procedure,
    Begin,
    In,
    Out,
    All,
    And,
    Or,
    /// The `Access` attribute name following a tick.
    AccessAttr,
}

impl Keyword {
    fn from_ident(word: &str) -> Option<Keyword> {
        Some(match word {
            "type" => Keyword::Type,
            "is" => Keyword::Is,
            "record" => Keyword::Record,
            "end" => Keyword::End,
            "access" => Keyword::Access,
            "null" => Keyword::Null,
            "new" => Keyword::New,
            "true" => Keyword::True,
            "false" => Keyword::False,
            "if" => Keyword::If,
            "then" => Keyword::Then,
            "else" => Keyword::Else,
            "while" => Keyword::While,
            "loop" => Keyword::Loop,
            "procedure" => Keyword::Procedure,
            "begin" => Keyword::Begin,
            "in" => Keyword::In,
            "out" => Keyword::Out,
            "all" => Keyword::All,
            "and" => Keyword::And,
            "or" => Keyword::Or,
            _ => return None,
        })
    }

    pub fn text(self) -> &'static str {
        match self {
            Keyword::Type => "type",
            Keyword::Is => "is",
            Keyword::Record => "record",
            Keyword::End => "end",
            Keyword::Access => "access",
            Keyword::Null => "null",
            Keyword::New => "new",
            Keyword::True => "true",
            Keyword::False => "false",
            Keyword::If => "if",
            Keyword::Then => "then",
            Keyword::Else => "else",
            Keyword::While => "while",
            Keyword::Loop => "loop",
            Keyword::Procedure => "procedure",
            Keyword::Begin => "begin",
            Keyword::In => "in",
            Keyword::Out => "out",
            Keyword::All => "all",
            Keyword::And => "and",
            Keyword::Or => "or",
            Keyword::AccessAttr => "Access",
        }
    }

    pub fn is_reserved(word: &str) -> bool {
        Keyword::from_ident(word).is_some()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TokenKind {
    Ident(String),
    Int(i64),
    Real(f64),
    Keyword(Keyword),
    Dot,
    Comma,
    Semi,
    Colon,
    Assign,
    LParen,
    RParen,
    Tick,
    Plus,
    Minus,
    Star,
    Slash,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Ident(name) => write!(f, "identifier `{name}`"),
            TokenKind::Int(v) => write!(f, "integer `{v}`"),
            TokenKind::Real(v) => write!(f, "real `{v}`"),
            TokenKind::Keyword(k) => write!(f, "`{}`", k.text()),
            TokenKind::Eof => f.write_str("end of file"),
            other => write!(f, "`{}`", punct_text(other)),
        }
    }
}

fn punct_text(kind: &TokenKind) -> &'static str {
    match kind {
        TokenKind::Dot => ".",
        TokenKind::Comma => ",",
        TokenKind::Semi => ";",
        TokenKind::Colon => ":",
        TokenKind::Assign => ":=",
        TokenKind::LParen => "(",
        TokenKind::RParen => ")",
        TokenKind::Tick => "'",
        TokenKind::Plus => "+",
        TokenKind::Minus => "-",
        TokenKind::Star => "*",
        TokenKind::Slash => "/",
        TokenKind::Lt => "<",
        TokenKind::Le => "<=",
        TokenKind::Gt => ">",
        TokenKind::Ge => ">=",
        TokenKind::Eq => "=",
        TokenKind::Ne => "/=",
        _ => "?",
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub span: Span,
}

struct Cursor<'a> {
    src: &'a [u8],
    offset: usize,
    line: u32,
    col: u32,
}

impl Cursor<'_> {
    fn pos(&self) -> Pos {
        Pos::new(self.line, self.col)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.offset).copied()
    }

    fn peek_at(&self, n: usize) -> Option<u8> {
        self.src.get(self.offset + n).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.offset += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }
}

/// Splits source text into tokens. Comments (`--` to end of line) and whitespace are dropped.
/// The returned list always ends with an `Eof` token.
pub fn tokenize(source: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut cur = Cursor { src: source.as_bytes(), offset: 0, line: 1, col: 1 };
    let mut tokens = Vec::new();
    let mut after_tick = false;

    loop {
        while let Some(c) = cur.peek() {
            if c.is_ascii_whitespace() {
                cur.bump();
            } else if c == b'-' && cur.peek_at(1) == Some(b'-') {
                while let Some(c) = cur.peek() {
                    if c == b'\n' {
                        break;
                    }
                    cur.bump();
                }
            } else {
                break;
            }
        }

        let start = cur.pos();
        let begin = cur.offset;
        let Some(c) = cur.peek() else {
            tokens.push(Token { kind: TokenKind::Eof, lexeme: String::new(), span: Span::new(start, start) });
            return Ok(tokens);
        };

        let kind = if c.is_ascii_alphabetic() {
            while matches!(cur.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                cur.bump();
            }
            let word = &source[begin..cur.offset];
            if after_tick {
                if word != "Access" {
                    return Err(SyntaxError::Lex {
                        span: Span::new(start, cur.pos()),
                        message: format!("unknown attribute `{word}`"),
                    });
                }
                TokenKind::Keyword(Keyword::AccessAttr)
            } else {
                match Keyword::from_ident(word) {
                    Some(k) => TokenKind::Keyword(k),
                    None => TokenKind::Ident(word.to_string()),
                }
            }
        } else if c.is_ascii_digit() {
            lex_number(&mut cur, source, begin, start)?
        } else {
            cur.bump();
            let two = |cur: &mut Cursor, next: u8, yes: TokenKind, no: TokenKind| {
                if cur.peek() == Some(next) {
                    cur.bump();
                    yes
                } else {
                    no
                }
            };
            match c {
                b'.' => TokenKind::Dot,
                b',' => TokenKind::Comma,
                b';' => TokenKind::Semi,
                b':' => two(&mut cur, b'=', TokenKind::Assign, TokenKind::Colon),
                b'(' => TokenKind::LParen,
                b')' => TokenKind::RParen,
                b'\'' => TokenKind::Tick,
                b'+' => TokenKind::Plus,
                b'-' => TokenKind::Minus,
                b'*' => TokenKind::Star,
                b'/' => two(&mut cur, b'=', TokenKind::Ne, TokenKind::Slash),
                b'<' => two(&mut cur, b'=', TokenKind::Le, TokenKind::Lt),
                b'>' => two(&mut cur, b'=', TokenKind::Ge, TokenKind::Gt),
                b'=' => TokenKind::Eq,
                _ => {
                    // Step over a whole UTF-8 sequence so the reported character is intact.
                    let ch = source[begin..].chars().next().unwrap_or('?');
                    return Err(SyntaxError::Lex {
                        span: Span::new(start, cur.pos()),
                        message: format!("unexpected character `{ch}`"),
                    });
                }
            }
        };
        after_tick = kind == TokenKind::Tick;
        tokens.push(Token { kind, lexeme: source[begin..cur.offset].to_string(), span: Span::new(start, cur.pos()) });
    }
}

fn lex_number(cur: &mut Cursor, source: &str, begin: usize, start: Pos) -> Result<TokenKind, SyntaxError> {
    while matches!(cur.peek(), Some(c) if c.is_ascii_digit()) {
        cur.bump();
    }
    let is_real = cur.peek() == Some(b'.') && matches!(cur.peek_at(1), Some(c) if c.is_ascii_digit());
    if is_real {
        cur.bump();
        while matches!(cur.peek(), Some(c) if c.is_ascii_digit()) {
            cur.bump();
        }
    }
    if matches!(cur.peek(), Some(c) if c.is_ascii_alphabetic() || c == b'_') {
        while matches!(cur.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            cur.bump();
        }
        return Err(SyntaxError::Lex {
            span: Span::new(start, cur.pos()),
            message: format!("malformed literal `{}`", &source[begin..cur.offset]),
        });
    }
    let text = &source[begin..cur.offset];
    let malformed = || SyntaxError::Lex {
        span: Span::new(start, cur.pos()),
        message: format!("malformed literal `{text}`"),
    };
    if is_real {
        text.parse::<f64>().map(TokenKind::Real).map_err(|_| malformed())
    } else {
        text.parse::<i64>().map(TokenKind::Int).map_err(|_| malformed())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    fn ident(s: &str) -> TokenKind {
        TokenKind::Ident(s.to_string())
    }

    #[test]
    fn lexes_deref_assignment() {
        assert_eq!(
            kinds("A.Key.all := 42;"),
            vec![
                ident("A"),
                TokenKind::Dot,
                ident("Key"),
                TokenKind::Dot,
                TokenKind::Keyword(Keyword::All),
                TokenKind::Assign,
                TokenKind::Int(42),
                TokenKind::Semi,
                TokenKind::Eof
            ]
        );
    }

    #[test]
    fn strips_comments() {
        assert_eq!(kinds("-- comment\nnull"), vec![TokenKind::Keyword(Keyword::Null), TokenKind::Eof]);
    }

    #[test]
    fn lexes_access_attribute() {
        assert_eq!(
            kinds("X'Access"),
            vec![ident("X"), TokenKind::Tick, TokenKind::Keyword(Keyword::AccessAttr), TokenKind::Eof]
        );
    }

    #[test]
    fn longest_match_operators() {
        assert_eq!(
            kinds("<= >= /= := < > / : -"),
            vec![
                TokenKind::Le,
                TokenKind::Ge,
                TokenKind::Ne,
                TokenKind::Assign,
                TokenKind::Lt,
                TokenKind::Gt,
                TokenKind::Slash,
                TokenKind::Colon,
                TokenKind::Minus,
                TokenKind::Eof
            ]
        );
    }

    #[test]
    fn real_literals_need_digits_on_both_sides() {
        assert_eq!(kinds("2.5"), vec![TokenKind::Real(2.5), TokenKind::Eof]);
        assert_eq!(kinds("3.all"), vec![TokenKind::Int(3), TokenKind::Dot, TokenKind::Keyword(Keyword::All), TokenKind::Eof]);
    }

    #[test]
    fn keywords_are_case_sensitive() {
        assert_eq!(kinds("True"), vec![ident("True"), TokenKind::Eof]);
        assert_eq!(kinds("true"), vec![TokenKind::Keyword(Keyword::True), TokenKind::Eof]);
    }

    #[test]
    fn lexical_errors_carry_spans() {
        match tokenize("X := 1;\n  Y $ 2") {
            Err(SyntaxError::Lex { span, .. }) => assert_eq!(span.start, Pos::new(2, 5)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(tokenize("12ab"), Err(SyntaxError::Lex { .. })));
        assert!(matches!(tokenize("99999999999999999999"), Err(SyntaxError::Lex { .. })));
        assert!(matches!(tokenize("X'Size"), Err(SyntaxError::Lex { .. })));
    }

    #[test]
    fn spans_track_lines_and_columns() {
        let toks = tokenize("A\n  B").unwrap();
        assert_eq!(toks[1].span, Span::new(Pos::new(2, 3), Pos::new(2, 4)));
    }
}
