//! Lexer for the surface language. Also used by the search module to lex
//! search patterns, which is what makes pattern matching whitespace-blind.

use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    IntLit,
    FloatLit,
    StrLit,
    Keyword,
    OpSym,
    Punct,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub position: Position,
}

#[derive(Debug, Clone, Error, PartialEq)]
#[error("lex error at {position}: {message}")]
pub struct LexError {
    pub position: Position,
    pub message: String,
}

const KEYWORDS: &[&str] = &[
    "let",
    "rec",
    "and",
    "in",
    "fun",
    "function",
    "if",
    "then",
    "else",
    "match",
    "with",
    "try",
    "raise",
    "exception",
    "type",
    "of",
    "true",
    "false",
    "for",
    "to",
    "downto",
    "do",
    "done",
    "while",
    "when",
    "mod",
    "begin",
    "end",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek_at(&self, n: usize) -> Option<u8> {
        self.src.get(self.pos + n).copied()
    }

    fn position(&self) -> Position {
        Position {
            line: self.line,
            column: self.col,
        }
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn error(&self, msg: impl Into<String>) -> LexError {
        LexError {
            position: self.position(),
            message: msg.into(),
        }
    }

    fn skip_trivia(&mut self) -> Result<(), LexError> {
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b'(') if self.peek_at(1) == Some(b'*') => {
                    let start = self.position();
                    self.bump();
                    self.bump();
                    let mut depth = 1usize;
                    loop {
                        match (self.peek(), self.peek_at(1)) {
                            (Some(b'('), Some(b'*')) => {
                                self.bump();
                                self.bump();
                                depth += 1;
                            }
                            (Some(b'*'), Some(b')')) => {
                                self.bump();
                                self.bump();
                                depth -= 1;
                                if depth == 0 {
                                    break;
                                }
                            }
                            (Some(_), _) => {
                                self.bump();
                            }
                            (None, _) => {
                                return Err(LexError {
                                    position: start,
                                    message: "unterminated comment".into(),
                                })
                            }
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn ident(&mut self) -> Token {
        let position = self.position();
        let mut text = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == b'_' || c == b'\'' {
                text.push(self.bump().unwrap() as char);
            } else {
                break;
            }
        }
        // A capitalized ident may be module-qualified: List.map, B.calc.
        while text.chars().next().is_some_and(|c| c.is_ascii_uppercase())
            && self.peek() == Some(b'.')
            && self
                .peek_at(1)
                .is_some_and(|c| c.is_ascii_alphabetic() || c == b'_')
        {
            text.push(self.bump().unwrap() as char);
            while let Some(c) = self.peek() {
                if c.is_ascii_alphanumeric() || c == b'_' || c == b'\'' {
                    text.push(self.bump().unwrap() as char);
                } else {
                    break;
                }
            }
        }
        let kind = if is_keyword(&text) {
            TokenKind::Keyword
        } else {
            TokenKind::Ident
        };
        Token {
            kind,
            text,
            position,
        }
    }

    fn number(&mut self) -> Token {
        let position = self.position();
        let mut text = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() || c == b'_' {
                text.push(self.bump().unwrap() as char);
            } else {
                break;
            }
        }
        let mut kind = TokenKind::IntLit;
        if self.peek() == Some(b'.') {
            // "1.", "1.5"; but not "1.." and not a dotted operator.
            kind = TokenKind::FloatLit;
            text.push(self.bump().unwrap() as char);
            while let Some(c) = self.peek() {
                if c.is_ascii_digit() || c == b'_' {
                    text.push(self.bump().unwrap() as char);
                } else {
                    break;
                }
            }
        }
        Token {
            kind,
            text,
            position,
        }
    }

    fn string(&mut self) -> Result<Token, LexError> {
        let position = self.position();
        self.bump(); // opening quote
        let mut text = String::from("\"");
        loop {
            match self.peek() {
                None => {
                    return Err(LexError {
                        position,
                        message: "unterminated string literal".into(),
                    })
                }
                Some(b'"') => {
                    self.bump();
                    text.push('"');
                    break;
                }
                Some(b'\\') => {
                    self.bump();
                    let esc = self.bump().ok_or_else(|| LexError {
                        position,
                        message: "unterminated string literal".into(),
                    })?;
                    text.push('\\');
                    text.push(esc as char);
                }
                Some(_) => {
                    let c = self.bump().unwrap();
                    text.push(c as char);
                }
            }
        }
        Ok(Token {
            kind: TokenKind::StrLit,
            text,
            position,
        })
    }

    fn operator(&mut self) -> Result<Token, LexError> {
        let position = self.position();
        let two: &[(&str, bool)] = &[
            ("->", true),
            ("<=", true),
            (">=", true),
            ("<>", true),
            (":=", true),
            ("::", true),
            ("&&", true),
            ("||", true),
            ("+.", true),
            ("-.", true),
            ("*.", true),
            ("/.", true),
        ];
        if let (Some(a), Some(b)) = (self.peek(), self.peek_at(1)) {
            let pair = [a, b];
            let pair = std::str::from_utf8(&pair).unwrap_or("");
            if two.iter().any(|(t, _)| *t == pair) {
                self.bump();
                self.bump();
                return Ok(Token {
                    kind: TokenKind::OpSym,
                    text: pair.to_string(),
                    position,
                });
            }
        }
        let c = self.peek().unwrap();
        let (kind, ok) = match c {
            b'+' | b'-' | b'*' | b'/' | b'=' | b'<' | b'>' | b'!' | b'@' | b'|' => {
                (TokenKind::OpSym, true)
            }
            b'(' | b')' | b'[' | b']' | b'{' | b'}' | b';' | b',' | b'_' => {
                (TokenKind::Punct, true)
            }
            _ => (TokenKind::Punct, false),
        };
        if !ok {
            return Err(self.error(format!("illegal character '{}'", c as char)));
        }
        self.bump();
        Ok(Token {
            kind,
            text: (c as char).to_string(),
            position,
        })
    }
}

/// Tokenize a source string. Comments and whitespace are skipped; token
/// positions refer to the original source.
pub fn lex(source: &str) -> Result<Vec<Token>, LexError> {
    let mut lx = Lexer::new(source);
    let mut out = Vec::new();
    loop {
        lx.skip_trivia()?;
        let Some(c) = lx.peek() else { break };
        let tok = if c.is_ascii_alphabetic() || c == b'_' {
            // `_` alone is a punct (wildcard); `_x` is an ident.
            if c == b'_'
                && !lx
                    .peek_at(1)
                    .is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_' || c == b'\'')
            {
                lx.operator()?
            } else {
                lx.ident()
            }
        } else if c.is_ascii_digit() {
            lx.number()
        } else if c == b'"' {
            lx.string()?
        } else {
            lx.operator()?
        };
        out.push(tok);
    }
    Ok(out)
}
