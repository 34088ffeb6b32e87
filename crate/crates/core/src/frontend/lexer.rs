//! Tokenizer shared by the term, type and program parsers.

use std::fmt;

use super::ParseError;

/// Byte range plus the 1-based line and column of its start.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    /// `|0>`, `|1>`, `|0110>`
    Ket(Vec<bool>),
    KetPlus,
    KetMinus,
    /// `PHI+`, `PHI-`, `PSI+`, `PSI-`
    Bell(usize),
    Ident(String),
    Number(f64),
    AbsBasis,
    Let,
    In,
    Case,
    Of,
    BasisKw,
    Def,
    Goal,
    Arrow,
    Backslash,
    Colon,
    ColonColon,
    NotColon,
    Leadsto,
    Dot,
    Comma,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Star,
    Plus,
    Minus,
    Slash,
    Caret,
    Hash,
    Bar,
    Eq,
    Le,
    NotLe,
    EqEq,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ket(bits) => {
                let bits: String = bits.iter().map(|b| if *b { '1' } else { '0' }).collect();
                return write!(f, "`|{bits}>`");
            }
            Tok::KetPlus => "|+>",
            Tok::KetMinus => "|->",
            Tok::Bell(k) => ["PHI+", "PHI-", "PSI+", "PSI-"][*k],
            Tok::Ident(s) => return write!(f, "identifier `{s}`"),
            Tok::Number(x) => return write!(f, "number `{x}`"),
            Tok::AbsBasis => "@fun",
            Tok::Let => "let",
            Tok::In => "in",
            Tok::Case => "case",
            Tok::Of => "of",
            Tok::BasisKw => "basis",
            Tok::Def => "def",
            Tok::Goal => "goal",
            Tok::Arrow => "->",
            Tok::Backslash => "\\",
            Tok::Colon => ":",
            Tok::ColonColon => "::",
            Tok::NotColon => "!:",
            Tok::Leadsto => "~>",
            Tok::Dot => ".",
            Tok::Comma => ",",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Star => "*",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Slash => "/",
            Tok::Caret => "^",
            Tok::Hash => "#",
            Tok::Bar => "|",
            Tok::Eq => "=",
            Tok::Le => "<=",
            Tok::NotLe => "!<=",
            Tok::EqEq => "==",
            Tok::Eof => return f.write_str("end of input"),
        };
        write!(f, "`{s}`")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn bump_n(&mut self, n: usize) {
        for _ in 0..n {
            self.bump();
        }
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('/') if self.rest().starts_with("//") => {
                    while !matches!(self.peek(), None | Some('\n')) {
                        self.bump();
                    }
                }
                _ => return,
            }
        }
    }

    fn error(&self, line: usize, col: usize, message: String) -> ParseError {
        ParseError { line, col, message }
    }

    fn ket(&self) -> Option<(Tok, usize)> {
        let rest = &self.rest()[1..];
        if rest.starts_with("+>") {
            return Some((Tok::KetPlus, 3));
        }
        if rest.starts_with("->") {
            return Some((Tok::KetMinus, 3));
        }
        let digits: String = rest.chars().take_while(|c| *c == '0' || *c == '1').collect();
        if !digits.is_empty() && rest[digits.len()..].starts_with('>') {
            let bits = digits.chars().map(|c| c == '1').collect();
            return Some((Tok::Ket(bits), digits.len() + 2));
        }
        None
    }

    fn next_token(&mut self) -> Result<Token, ParseError> {
        self.skip_trivia();
        let (start, line, col) = (self.pos, self.line, self.col);
        let span = |end| Span { start, end, line, col };
        let Some(c) = self.peek() else {
            return Ok(Token {
                tok: Tok::Eof,
                span: span(start),
            });
        };
        let rest = self.rest();
        let fixed: &[(&str, Tok)] = &[
            ("->", Tok::Arrow),
            ("::", Tok::ColonColon),
            ("!:", Tok::NotColon),
            ("!<=", Tok::NotLe),
            ("~>", Tok::Leadsto),
            ("<=", Tok::Le),
            ("==", Tok::EqEq),
            ("@fun", Tok::AbsBasis),
        ];
        if let Some((s, t)) = fixed.iter().find(|(s, _)| rest.starts_with(s)) {
            self.bump_n(s.chars().count());
            return Ok(Token {
                tok: t.clone(),
                span: span(self.pos),
            });
        }
        if c == '|' {
            if let Some((tok, len)) = self.ket() {
                self.bump_n(len);
                return Ok(Token {
                    tok,
                    span: span(self.pos),
                });
            }
            self.bump();
            return Ok(Token {
                tok: Tok::Bar,
                span: span(self.pos),
            });
        }
        if c.is_ascii_digit() || (c == '.' && rest[1..].starts_with(|d: char| d.is_ascii_digit())) {
            let len = number_len(rest);
            let text = &rest[..len];
            let value: f64 = text
                .parse()
                .map_err(|_| self.error(line, col, format!("invalid number `{text}`")))?;
            self.bump_n(len);
            return Ok(Token {
                tok: Tok::Number(value),
                span: span(self.pos),
            });
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let len = rest
                .find(|d: char| !(d.is_ascii_alphanumeric() || d == '_' || d == '\''))
                .unwrap_or(rest.len());
            let word = &rest[..len];
            let bell = ["PHI", "PSI"]
                .iter()
                .position(|p| *p == word)
                .and_then(|k| match rest[len..].chars().next() {
                    Some('+') => Some(2 * k),
                    Some('-') if !rest[len..].starts_with("->") => Some(2 * k + 1),
                    _ => None,
                });
            if let Some(k) = bell {
                self.bump_n(len + 1);
                return Ok(Token {
                    tok: Tok::Bell(k),
                    span: span(self.pos),
                });
            }
            let tok = match word {
                "let" => Tok::Let,
                "in" => Tok::In,
                "case" => Tok::Case,
                "of" => Tok::Of,
                "basis" => Tok::BasisKw,
                "def" => Tok::Def,
                "goal" => Tok::Goal,
                _ => Tok::Ident(word.to_string()),
            };
            self.bump_n(len);
            return Ok(Token {
                tok,
                span: span(self.pos),
            });
        }
        let tok = match c {
            '\\' => Tok::Backslash,
            ':' => Tok::Colon,
            '.' => Tok::Dot,
            ',' => Tok::Comma,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            '*' => Tok::Star,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '#' => Tok::Hash,
            '=' => Tok::Eq,
            _ => return Err(self.error(line, col, format!("unexpected character `{c}`"))),
        };
        self.bump();
        Ok(Token {
            tok,
            span: span(self.pos),
        })
    }
}

fn number_len(s: &str) -> usize {
    let b = s.as_bytes();
    let mut i = 0;
    while i < b.len() && b[i].is_ascii_digit() {
        i += 1;
    }
    if i < b.len() && b[i] == b'.' && b.get(i + 1).is_some_and(u8::is_ascii_digit) {
        i += 1;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        let mut j = i + 1;
        if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
            j += 1;
        }
        if j < b.len() && b[j].is_ascii_digit() {
            while j < b.len() && b[j].is_ascii_digit() {
                j += 1;
            }
            i = j;
        }
    }
    i
}

/// Splits `src` into tokens, ending with a single `Eof`.
pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut lexer = Lexer {
        src,
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    loop {
        let t = lexer.next_token()?;
        let done = t.tok == Tok::Eof;
        out.push(t);
        if done {
            return Ok(out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn kets_and_bars() {
        assert_eq!(
            toks("|0> | |+> |->|01>"),
            vec![
                Tok::Ket(vec![false]),
                Tok::Bar,
                Tok::KetPlus,
                Tok::KetMinus,
                Tok::Ket(vec![false, true]),
                Tok::Eof
            ]
        );
        assert_eq!(toks("|1> -> |0>")[1], Tok::Arrow);
    }

    #[test]
    fn bell_names_and_arrows() {
        assert_eq!(toks("PHI+ PSI-")[..2], [Tok::Bell(0), Tok::Bell(3)]);
        assert_eq!(toks("PHI -> x")[..2], [Tok::Ident("PHI".into()), Tok::Arrow]);
        assert_eq!(toks("PSI- -> x")[..2], [Tok::Bell(3), Tok::Arrow]);
    }

    #[test]
    fn numbers_comments_positions() {
        let ts = tokenize("// c\n  0.5e-1 x'").unwrap();
        assert_eq!(ts[0].tok, Tok::Number(0.05));
        assert_eq!((ts[0].span.line, ts[0].span.col), (2, 3));
        assert_eq!(ts[1].tok, Tok::Ident("x'".into()));
        let err = tokenize("x $").unwrap_err();
        assert_eq!((err.line, err.col), (1, 3));
    }
}
