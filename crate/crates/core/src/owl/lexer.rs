use super::OntologyError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(super) enum Token {
    Open,
    Close,
    Equals,
    FullIri(String),
    /// `prefix:local`; both parts may be empty (`:` alone in `Prefix(:=...)`).
    Prefixed {
        prefix: String,
        local: String,
    },
    Keyword(String),
    Literal(String),
    Eof,
}

impl Token {
    pub(super) fn describe(&self) -> String {
        match self {
            Token::Open => "`(`".into(),
            Token::Close => "`)`".into(),
            Token::Equals => "`=`".into(),
            Token::FullIri(s) => format!("<{s}>"),
            Token::Prefixed { prefix, local } => format!("{prefix}:{local}"),
            Token::Keyword(k) => format!("`{k}`"),
            Token::Literal(_) => "literal".into(),
            Token::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) struct Pos {
    pub line: usize,
    pub column: usize,
}

pub(super) struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

fn is_word_char(c: char) -> bool {
    !c.is_whitespace() && !matches!(c, '(' | ')' | '=' | '<' | '>' | '"' | '^' | '@')
}

impl<'a> Lexer<'a> {
    pub(super) fn new(text: &'a str) -> Self {
        Self {
            chars: text.chars().peekable(),
            pos: Pos { line: 1, column: 1 },
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.column = 1;
        } else {
            self.pos.column += 1;
        }
        Some(c)
    }

    fn error(pos: Pos, expected: &str) -> OntologyError {
        OntologyError::Syntax {
            line: pos.line,
            column: pos.column,
            expected: expected.to_owned(),
        }
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    /// Next token with its starting position.
    pub(super) fn next_token(&mut self) -> Result<(Token, Pos), OntologyError> {
        self.skip_trivia();
        let start = self.pos;
        let Some(&c) = self.chars.peek() else {
            return Ok((Token::Eof, start));
        };
        let token = match c {
            '(' => {
                self.bump();
                Token::Open
            }
            ')' => {
                self.bump();
                Token::Close
            }
            '=' => {
                self.bump();
                Token::Equals
            }
            '<' => {
                self.bump();
                let mut iri = String::new();
                loop {
                    match self.bump() {
                        Some('>') => break,
                        Some(c) if c.is_whitespace() || c == '<' => return Err(Self::error(self.pos, "`>` closing IRI")),
                        Some(c) => iri.push(c),
                        None => return Err(Self::error(self.pos, "`>` closing IRI")),
                    }
                }
                Token::FullIri(iri)
            }
            '"' => {
                self.bump();
                let mut text = String::new();
                loop {
                    match self.bump() {
                        Some('"') => break,
                        Some('\\') => match self.bump() {
                            Some(c @ ('"' | '\\')) => text.push(c),
                            _ => return Err(Self::error(self.pos, "`\\\"` or `\\\\` escape")),
                        },
                        Some(c) => text.push(c),
                        None => return Err(Self::error(self.pos, "closing `\"`")),
                    }
                }
                self.skip_literal_suffix()?;
                Token::Literal(text)
            }
            c if is_word_char(c) => {
                let mut word = String::new();
                while let Some(&c) = self.chars.peek() {
                    if !is_word_char(c) {
                        break;
                    }
                    word.push(c);
                    self.bump();
                }
                match word.split_once(':') {
                    Some((prefix, local)) => Token::Prefixed {
                        prefix: prefix.to_owned(),
                        local: local.to_owned(),
                    },
                    None => Token::Keyword(word),
                }
            }
            _ => return Err(Self::error(start, "token")),
        };
        Ok((token, start))
    }

    /// Language tags and datatypes are accepted and discarded.
    fn skip_literal_suffix(&mut self) -> Result<(), OntologyError> {
        match self.chars.peek() {
            Some('@') => {
                self.bump();
                let mut any = false;
                while self.chars.peek().is_some_and(|c| c.is_ascii_alphanumeric() || *c == '-') {
                    self.bump();
                    any = true;
                }
                if !any {
                    return Err(Self::error(self.pos, "language tag"));
                }
            }
            Some('^') => {
                self.bump();
                if self.bump() != Some('^') {
                    return Err(Self::error(self.pos, "`^^` datatype marker"));
                }
                let (tok, pos) = self.next_token()?;
                if !matches!(tok, Token::FullIri(_) | Token::Prefixed { .. }) {
                    return Err(Self::error(pos, "datatype IRI"));
                }
            }
            _ => {}
        }
        Ok(())
    }
}
