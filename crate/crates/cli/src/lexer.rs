use crate::diag::{Diagnostic, Pos};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    /// Names, stratum ids and integer literals alike; the parser decides.
    Word(String),
    Punct(char),
    Arrow,
    Eof,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

const PUNCT: &str = "{}();,:=+-*^|";

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '.'
}

pub fn lex(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    let (mut line, mut col) = (1, 1);
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        if c == '\n' {
            chars.next();
            line += 1;
            col = 1;
        } else if c.is_whitespace() {
            chars.next();
            col += 1;
        } else if c == '#' {
            while chars.peek().is_some_and(|&c| c != '\n') {
                chars.next();
            }
        } else if is_word_char(c) {
            let mut w = String::new();
            while let Some(&c) = chars.peek().filter(|&&c| is_word_char(c)) {
                w.push(c);
                chars.next();
                col += 1;
            }
            out.push(Token { tok: Tok::Word(w), pos });
        } else if c == '-' {
            chars.next();
            col += 1;
            if chars.peek() == Some(&'>') {
                chars.next();
                col += 1;
                out.push(Token { tok: Tok::Arrow, pos });
            } else {
                out.push(Token { tok: Tok::Punct('-'), pos });
            }
        } else if PUNCT.contains(c) {
            chars.next();
            col += 1;
            out.push(Token { tok: Tok::Punct(c), pos });
        } else {
            return Err(Diagnostic::new(pos, format!("unexpected character {c:?}")));
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, col },
    });
    Ok(out)
}
