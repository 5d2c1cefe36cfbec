//! Tokens of the scenario language.

use std::fmt;

use super::error::ParseError;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Num(String),
    Str(String),
    Sym(&'static str),
    /// Rest of an `expect` line.
    Raw(String),
    Newline,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Num(s) => write!(f, "number `{s}`"),
            Tok::Str(s) => write!(f, "string \"{s}\""),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Raw(s) => write!(f, "`{s}`"),
            Tok::Newline => f.write_str("end of line"),
            Tok::Eof => f.write_str("end of file"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
    /// Byte offsets into the source.
    pub start: usize,
    pub end: usize,
}

const SYMBOLS: [&str; 25] = [
    "**", "->", "<=", ">=", "(", ")", "{", "}", "[", "]", "<", ">", ",", ":", ";", "=", "+", "-", "*", "/", "^",
    "|", ".", "'", "!",
];

fn ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut i = 0;
    let mut line = 1;
    let mut line_start = 0usize;
    let mut at_line_start = true;
    let byte = |k: usize| if k < chars.len() { chars[k].0 } else { src.len() };
    while i < chars.len() {
        let (off, c) = chars[i];
        let col = src[line_start..off].chars().count() + 1;
        if c == '\n' {
            out.push(Token { tok: Tok::Newline, line, col, start: off, end: off + 1 });
            i += 1;
            line += 1;
            line_start = off + 1;
            at_line_start = true;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i].1 != '\n' {
                i += 1;
            }
            continue;
        }
        let first_on_line = at_line_start;
        at_line_start = false;
        if ident_start(c) {
            let s = i;
            while i < chars.len() && ident_char(chars[i].1) {
                i += 1;
            }
            let word: String = chars[s..i].iter().map(|x| x.1).collect();
            let is_expect = first_on_line && word == "expect";
            out.push(Token { tok: Tok::Ident(word), line, col, start: off, end: byte(i) });
            if is_expect {
                i = lex_expect(src, &chars, i, line, line_start, &mut out)?;
            }
            continue;
        }
        if c.is_ascii_digit() {
            let s = i;
            while i < chars.len() && chars[i].1.is_ascii_digit() {
                i += 1;
            }
            if i + 1 < chars.len() && chars[i].1 == '.' && chars[i + 1].1.is_ascii_digit() {
                i += 1;
                while i < chars.len() && chars[i].1.is_ascii_digit() {
                    i += 1;
                }
            }
            let text: String = chars[s..i].iter().map(|x| x.1).collect();
            out.push(Token { tok: Tok::Num(text), line, col, start: off, end: byte(i) });
            continue;
        }
        if c == '"' {
            let mut s = String::new();
            i += 1;
            loop {
                if i >= chars.len() || chars[i].1 == '\n' {
                    return Err(ParseError::new(line, col, "unterminated string", vec![]));
                }
                match chars[i].1 {
                    '"' => {
                        i += 1;
                        break;
                    }
                    '\\' if i + 1 < chars.len() => {
                        s.push(chars[i + 1].1);
                        i += 2;
                    }
                    ch => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            out.push(Token { tok: Tok::Str(s), line, col, start: off, end: byte(i) });
            continue;
        }
        let rest = &src[off..];
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                i += s.chars().count();
                out.push(Token { tok: Tok::Sym(s), line, col, start: off, end: byte(i) });
            }
            None => return Err(ParseError::new(line, col, &format!("unexpected character `{c}`"), vec![])),
        }
    }
    let col = src[line_start..].chars().count() + 1;
    out.push(Token { tok: Tok::Eof, line, col, start: src.len(), end: src.len() });
    Ok(out)
}

/// After `expect`: a key, `=`, and the raw rest of the line.
fn lex_expect(
    src: &str,
    chars: &[(usize, char)],
    mut i: usize,
    line: usize,
    line_start: usize,
    out: &mut Vec<Token>,
) -> Result<usize, ParseError> {
    let byte = |k: usize| if k < chars.len() { chars[k].0 } else { src.len() };
    let col_of = |k: usize| src[line_start..byte(k)].chars().count() + 1;
    while i < chars.len() && chars[i].1 != '\n' && chars[i].1.is_whitespace() {
        i += 1;
    }
    let s = i;
    while i < chars.len() && !chars[i].1.is_whitespace() && chars[i].1 != '=' {
        i += 1;
    }
    if s == i {
        return Err(ParseError::new(line, col_of(i), "missing expectation key", vec!["key".into()]));
    }
    let key: String = chars[s..i].iter().map(|x| x.1).collect();
    out.push(Token { tok: Tok::Ident(key), line, col: col_of(s), start: byte(s), end: byte(i) });
    while i < chars.len() && chars[i].1 != '\n' && chars[i].1.is_whitespace() {
        i += 1;
    }
    if i >= chars.len() || chars[i].1 != '=' {
        return Err(ParseError::new(line, col_of(i), "expected `=` after expectation key", vec!["`=`".into()]));
    }
    out.push(Token { tok: Tok::Sym("="), line, col: col_of(i), start: byte(i), end: byte(i + 1) });
    i += 1;
    let s = i;
    while i < chars.len() && chars[i].1 != '\n' {
        i += 1;
    }
    let raw: String = chars[s..i].iter().map(|x| x.1).collect();
    out.push(Token { tok: Tok::Raw(raw.trim().to_string()), line, col: col_of(s), start: byte(s), end: byte(i) });
    Ok(i)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn basic_tokens() {
        assert_eq!(
            toks("form w = dx^dy # c\n"),
            vec![
                Tok::Ident("form".into()),
                Tok::Ident("w".into()),
                Tok::Sym("="),
                Tok::Ident("dx".into()),
                Tok::Sym("^"),
                Tok::Ident("dy".into()),
                Tok::Newline,
                Tok::Eof
            ]
        );
        assert_eq!(toks("x**2")[1], Tok::Sym("**"));
        assert_eq!(toks("1.25")[0], Tok::Num("1.25".into()));
    }

    #[test]
    fn expect_keeps_raw_text() {
        let t = toks("expect name = S²×̃S³ # #₁₀ S²×S³\n");
        assert_eq!(t[1], Tok::Ident("name".into()));
        assert_eq!(t[3], Tok::Raw("S²×̃S³ # #₁₀ S²×S³".into()));
    }

    #[test]
    fn positions() {
        let t = tokenize("a\n  b").unwrap();
        assert_eq!((t[2].line, t[2].col), (2, 3));
        assert!(tokenize("a $").is_err());
    }
}
