use super::SyntaxError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Double(f64),
    Kw(&'static str),
    Punct(&'static str),
    Eof,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Double(n) => write!(f, "`{n}`"),
            Tok::Kw(k) => write!(f, "`{k}`"),
            Tok::Punct(p) => write!(f, "`{p}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
}

const KEYWORDS: &[&str] = &[
    "class",
    "extends",
    "public",
    "private",
    "protected",
    "if",
    "else",
    "while",
    "for",
    "switch",
    "case",
    "default",
    "return",
    "break",
    "new",
    "this",
    "true",
    "false",
    "null",
    "int",
    "double",
    "boolean",
    "void",
];

// Longest first so that `<=` wins over `<`.
const PUNCTS: &[&str] = &[
    "&&", "||", "==", "!=", "<=", ">=", "++", "--", "{", "}", "(", ")", ";", ",", ".", "=", "<",
    ">", "+", "-", "*", "/", "%", "!", ":",
];

pub fn tokenize(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);

    macro_rules! advance {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            advance!();
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                advance!();
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            let (sl, sc) = (line, col);
            advance!();
            advance!();
            loop {
                if i >= chars.len() {
                    return Err(SyntaxError::new(sl, sc, "unterminated block comment"));
                }
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    advance!();
                    advance!();
                    break;
                }
                advance!();
            }
            continue;
        }

        let (tl, tc) = (line, col);
        if c.is_ascii_alphabetic() || c == '_' || c == '$' {
            let start = i;
            while i < chars.len()
                && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '$')
            {
                advance!();
            }
            let word: String = chars[start..i].iter().collect();
            let tok = match KEYWORDS.iter().find(|k| **k == word) {
                Some(k) => Tok::Kw(k),
                None => Tok::Ident(word),
            };
            out.push(Token {
                tok,
                line: tl,
                col: tc,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            let mut is_double = false;
            while i < chars.len() && chars[i].is_ascii_digit() {
                advance!();
            }
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                is_double = true;
                advance!();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    advance!();
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    is_double = true;
                    while i < j {
                        advance!();
                    }
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        advance!();
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let tok = if is_double {
                Tok::Double(
                    text.parse()
                        .map_err(|_| SyntaxError::new(tl, tc, "malformed number"))?,
                )
            } else {
                Tok::Int(
                    text.parse()
                        .map_err(|_| SyntaxError::new(tl, tc, "integer literal out of range"))?,
                )
            };
            out.push(Token {
                tok,
                line: tl,
                col: tc,
            });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match PUNCTS.iter().find(|p| rest.starts_with(**p)) {
            Some(p) => {
                for _ in 0..p.len() {
                    advance!();
                }
                out.push(Token {
                    tok: Tok::Punct(p),
                    line: tl,
                    col: tc,
                });
            }
            None => {
                return Err(SyntaxError::new(
                    tl,
                    tc,
                    format!("unexpected character `{c}`"),
                ))
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}
