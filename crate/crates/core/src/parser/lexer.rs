use super::diagnostic::{codes, Diagnostic, Pos};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    /// `None` when the literal does not fit in a `u32`.
    Int(Option<u32>),
    /// Milliseconds; `None` on overflow.
    Duration(Option<u32>),
    Byte(u8),
    LBrace,
    RBrace,
    Semi,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Int(_) => "integer".into(),
            Tok::Duration(_) => "duration".into(),
            Tok::Byte(_) => "byte literal".into(),
            Tok::LBrace => "'{'".into(),
            Tok::RBrace => "'}'".into(),
            Tok::Semi => "';'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

/// Splits `source` into tokens. Stops at the first lexical error.
pub(crate) fn tokenize(source: &str) -> Result<Vec<Token>, Diagnostic> {
    let chars: Vec<char> = source.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let (mut line, mut col) = (1u32, 1u32);

    macro_rules! bump {
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
        let pos = Pos { line, column: col };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        let tok = match c {
            '{' => {
                bump!();
                Tok::LBrace
            }
            '}' => {
                bump!();
                Tok::RBrace
            }
            ';' => {
                bump!();
                Tok::Semi
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    s.push(chars[i]);
                    bump!();
                }
                Tok::Ident(s)
            }
            '0' if chars.get(i + 1) == Some(&'x') => {
                bump!();
                bump!();
                let mut hex = String::new();
                while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                    hex.push(chars[i]);
                    bump!();
                }
                if hex.len() != 2 || !hex.chars().all(|h| h.is_ascii_hexdigit()) {
                    return Err(Diagnostic::error(
                        pos,
                        codes::BAD_BYTE,
                        format!("malformed byte literal '0x{hex}': expected exactly two hex digits"),
                    ));
                }
                Tok::Byte(u8::from_str_radix(&hex, 16).unwrap())
            }
            c if c.is_ascii_digit() => {
                let mut value: Option<u32> = Some(0);
                while i < chars.len() && chars[i].is_ascii_digit() {
                    let d = chars[i].to_digit(10).unwrap();
                    value = value.and_then(|v| v.checked_mul(10)).and_then(|v| v.checked_add(d));
                    bump!();
                }
                let mut unit = String::new();
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    unit.push(chars[i]);
                    bump!();
                }
                match unit.as_str() {
                    "" => Tok::Int(value),
                    "ms" => Tok::Duration(value),
                    "s" => Tok::Duration(value.and_then(|v| v.checked_mul(1000))),
                    other => {
                        return Err(Diagnostic::error(
                            pos,
                            codes::BAD_DURATION,
                            format!("unknown duration unit '{other}' (expected 'ms' or 's')"),
                        ))
                    }
                }
            }
            other => {
                return Err(Diagnostic::error(pos, codes::BAD_CHAR, format!("unexpected character '{}'", other.escape_debug())))
            }
        };
        out.push(Token { tok, pos });
    }
    out.push(Token { tok: Tok::Eof, pos: Pos { line, column: col } });
    Ok(out)
}
